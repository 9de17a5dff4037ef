#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "edof/binary_io.hpp"
#include "edof/optics.hpp"

namespace edof {
namespace {

constexpr std::uint32_t kKernelSetVersion = 1;

}  // namespace

void BinaryWriter::magic(std::string_view tag) {
  if (tag.size() != 4) throw std::invalid_argument("magic tags are four bytes");
  bytes_.insert(bytes_.end(), tag.begin(), tag.end());
}

void BinaryWriter::u8(std::uint8_t v) { bytes_.push_back(v); }

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

void BinaryWriter::i16(std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  bytes_.push_back(static_cast<std::uint8_t>(u));
  bytes_.push_back(static_cast<std::uint8_t>(u >> 8));
}

void BinaryWriter::f64(double v) {
  const auto u = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

void BinaryWriter::f64s(std::span<const double> values) {
  for (double v : values) f64(v);
}

void BinaryWriter::matrix(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
}

void BinaryWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes_.data()), static_cast<std::streamsize>(bytes_.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : bytes_(read_file_bytes(path)), source_(path.string()) {}

BinaryReader::BinaryReader(std::vector<std::uint8_t> bytes)
    : bytes_(std::move(bytes)), source_("<memory>") {}

const std::uint8_t* BinaryReader::take(std::size_t n) {
  if (bytes_.size() - pos_ < n) throw std::runtime_error("truncated container: " + source_);
  const std::uint8_t* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

void BinaryReader::expect_magic(std::string_view tag) {
  const auto* p = take(4);
  if (std::memcmp(p, tag.data(), 4) != 0) {
    throw std::runtime_error("bad magic in " + source_ + ", expected " + std::string(tag));
  }
}

std::uint8_t BinaryReader::u8() { return *take(1); }

std::uint32_t BinaryReader::u32() {
  const auto* p = take(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::int32_t BinaryReader::i32() { return static_cast<std::int32_t>(u32()); }

std::int16_t BinaryReader::i16() {
  const auto* p = take(2);
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
}

double BinaryReader::f64() {
  const auto* p = take(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

Eigen::MatrixXd BinaryReader::matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
  }
  return m;
}

// EDKS: magic, u32 version, u32 channels, u32 psi count, u32 kernel_size,
// f64[psi count] psi grid, then kernels[psi][channel] row-major f64.
void save_kernel_set(const BlurKernelSet& set, const std::filesystem::path& path) {
  set.validate();
  BinaryWriter w;
  w.magic("EDKS");
  w.u32(kKernelSetVersion);
  w.u32(3);
  w.u32(static_cast<std::uint32_t>(set.psi_grid.size()));
  w.u32(static_cast<std::uint32_t>(set.kernel_size));
  w.f64s(set.psi_grid);
  for (const auto& per_channel : set.kernels) {
    for (const auto& k : per_channel) w.matrix(k);
  }
  w.save(path);
}

BlurKernelSet load_kernel_set(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("EDKS");
  if (r.u32() != kKernelSetVersion) throw std::runtime_error("unsupported EDKS version");
  if (r.u32() != 3) throw std::runtime_error("EDKS channel count must be 3");
  const auto psi_count = r.u32();
  const auto ks = static_cast<int>(r.u32());
  BlurKernelSet set;
  set.kernel_size = ks;
  for (std::uint32_t j = 0; j < psi_count; ++j) set.psi_grid.push_back(r.f64());
  set.kernels.resize(psi_count);
  for (auto& per_channel : set.kernels) {
    for (auto& k : per_channel) k = r.matrix(ks, ks);
  }
  set.validate();
  return set;
}

}  // namespace edof
