#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace edof {

/// Little-endian writer for the magic-tagged containers.
class BinaryWriter {
 public:
  void magic(std::string_view tag);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void i32(std::int32_t v);
  void i16(std::int16_t v);
  void f64(double v);
  void f64s(std::span<const double> values);
  /// Row-major f64 payload.
  void matrix(const Eigen::MatrixXd& m);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> bytes_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);
  explicit BinaryReader(std::vector<std::uint8_t> bytes);

  /// Throws std::runtime_error when the next four bytes differ from `tag`.
  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32();
  std::int32_t i32();
  std::int16_t i16();
  double f64();
  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols);

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::uint8_t* take(std::size_t n);

  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string source_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace edof
