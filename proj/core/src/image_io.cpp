#include "edof/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <png.h>

#include "json.hpp"

namespace edof {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void skip_pnm_whitespace(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace

std::uint16_t to_u16_code(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

double from_u16_code(std::uint16_t code) { return code / 65535.0; }

RgbImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("libpng initialization failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("malformed PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  std::vector<png_byte> data(stride * static_cast<std::size_t>(h));
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int r = 0; r < h; ++r) rows[static_cast<std::size_t>(r)] = data.data() + stride * r;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  RgbImage img(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        img.at(ch, r, c) = rows[static_cast<std::size_t>(r)][3 * c + ch] / 255.0;
      }
    }
  }
  return img;
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
  img.validate();
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("libpng initialization failed");
  std::vector<png_byte> data(static_cast<std::size_t>(img.width) * img.height * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int r = 0; r < img.height; ++r) {
    rows[static_cast<std::size_t>(r)] = data.data() + static_cast<std::size_t>(r) * img.width * 3;
    for (int c = 0; c < img.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) rows[static_cast<std::size_t>(r)][3 * c + ch] = to_u8(img.at(ch, r, c));
    }
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::filesystem::path raw_sidecar_path(const std::filesystem::path& pgm_path) {
  auto p = pgm_path;
  p.replace_extension(".json");
  return p;
}

void write_raw(const RawBayerImage& raw, const std::filesystem::path& pgm_path) {
  raw.validate();
  std::ofstream out(pgm_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + pgm_path.string());
  out << "P5\n" << raw.width << ' ' << raw.height << "\n65535\n";
  std::vector<char> payload(raw.samples.size() * 2);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    const std::uint16_t code = to_u16_code(raw.samples[i]);
    payload[2 * i] = static_cast<char>(code >> 8);  // PGM is big-endian
    payload[2 * i + 1] = static_cast<char>(code & 0xff);
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("write failed: " + pgm_path.string());

  nlohmann::ordered_json side;
  side["pattern"] = std::string(to_string(raw.pattern));
  side["width"] = raw.width;
  side["height"] = raw.height;
  side["bits"] = 16;
  std::ofstream js(raw_sidecar_path(pgm_path), std::ios::trunc);
  js << side.dump(2) << '\n';
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path.string());
  GrayImage g;
  skip_pnm_whitespace(in);
  in >> g.width;
  skip_pnm_whitespace(in);
  in >> g.height;
  skip_pnm_whitespace(in);
  in >> g.maxval;
  in.get();
  if (!in || g.width <= 0 || g.height <= 0 || g.maxval <= 0 || g.maxval > 65535) {
    throw std::runtime_error("malformed PGM header: " + path.string());
  }
  const std::size_t n = static_cast<std::size_t>(g.width) * g.height;
  const int bytes = g.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> payload(n * static_cast<std::size_t>(bytes));
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!in) throw std::runtime_error("truncated PGM: " + path.string());
  g.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.samples[i] = bytes == 2 ? static_cast<std::uint16_t>((payload[2 * i] << 8) | payload[2 * i + 1])
                              : payload[i];
  }
  return g;
}

RawBayerImage read_raw(const std::filesystem::path& pgm_path) {
  const GrayImage g = read_pgm(pgm_path);
  const auto side_path = raw_sidecar_path(pgm_path);
  std::ifstream js(side_path);
  if (!js) throw std::runtime_error("missing raw sidecar: " + side_path.string());
  const auto side = nlohmann::json::parse(js);
  RawBayerImage raw(g.width, g.height, parse_cfa_pattern(side.at("pattern").get<std::string>()));
  for (std::size_t i = 0; i < g.samples.size(); ++i) {
    raw.samples[i] = static_cast<double>(g.samples[i]) / g.maxval;
  }
  raw.validate();
  return raw;
}

}  // namespace edof
