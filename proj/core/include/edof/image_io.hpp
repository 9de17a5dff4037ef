#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "edof/image.hpp"

namespace edof {

/// 8-bit PNG; samples are treated as linear light scaled by 1/255.
/// Gray and alpha inputs are expanded/dropped.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& img, const std::filesystem::path& path);

/// 16-bit binary PGM plus `<stem>.json` naming the CFA pattern.
void write_raw(const RawBayerImage& raw, const std::filesystem::path& pgm_path);
RawBayerImage read_raw(const std::filesystem::path& pgm_path);

/// Sidecar path used by write_raw/read_raw.
std::filesystem::path raw_sidecar_path(const std::filesystem::path& pgm_path);

/// Any binary PGM (maxval <= 65535) as integer samples, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<std::uint16_t> samples;
};
GrayImage read_pgm(const std::filesystem::path& path);

/// [0, 1] -> 16-bit code, round to nearest.
std::uint16_t to_u16_code(double v);
double from_u16_code(std::uint16_t code);

}  // namespace edof
