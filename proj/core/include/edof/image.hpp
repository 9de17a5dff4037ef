#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace edof {

enum class Channel : int { kRed = 0, kGreen = 1, kBlue = 2 };

enum class CfaPattern { kRGGB, kBGGR, kGRBG, kGBRG };

/// Color channel sampled at (row, col) by a 2x2 Bayer tile.
int cfa_channel(CfaPattern pattern, int row, int col);

std::string_view to_string(CfaPattern pattern);
CfaPattern parse_cfa_pattern(std::string_view name);

/// Planar three-channel image of linear-light intensities.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::array<std::vector<double>, 3> planes;

  RgbImage() = default;
  RgbImage(int w, int h, double fill = 0.0);

  double& at(int c, int row, int col) {
    return planes[c][static_cast<std::size_t>(row) * width + col];
  }
  double at(int c, int row, int col) const {
    return planes[c][static_cast<std::size_t>(row) * width + col];
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  /// Throws std::invalid_argument on mismatched planes or non-finite samples.
  void validate() const;
};

/// Single-plane sensor image; one color per pixel selected by `pattern`.
struct RawBayerImage {
  int width = 0;
  int height = 0;
  std::vector<double> samples;
  CfaPattern pattern = CfaPattern::kRGGB;

  RawBayerImage() = default;
  RawBayerImage(int w, int h, CfaPattern p, double fill = 0.0);

  double& at(int row, int col) { return samples[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const {
    return samples[static_cast<std::size_t>(row) * width + col];
  }

  void validate() const;
};

/// Half-sample symmetric index reflection into [0, n): ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
inline int reflect_symmetric(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

/// Whole-sample reflection into [0, n): ... 2 1 | 0 1 ... n-1 | n-2 ... Preserves index parity.
inline int reflect_101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace edof
