#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "edof/image.hpp"
#include "edof/optics.hpp"

namespace edof {

/// Per-pixel index into a kernel set's psi grid.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<int> index;

  static DepthMap uniform(int width, int height, int psi_index);
  /// Four quadrants, top-left, top-right, bottom-left, bottom-right.
  static DepthMap quadrants(int width, int height, const std::array<int, 4>& psi_index);

  int at(int row, int col) const { return index[static_cast<std::size_t>(row) * width + col]; }
};

/// Per-channel convolution with the kernel selected per pixel by `depth`,
/// using half-sample symmetric extension at the borders.
RgbImage blur_image(const RgbImage& img, const BlurKernelSet& kernels, const DepthMap& depth);

RawBayerImage mosaic(const RgbImage& img, CfaPattern pattern);

/// Additive white Gaussian noise, clipped to [0, 1]. Deterministic for a seed.
RawBayerImage add_noise(const RawBayerImage& raw, double sigma, std::uint64_t seed);

/// Bilinear interpolation of the missing colors at each site.
RgbImage demosaic_bilinear(const RawBayerImage& raw);

}  // namespace edof
