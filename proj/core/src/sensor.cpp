#include "edof/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "edof/parallel.hpp"

namespace edof {

RgbImage::RgbImage(int w, int h, double fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw std::invalid_argument("image dimensions must be non-negative");
  for (auto& p : planes) p.assign(static_cast<std::size_t>(w) * h, fill);
}

void RgbImage::validate() const {
  for (const auto& p : planes) {
    if (p.size() != pixel_count()) throw std::invalid_argument("image planes have the wrong size");
    for (double v : p) {
      if (!std::isfinite(v)) throw std::invalid_argument("image contains non-finite samples");
    }
  }
}

RawBayerImage::RawBayerImage(int w, int h, CfaPattern p, double fill)
    : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill), pattern(p) {
  if (w < 0 || h < 0) throw std::invalid_argument("image dimensions must be non-negative");
}

void RawBayerImage::validate() const {
  if (width % 2 != 0 || height % 2 != 0) {
    throw std::invalid_argument("raw Bayer dimensions must be even");
  }
  if (samples.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("raw sample count does not match dimensions");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("raw image contains non-finite samples");
  }
}

int cfa_channel(CfaPattern pattern, int row, int col) {
  const int r = row & 1;
  const int c = col & 1;
  switch (pattern) {
    case CfaPattern::kRGGB: return (r == 0) ? (c == 0 ? 0 : 1) : (c == 0 ? 1 : 2);
    case CfaPattern::kBGGR: return (r == 0) ? (c == 0 ? 2 : 1) : (c == 0 ? 1 : 0);
    case CfaPattern::kGRBG: return (r == 0) ? (c == 0 ? 1 : 0) : (c == 0 ? 2 : 1);
    case CfaPattern::kGBRG: return (r == 0) ? (c == 0 ? 1 : 2) : (c == 0 ? 0 : 1);
  }
  return 1;
}

std::string_view to_string(CfaPattern pattern) {
  switch (pattern) {
    case CfaPattern::kRGGB: return "RGGB";
    case CfaPattern::kBGGR: return "BGGR";
    case CfaPattern::kGRBG: return "GRBG";
    case CfaPattern::kGBRG: return "GBRG";
  }
  return "RGGB";
}

CfaPattern parse_cfa_pattern(std::string_view name) {
  if (name == "RGGB") return CfaPattern::kRGGB;
  if (name == "BGGR") return CfaPattern::kBGGR;
  if (name == "GRBG") return CfaPattern::kGRBG;
  if (name == "GBRG") return CfaPattern::kGBRG;
  throw std::invalid_argument("unknown CFA pattern: " + std::string(name));
}

DepthMap DepthMap::uniform(int width, int height, int psi_index) {
  return {width, height, std::vector<int>(static_cast<std::size_t>(width) * height, psi_index)};
}

DepthMap DepthMap::quadrants(int width, int height, const std::array<int, 4>& psi_index) {
  DepthMap d = uniform(width, height, 0);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const int q = (row >= height / 2 ? 2 : 0) + (col >= width / 2 ? 1 : 0);
      d.index[static_cast<std::size_t>(row) * width + col] = psi_index[static_cast<std::size_t>(q)];
    }
  }
  return d;
}

RgbImage blur_image(const RgbImage& img, const BlurKernelSet& kernels, const DepthMap& depth) {
  img.validate();
  kernels.validate();
  if (depth.width != img.width || depth.height != img.height ||
      depth.index.size() != img.pixel_count()) {
    throw std::invalid_argument("depth map dimensions do not match the image");
  }
  for (int idx : depth.index) {
    if (idx < 0 || idx >= kernels.psi_count()) {
      throw std::invalid_argument("depth index outside the psi grid");
    }
  }

  const int w = img.width;
  const int h = img.height;
  const int radius = kernels.kernel_size / 2;
  RgbImage out(w, h);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row_begin, std::size_t row_end) {
    for (int c = 0; c < 3; ++c) {
      const auto& src = img.planes[static_cast<std::size_t>(c)];
      auto& dst = out.planes[static_cast<std::size_t>(c)];
      for (int row = static_cast<int>(row_begin); row < static_cast<int>(row_end); ++row) {
        for (int col = 0; col < w; ++col) {
          const Eigen::MatrixXd& k = kernels.at(c, depth.at(row, col));
          double acc = 0.0;
          for (int dy = -radius; dy <= radius; ++dy) {
            const int sy = reflect_symmetric(row - dy, h);
            const double* line = src.data() + static_cast<std::size_t>(sy) * w;
            for (int dx = -radius; dx <= radius; ++dx) {
              acc += k(dy + radius, dx + radius) * line[reflect_symmetric(col - dx, w)];
            }
          }
          dst[static_cast<std::size_t>(row) * w + col] = acc;
        }
      }
    }
  });
  return out;
}

RawBayerImage mosaic(const RgbImage& img, CfaPattern pattern) {
  img.validate();
  if (img.width % 2 != 0 || img.height % 2 != 0) {
    throw std::invalid_argument("mosaic requires even image dimensions");
  }
  RawBayerImage raw(img.width, img.height, pattern);
  for (int row = 0; row < img.height; ++row) {
    for (int col = 0; col < img.width; ++col) {
      raw.at(row, col) = img.at(cfa_channel(pattern, row, col), row, col);
    }
  }
  return raw;
}

RawBayerImage add_noise(const RawBayerImage& raw, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  RawBayerImage out = raw;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.samples) v = std::clamp(v + noise(rng), 0.0, 1.0);
  return out;
}

RgbImage demosaic_bilinear(const RawBayerImage& raw) {
  raw.validate();
  const int w = raw.width;
  const int h = raw.height;
  RgbImage out(w, h);
  // Whole-sample reflection keeps the CFA parity of mirrored neighbors.
  auto sample = [&](int row, int col) { return raw.at(reflect_101(row, h), reflect_101(col, w)); };
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const int here = cfa_channel(raw.pattern, row, col);
      for (int c = 0; c < 3; ++c) {
        double v;
        if (c == here) {
          v = raw.at(row, col);
        } else if (c == 1) {
          v = 0.25 * (sample(row - 1, col) + sample(row + 1, col) + sample(row, col - 1) +
                      sample(row, col + 1));
        } else if (here == 1) {
          // Green site: the wanted color lies either along the row or along the column.
          if (cfa_channel(raw.pattern, row, col + 1) == c) {
            v = 0.5 * (sample(row, col - 1) + sample(row, col + 1));
          } else {
            v = 0.5 * (sample(row - 1, col) + sample(row + 1, col));
          }
        } else {
          v = 0.25 * (sample(row - 1, col - 1) + sample(row - 1, col + 1) +
                      sample(row + 1, col - 1) + sample(row + 1, col + 1));
        }
        out.at(c, row, col) = v;
      }
    }
  }
  return out;
}

}  // namespace edof
