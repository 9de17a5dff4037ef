#include "edof/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "edof/image_io.hpp"
#include "edof/parallel.hpp"

namespace edof {
namespace {

constexpr int kArea = kPatchSide * kPatchSide;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_stride(int stride) {
  if (stride < 2 || stride > kPatchSide || stride % 2 != 0) {
    throw std::invalid_argument("stride must be even and in [2, 8]");
  }
}

double mse_region(const RgbImage& a, const RgbImage& b, int r0, int r1, int c0, int c1) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image dimensions differ");
  if (r0 < 0 || c0 < 0 || r1 > a.height || c1 > a.width || r0 >= r1 || c0 >= c1) {
    throw std::invalid_argument("PSNR region out of bounds");
  }
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int r = r0; r < r1; ++r) {
      for (int x = c0; x < c1; ++x) {
        const double d = a.at(c, r, x) - b.at(c, r, x);
        sum += d * d;
      }
    }
  }
  return sum / (3.0 * (r1 - r0) * (c1 - c0));
}

double psnr_from_mse(double mse, double peak) {
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

// BT.601 full range, zero-centered chroma.
void ycc_to_rgb(double y, double cb, double cr, double& r, double& g, double& b) {
  r = y + 1.402 * cr;
  g = y - (0.114 * 1.772 / 0.587) * cb - (0.299 * 1.402 / 0.587) * cr;
  b = y + 1.772 * cb;
}

}  // namespace

std::vector<int> patch_origins(int extent, int stride) {
  require_stride(stride);
  if (extent < kPatchSide) throw std::invalid_argument("frame smaller than one patch");
  std::vector<int> o;
  for (int p = 0; p + kPatchSide < extent; p += stride) o.push_back(p);
  o.push_back(extent - kPatchSide);
  return o;
}

PatchStream extract_patches(const RawBayerImage& raw, int stride) {
  raw.validate();
  PatchStream s;
  s.frame_width = raw.width;
  s.frame_height = raw.height;
  s.stride = stride;
  s.pattern = raw.pattern;
  const auto rows = patch_origins(raw.height, stride);
  const auto cols = patch_origins(raw.width, stride);
  for (int r : rows) {
    for (int c : cols) s.origins.push_back({r, c});
  }
  s.patches.resize(kArea, static_cast<Eigen::Index>(s.origins.size()));
  for (std::size_t i = 0; i < s.origins.size(); ++i) {
    const auto [r0, c0] = s.origins[i];
    for (int y = 0; y < kPatchSide; ++y) {
      for (int x = 0; x < kPatchSide; ++x) {
        s.patches(y * kPatchSide + x, static_cast<Eigen::Index>(i)) = raw.at(r0 + y, c0 + x);
      }
    }
  }
  return s;
}

RgbImage assemble(const Eigen::MatrixXd& patches, const std::vector<PatchOrigin>& origins, int width,
                  int height) {
  if (patches.rows() != 3 * kArea || patches.cols() != static_cast<Eigen::Index>(origins.size())) {
    throw std::invalid_argument("assemble expects one RGB192 column per origin");
  }
  RgbImage out(width, height);
  std::vector<int> count(out.pixel_count(), 0);
  // Sequential, fixed-order accumulation keeps the result independent of scheduling.
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const auto [r0, c0] = origins[i];
    if (r0 < 0 || c0 < 0 || r0 + kPatchSide > height || c0 + kPatchSide > width) {
      throw std::invalid_argument("patch origin outside the frame");
    }
    for (int y = 0; y < kPatchSide; ++y) {
      for (int x = 0; x < kPatchSide; ++x) {
        const std::size_t pix = static_cast<std::size_t>(r0 + y) * width + (c0 + x);
        ++count[pix];
        for (int c = 0; c < 3; ++c) {
          out.planes[c][pix] += patches(c * kArea + y * kPatchSide + x, static_cast<Eigen::Index>(i));
        }
      }
    }
  }
  for (std::size_t pix = 0; pix < count.size(); ++pix) {
    if (count[pix] == 0) throw std::invalid_argument("assemble: pixel not covered by any patch");
    for (int c = 0; c < 3; ++c) {
      out.planes[c][pix] = std::clamp(out.planes[c][pix] / count[pix], 0.0, 1.0);
    }
  }
  return out;
}

Eigen::VectorXd rgb_patch(const RgbImage& img, int row, int col) {
  Eigen::VectorXd v(3 * kArea);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < kPatchSide; ++y) {
      for (int x = 0; x < kPatchSide; ++x) v(c * kArea + y * kPatchSide + x) = img.at(c, row + y, col + x);
    }
  }
  return v;
}

Eigen::VectorXd rgb_to_ycbcr422(const Eigen::VectorXd& rgb192) {
  if (rgb192.size() != 3 * kArea) throw std::invalid_argument("expected a 192-vector");
  static const Eigen::MatrixXd C = ycbcr422_matrix(kPatchSide);
  return C * rgb192;
}

Eigen::VectorXd ycbcr422_to_rgb(const Eigen::VectorXd& ycc) {
  if (ycc.size() != 2 * kArea) throw std::invalid_argument("expected a 128-vector");
  Eigen::VectorXd rgb(3 * kArea);
  const int half = kArea / 2;
  for (int y = 0; y < kPatchSide; ++y) {
    for (int x = 0; x < kPatchSide; ++x) {
      const int pix = y * kPatchSide + x;
      const int pair = y * (kPatchSide / 2) + x / 2;
      ycc_to_rgb(ycc(pix), ycc(kArea + pair), ycc(kArea + half + pair), rgb(pix), rgb(kArea + pix),
                 rgb(2 * kArea + pix));
    }
  }
  return rgb;
}

double psnr(const RgbImage& a, const RgbImage& b, double peak) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image dimensions differ");
  return psnr_from_mse(mse_region(a, b, 0, a.height, 0, a.width), peak);
}

double psnr_region(const RgbImage& a, const RgbImage& b, int r0, int r1, int c0, int c1, double peak) {
  return psnr_from_mse(mse_region(a, b, r0, r1, c0, c1), peak);
}

double patch_psnr(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols() || truth.size() == 0) {
    throw std::invalid_argument("patch sets differ in shape");
  }
  return psnr_from_mse((estimate - truth).squaredNorm() / static_cast<double>(truth.size()), 1.0);
}

ReconstructionReport reconstruct_image(const ReconstructionJob& job) {
  if (!job.raw) throw std::invalid_argument("reconstruction job has no raw frame");
  if ((job.network == nullptr) == (job.fixed == nullptr)) {
    throw std::invalid_argument("reconstruction job needs exactly one network");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const PatchStream stream = extract_patches(*job.raw, job.stride);
  const auto n = static_cast<Eigen::Index>(stream.size());
  ReconstructionReport rep;
  rep.patches = stream.size();

  if (job.network) {
    const NetworkParams& net = *job.network;
    if (net.input_dim() != kArea) throw std::invalid_argument("network does not take 8x8 raw patches");
    if (net.pattern != job.raw->pattern) throw std::invalid_argument("network CFA pattern differs from the frame");
    Eigen::MatrixXd out = infer_batch(net, stream.patches);
    if (net.output_space == OutputSpace::kYCbCr422) {
      Eigen::MatrixXd rgb(3 * kArea, n);
      for (Eigen::Index i = 0; i < n; ++i) rgb.col(i) = ycbcr422_to_rgb(out.col(i));
      out = std::move(rgb);
      rep.mode = "float-ycbcr";
    } else {
      rep.mode = "float-rgb";
    }
    rep.image = assemble(out, stream.origins, stream.frame_width, stream.frame_height);
  } else {
    const FixedNetwork& fnet = *job.fixed;
    if (fnet.pattern != job.raw->pattern) throw std::invalid_argument("network CFA pattern differs from the frame");
    std::vector<FixedPatchOutput> outs(stream.size());
    parallel_for(stream.size(), [&](std::size_t b, std::size_t e) {
      std::array<std::uint16_t, kArea> codes{};
      for (std::size_t i = b; i < e; ++i) {
        for (int k = 0; k < kArea; ++k) codes[static_cast<std::size_t>(k)] = to_u16_code(stream.patches(k, static_cast<Eigen::Index>(i)));
        outs[i] = fx_forward(fnet, codes);
      }
    });
    // Pool gamma-encoded Y' and 8-bit chroma, as the hardware emits them.
    const int w = stream.frame_width;
    const int h = stream.frame_height;
    std::vector<double> ysum(static_cast<std::size_t>(w) * h, 0.0), cbsum(ysum.size(), 0.0),
        crsum(ysum.size(), 0.0);
    std::vector<int> count(ysum.size(), 0);
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const auto [r0, c0] = stream.origins[i];
      for (int y = 0; y < kPatchSide; ++y) {
        for (int x = 0; x < kPatchSide; ++x) {
          const std::size_t pix = static_cast<std::size_t>(r0 + y) * w + (c0 + x);
          const int pair = y * (kPatchSide / 2) + x / 2;
          ysum[pix] += outs[i].luma8[static_cast<std::size_t>(y * kPatchSide + x)];
          cbsum[pix] += outs[i].chroma8[static_cast<std::size_t>(pair)];
          crsum[pix] += outs[i].chroma8[static_cast<std::size_t>(kArea / 2 + pair)];
          ++count[pix];
        }
      }
    }
    rep.image = RgbImage(w, h);
    for (std::size_t pix = 0; pix < count.size(); ++pix) {
      const double k = count[pix];
      const double Y = std::pow(ysum[pix] / k / 255.0, 2.2);
      const double cb = (cbsum[pix] / k - 128.0) / 256.0;
      const double cr = (crsum[pix] / k - 128.0) / 256.0;
      double r, g, bl;
      ycc_to_rgb(Y, cb, cr, r, g, bl);
      rep.image.planes[0][pix] = std::clamp(r, 0.0, 1.0);
      rep.image.planes[1][pix] = std::clamp(g, 0.0, 1.0);
      rep.image.planes[2][pix] = std::clamp(bl, 0.0, 1.0);
    }
    rep.mode = "fixed";
  }
  rep.seconds = seconds_since(t0);
  if (job.ground_truth) rep.psnr_db = psnr(rep.image, *job.ground_truth);
  return rep;
}

namespace {

template <typename Solve>
ReconstructionReport reconstruct_patchwise(const RawBayerImage& raw, const ConcatDictionary& dict, int stride,
                                           const RgbImage* ground_truth, const char* mode, Solve solve) {
  if (dict.pattern != raw.pattern) throw std::invalid_argument("dictionary CFA pattern differs from the frame");
  const auto t0 = std::chrono::steady_clock::now();
  const PatchStream stream = extract_patches(raw, stride);
  Eigen::MatrixXd out(3 * kArea, static_cast<Eigen::Index>(stream.size()));
  parallel_for(stream.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      out.col(col) = reconstruct_patch(solve(stream.patches.col(col)), dict);
    }
  });
  ReconstructionReport rep;
  rep.patches = stream.size();
  rep.mode = mode;
  rep.image = assemble(out, stream.origins, stream.frame_width, stream.frame_height);
  rep.seconds = seconds_since(t0);
  if (ground_truth) rep.psnr_db = psnr(rep.image, *ground_truth);
  return rep;
}

}  // namespace

ReconstructionReport reconstruct_with_solver(const RawBayerImage& raw, const ConcatDictionary& dict,
                                             const SolverConfig& cfg, int stride,
                                             const RgbImage* ground_truth) {
  return reconstruct_patchwise(raw, dict, stride, ground_truth, "ista",
                               [&](const Eigen::VectorXd& y) { return ista(y, dict, cfg).z; });
}

ReconstructionReport reconstruct_with_omp(const RawBayerImage& raw, const ConcatDictionary& dict, int max_atoms,
                                          int stride, const RgbImage* ground_truth) {
  return reconstruct_patchwise(raw, dict, stride, ground_truth, "omp",
                               [&](const Eigen::VectorXd& y) { return omp(y, dict, max_atoms).z; });
}

TrainingPairs make_training_pairs(const std::vector<RgbImage>& images, const BlurKernelSet& kernels,
                                  const TrainingPairConfig& cfg) {
  if (images.empty()) throw std::invalid_argument("no training images");
  if (cfg.psi_indices.empty()) throw std::invalid_argument("no psi indices to sample");
  if (!(cfg.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  for (int j : cfg.psi_indices) {
    if (j < 0 || j >= kernels.psi_count()) throw std::invalid_argument("psi index outside the kernel set");
  }
  for (const auto& img : images) {
    if (img.width < kPatchSide || img.height < kPatchSide) throw std::invalid_argument("training image too small");
  }

  // blurred[i][j]: image i under psi_indices[j].
  const std::size_t nj = cfg.psi_indices.size();
  std::vector<RgbImage> blurred(images.size() * nj);
  parallel_for(blurred.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      const RgbImage& img = images[t / nj];
      blurred[t] = blur_image(img, kernels,
                              DepthMap::uniform(img.width, img.height, cfg.psi_indices[t % nj]));
    }
  });

  TrainingPairs out;
  out.inputs.resize(kArea, static_cast<Eigen::Index>(cfg.count));
  out.targets.resize(3 * kArea, static_cast<Eigen::Index>(cfg.count));
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);
  for (std::size_t s = 0; s < cfg.count; ++s) {
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, images.size() - 1)(rng);
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, nj - 1)(rng);
    const RgbImage& clear = images[i];
    const RgbImage& blur = blurred[i * nj + j];
    // Even origins keep the CFA phase of every patch at (0, 0).
    const int r0 = 2 * std::uniform_int_distribution<int>(0, (clear.height - kPatchSide) / 2)(rng);
    const int c0 = 2 * std::uniform_int_distribution<int>(0, (clear.width - kPatchSide) / 2)(rng);
    const auto col = static_cast<Eigen::Index>(s);
    out.targets.col(col) = rgb_patch(clear, r0, c0);
    for (int y = 0; y < kPatchSide; ++y) {
      for (int x = 0; x < kPatchSide; ++x) {
        double v = blur.at(cfa_channel(cfg.pattern, y, x), r0 + y, c0 + x);
        if (cfg.noise_sigma > 0.0) v = std::clamp(v + noise(rng), 0.0, 1.0);
        out.inputs(y * kPatchSide + x, col) = v;
      }
    }
  }
  return out;
}

RawBayerImage simulate_capture(const RgbImage& scene, const BlurKernelSet& kernels, const DepthMap& depth,
                               CfaPattern pattern, double noise_sigma, std::uint64_t seed) {
  RawBayerImage raw = mosaic(blur_image(scene, kernels, depth), pattern);
  if (noise_sigma > 0.0) raw = add_noise(raw, noise_sigma, seed);
  return raw;
}

DepthMap strip_depth_map(int width, int height, const std::vector<int>& psi_index) {
  if (psi_index.empty()) throw std::invalid_argument("need at least one psi index");
  DepthMap d = DepthMap::uniform(width, height, psi_index.front());
  const auto n = static_cast<int>(psi_index.size());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      d.index[static_cast<std::size_t>(r) * width + c] = psi_index[static_cast<std::size_t>(c * n / width)];
    }
  }
  return d;
}

}  // namespace edof
