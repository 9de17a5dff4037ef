#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "edof/fixedpoint.hpp"
#include "edof/image.hpp"
#include "edof/network.hpp"
#include "edof/optics.hpp"
#include "edof/sensor.hpp"
#include "edof/sparse.hpp"

namespace edof {

inline constexpr int kPatchSide = 8;
/// Reported PSNR for identical images.
inline constexpr double kPsnrCap = 99.0;

struct PatchOrigin {
  int row = 0;
  int col = 0;
};

struct PatchStream {
  int frame_width = 0;
  int frame_height = 0;
  int stride = 8;
  CfaPattern pattern = CfaPattern::kRGGB;
  std::vector<PatchOrigin> origins;
  /// 64 x N, row-major samples per column.
  Eigen::MatrixXd patches;

  std::size_t size() const { return origins.size(); }
};

/// 0, stride, 2 stride, ... with the last origin clamped to extent - 8.
std::vector<int> patch_origins(int extent, int stride);

/// Row-major 8x8 patches on an even lattice covering the whole frame.
PatchStream extract_patches(const RawBayerImage& raw, int stride);

/// Per-pixel mean of the covering RGB192 patches, clipped to [0, 1].
RgbImage assemble(const Eigen::MatrixXd& patches, const std::vector<PatchOrigin>& origins, int width,
                  int height);

/// Planar RGB192 patch of `img` at (row, col).
Eigen::VectorXd rgb_patch(const RgbImage& img, int row, int col);

Eigen::VectorXd rgb_to_ycbcr422(const Eigen::VectorXd& rgb192);
/// Chroma replicated over each horizontal pair, then inverse BT.601.
Eigen::VectorXd ycbcr422_to_rgb(const Eigen::VectorXd& ycc128);

/// 10 log10(peak^2 / MSE) over all channels; kPsnrCap for identical images.
double psnr(const RgbImage& a, const RgbImage& b, double peak = 1.0);
/// PSNR restricted to rows [r0, r1) x cols [c0, c1).
double psnr_region(const RgbImage& a, const RgbImage& b, int r0, int r1, int c0, int c1,
                   double peak = 1.0);
/// Patch-domain PSNR over columns of equal-shape matrices, peak 1.
double patch_psnr(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

struct ReconstructionJob {
  const RawBayerImage* raw = nullptr;
  const NetworkParams* network = nullptr;
  const FixedNetwork* fixed = nullptr;
  int stride = 8;
  const RgbImage* ground_truth = nullptr;
};

struct ReconstructionReport {
  RgbImage image;
  std::optional<double> psnr_db;
  double seconds = 0.0;
  std::size_t patches = 0;
  /// "float-rgb", "float-ycbcr" or "fixed".
  std::string mode;
};

/// Extract -> per-patch inference -> color handling -> average pooling. Float networks
/// pool linear RGB; fixed networks pool gamma-encoded luma and 8-bit chroma.
ReconstructionReport reconstruct_image(const ReconstructionJob& job);

/// Same patch pipeline with ISTA over the concatenated dictionary instead of a network.
ReconstructionReport reconstruct_with_solver(const RawBayerImage& raw, const ConcatDictionary& dict,
                                             const SolverConfig& cfg, int stride,
                                             const RgbImage* ground_truth = nullptr);

/// Same patch pipeline with OMP (at most `max_atoms` atoms per patch).
ReconstructionReport reconstruct_with_omp(const RawBayerImage& raw, const ConcatDictionary& dict, int max_atoms,
                                          int stride, const RgbImage* ground_truth = nullptr);

struct TrainingPairConfig {
  std::size_t count = 50000;
  /// Kernel-set entries to draw from, uniformly.
  std::vector<int> psi_indices;
  CfaPattern pattern = CfaPattern::kRGGB;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
};

struct TrainingPairs {
  /// 64 x N raw patches and 192 x N clear RGB targets.
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
};

/// Random even-lattice patches from blurred, mosaiced, noisy versions of `images`.
TrainingPairs make_training_pairs(const std::vector<RgbImage>& images, const BlurKernelSet& kernels,
                                  const TrainingPairConfig& cfg);

/// Simulated capture: blur by depth map, mosaic, optional noise.
RawBayerImage simulate_capture(const RgbImage& scene, const BlurKernelSet& kernels,
                               const DepthMap& depth, CfaPattern pattern, double noise_sigma,
                               std::uint64_t seed);

/// Equal-width vertical strips, one per psi index (a single index gives a uniform map).
DepthMap strip_depth_map(int width, int height, const std::vector<int>& psi_index);

}  // namespace edof
