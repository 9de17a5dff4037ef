#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "edof/image.hpp"
#include "edof/optics.hpp"

namespace edof {

/// Regularization weight picked by `select_mu` on 300 noisy training-corpus patches
/// (psi 1..8, standard mask, sigma 0.005, 100 ISTA iterations).
inline constexpr double kDefaultMu = 1e-2;

/// Column dictionary over RGB patches: n = 3 * patch_side^2 rows, planar
/// channel-major, row-major pixels within a plane.
struct Dictionary {
  Eigen::MatrixXd atoms;
  int patch_side = 8;

  int n() const { return static_cast<int>(atoms.rows()); }
  int k() const { return static_cast<int>(atoms.cols()); }
  void validate() const;
};

/// Separable 2-D DCT atoms (p x p per color, p = sqrt(k / 3) >= patch_side) tensored
/// with the orthonormal color basis {luma, R-B, R-2G+B}. The first atom is the luma DC.
Dictionary dct_dictionary(int patch_side = 8, int k = 192);

/// Patch-restricted convolution with half-sample symmetric extension,
/// (side^2 x side^2), acting on row-major vectorized planes.
Eigen::MatrixXd blur_operator_matrix(const Eigen::MatrixXd& kernel, int patch_side = 8);

/// Block-diagonal H_psi over the three planes for grid entry `psi_index`.
Eigen::MatrixXd blur_operator_rgb(const BlurKernelSet& kernels, int psi_index, int patch_side = 8);

/// CFA sampling B (side^2 x 3 side^2) for a patch whose origin has the given lattice phase.
Eigen::MatrixXd bayer_projection(CfaPattern pattern, int patch_side = 8, int phase_row = 0,
                                 int phase_col = 0);

struct ConcatDictionary {
  Dictionary clear;
  std::vector<double> psi_grid;
  std::vector<Eigen::MatrixXd> blurred_blocks;
  /// (D_psi1, ..., D_psiq), n x qk.
  Eigen::MatrixXd concat;
  Eigen::MatrixXd bayer;
  /// B * concat, side^2 x qk.
  Eigen::MatrixXd projected;
  CfaPattern pattern = CfaPattern::kRGGB;
  int phase_row = 0;
  int phase_col = 0;
  /// Upper bound on the largest eigenvalue of projected^T projected.
  double lipschitz = 0.0;

  int q() const { return static_cast<int>(psi_grid.size()); }
  int atom_count() const { return static_cast<int>(projected.cols()); }
  int measurement_dim() const { return static_cast<int>(projected.rows()); }
  /// (D, ..., D), n x qk.
  Eigen::MatrixXd synthesis() const;
  /// B * D_psi_j.
  Eigen::MatrixXd block_projection(int j) const;
};

ConcatDictionary build_concat_dictionary(const Dictionary& dict, const BlurKernelSet& kernels,
                                         CfaPattern pattern, int phase_row = 0, int phase_col = 0);

/// (1 + 1e-3) * lambda_max(P^T P) by power iteration to relative tolerance 1e-6.
double lipschitz_upper(const Eigen::MatrixXd& P);

/// max(|x| - theta, 0) * sign(x), elementwise.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double theta);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, const Eigen::VectorXd& theta);

struct SolverConfig {
  double mu = kDefaultMu;
  /// Taken from the dictionary (or computed) when unset.
  std::optional<double> lipschitz;
  int iterations = 100;
  /// Stop early once max |z_{t+1} - z_t| <= tolerance; 0 runs all iterations.
  double tolerance = 0.0;

  /// Shrinkage threshold for the objective ||y - Pz||^2 + mu ||z||_1 with step 1/L.
  double theta(double L) const { return mu / (2.0 * L); }
  void validate() const;
};

/// ||y - P z||^2 + mu ||z||_1.
double lasso_objective(const Eigen::MatrixXd& P, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                       double mu);

struct IstaResult {
  Eigen::VectorXd z;
  /// Objective at z_1 = 0 followed by one entry per threshold step.
  std::vector<double> objective;
  int iterations = 0;
};

/// z_{t+1} = soft(b_t), b_{t+1} = b_t + S (z_{t+1} - z_t), b_1 = P^T y / L,
/// S = I - P^T P / L.
IstaResult ista(const Eigen::VectorXd& y, const Eigen::MatrixXd& P, const SolverConfig& cfg);
IstaResult ista(const Eigen::VectorXd& y, const ConcatDictionary& dict, const SolverConfig& cfg);

enum class OmpStatus { kOk, kDroppedRankDeficient };

struct OmpResult {
  Eigen::VectorXd z;
  std::vector<int> support;
  OmpStatus status = OmpStatus::kOk;
  double residual_norm = 0.0;
};

/// Greedy selection by normalized absolute correlation with least-squares refit.
OmpResult omp(const Eigen::VectorXd& y, const Eigen::MatrixXd& P, int max_atoms,
              double residual_tol = 0.0);
OmpResult omp(const Eigen::VectorXd& y, const ConcatDictionary& dict, int max_atoms,
              double residual_tol = 0.0);

/// sum_j D z_j over the q coefficient blocks.
Eigen::VectorXd reconstruct_patch(const Eigen::VectorXd& z, const ConcatDictionary& dict);

struct MuSearchResult {
  double best_mu = 0.0;
  std::vector<double> grid;
  std::vector<double> mse;
};

/// Grid search over mu minimizing the reconstruction MSE of ISTA on held-out pairs
/// (columns of `measurements` and `targets`). Default grid is 10^{-4, -3.5, ..., -1}.
MuSearchResult select_mu(const ConcatDictionary& dict, const Eigen::MatrixXd& measurements,
                         const Eigen::MatrixXd& targets, int iterations,
                         std::vector<double> grid = {});

/// "EDDC" container.
void save_dictionary(const ConcatDictionary& dict, const std::filesystem::path& path);
ConcatDictionary load_dictionary(const std::filesystem::path& path);

}  // namespace edof
