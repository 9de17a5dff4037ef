#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "edof/image.hpp"
#include "edof/sparse.hpp"

namespace edof {

enum class StageKind : std::uint8_t { kI = 0, kM = 1, kF = 2 };
enum class OutputSpace : std::uint8_t { kRgb192 = 0, kYCbCr422 = 1 };

std::string_view to_string(OutputSpace space);
OutputSpace parse_output_space(std::string_view name);

/// One calculator stage.
///   I: u = A (y - c),  b_1 = soft(u, theta),  z_1 = 0
///   M: z_{l+1} = soft(b_l, theta),  b_{l+1} = b_l + A (z_{l+1} - z_l - c)
///   F: out = A (z - c)
struct Stage {
  StageKind kind = StageKind::kM;
  Eigen::MatrixXd A;
  Eigen::VectorXd theta;
  Eigen::VectorXd c;
  bool b_in_zero = false;
};

struct NetworkParams {
  int m = 0;
  std::vector<Stage> layers;
  OutputSpace output_space = OutputSpace::kRgb192;
  CfaPattern pattern = CfaPattern::kRGGB;
  /// Bumped on every parameter update so stale traces can be rejected.
  std::uint64_t revision = 0;

  int depth() const { return static_cast<int>(layers.size()); }
  int input_dim() const { return static_cast<int>(layers.front().A.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().A.rows()); }
  void validate() const;
};

/// Parameter-shaped gradient container (dA, dtheta, dc per stage).
struct NetworkGradients {
  std::vector<Stage> layers;
};

/// (64 + 2 * 32) x 192: BT.601 full-range RGB -> YCbCr with zero-centered chroma,
/// chroma averaged over horizontal pixel pairs. Output is Y, Cb, Cr planes, row-major.
Eigen::MatrixXd ycbcr422_matrix(int patch_side = 8);

enum class InitMode {
  /// m = q k; exactly reproduces ISTA over the concatenated dictionary.
  kFull,
  /// m = k from a single blurred block B D_psi_j.
  kBlock,
  /// m = k from the psi-averaged projection (1/q) sum_j B D_psi_j.
  kMarginal,
};

InitMode parse_init_mode(std::string_view name);

struct InitOptions {
  InitMode mode = InitMode::kFull;
  /// Block for kBlock; negative selects the last (largest psi) block.
  int block = -1;
  /// Gray level removed from the input and restored on the output.
  double input_offset = 0.0;
};

NetworkParams init_from_ista(const ConcatDictionary& dict, const SolverConfig& cfg, int T,
                             OutputSpace output_space, const InitOptions& options = {});

/// Re-targets an RGB192 network to YCbCr 4:2:2 by folding the color transform into F.
NetworkParams to_ycbcr422(const NetworkParams& params);

/// Batched forward intermediates; columns are samples.
struct ForwardTrace {
  std::uint64_t revision = 0;
  Eigen::MatrixXd input;
  /// I-stage pre-activation.
  Eigen::MatrixXd u;
  /// b_1 .. b_{T-1} and z_1 .. z_{T-1}.
  std::vector<Eigen::MatrixXd> b;
  std::vector<Eigen::MatrixXd> z;
  Eigen::MatrixXd output;
};

ForwardTrace forward_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs);

struct ForwardResult {
  Eigen::VectorXd output;
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::VectorXd> z;
};

ForwardResult forward(const NetworkParams& params, const Eigen::VectorXd& y);

/// Inference-only batch forward; parallel over fixed column chunks.
Eigen::MatrixXd infer_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs);

/// 1/2 ||x_hat - x_star||^2.
double loss_mse(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_star);
/// Mean of the per-column losses.
double batch_loss(const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& x_star);

class StaleTraceError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Gradients of batch_loss(trace.output, targets) with respect to every A, theta and c.
NetworkGradients backward(const NetworkParams& params, const ForwardTrace& trace,
                          const Eigen::MatrixXd& targets);

struct TrainConfig {
  double learning_rate = 1e-2;
  int batch_size = 64;
  int epochs = 15;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  std::filesystem::path dataset_path;

  void validate() const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  NetworkParams params;
  double initial_train_loss = 0.0;
  double initial_validation_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  /// 0 means the initialization was never beaten.
  int best_epoch = 0;
};

/// Shuffled minibatch SGD with theta >= 0 projection; returns the checkpoint with the
/// lowest validation loss. Columns of `inputs` / `targets` are training pairs.
TrainResult sgd_train(const NetworkParams& init, const Eigen::MatrixXd& inputs,
                      const Eigen::MatrixXd& targets, const TrainConfig& cfg);

/// "EDNN" container.
void save_network(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_network(const std::filesystem::path& path);

}  // namespace edof
