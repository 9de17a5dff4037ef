#include "edof/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "edof/binary_io.hpp"
#include "edof/parallel.hpp"

namespace edof {
namespace {

constexpr std::uint32_t kNetworkVersion = 1;
// Fixed column chunk for parallel batches; independent of the worker count.
constexpr Eigen::Index kChunk = 16;

Eigen::MatrixXd soft(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double a = std::abs(x(i, j)) - theta(i);
      out(i, j) = a > 0.0 ? std::copysign(a, x(i, j)) : 0.0;
    }
  }
  return out;
}

// Active-unit mask (|x| > theta) and signed mask sign(x) on active units.
void activity(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, Eigen::MatrixXd& active,
              Eigen::MatrixXd& signed_active) {
  active.resize(x.rows(), x.cols());
  signed_active.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const bool on = std::abs(x(i, j)) > theta(i);
      active(i, j) = on ? 1.0 : 0.0;
      signed_active(i, j) = on ? (x(i, j) > 0.0 ? 1.0 : -1.0) : 0.0;
    }
  }
}

Stage zero_like(const Stage& s) {
  Stage g;
  g.kind = s.kind;
  g.A = Eigen::MatrixXd::Zero(s.A.rows(), s.A.cols());
  g.theta = Eigen::VectorXd::Zero(s.theta.size());
  g.c = Eigen::VectorXd::Zero(s.c.size());
  return g;
}

double mean_loss_over(const NetworkParams& p, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T) {
  return batch_loss(infer_batch(p, X), T);
}

}  // namespace

std::string_view to_string(OutputSpace space) {
  return space == OutputSpace::kRgb192 ? "rgb192" : "ycbcr422";
}

OutputSpace parse_output_space(std::string_view name) {
  if (name == "rgb192" || name == "rgb") return OutputSpace::kRgb192;
  if (name == "ycbcr422" || name == "ycbcr") return OutputSpace::kYCbCr422;
  throw std::invalid_argument("unknown output space: " + std::string(name));
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "full") return InitMode::kFull;
  if (name == "block") return InitMode::kBlock;
  if (name == "marginal") return InitMode::kMarginal;
  throw std::invalid_argument("unknown init mode: " + std::string(name));
}

void NetworkParams::validate() const {
  if (layers.size() < 3) throw std::invalid_argument("network needs T >= 3 stages");
  if (m < 1) throw std::invalid_argument("coefficient width must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Stage& s = layers[l];
    const StageKind want = l == 0 ? StageKind::kI : l + 1 == layers.size() ? StageKind::kF : StageKind::kM;
    if (s.kind != want) throw std::invalid_argument("stage kinds must be I, M..., F");
    const auto cols = s.A.cols();
    switch (s.kind) {
      case StageKind::kI:
        if (s.A.rows() != m || s.c.size() != cols || s.theta.size() != m) {
          throw std::invalid_argument("I stage dimensions are inconsistent");
        }
        break;
      case StageKind::kM:
        if (s.A.rows() != m || cols != m || s.c.size() != m || s.theta.size() != m) {
          throw std::invalid_argument("M stage dimensions are inconsistent");
        }
        break;
      case StageKind::kF:
        if (cols != m || s.c.size() != m || s.A.rows() < 1) {
          throw std::invalid_argument("F stage dimensions are inconsistent");
        }
        break;
    }
    if (s.theta.size() > 0 && !(s.theta.array() >= 0.0).all()) {
      throw std::invalid_argument("thresholds must be >= 0");
    }
  }
}

Eigen::MatrixXd ycbcr422_matrix(int patch_side) {
  if (patch_side < 2 || patch_side % 2 != 0) throw std::invalid_argument("patch_side must be even");
  const int area = patch_side * patch_side;
  const int half = area / 2;
  const double rows[3][3] = {{0.299, 0.587, 0.114},
                             {-0.299 / 1.772, -0.587 / 1.772, 0.5},
                             {0.5, -0.587 / 1.402, -0.114 / 1.402}};
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(area + 2 * half, 3 * area);
  for (int y = 0; y < patch_side; ++y) {
    for (int x = 0; x < patch_side; ++x) {
      const int pix = y * patch_side + x;
      for (int c = 0; c < 3; ++c) C(pix, c * area + pix) = rows[0][c];
      const int pair = y * (patch_side / 2) + x / 2;
      for (int k = 1; k < 3; ++k) {
        for (int c = 0; c < 3; ++c) C(area + (k - 1) * half + pair, c * area + pix) = 0.5 * rows[k][c];
      }
    }
  }
  return C;
}

NetworkParams init_from_ista(const ConcatDictionary& dict, const SolverConfig& cfg, int T,
                             OutputSpace output_space, const InitOptions& options) {
  if (T < 3) throw std::invalid_argument("T must be >= 3");
  cfg.validate();
  Eigen::MatrixXd P;
  Eigen::MatrixXd synthesis;
  double L = 0.0;
  switch (options.mode) {
    case InitMode::kFull:
      P = dict.projected;
      synthesis = dict.synthesis();
      L = cfg.lipschitz ? *cfg.lipschitz : dict.lipschitz;
      break;
    case InitMode::kBlock: {
      const int j = options.block < 0 ? dict.q() - 1 : options.block;
      P = dict.block_projection(j);
      synthesis = dict.clear.atoms;
      L = lipschitz_upper(P);
      break;
    }
    case InitMode::kMarginal:
      P = Eigen::MatrixXd::Zero(dict.measurement_dim(), dict.clear.k());
      for (int j = 0; j < dict.q(); ++j) P += dict.block_projection(j);
      P /= dict.q();
      synthesis = dict.clear.atoms;
      L = lipschitz_upper(P);
      break;
  }
  const int m = static_cast<int>(P.cols());
  const Eigen::Index in_dim = P.rows();

  NetworkParams net;
  net.m = m;
  net.pattern = dict.pattern;
  net.output_space = OutputSpace::kRgb192;

  Stage first;
  first.kind = StageKind::kI;
  first.b_in_zero = true;
  first.A = P.transpose() / L;
  first.theta = Eigen::VectorXd::Zero(m);
  first.c = Eigen::VectorXd::Constant(in_dim, options.input_offset);
  net.layers.push_back(std::move(first));

  const Eigen::MatrixXd S = Eigen::MatrixXd::Identity(m, m) - P.transpose() * P / L;
  for (int l = 0; l < T - 2; ++l) {
    Stage s;
    s.kind = StageKind::kM;
    s.A = S;
    s.theta = Eigen::VectorXd::Constant(m, cfg.theta(L));
    s.c = Eigen::VectorXd::Zero(m);
    net.layers.push_back(std::move(s));
  }

  Stage last;
  last.kind = StageKind::kF;
  last.A = synthesis;
  last.c = Eigen::VectorXd::Zero(m);
  if (options.input_offset != 0.0) {
    // Restore the removed gray level: A (z - c) = A z + offset.
    const Eigen::VectorXd target = Eigen::VectorXd::Constant(synthesis.rows(), options.input_offset);
    last.c = -synthesis.completeOrthogonalDecomposition().solve(target);
  }
  net.layers.push_back(std::move(last));
  net.validate();
  return output_space == OutputSpace::kYCbCr422 ? to_ycbcr422(net) : net;
}

NetworkParams to_ycbcr422(const NetworkParams& params) {
  if (params.output_space != OutputSpace::kRgb192) {
    throw std::invalid_argument("network is not in RGB192 output space");
  }
  if (params.output_dim() != 192) throw std::invalid_argument("RGB192 network must output 192 values");
  NetworkParams out = params;
  out.layers.back().A = ycbcr422_matrix(8) * params.layers.back().A;
  out.output_space = OutputSpace::kYCbCr422;
  ++out.revision;
  return out;
}

ForwardTrace forward_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.input_dim()) throw std::invalid_argument("input dimension mismatch");
  if (!inputs.allFinite()) throw std::invalid_argument("network input is not finite");
  const auto& L = params.layers;
  const int T = params.depth();
  ForwardTrace t;
  t.revision = params.revision;
  t.input = inputs;
  t.u = L[0].A * (inputs.colwise() - L[0].c);
  t.b.push_back(soft(t.u, L[0].theta));
  t.z.push_back(Eigen::MatrixXd::Zero(params.m, inputs.cols()));
  for (int l = 1; l <= T - 2; ++l) {
    t.z.push_back(soft(t.b.back(), L[l].theta));
    const Eigen::MatrixXd step = (t.z[l] - t.z[l - 1]).colwise() - L[l].c;
    t.b.push_back(t.b.back() + L[l].A * step);
  }
  t.output = L.back().A * (t.z.back().colwise() - L.back().c);
  return t;
}

ForwardResult forward(const NetworkParams& params, const Eigen::VectorXd& y) {
  const ForwardTrace t = forward_batch(params, y);
  ForwardResult r;
  r.output = t.output.col(0);
  for (const auto& b : t.b) r.b.push_back(b.col(0));
  for (const auto& z : t.z) r.z.push_back(z.col(0));
  return r;
}

Eigen::MatrixXd infer_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.input_dim()) throw std::invalid_argument("input dimension mismatch");
  const Eigen::Index n = inputs.cols();
  Eigen::MatrixXd out(params.output_dim(), n);
  const auto chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const Eigen::Index start = static_cast<Eigen::Index>(c) * kChunk;
      const Eigen::Index len = std::min(kChunk, n - start);
      out.middleCols(start, len) = forward_batch(params, inputs.middleCols(start, len)).output;
    }
  });
  return out;
}

double loss_mse(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_star) {
  if (x_hat.size() != x_star.size()) throw std::invalid_argument("loss operands differ in size");
  return 0.5 * (x_hat - x_star).squaredNorm();
}

double batch_loss(const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& x_star) {
  if (x_hat.rows() != x_star.rows() || x_hat.cols() != x_star.cols() || x_hat.cols() == 0) {
    throw std::invalid_argument("batch loss operands differ in shape");
  }
  return 0.5 * (x_hat - x_star).squaredNorm() / static_cast<double>(x_hat.cols());
}

NetworkGradients backward(const NetworkParams& params, const ForwardTrace& trace,
                          const Eigen::MatrixXd& targets) {
  if (trace.revision != params.revision || static_cast<int>(trace.b.size()) != params.depth() - 1) {
    throw StaleTraceError("forward trace does not belong to these parameters");
  }
  if (targets.rows() != trace.output.rows() || targets.cols() != trace.output.cols()) {
    throw std::invalid_argument("target shape does not match the network output");
  }
  const auto& L = params.layers;
  const int T = params.depth();
  NetworkGradients g;
  for (const auto& s : L) g.layers.push_back(zero_like(s));

  const Eigen::MatrixXd G = (trace.output - targets) / static_cast<double>(targets.cols());
  const Stage& F = L.back();
  g.layers.back().A = G * (trace.z.back().colwise() - F.c).transpose();
  g.layers.back().c = -(F.A.transpose() * G).rowwise().sum();

  Eigen::MatrixXd gz = F.A.transpose() * G;  // d/dz_{T-1}
  Eigen::MatrixXd gb = Eigen::MatrixXd::Zero(params.m, targets.cols());  // d/db_{T-1}
  Eigen::MatrixXd active, signed_active;
  for (int l = T - 2; l >= 1; --l) {
    const Stage& s = L[l];
    const Eigen::MatrixXd step = (trace.z[l] - trace.z[l - 1]).colwise() - s.c;
    g.layers[l].A = gb * step.transpose();
    const Eigen::MatrixXd W = s.A.transpose() * gb;
    g.layers[l].c = -W.rowwise().sum();
    gz += W;
    activity(trace.b[l - 1], s.theta, active, signed_active);
    g.layers[l].theta = -(signed_active.cwiseProduct(gz)).rowwise().sum();
    gb += active.cwiseProduct(gz);
    gz = -W;
  }
  // z_1 = 0 is constant; b_1 = soft(u, theta_0).
  const Stage& I = L.front();
  activity(trace.u, I.theta, active, signed_active);
  const Eigen::MatrixXd gu = active.cwiseProduct(gb);
  g.layers.front().theta = -(signed_active.cwiseProduct(gb)).rowwise().sum();
  g.layers.front().A = gu * (trace.input.colwise() - I.c).transpose();
  g.layers.front().c = -(I.A.transpose() * gu).rowwise().sum();
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must be in [0, 1)");
  }
}

TrainResult sgd_train(const NetworkParams& init, const Eigen::MatrixXd& inputs,
                      const Eigen::MatrixXd& targets, const TrainConfig& cfg) {
  cfg.validate();
  init.validate();
  const Eigen::Index n = inputs.cols();
  if (n == 0) throw std::invalid_argument("training set is empty");
  if (targets.cols() != n || targets.rows() != init.output_dim() || inputs.rows() != init.input_dim()) {
    throw std::invalid_argument("training pairs do not match the network dimensions");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<Eigen::Index>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> val_idx(order.begin(), order.begin() + n_val);
  std::vector<Eigen::Index> train_idx(order.begin() + n_val, order.end());
  if (val_idx.empty()) val_idx = train_idx;

  Eigen::MatrixXd Xv = inputs(Eigen::all, val_idx), Tv = targets(Eigen::all, val_idx);
  Eigen::MatrixXd Xt = inputs(Eigen::all, train_idx), Tt = targets(Eigen::all, train_idx);

  TrainResult res;
  res.params = init;
  NetworkParams p = init;
  res.initial_validation_loss = mean_loss_over(p, Xv, Tv);
  res.initial_train_loss = mean_loss_over(p, Xt, Tt);
  double best = res.initial_validation_loss;

  const Eigen::Index nt = Xt.cols();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(nt));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < nt; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, nt - start);
      const std::vector<Eigen::Index> idx(perm.begin() + start, perm.begin() + start + len);
      const Eigen::MatrixXd Xb = Xt(Eigen::all, idx);
      const Eigen::MatrixXd Tb = Tt(Eigen::all, idx);

      // Per-chunk gradients in parallel, reduced in chunk order.
      const auto chunks = static_cast<std::size_t>((len + kChunk - 1) / kChunk);
      std::vector<NetworkGradients> partial(chunks);
      std::vector<double> partial_loss(chunks, 0.0);
      parallel_for(chunks, [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c) {
          const Eigen::Index s = static_cast<Eigen::Index>(c) * kChunk;
          const Eigen::Index w = std::min(kChunk, len - s);
          const ForwardTrace tr = forward_batch(p, Xb.middleCols(s, w));
          partial[c] = backward(p, tr, Tb.middleCols(s, w));
          partial_loss[c] = 0.5 * (tr.output - Tb.middleCols(s, w)).squaredNorm();
          // backward averages over the chunk; rescale to a sum.
          for (auto& st : partial[c].layers) {
            st.A *= static_cast<double>(w);
            st.theta *= static_cast<double>(w);
            st.c *= static_cast<double>(w);
          }
        }
      });
      const double scale = cfg.learning_rate / static_cast<double>(len);
      for (std::size_t c = 0; c < chunks; ++c) {
        epoch_loss += partial_loss[c];
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
          Stage& s = p.layers[l];
          const Stage& d = partial[c].layers[l];
          s.A -= scale * d.A;
          if (s.theta.size() > 0) s.theta -= scale * d.theta;
          s.c -= scale * d.c;
        }
      }
      for (auto& s : p.layers) {
        if (s.theta.size() > 0) s.theta = s.theta.cwiseMax(0.0);
      }
      ++p.revision;
    }
    epoch_loss /= static_cast<double>(nt);
    res.train_loss.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss) || epoch_loss > 10.0 * res.initial_train_loss) {
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + ": loss " +
                             std::to_string(epoch_loss) + " vs initial " +
                             std::to_string(res.initial_train_loss) + " (lower the learning rate)");
    }
    const double val = mean_loss_over(p, Xv, Tv);
    res.validation_loss.push_back(val);
    if (val < best) {
      best = val;
      res.best_epoch = epoch;
      res.params = p;
    }
  }
  res.params.revision = init.revision + (res.best_epoch > 0 ? 1 : 0);
  return res;
}

// EDNN: magic, u32 version, u32 T, u32 m, u8 output space, u8 CFA pattern, then per
// stage: u8 kind, u8 b_in_zero, u32 rows, u32 cols, A row-major, u32 |theta|, theta,
// u32 |c|, c.
void save_network(const NetworkParams& params, const std::filesystem::path& path) {
  params.validate();
  BinaryWriter w;
  w.magic("EDNN");
  w.u32(kNetworkVersion);
  w.u32(static_cast<std::uint32_t>(params.depth()));
  w.u32(static_cast<std::uint32_t>(params.m));
  w.u8(static_cast<std::uint8_t>(params.output_space));
  w.u8(static_cast<std::uint8_t>(params.pattern));
  for (const auto& s : params.layers) {
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u8(s.b_in_zero ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(s.A.rows()));
    w.u32(static_cast<std::uint32_t>(s.A.cols()));
    w.matrix(s.A);
    w.u32(static_cast<std::uint32_t>(s.theta.size()));
    w.f64s({s.theta.data(), static_cast<std::size_t>(s.theta.size())});
    w.u32(static_cast<std::uint32_t>(s.c.size()));
    w.f64s({s.c.data(), static_cast<std::size_t>(s.c.size())});
  }
  w.save(path);
}

NetworkParams load_network(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("EDNN");
  if (r.u32() != kNetworkVersion) throw std::runtime_error("unsupported EDNN version");
  NetworkParams p;
  const auto T = r.u32();
  p.m = static_cast<int>(r.u32());
  const auto space = r.u8();
  const auto pattern = r.u8();
  if (space > 1 || pattern > 3 || T < 3 || T > 4096) {
    throw std::runtime_error("corrupt EDNN header in " + path.string());
  }
  p.output_space = static_cast<OutputSpace>(space);
  p.pattern = static_cast<CfaPattern>(pattern);
  auto vec = [&r]() {
    Eigen::VectorXd v(r.u32());
    for (auto& x : v) x = r.f64();
    return v;
  };
  for (std::uint32_t l = 0; l < T; ++l) {
    Stage s;
    const auto kind = r.u8();
    if (kind > 2) throw std::runtime_error("corrupt EDNN stage kind in " + path.string());
    s.kind = static_cast<StageKind>(kind);
    s.b_in_zero = r.u8() != 0;
    const auto rows = r.u32();
    const auto cols = r.u32();
    s.A = r.matrix(rows, cols);
    s.theta = vec();
    s.c = vec();
    p.layers.push_back(std::move(s));
  }
  p.validate();
  return p;
}

}  // namespace edof
