#include "edof/sparse.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "edof/binary_io.hpp"
#include "edof/parallel.hpp"

namespace edof {
namespace {

constexpr std::uint32_t kDictionaryVersion = 1;

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

}  // namespace

void Dictionary::validate() const {
  if (patch_side < 1) throw std::invalid_argument("patch_side must be positive");
  if (n() != 3 * patch_side * patch_side) {
    throw std::invalid_argument("dictionary rows must equal 3 * patch_side^2");
  }
  for (int j = 0; j < k(); ++j) {
    if (std::abs(atoms.col(j).norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("dictionary atoms must have unit norm");
    }
  }
}

Dictionary dct_dictionary(int patch_side, int k) {
  if (patch_side < 1) throw std::invalid_argument("patch_side must be positive");
  if (k <= 0 || k % 3 != 0) throw std::invalid_argument("k must be a positive multiple of 3");
  const int p = static_cast<int>(std::lround(std::sqrt(k / 3.0)));
  if (p * p * 3 != k || p < patch_side) {
    throw std::invalid_argument("k / 3 must be a perfect square of at least patch_side^2");
  }

  // 1-D atoms cos(pi u (2x + 1) / 2p): the orthonormal DCT-II when p == patch_side.
  Eigen::MatrixXd basis(patch_side, p);
  for (int u = 0; u < p; ++u) {
    for (int x = 0; x < patch_side; ++x) {
      basis(x, u) = std::cos(std::numbers::pi * u * (2 * x + 1) / (2.0 * p));
    }
    basis.col(u).normalize();
  }
  const double s3 = std::sqrt(3.0);
  const double s2 = std::sqrt(2.0);
  const double s6 = std::sqrt(6.0);
  const double colors[3][3] = {{1 / s3, 1 / s3, 1 / s3}, {1 / s2, 0.0, -1 / s2}, {1 / s6, -2 / s6, 1 / s6}};

  const int area = patch_side * patch_side;
  Dictionary d;
  d.patch_side = patch_side;
  d.atoms.setZero(3 * area, k);
  int col = 0;
  for (const auto& color : colors) {
    for (int u = 0; u < p; ++u) {
      for (int v = 0; v < p; ++v) {
        Eigen::VectorXd pattern(area);
        for (int y = 0; y < patch_side; ++y) {
          for (int x = 0; x < patch_side; ++x) pattern(y * patch_side + x) = basis(y, u) * basis(x, v);
        }
        pattern.normalize();
        for (int c = 0; c < 3; ++c) d.atoms.col(col).segment(c * area, area) = color[c] * pattern;
        ++col;
      }
    }
  }
  return d;
}

Eigen::MatrixXd blur_operator_matrix(const Eigen::MatrixXd& kernel, int patch_side) {
  if (kernel.rows() != kernel.cols() || kernel.rows() % 2 == 0) {
    throw std::invalid_argument("kernel must be square with odd size");
  }
  const int r = static_cast<int>(kernel.rows()) / 2;
  const int area = patch_side * patch_side;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(area, area);
  for (int py = 0; py < patch_side; ++py) {
    for (int px = 0; px < patch_side; ++px) {
      const int row = py * patch_side + px;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = reflect_symmetric(py - dy, patch_side);
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = reflect_symmetric(px - dx, patch_side);
          H(row, sy * patch_side + sx) += kernel(dy + r, dx + r);
        }
      }
    }
  }
  return H;
}

Eigen::MatrixXd blur_operator_rgb(const BlurKernelSet& kernels, int psi_index, int patch_side) {
  const int area = patch_side * patch_side;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3 * area, 3 * area);
  for (int c = 0; c < 3; ++c) {
    H.block(c * area, c * area, area, area) = blur_operator_matrix(kernels.at(c, psi_index), patch_side);
  }
  return H;
}

Eigen::MatrixXd bayer_projection(CfaPattern pattern, int patch_side, int phase_row, int phase_col) {
  const int area = patch_side * patch_side;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(area, 3 * area);
  for (int y = 0; y < patch_side; ++y) {
    for (int x = 0; x < patch_side; ++x) {
      const int i = y * patch_side + x;
      B(i, cfa_channel(pattern, phase_row + y, phase_col + x) * area + i) = 1.0;
    }
  }
  return B;
}

Eigen::MatrixXd ConcatDictionary::synthesis() const {
  Eigen::MatrixXd s(clear.n(), static_cast<Eigen::Index>(clear.k()) * q());
  for (int j = 0; j < q(); ++j) s.middleCols(static_cast<Eigen::Index>(j) * clear.k(), clear.k()) = clear.atoms;
  return s;
}

Eigen::MatrixXd ConcatDictionary::block_projection(int j) const {
  if (j < 0 || j >= q()) throw std::invalid_argument("block index out of range");
  return projected.middleCols(static_cast<Eigen::Index>(j) * clear.k(), clear.k());
}

ConcatDictionary build_concat_dictionary(const Dictionary& dict, const BlurKernelSet& kernels,
                                         CfaPattern pattern, int phase_row, int phase_col) {
  dict.validate();
  kernels.validate();
  ConcatDictionary cd;
  cd.clear = dict;
  cd.psi_grid = kernels.psi_grid;
  cd.pattern = pattern;
  cd.phase_row = phase_row & 1;
  cd.phase_col = phase_col & 1;
  const int k = dict.k();
  cd.concat.resize(dict.n(), static_cast<Eigen::Index>(k) * kernels.psi_count());
  for (int j = 0; j < kernels.psi_count(); ++j) {
    cd.blurred_blocks.push_back(blur_operator_rgb(kernels, j, dict.patch_side) * dict.atoms);
    cd.concat.middleCols(static_cast<Eigen::Index>(j) * k, k) = cd.blurred_blocks.back();
  }
  cd.bayer = bayer_projection(pattern, dict.patch_side, cd.phase_row, cd.phase_col);
  cd.projected = cd.bayer * cd.concat;
  cd.lipschitz = lipschitz_upper(cd.projected);
  return cd;
}

double lipschitz_upper(const Eigen::MatrixXd& P) {
  if (P.size() == 0 || P.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("lipschitz_upper requires a non-zero matrix");
  }
  // Iterate on the smaller Gram matrix; both share their non-zero spectrum.
  const Eigen::MatrixXd G = P.rows() < P.cols() ? Eigen::MatrixXd(P * P.transpose())
                                                : Eigen::MatrixXd(P.transpose() * P);
  Eigen::VectorXd v(G.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = G * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= 1e-6 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return (1.0 + 1e-3) * lambda;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x(i)) - theta;
    out(i) = a > 0.0 ? std::copysign(a, x(i)) : 0.0;
  }
  return out;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
  if (theta.size() != x.size()) throw std::invalid_argument("threshold size mismatch");
  if (!(theta.array() >= 0.0).all()) throw std::invalid_argument("threshold must be >= 0");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x(i)) - theta(i);
    out(i) = a > 0.0 ? std::copysign(a, x(i)) : 0.0;
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (lipschitz && !(*lipschitz > 0.0)) throw std::invalid_argument("L must be > 0");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
}

double lasso_objective(const Eigen::MatrixXd& P, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                       double mu) {
  return (y - P * z).squaredNorm() + mu * z.lpNorm<1>();
}

IstaResult ista(const Eigen::VectorXd& y, const Eigen::MatrixXd& P, const SolverConfig& cfg) {
  cfg.validate();
  if (y.size() != P.rows()) throw std::invalid_argument("measurement size does not match P");
  require_finite(y, "measurement");
  const double L = cfg.lipschitz ? *cfg.lipschitz : lipschitz_upper(P);
  const double theta = cfg.theta(L);

  IstaResult res;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(P.cols());
  Eigen::VectorXd b = P.transpose() * y / L;
  res.objective.push_back(lasso_objective(P, y, z, cfg.mu));
  for (int t = 0; t < cfg.iterations; ++t) {
    Eigen::VectorXd z_next = soft_threshold(b, theta);
    const Eigen::VectorXd step = z_next - z;
    // S * step with S = I - P^T P / L, applied without forming S.
    b += step - P.transpose() * (P * step) / L;
    z = std::move(z_next);
    res.objective.push_back(lasso_objective(P, y, z, cfg.mu));
    ++res.iterations;
    if (cfg.tolerance > 0.0 && step.lpNorm<Eigen::Infinity>() <= cfg.tolerance) break;
  }
  res.z = std::move(z);
  return res;
}

IstaResult ista(const Eigen::VectorXd& y, const ConcatDictionary& dict, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  if (!c.lipschitz) c.lipschitz = dict.lipschitz;
  return ista(y, dict.projected, c);
}

OmpResult omp(const Eigen::VectorXd& y, const Eigen::MatrixXd& P, int max_atoms, double residual_tol) {
  if (max_atoms < 1) throw std::invalid_argument("OMP needs max_atoms >= 1");
  if (y.size() != P.rows()) throw std::invalid_argument("measurement size does not match P");
  require_finite(y, "measurement");

  const Eigen::Index k = P.cols();
  const Eigen::VectorXd norms = P.colwise().norm().transpose();
  std::vector<bool> excluded(static_cast<std::size_t>(k), false);
  for (Eigen::Index j = 0; j < k; ++j) excluded[static_cast<std::size_t>(j)] = norms(j) == 0.0;

  OmpResult res;
  res.z = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd residual = y;
  Eigen::VectorXd coeffs;
  while (static_cast<int>(res.support.size()) < max_atoms && residual.norm() > residual_tol) {
    const Eigen::VectorXd corr = P.transpose() * residual;
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (excluded[static_cast<std::size_t>(j)]) continue;
      const double score = std::abs(corr(j)) / norms(j);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best < 0 || best_score <= 1e-14 * residual.norm()) break;
    excluded[static_cast<std::size_t>(best)] = true;

    std::vector<int> trial = res.support;
    trial.push_back(static_cast<int>(best));
    Eigen::MatrixXd sub(P.rows(), static_cast<Eigen::Index>(trial.size()));
    for (std::size_t i = 0; i < trial.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = P.col(trial[i]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(trial.size())) {
      res.status = OmpStatus::kDroppedRankDeficient;
      continue;
    }
    res.support = std::move(trial);
    coeffs = qr.solve(y);
    residual = y - sub * coeffs;
  }
  for (std::size_t i = 0; i < res.support.size(); ++i) res.z(res.support[i]) = coeffs(static_cast<Eigen::Index>(i));
  res.residual_norm = residual.norm();
  return res;
}

OmpResult omp(const Eigen::VectorXd& y, const ConcatDictionary& dict, int max_atoms, double residual_tol) {
  return omp(y, dict.projected, max_atoms, residual_tol);
}

Eigen::VectorXd reconstruct_patch(const Eigen::VectorXd& z, const ConcatDictionary& dict) {
  const int k = dict.clear.k();
  if (z.size() != static_cast<Eigen::Index>(k) * dict.q()) {
    throw std::invalid_argument("coefficient vector does not match the dictionary");
  }
  Eigen::VectorXd summed = Eigen::VectorXd::Zero(k);
  for (int j = 0; j < dict.q(); ++j) summed += z.segment(static_cast<Eigen::Index>(j) * k, k);
  return dict.clear.atoms * summed;
}

MuSearchResult select_mu(const ConcatDictionary& dict, const Eigen::MatrixXd& measurements,
                         const Eigen::MatrixXd& targets, int iterations, std::vector<double> grid) {
  if (measurements.cols() != targets.cols() || measurements.cols() == 0) {
    throw std::invalid_argument("select_mu needs matching, non-empty measurement/target sets");
  }
  if (grid.empty()) {
    for (int i = 0; i <= 6; ++i) grid.push_back(std::pow(10.0, -4.0 + 0.5 * i));
  }
  MuSearchResult res;
  res.grid = grid;
  res.mse.assign(grid.size(), 0.0);
  const Eigen::Index n = measurements.cols();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SolverConfig cfg;
    cfg.mu = grid[g];
    cfg.iterations = iterations;
    std::vector<double> err(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const auto r = ista(measurements.col(idx), dict, cfg);
        err[i] = (reconstruct_patch(r.z, dict) - targets.col(idx)).squaredNorm();
      }
    });
    double total = 0.0;
    for (double e : err) total += e;
    res.mse[g] = total / (static_cast<double>(n) * targets.rows());
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (res.mse[g] < res.mse[best]) best = g;
  }
  res.best_mu = grid[best];
  return res;
}

// EDDC: magic, u32 version, u32 n, u32 k, u32 q, f64[q] psi grid, u32 pattern,
// u32 phase_row, u32 phase_col, u32 patch_side, f64 L, clear D (n x k) row-major,
// concatenated D_Psi (n x qk) row-major.
void save_dictionary(const ConcatDictionary& dict, const std::filesystem::path& path) {
  BinaryWriter w;
  w.magic("EDDC");
  w.u32(kDictionaryVersion);
  w.u32(static_cast<std::uint32_t>(dict.clear.n()));
  w.u32(static_cast<std::uint32_t>(dict.clear.k()));
  w.u32(static_cast<std::uint32_t>(dict.q()));
  w.f64s(dict.psi_grid);
  w.u32(static_cast<std::uint32_t>(dict.pattern));
  w.u32(static_cast<std::uint32_t>(dict.phase_row));
  w.u32(static_cast<std::uint32_t>(dict.phase_col));
  w.u32(static_cast<std::uint32_t>(dict.clear.patch_side));
  w.f64(dict.lipschitz);
  w.matrix(dict.clear.atoms);
  w.matrix(dict.concat);
  w.save(path);
}

ConcatDictionary load_dictionary(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("EDDC");
  if (r.u32() != kDictionaryVersion) throw std::runtime_error("unsupported EDDC version");
  const int n = static_cast<int>(r.u32());
  const int k = static_cast<int>(r.u32());
  const int q = static_cast<int>(r.u32());
  ConcatDictionary cd;
  for (int j = 0; j < q; ++j) cd.psi_grid.push_back(r.f64());
  const auto pattern = r.u32();
  if (pattern > 3) throw std::runtime_error("bad CFA pattern tag in " + path.string());
  cd.pattern = static_cast<CfaPattern>(pattern);
  cd.phase_row = static_cast<int>(r.u32());
  cd.phase_col = static_cast<int>(r.u32());
  cd.clear.patch_side = static_cast<int>(r.u32());
  cd.lipschitz = r.f64();
  cd.clear.atoms = r.matrix(n, k);
  cd.concat = r.matrix(n, static_cast<Eigen::Index>(k) * q);
  for (int j = 0; j < q; ++j) cd.blurred_blocks.push_back(cd.concat.middleCols(static_cast<Eigen::Index>(j) * k, k));
  cd.bayer = bayer_projection(cd.pattern, cd.clear.patch_side, cd.phase_row, cd.phase_col);
  cd.projected = cd.bayer * cd.concat;
  cd.clear.validate();
  return cd;
}

}  // namespace edof
