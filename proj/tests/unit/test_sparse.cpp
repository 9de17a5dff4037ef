#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "edof/pipeline.hpp"
#include "edof/sparse.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace edof {
namespace {

using testing::gaussian_matrix;

const BlurKernelSet& coded_kernels() {
  static const BlurKernelSet k = build_kernel_set(OpticsSpec{}, PhaseMaskSpec::standard(), default_psi_grid());
  return k;
}

const ConcatDictionary& coded_dict() {
  static const ConcatDictionary d = build_concat_dictionary(dct_dictionary(), coded_kernels(), CfaPattern::kRGGB);
  return d;
}

SolverConfig cfg_with(double mu, int iterations, std::optional<double> L = std::nullopt) {
  SolverConfig c;
  c.mu = mu;
  c.iterations = iterations;
  c.lipschitz = L;
  return c;
}

TEST(Dictionary, DctShapeNormsAndDc) {
  const Dictionary d = dct_dictionary();
  ASSERT_EQ(d.n(), 192);
  ASSERT_EQ(d.k(), 192);
  for (int j = 0; j < d.k(); ++j) EXPECT_NEAR(d.atoms.col(j).norm(), 1.0, 1e-6);
  // DC atom is constant inside each channel.
  for (int c = 0; c < 3; ++c) {
    const auto block = d.atoms.col(0).segment(c * 64, 64);
    EXPECT_NEAR(block.maxCoeff() - block.minCoeff(), 0.0, 1e-14);
  }
}

TEST(Dictionary, CoherenceBelowOne) {
  for (int k : {192, 300}) {
    const Dictionary d = dct_dictionary(8, k);
    Eigen::MatrixXd G = d.atoms.transpose() * d.atoms;
    G.diagonal().setZero();
    EXPECT_LT(G.cwiseAbs().maxCoeff(), 1.0 - 1e-6) << "k = " << k;
  }
}

TEST(Dictionary, RejectsIncompatibleK) {
  EXPECT_THROW(dct_dictionary(8, 100), std::invalid_argument);
  EXPECT_THROW(dct_dictionary(8, 3 * 49), std::invalid_argument);
}

TEST(BlurOperator, DeltaIsIdentity) {
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(15, 15);
  delta(7, 7) = 1.0;
  EXPECT_EQ(blur_operator_matrix(delta), Eigen::MatrixXd::Identity(64, 64));
}

TEST(BlurOperator, RowsSumToOneAndMatchConvolution) {
  const auto& ks = coded_kernels();
  const Eigen::MatrixXd patch = gaussian_matrix(8, 8, 5);
  for (int j : {0, 7}) {
    for (int c = 0; c < 3; ++c) {
      const Eigen::MatrixXd H = blur_operator_matrix(ks.at(c, j));
      EXPECT_LT((H.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
      Eigen::VectorXd x(64);
      for (int y = 0; y < 8; ++y) {
        for (int xx = 0; xx < 8; ++xx) x(y * 8 + xx) = patch(y, xx);
      }
      const Eigen::MatrixXd ref = oracle::convolve_mirror_padded(patch, ks.at(c, j));
      const Eigen::VectorXd hx = H * x;
      for (int y = 0; y < 8; ++y) {
        for (int xx = 0; xx < 8; ++xx) EXPECT_NEAR(hx(y * 8 + xx), ref(y, xx), 1e-10);
      }
    }
  }
}

TEST(ConcatDictionary, DeltaSingleEntry) {
  const Dictionary d = dct_dictionary();
  const auto cd = build_concat_dictionary(d, BlurKernelSet::identity({1.0}, 15), CfaPattern::kRGGB);
  EXPECT_EQ(cd.q(), 1);
  EXPECT_LT((cd.concat - d.atoms).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((cd.projected - cd.bayer * d.atoms).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConcatDictionary, DefaultShapes) {
  const auto& cd = coded_dict();
  EXPECT_EQ(cd.q(), 8);
  EXPECT_EQ(cd.concat.rows(), 192);
  EXPECT_EQ(cd.concat.cols(), 1536);
  EXPECT_EQ(cd.projected.rows(), 64);
  EXPECT_EQ(cd.projected.cols(), 1536);
}

TEST(ConcatDictionary, BlocksAreBlurredAtoms) {
  const auto& cd = coded_dict();
  for (int j = 0; j < cd.q(); ++j) {
    const Eigen::MatrixXd want = blur_operator_rgb(coded_kernels(), j) * cd.clear.atoms;
    EXPECT_LT((cd.concat.middleCols(j * 192, 192) - want).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((cd.block_projection(j) - cd.bayer * want).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ConcatDictionary, BayerSelection) {
  for (CfaPattern p : {CfaPattern::kRGGB, CfaPattern::kGBRG}) {
    for (int phase : {0, 1}) {
      const Eigen::MatrixXd B = bayer_projection(p, 8, phase, phase);
      for (int i = 0; i < 64; ++i) {
        EXPECT_EQ(B.row(i).sum(), 1.0);
        EXPECT_EQ((B.row(i).array() != 0.0).count(), 1);
        const int ch = cfa_channel(p, phase + i / 8, phase + i % 8);
        EXPECT_EQ(B(i, ch * 64 + i), 1.0);
      }
    }
  }
}

TEST(ConcatDictionary, ContainerRoundTrip) {
  const auto& cd = coded_dict();
  const auto path = std::filesystem::temp_directory_path() / "edof_test_dict.eddc";
  save_dictionary(cd, path);
  const ConcatDictionary back = load_dictionary(path);
  EXPECT_EQ(back.psi_grid, cd.psi_grid);
  EXPECT_EQ(back.concat, cd.concat);
  EXPECT_EQ(back.projected, cd.projected);
  EXPECT_EQ(back.clear.atoms, cd.clear.atoms);
  EXPECT_EQ(back.lipschitz, cd.lipschitz);
  std::filesystem::remove(path);
}

TEST(Lipschitz, Examples) {
  const double l1 = lipschitz_upper(Eigen::MatrixXd::Identity(5, 5));
  EXPECT_GE(l1, 1.0);
  EXPECT_LE(l1, 1.002);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const double l9 = lipschitz_upper(d);
  EXPECT_GE(l9, 9.0);
  EXPECT_LE(l9, 9.01);
  EXPECT_THROW(lipschitz_upper(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(Lipschitz, MatchesDenseEigensolver) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const Eigen::MatrixXd P = gaussian_matrix(20, 50, s);
    const double ref = oracle::lambda_max_dense(P);
    const double L = lipschitz_upper(P);
    EXPECT_GE(L, ref);
    EXPECT_LT(std::abs(L - ref) / ref, 0.002);
  }
  EXPECT_GE(coded_dict().lipschitz, oracle::lambda_max_dense(coded_dict().projected));
}

TEST(SoftThreshold, Examples) {
  Eigen::VectorXd x(3);
  x << 2.0, -2.0, 0.5;
  const Eigen::VectorXd y = soft_threshold(x, 1.0);
  EXPECT_EQ(y(0), 1.0);
  EXPECT_EQ(y(1), -1.0);
  EXPECT_EQ(y(2), 0.0);
  EXPECT_EQ(soft_threshold(x, 0.0), x);
  EXPECT_THROW(soft_threshold(x, -0.1), std::invalid_argument);
  Eigen::VectorXd th(3);
  th << 0.0, 3.0, 0.1;
  const Eigen::VectorXd v = soft_threshold(x, th);
  EXPECT_EQ(v(0), 2.0);
  EXPECT_EQ(v(1), 0.0);
  EXPECT_DOUBLE_EQ(v(2), 0.4);
}

TEST(SoftThreshold, NeverReducesSparsity) {
  const Eigen::VectorXd x = gaussian_matrix(200, 1, 3).col(0);
  for (double t : {0.0, 0.3, 1.0}) {
    const Eigen::VectorXd y = soft_threshold(x, t);
    EXPECT_LE((y.array() != 0.0).count(), (x.array() != 0.0).count());
  }
}

TEST(SolverConfig, Validation) {
  EXPECT_THROW(cfg_with(-1.0, 10).validate(), std::invalid_argument);
  EXPECT_THROW(cfg_with(0.1, 0).validate(), std::invalid_argument);
  EXPECT_THROW(cfg_with(0.1, 10, 0.0).validate(), std::invalid_argument);
  EXPECT_DOUBLE_EQ(cfg_with(0.4, 1).theta(2.0), 0.1);
}

TEST(Ista, ZeroMeasurementStaysZero) {
  const IstaResult r = ista(Eigen::VectorXd::Zero(64), coded_dict(), cfg_with(1e-2, 25));
  EXPECT_EQ(r.z.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ista, ScalarClosedForm) {
  const Eigen::MatrixXd P = Eigen::MatrixXd::Ones(1, 1);
  const IstaResult r = ista(Eigen::VectorXd::Constant(1, 2.0), P, cfg_with(1.0, 50, 1.0));
  EXPECT_NEAR(r.z(0), 1.5, 1e-12);
}

TEST(Ista, MatchesExplicitAlgorithm) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::MatrixXd P = gaussian_matrix(8, 20, 100 + s);
    const Eigen::VectorXd y = gaussian_matrix(8, 1, 200 + s).col(0);
    const double L = lipschitz_upper(P);
    const IstaResult r = ista(y, P, cfg_with(0.3, 37, L));
    const Eigen::VectorXd ref = oracle::ista_explicit(P, y, 0.3, L, 37);
    EXPECT_LT((r.z - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// Random 8 x 20 instances whose minimizer has support <= 3 (others are redrawn).
TEST(Ista, ReachesExhaustiveOptimumMonotonically) {
  std::mt19937_64 rng(77);
  int certified = 0, draws = 0;
  for (std::uint64_t s = 0; certified < 20 && draws < 400; ++s, ++draws) {
    const Eigen::MatrixXd P = gaussian_matrix(8, 20, 300 + s);
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(20);
    for (int t = 0; t < 2; ++t) z0(static_cast<Eigen::Index>(rng() % 20)) = t == 0 ? 1.5 : -1.0;
    const Eigen::VectorXd y = P * z0 + 0.05 * gaussian_matrix(8, 1, 400 + s).col(0);
    const double mu = 0.3 * (2.0 * P.transpose() * y).cwiseAbs().maxCoeff();
    const auto opt = oracle::lasso_exhaustive(P, y, mu, 3);
    if (!opt.certified) continue;
    ++certified;
    SolverConfig c = cfg_with(mu, 20000);
    c.tolerance = 1e-15;
    const IstaResult r = ista(y, P, c);
    EXPECT_LE(std::abs(lasso_objective(P, y, r.z, mu) - opt.objective), 1e-6) << "seed " << s;
    for (std::size_t t = 1; t < r.objective.size(); ++t) {
      EXPECT_LE(r.objective[t], r.objective[t - 1] + 1e-9);
    }
  }
  EXPECT_EQ(certified, 20) << draws << " draws";
}

TEST(Ista, OptimumIsFixedPoint) {
  int checked = 0;
  for (std::uint64_t seed = 9; checked < 5; ++seed) {
    const Eigen::MatrixXd P = gaussian_matrix(8, 20, seed);
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(20);
    z0(3) = 2.0;
    z0(11) = -1.0;
    const Eigen::VectorXd y = P * z0;
    const double mu = 0.4 * (2.0 * P.transpose() * y).cwiseAbs().maxCoeff();
    const auto opt = oracle::lasso_exhaustive(P, y, mu, 3);
    if (!opt.certified) continue;
    const double L = lipschitz_upper(P);
    const SolverConfig c = cfg_with(mu, 1, L);
    const Eigen::VectorXd step = soft_threshold(opt.z + P.transpose() * (y - P * opt.z) / L, c.theta(L));
    EXPECT_LT((step - opt.z).cwiseAbs().maxCoeff(), 1e-10);
    ++checked;
  }
}

TEST(Ista, RejectsNonFinite) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(64);
  y(3) = std::nan("");
  EXPECT_THROW(ista(y, coded_dict(), cfg_with(1e-2, 5)), std::invalid_argument);
  EXPECT_THROW(ista(Eigen::VectorXd::Zero(10), coded_dict(), cfg_with(1e-2, 5)), std::invalid_argument);
}

// Patches that are sparse in the clear dictionary, blurred with block j: the block
// carrying the most l1 mass should sit at j or a neighbour.
TEST(Ista, DepthSelectivity) {
  const auto& cd = coded_dict();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0, total = 0;
  for (int j = 0; j < cd.q(); ++j) {
    const Eigen::MatrixXd Pj = cd.block_projection(j);
    for (int t = 0; t < 40; ++t) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(192);
      z(0) = 0.5 * 8.0;  // mid-gray DC
      for (int s = 0; s < 8; ++s) z(1 + static_cast<Eigen::Index>(rng() % 191)) = (u(rng) < 0.5 ? -1 : 1) * (0.3 + 0.7 * u(rng));
      const IstaResult res = ista(Pj * z, cd, cfg_with(1e-3, 100));
      int best = 0;
      double best_mass = -1.0;
      for (int b = 0; b < cd.q(); ++b) {
        const double m = res.z.segment(b * 192, 192).lpNorm<1>();
        if (m > best_mass) {
          best_mass = m;
          best = b;
        }
      }
      agree += std::abs(best - j) <= 1;
      ++total;
    }
  }
  const double rate = static_cast<double>(agree) / total;
  RecordProperty("selectivity", std::to_string(rate));
  EXPECT_GE(rate, 0.6);
}

TEST(Omp, ExactAtomFirst) {
  const auto& cd = coded_dict();
  const Eigen::VectorXd y = cd.projected.col(700);
  const OmpResult r = omp(y, cd, 1);
  ASSERT_EQ(r.support.size(), 1u);
  EXPECT_EQ(r.support[0], 700);
  EXPECT_LT(r.residual_norm, 1e-10);
  EXPECT_NEAR(r.z(700), 1.0, 1e-10);
}

TEST(Omp, RejectsZeroAtoms) { EXPECT_THROW(omp(Eigen::VectorXd::Ones(64), coded_dict(), 0), std::invalid_argument); }

TEST(Omp, RecoversSparseSupport) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Eigen::MatrixXd P = gaussian_matrix(64, 256, 500 + s);
    P.colwise().normalize();
    std::vector<int> truth = {static_cast<int>(s * 7 % 256), static_cast<int>((s * 31 + 90) % 256),
                              static_cast<int>((s * 13 + 200) % 256)};
    Eigen::VectorXd z = Eigen::VectorXd::Zero(256);
    z(truth[0]) = 1.0;
    z(truth[1]) = -0.8;
    z(truth[2]) = 0.6;
    const OmpResult r = omp(P * z, P, 3);
    std::vector<int> got = r.support;
    std::sort(got.begin(), got.end());
    std::sort(truth.begin(), truth.end());
    EXPECT_EQ(got, truth) << "seed " << s;
    EXPECT_LT((r.z - z).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Omp, StopsAtResidualTolerance) {
  const auto& cd = coded_dict();
  const OmpResult r = omp(cd.projected.col(5) * 2.0, cd, 10, 1e-8);
  EXPECT_EQ(r.support.size(), 1u);
}

TEST(Omp, DropsRankDeficientAtoms) {
  Eigen::MatrixXd P = gaussian_matrix(4, 6, 3);
  P.col(1) = P.col(0);  // duplicate atom
  P.colwise().normalize();
  const Eigen::VectorXd y = P.col(0) + 0.5 * P.col(3) + 0.1 * gaussian_matrix(4, 1, 8).col(0);
  const OmpResult r = omp(y, P, 4);
  for (std::size_t a = 0; a < r.support.size(); ++a) {
    for (std::size_t b = a + 1; b < r.support.size(); ++b) {
      EXPECT_FALSE((r.support[a] == 0 && r.support[b] == 1) || (r.support[a] == 1 && r.support[b] == 0));
    }
  }
  EXPECT_TRUE(r.z.allFinite());
}

TEST(ReconstructPatch, Definition) {
  const auto& cd = coded_dict();
  EXPECT_EQ(reconstruct_patch(Eigen::VectorXd::Zero(1536), cd), Eigen::VectorXd::Zero(192));
  for (int j : {0, 3, 7}) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(1536);
    z(j * 192 + 17) = 1.0;
    EXPECT_LT((reconstruct_patch(z, cd) - cd.clear.atoms.col(17)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ReconstructPatch, BeatsDemosaicedBlur) {
  const auto& cd = coded_dict();
  const auto img = read_png(testing::corpus("test").front());
  const int j = 7;
  const Eigen::MatrixXd HB = cd.bayer * blur_operator_rgb(coded_kernels(), j);
  double err_sparse = 0.0, err_blur = 0.0;
  for (int r = 16; r < 112; r += 24) {
    for (int c = 16; c < 112; c += 24) {
      const Eigen::VectorXd x = rgb_patch(img, r, c);
      const Eigen::VectorXd y = HB * x;
      const Eigen::VectorXd xh = reconstruct_patch(ista(y, cd, SolverConfig{}).z, cd);
      RawBayerImage raw(8, 8, cd.pattern);
      for (int k = 0; k < 64; ++k) raw.samples[k] = y(k);
      const RgbImage dm = demosaic_bilinear(raw);
      const Eigen::VectorXd xb = rgb_patch(dm, 0, 0);
      err_sparse += (xh.cwiseMax(0.0).cwiseMin(1.0) - x).squaredNorm();
      err_blur += (xb - x).squaredNorm();
    }
  }
  EXPECT_LT(err_sparse, err_blur);
}

TEST(SelectMu, PicksGridMinimum) {
  const auto& cd = coded_dict();
  const auto img = read_png(testing::corpus("test")[1]);
  Eigen::MatrixXd Y(64, 12), X(192, 12);
  const Eigen::MatrixXd HB = cd.bayer * blur_operator_rgb(coded_kernels(), 4);
  for (int i = 0; i < 12; ++i) {
    X.col(i) = rgb_patch(img, 8 * i, 4 + 8 * i);
    Y.col(i) = HB * X.col(i);
  }
  const MuSearchResult r = select_mu(cd, Y, X, 30);
  ASSERT_EQ(r.grid.size(), 7u);
  EXPECT_NEAR(r.grid.front(), 1e-4, 1e-16);
  EXPECT_NEAR(r.grid.back(), 1e-1, 1e-15);
  const auto best = std::min_element(r.mse.begin(), r.mse.end()) - r.mse.begin();
  EXPECT_EQ(r.best_mu, r.grid[static_cast<std::size_t>(best)]);
}

}  // namespace
}  // namespace edof
