#include <random>

#include <benchmark/benchmark.h>

#include "edof/fixedpoint.hpp"
#include "edof/network.hpp"
#include "edof/optics.hpp"
#include "edof/pipeline.hpp"
#include "edof/sensor.hpp"
#include "edof/sparse.hpp"

using namespace edof;

namespace {

const BlurKernelSet& kernels() {
  static const BlurKernelSet k = build_kernel_set(OpticsSpec{}, PhaseMaskSpec::standard(), default_psi_grid());
  return k;
}

const ConcatDictionary& dict() {
  static const ConcatDictionary d = build_concat_dictionary(dct_dictionary(), kernels(), CfaPattern::kRGGB);
  return d;
}

Eigen::MatrixXd random_patches(int cols) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(64, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

RgbImage random_scene(int side) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RgbImage img(side, side);
  for (auto& p : img.planes) {
    for (auto& v : p) v = u(rng);
  }
  return img;
}

void BM_Psf(benchmark::State& state) {
  const Pupil p = pupil_function(OpticsSpec{}, PhaseMaskSpec::standard(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(psf_from_pupil(p, 4.0, 15));
}
BENCHMARK(BM_Psf)->Unit(benchmark::kMillisecond);

void BM_Ista(benchmark::State& state) {
  const Eigen::VectorXd y = random_patches(1).col(0);
  SolverConfig cfg;
  cfg.iterations = static_cast<int>(state.range(0));
  const ConcatDictionary& d = dict();
  for (auto _ : state) benchmark::DoNotOptimize(ista(y, d, cfg).z);
}
BENCHMARK(BM_Ista)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  InitOptions io;
  io.mode = InitMode::kBlock;
  const NetworkParams net = init_from_ista(dict(), SolverConfig{}, static_cast<int>(state.range(0)),
                                           OutputSpace::kRgb192, io);
  const Eigen::MatrixXd Y = random_patches(256);
  for (auto _ : state) benchmark::DoNotOptimize(infer_batch(net, Y));
  state.SetItemsProcessed(state.iterations() * Y.cols());
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FixedForward(benchmark::State& state) {
  InitOptions io;
  io.mode = InitMode::kBlock;
  io.input_offset = 0.5;
  const NetworkParams net = to_ycbcr422(
      init_from_ista(dict(), SolverConfig{}, static_cast<int>(state.range(0)), OutputSpace::kRgb192, io));
  const Eigen::MatrixXd calib = random_patches(200);
  const FixedNetwork fx = quantize_network(net, calibrate_scales(net, calib));
  std::vector<std::uint16_t> raw(64);
  for (int i = 0; i < 64; ++i) raw[i] = static_cast<std::uint16_t>(calib(i, 0) * 65535.0);
  for (auto _ : state) benchmark::DoNotOptimize(fx_forward(fx, raw));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FixedForward)->Arg(4)->Arg(8);

void BM_Reconstruct(benchmark::State& state) {
  InitOptions io;
  io.mode = InitMode::kBlock;
  io.input_offset = 0.5;
  const NetworkParams net = init_from_ista(dict(), SolverConfig{}, 8, OutputSpace::kRgb192, io);
  const RgbImage scene = random_scene(128);
  const RawBayerImage raw =
      simulate_capture(scene, kernels(), DepthMap::uniform(128, 128, 7), CfaPattern::kRGGB, 0.005, 1);
  ReconstructionJob job;
  job.raw = &raw;
  job.network = &net;
  job.stride = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_image(job).image);
}
BENCHMARK(BM_Reconstruct)->Arg(8)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
