#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edof/network.hpp"

namespace edof {

/// Two's-complement Q(15-f).f words, 48-bit accumulation, round-half-to-even, saturation.
struct FixedSpec {
  static constexpr int kWordBits = 16;
  static constexpr int kAccBits = 48;
  static constexpr int kMaxMaccLength = 1536;
};

/// Fraction bits at each tensor boundary (all scales are powers of two).
struct ScalePlan {
  /// I-stage input (y - c).
  int input_frac = 14;
  /// Coefficient domain shared by u, b, z, theta and every c on the coefficient side.
  int coeff_frac = 14;
  /// F-stage output (Y, Cb, Cr).
  int output_frac = 14;
  /// Per-stage weight fraction bits.
  std::vector<int> weight_frac;

  void validate(int stages) const;
};

struct FixedStage {
  StageKind kind = StageKind::kM;
  int rows = 0;
  int cols = 0;
  /// Row-major.
  std::vector<std::int16_t> A;
  std::vector<std::int16_t> theta;
  std::vector<std::int16_t> c;
};

struct FixedNetwork {
  int m = 0;
  CfaPattern pattern = CfaPattern::kRGGB;
  ScalePlan plan;
  std::vector<FixedStage> layers;
  std::vector<std::uint8_t> gamma_lut;

  int depth() const { return static_cast<int>(layers.size()); }
  void validate() const;
};

/// floor(v / 2^s) rounded half-to-even for s > 0; v * 2^-s for s <= 0.
std::int64_t rhe_shift(std::int64_t v, int s);
std::int16_t saturate16(std::int64_t v);
/// Round-half-to-even quantization of x * 2^frac with saturation.
std::int16_t quantize_value(double x, int frac);
/// Fraction bits keeping max_abs within half the representable range (14 when max_abs == 0).
/// Throws std::overflow_error when no fraction can hold it.
int frac_bits_for(double max_abs);

/// Records max |activation| per boundary over `calib` (columns are raw patches) and
/// derives the plan. Needs >= 100 patches. An all-zero set yields the default plan.
ScalePlan calibrate_scales(const NetworkParams& net, const Eigen::MatrixXd& calib);

/// Network must be in YCbCr 4:2:2 output space.
FixedNetwork quantize_network(const NetworkParams& net, const ScalePlan& plan);

/// sat16(rhe_shift(acc_init + sum_i w_i x_i, shift)) with exact 48-bit accumulation.
/// Throws std::overflow_error if the accumulator leaves the signed 48-bit range.
std::int16_t fx_macc(std::span<const std::int16_t> weights, std::span<const std::int16_t> input,
                     int shift, std::int64_t accumulator_init = 0);

/// round(255 * (x / 65535)^(1/2.2)) over all 16-bit inputs.
std::vector<std::uint8_t> gamma_lut();

struct FixedPatchOutput {
  std::array<std::uint16_t, 64> luma16{};
  /// Gamma-encoded luma via the LUT.
  std::array<std::uint8_t, 64> luma8{};
  /// 32 Cb followed by 32 Cr, offset 128, row-major over 8 x 4 pairs.
  std::array<std::uint8_t, 64> chroma8{};
};

/// Bit-exact calculator chain on one 8x8 raw patch of 16-bit codes.
FixedPatchOutput fx_forward(const FixedNetwork& fnet, std::span<const std::uint16_t> raw_patch);

/// Per-patch float equivalents of the 8-bit outputs: Y in [0,1] (linear), Cb, Cr centered.
Eigen::VectorXd decode_fixed_output(const FixedPatchOutput& out);

struct CycleReport {
  int T = 0;
  /// 64 + 192 (T - 2).
  long long serial_core_cycles = 0;
  /// 100 cycles per layer.
  long long overhead_cycles = 0;
  long long serial_latency_cycles = 0;
  /// max(64, 192) cycles per patch once the pipeline is full.
  long long bottleneck_cycles = 0;
  std::string bottleneck_stage;
  long long patches_per_frame = 0;
  /// patches * bottleneck + serial latency (fill/drain once per frame).
  long long cycles_per_frame = 0;
  double clock_hz = 0.0;
  double fps = 0.0;
  /// Pure pipelined bound, clock / (patches * bottleneck).
  double fps_pipelined_bound = 0.0;
  /// Pessimistic variant charging the full per-layer overhead on every patch.
  double fps_overhead_per_patch = 0.0;
};

long long patches_per_dimension(int extent, int stride);

CycleReport cycle_model(int T, int frame_w, int frame_h, int stride, double clock_hz);

/// "EDFX" container.
void save_fixed_network(const FixedNetwork& fnet, const std::filesystem::path& path);
FixedNetwork load_fixed_network(const std::filesystem::path& path);

}  // namespace edof
