#include "edof/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "edof/binary_io.hpp"

namespace edof {
namespace {

constexpr std::uint32_t kFixedVersion = 1;
constexpr std::int64_t kAccLimit = std::int64_t{1} << (FixedSpec::kAccBits - 1);
constexpr int kOverheadPerLayer = 100;

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<std::int16_t> quantize_all(const Eigen::MatrixXd& m, int frac, const char* what) {
  const double limit = 32767.5 / std::ldexp(1.0, frac);
  std::vector<std::int16_t> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!(std::abs(m(i, j)) < limit)) {
        throw std::overflow_error(std::string(what) + " exceeds the plan's representable range");
      }
      out.push_back(quantize_value(m(i, j), frac));
    }
  }
  return out;
}

std::int16_t soft_q(std::int16_t x, std::int16_t theta) {
  const std::int32_t a = std::abs(static_cast<std::int32_t>(x)) - theta;
  if (a <= 0) return 0;
  return static_cast<std::int16_t>(x > 0 ? a : -a);
}

}  // namespace

void ScalePlan::validate(int stages) const {
  for (int f : {input_frac, coeff_frac, output_frac}) {
    if (f < 0 || f >= FixedSpec::kWordBits) throw std::invalid_argument("frac_bits must be in [0, 15]");
  }
  if (static_cast<int>(weight_frac.size()) != stages) {
    throw std::invalid_argument("scale plan does not match the network depth");
  }
  for (int f : weight_frac) {
    if (f < 0 || f >= FixedSpec::kWordBits) throw std::invalid_argument("frac_bits must be in [0, 15]");
  }
}

void FixedNetwork::validate() const {
  plan.validate(depth());
  if (layers.size() < 3) throw std::invalid_argument("fixed network needs T >= 3");
  if (layers.front().cols != 64 || layers.back().rows != 128) {
    throw std::invalid_argument("fixed network must map 64 raw samples to 128 YCbCr values");
  }
  for (const auto& s : layers) {
    if (s.A.size() != static_cast<std::size_t>(s.rows) * s.cols) {
      throw std::invalid_argument("fixed stage matrix has the wrong size");
    }
    if (s.cols > FixedSpec::kMaxMaccLength) throw std::invalid_argument("stage wider than the MACC limit");
  }
  if (gamma_lut.size() != 65536) throw std::invalid_argument("gamma LUT must have 65536 entries");
}

std::int64_t rhe_shift(std::int64_t v, int s) {
  if (s <= 0) return v * (std::int64_t{1} << -s);
  const std::int64_t q = v >> s;  // floor
  const std::int64_t r = v - (q << s);
  const std::int64_t half = std::int64_t{1} << (s - 1);
  if (r > half || (r == half && (q & 1))) return q + 1;
  return q;
}

std::int16_t saturate16(std::int64_t v) {
  return static_cast<std::int16_t>(std::clamp<std::int64_t>(v, -32768, 32767));
}

std::int16_t quantize_value(double x, int frac) {
  const double scaled = std::nearbyint(std::ldexp(x, frac));  // default mode: half-to-even
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

int frac_bits_for(double m) {
  if (!std::isfinite(m)) throw std::overflow_error("non-finite activation");
  if (m == 0.0) return 14;
  const int f = 15 - static_cast<int>(std::ceil(std::log2(2.0 * m)));
  if (f < 0) throw std::overflow_error("magnitude too large for a 16-bit word");
  return std::min(f, 15);
}

ScalePlan calibrate_scales(const NetworkParams& net, const Eigen::MatrixXd& calib) {
  net.validate();
  if (calib.cols() < 100) throw std::invalid_argument("calibration needs >= 100 patches");
  ScalePlan plan;
  plan.weight_frac.assign(static_cast<std::size_t>(net.depth()), 14);
  if (max_abs(calib) == 0.0) return plan;

  const ForwardTrace t = forward_batch(net, calib);
  const auto& L = net.layers;
  auto frac_or_fail = [](double m, const std::string& where) {
    try {
      return frac_bits_for(m);
    } catch (const std::overflow_error&) {
      throw std::overflow_error("unbounded activation at " + where);
    }
  };

  plan.input_frac = frac_or_fail(
      std::max({max_abs(calib), max_abs(calib.colwise() - L[0].c), max_abs(L[0].c)}), "stage 0 input");
  double coeff = std::max(max_abs(t.u), max_abs(L[0].theta));
  for (std::size_t l = 0; l < t.b.size(); ++l) coeff = std::max({coeff, max_abs(t.b[l]), max_abs(t.z[l])});
  for (int l = 1; l < net.depth(); ++l) {
    coeff = std::max({coeff, max_abs(L[l].c), max_abs(L[l].theta)});
    if (l < net.depth() - 1) {
      coeff = std::max(coeff, max_abs((t.z[l] - t.z[l - 1]).colwise() - L[l].c));
    }
  }
  coeff = std::max(coeff, max_abs(t.z.back().colwise() - L.back().c));
  plan.coeff_frac = frac_or_fail(coeff, "coefficient stages");
  plan.output_frac = frac_or_fail(max_abs(t.output), "stage " + std::to_string(net.depth() - 1) + " output");
  for (int l = 0; l < net.depth(); ++l) {
    plan.weight_frac[static_cast<std::size_t>(l)] =
        frac_or_fail(max_abs(L[l].A), "stage " + std::to_string(l) + " weights");
  }
  return plan;
}

FixedNetwork quantize_network(const NetworkParams& net, const ScalePlan& plan) {
  net.validate();
  plan.validate(net.depth());
  if (net.output_space != OutputSpace::kYCbCr422 || net.input_dim() != 64) {
    throw std::invalid_argument("fixed-point emulation needs a 64 -> YCbCr 4:2:2 network");
  }
  FixedNetwork f;
  f.m = net.m;
  f.pattern = net.pattern;
  f.plan = plan;
  for (int l = 0; l < net.depth(); ++l) {
    const Stage& s = net.layers[static_cast<std::size_t>(l)];
    const int wf = plan.weight_frac[static_cast<std::size_t>(l)];
    FixedStage q;
    q.kind = s.kind;
    q.rows = static_cast<int>(s.A.rows());
    q.cols = static_cast<int>(s.A.cols());
    q.A = quantize_all(s.A, wf, "weight");
    q.theta = quantize_all(s.theta, plan.coeff_frac, "threshold");
    q.c = quantize_all(s.c, l == 0 ? plan.input_frac : plan.coeff_frac, "offset");
    // Worst-case accumulator: every product at full scale plus the carried b term.
    std::int64_t worst = 0;
    for (int i = 0; i < q.rows; ++i) {
      std::int64_t row = std::int64_t{32768} << std::max(wf, 0);
      for (int j = 0; j < q.cols; ++j) row += std::abs(static_cast<std::int64_t>(q.A[static_cast<std::size_t>(i) * q.cols + j])) * 32768;
      worst = std::max(worst, row);
    }
    if (worst >= kAccLimit) throw std::overflow_error("stage " + std::to_string(l) + " can overflow the accumulator");
    f.layers.push_back(std::move(q));
  }
  f.gamma_lut = gamma_lut();
  f.validate();
  return f;
}

std::int16_t fx_macc(std::span<const std::int16_t> weights, std::span<const std::int16_t> input,
                     int shift, std::int64_t accumulator_init) {
  if (weights.size() != input.size() || weights.size() > FixedSpec::kMaxMaccLength) {
    throw std::invalid_argument("fx_macc operand lengths must match and be <= 1536");
  }
  std::int64_t acc = accumulator_init;
  if (acc >= kAccLimit || acc < -kAccLimit) throw std::overflow_error("48-bit accumulator overflow");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += static_cast<std::int64_t>(weights[i]) * input[i];
    if (acc >= kAccLimit || acc < -kAccLimit) throw std::overflow_error("48-bit accumulator overflow");
  }
  return saturate16(rhe_shift(acc, shift));
}

std::vector<std::uint8_t> gamma_lut() {
  std::vector<std::uint8_t> lut(65536);
  for (int x = 0; x < 65536; ++x) {
    lut[static_cast<std::size_t>(x)] =
        static_cast<std::uint8_t>(std::lround(255.0 * std::pow(x / 65535.0, 1.0 / 2.2)));
  }
  return lut;
}

FixedPatchOutput fx_forward(const FixedNetwork& f, std::span<const std::uint16_t> raw) {
  if (raw.size() != 64) throw std::invalid_argument("fx_forward expects 64 raw samples");
  const ScalePlan& plan = f.plan;
  const auto& L = f.layers;
  const int m = f.m;

  // Raw code / 65536 at input_frac.
  std::vector<std::int16_t> x(64);
  for (std::size_t i = 0; i < 64; ++i) {
    const std::int64_t y = rhe_shift(raw[i], 16 - plan.input_frac);
    x[i] = saturate16(y - L[0].c[i]);
  }

  std::vector<std::int16_t> b(static_cast<std::size_t>(m));
  std::vector<std::int16_t> z(static_cast<std::size_t>(m), 0);
  std::vector<std::int16_t> z_next(static_cast<std::size_t>(m));
  std::vector<std::int16_t> d(static_cast<std::size_t>(m));

  const FixedStage& I = L.front();
  const int shift_i = plan.weight_frac[0] + plan.input_frac - plan.coeff_frac;
  for (int r = 0; r < m; ++r) {
    const auto row = std::span(I.A).subspan(static_cast<std::size_t>(r) * 64, 64);
    b[static_cast<std::size_t>(r)] = soft_q(fx_macc(row, x, shift_i), I.theta[static_cast<std::size_t>(r)]);
  }

  for (int l = 1; l + 1 < f.depth(); ++l) {
    const FixedStage& s = L[static_cast<std::size_t>(l)];
    const int wf = plan.weight_frac[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < z.size(); ++i) {
      z_next[i] = soft_q(b[i], s.theta[i]);
      d[i] = saturate16(static_cast<std::int64_t>(z_next[i]) - z[i] - s.c[i]);
    }
    for (int r = 0; r < m; ++r) {
      const auto row = std::span(s.A).subspan(static_cast<std::size_t>(r) * m, static_cast<std::size_t>(m));
      const std::int64_t carried = static_cast<std::int64_t>(b[static_cast<std::size_t>(r)]) << wf;
      b[static_cast<std::size_t>(r)] = fx_macc(row, d, wf, carried);
    }
    std::swap(z, z_next);
  }

  const FixedStage& F = L.back();
  for (std::size_t i = 0; i < z.size(); ++i) d[i] = saturate16(static_cast<std::int64_t>(z[i]) - F.c[i]);
  const int shift_f = plan.weight_frac.back() + plan.coeff_frac - plan.output_frac;
  FixedPatchOutput out;
  for (int r = 0; r < 128; ++r) {
    const auto row = std::span(F.A).subspan(static_cast<std::size_t>(r) * m, static_cast<std::size_t>(m));
    const std::int64_t v = fx_macc(row, d, shift_f);
    if (r < 64) {
      const std::int64_t luma = std::clamp<std::int64_t>(v * (std::int64_t{1} << (16 - plan.output_frac)), 0, 65535);
      out.luma16[static_cast<std::size_t>(r)] = static_cast<std::uint16_t>(luma);
      out.luma8[static_cast<std::size_t>(r)] = f.gamma_lut[static_cast<std::size_t>(luma)];
    } else {
      // Chroma in units of 1/256 around the 128 midpoint.
      const std::int64_t cv = 128 + rhe_shift(v, plan.output_frac - 8);
      out.chroma8[static_cast<std::size_t>(r - 64)] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(cv, 0, 255));
    }
  }
  return out;
}

Eigen::VectorXd decode_fixed_output(const FixedPatchOutput& out) {
  Eigen::VectorXd v(128);
  for (int i = 0; i < 64; ++i) v(i) = std::pow(out.luma8[static_cast<std::size_t>(i)] / 255.0, 2.2);
  for (int i = 0; i < 64; ++i) v(64 + i) = (out.chroma8[static_cast<std::size_t>(i)] - 128) / 256.0;
  return v;
}

long long patches_per_dimension(int extent, int stride) {
  if (extent < 8) throw std::invalid_argument("frame dimension must be >= 8");
  return (extent - 8 + stride - 1) / stride + 1;
}

CycleReport cycle_model(int T, int frame_w, int frame_h, int stride, double clock_hz) {
  if (stride != 2 && stride != 4 && stride != 8) throw std::invalid_argument("stride must be 2, 4 or 8");
  if (T < 3) throw std::invalid_argument("T must be >= 3");
  if (!(clock_hz > 0.0)) throw std::invalid_argument("clock must be > 0");
  CycleReport r;
  r.T = T;
  r.clock_hz = clock_hz;
  r.serial_core_cycles = 64 + 192LL * (T - 2);
  r.overhead_cycles = static_cast<long long>(kOverheadPerLayer) * T;
  r.serial_latency_cycles = r.serial_core_cycles + r.overhead_cycles;
  r.bottleneck_cycles = std::max(64, 192);
  r.bottleneck_stage = "M";
  r.patches_per_frame = patches_per_dimension(frame_w, stride) * patches_per_dimension(frame_h, stride);
  r.cycles_per_frame = r.patches_per_frame * r.bottleneck_cycles + r.serial_latency_cycles;
  r.fps = clock_hz / static_cast<double>(r.cycles_per_frame);
  r.fps_pipelined_bound = clock_hz / static_cast<double>(r.patches_per_frame * r.bottleneck_cycles);
  r.fps_overhead_per_patch =
      clock_hz / static_cast<double>(r.patches_per_frame * (r.bottleneck_cycles + kOverheadPerLayer));
  return r;
}

// EDFX: magic, u32 version, u32 T, u32 m, u8 CFA pattern, i32 input/coeff/output frac,
// i32 weight frac per stage, then per stage: u8 kind, u32 rows, u32 cols, i16 A row-major,
// u32 |theta|, i16 theta, u32 |c|, i16 c; finally the 65536-entry u8 gamma LUT.
void save_fixed_network(const FixedNetwork& f, const std::filesystem::path& path) {
  f.validate();
  BinaryWriter w;
  w.magic("EDFX");
  w.u32(kFixedVersion);
  w.u32(static_cast<std::uint32_t>(f.depth()));
  w.u32(static_cast<std::uint32_t>(f.m));
  w.u8(static_cast<std::uint8_t>(f.pattern));
  w.i32(f.plan.input_frac);
  w.i32(f.plan.coeff_frac);
  w.i32(f.plan.output_frac);
  for (int wf : f.plan.weight_frac) w.i32(wf);
  for (const auto& s : f.layers) {
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u32(static_cast<std::uint32_t>(s.rows));
    w.u32(static_cast<std::uint32_t>(s.cols));
    for (auto v : s.A) w.i16(v);
    w.u32(static_cast<std::uint32_t>(s.theta.size()));
    for (auto v : s.theta) w.i16(v);
    w.u32(static_cast<std::uint32_t>(s.c.size()));
    for (auto v : s.c) w.i16(v);
  }
  for (auto v : f.gamma_lut) w.u8(v);
  w.save(path);
}

FixedNetwork load_fixed_network(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic("EDFX");
  if (r.u32() != kFixedVersion) throw std::runtime_error("unsupported EDFX version");
  FixedNetwork f;
  const auto T = r.u32();
  f.m = static_cast<int>(r.u32());
  const auto pattern = r.u8();
  if (T < 3 || T > 4096 || pattern > 3 || f.m < 1 || f.m > FixedSpec::kMaxMaccLength) {
    throw std::runtime_error("corrupt EDFX header in " + path.string());
  }
  f.pattern = static_cast<CfaPattern>(pattern);
  f.plan.input_frac = r.i32();
  f.plan.coeff_frac = r.i32();
  f.plan.output_frac = r.i32();
  for (std::uint32_t l = 0; l < T; ++l) f.plan.weight_frac.push_back(r.i32());
  auto i16s = [&r](std::size_t n) {
    if (n > (std::size_t{1} << 24)) throw std::runtime_error("corrupt EDFX payload size");
    std::vector<std::int16_t> v(n);
    for (auto& x : v) x = r.i16();
    return v;
  };
  for (std::uint32_t l = 0; l < T; ++l) {
    FixedStage s;
    const auto kind = r.u8();
    if (kind > 2) throw std::runtime_error("corrupt EDFX stage kind in " + path.string());
    s.kind = static_cast<StageKind>(kind);
    s.rows = static_cast<int>(r.u32());
    s.cols = static_cast<int>(r.u32());
    s.A = i16s(static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols));
    s.theta = i16s(r.u32());
    s.c = i16s(r.u32());
    f.layers.push_back(std::move(s));
  }
  f.gamma_lut.resize(65536);
  for (auto& v : f.gamma_lut) v = r.u8();
  f.validate();
  return f;
}

}  // namespace edof
