// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Each criterion also has a wall-clock budget.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "CLI11.hpp"
#include "edof/fixedpoint.hpp"
#include "edof/image_io.hpp"
#include "edof/network.hpp"
#include "edof/optics.hpp"
#include "edof/pipeline.hpp"
#include "edof/sensor.hpp"
#include "edof/sparse.hpp"
#include "gradcheck.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace edof;

namespace {

constexpr double kNoise = 0.005;
constexpr int kPsi8 = 7;  // index of psi = 8 on the default grid

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<RgbImage> load_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RgbImage> out;
  for (const auto& f : files) out.push_back(read_png(f));
  return out;
}

Eigen::MatrixXd clip01(Eigen::MatrixXd m) { return m.cwiseMax(0.0).cwiseMin(1.0); }

// Shared experiment state; networks are trained on first use.
class Lab {
 public:
  explicit Lab(fs::path data) : data_(std::move(data)) {}

  const std::vector<RgbImage>& train_images() {
    if (train_.empty()) train_ = load_dir(data_ / "corpus" / "train");
    return train_;
  }
  const std::vector<RgbImage>& test_images() {
    if (test_.empty()) test_ = load_dir(data_ / "corpus" / "test");
    return test_;
  }

  const BlurKernelSet& kernels(bool coded) {
    auto& k = coded ? coded_k_ : clear_k_;
    if (!k) {
      k = build_kernel_set(OpticsSpec{}, coded ? PhaseMaskSpec::standard() : PhaseMaskSpec::clear(),
                           default_psi_grid());
    }
    return *k;
  }
  const ConcatDictionary& dict(bool coded) {
    auto& d = coded ? coded_d_ : clear_d_;
    if (!d) d = build_concat_dictionary(dct_dictionary(), kernels(coded), CfaPattern::kRGGB);
    return *d;
  }

  TrainingPairs pairs(const std::vector<RgbImage>& imgs, bool coded, std::vector<int> psi, std::size_t count,
                      std::uint64_t seed) {
    TrainingPairConfig pc;
    pc.count = count;
    pc.psi_indices = std::move(psi);
    pc.noise_sigma = kNoise;
    pc.seed = seed;
    return make_training_pairs(imgs, kernels(coded), pc);
  }

  NetworkParams init(bool coded, int T, InitMode mode) {
    InitOptions io;
    io.mode = mode;
    io.block = kPsi8;
    io.input_offset = 0.5;
    return init_from_ista(dict(coded), SolverConfig{}, T, OutputSpace::kRgb192, io);
  }

  // Networks trained on 5e4 psi=8 patches, keyed by (coded, T).
  const TrainResult& trained(bool coded, int T) {
    const auto key = std::make_pair(coded, T);
    auto it = nets_.find(key);
    if (it == nets_.end()) {
      const TrainingPairs p = pairs(train_images(), coded, {kPsi8}, 50000, 1);
      TrainConfig tc;
      tc.seed = 1;
      it = nets_.emplace(key, sgd_train(init(coded, T, InitMode::kBlock), p.inputs, p.targets, tc)).first;
    }
    return it->second;
  }

  RawBayerImage capture(const RgbImage& img, bool coded, const DepthMap& depth, std::uint64_t seed) {
    return simulate_capture(img, kernels(coded), depth, CfaPattern::kRGGB, kNoise, seed);
  }

  FixedNetwork quantized(int T) {
    const NetworkParams ycc = to_ycbcr422(trained(true, T).params);
    const TrainingPairs calib = pairs(train_images(), true, {kPsi8}, 2000, 3);
    return quantize_network(ycc, calibrate_scales(ycc, calib.inputs));
  }

 private:
  fs::path data_;
  std::vector<RgbImage> train_, test_;
  std::optional<BlurKernelSet> coded_k_, clear_k_;
  std::optional<ConcatDictionary> coded_d_, clear_d_;
  std::map<std::pair<bool, int>, TrainResult> nets_;
};

double float_psnr(const RawBayerImage& raw, const NetworkParams& net, const RgbImage& truth, int stride) {
  ReconstructionJob job;
  job.raw = &raw;
  job.network = &net;
  job.stride = stride;
  job.ground_truth = &truth;
  return *reconstruct_image(job).psnr_db;
}

double fixed_psnr(const RawBayerImage& raw, const FixedNetwork& fx, const RgbImage& truth, int stride) {
  ReconstructionJob job;
  job.raw = &raw;
  job.fixed = &fx;
  job.stride = stride;
  job.ground_truth = &truth;
  return *reconstruct_image(job).psnr_db;
}

// ---------------------------------------------------------------------------

Outcome ista_correctness() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_dist(3, 10), k_dist(2, 24), s_dist(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  int solved = 0, redrawn = 0, trace_bad = 0, obj_bad = 0, max_support = 0;
  double worst_gap = 0.0, worst_rise = 0.0;
  while (solved < 1000) {
    const int n = n_dist(rng), k = k_dist(rng);
    Eigen::MatrixXd P(n, k);
    for (Eigen::Index i = 0; i < P.size(); ++i) P.data()[i] = g(rng);
    P.colwise().normalize();
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(k);
    for (int s = std::min(s_dist(rng), k); s > 0; --s) {
      z0(std::uniform_int_distribution<int>(0, k - 1)(rng)) = (u(rng) < 0.5 ? -1 : 1) * (0.5 + 1.5 * u(rng));
    }
    Eigen::VectorXd y = P * z0;
    for (Eigen::Index i = 0; i < n; ++i) y(i) += 0.05 * g(rng);
    const double mu = (0.1 + 0.7 * u(rng)) * (2.0 * P.transpose() * y).cwiseAbs().maxCoeff();

    const oracle::LassoSolution best = oracle::lasso_exhaustive(P, y, mu, std::min(n, k));
    if (!best.certified) {
      ++redrawn;  // oracle budget exhausted; not a solver failure, draw another instance
      continue;
    }
    SolverConfig cfg;
    cfg.mu = mu;
    cfg.iterations = 200000;
    cfg.tolerance = 1e-15;
    const IstaResult r = ista(y, P, cfg);
    const double gap = r.objective.back() - best.objective;
    worst_gap = std::max(worst_gap, std::abs(gap));
    if (std::abs(gap) > 1e-6) ++obj_bad;
    double rise = 0.0;
    for (std::size_t t = 1; t < r.objective.size(); ++t) rise = std::max(rise, r.objective[t] - r.objective[t - 1]);
    worst_rise = std::max(worst_rise, rise);
    if (rise > 1e-9) ++trace_bad;
    max_support = std::max(max_support, static_cast<int>((best.z.array() != 0.0).count()));
    ++solved;
  }
  return {obj_bad == 0 && trace_bad == 0,
          fmt("1000 instances: objective misses %d (worst |gap| %.2e), trace rises %d (worst %.2e), "
              "oracle support <= %d, %d redrawn",
              obj_bad, worst_gap, trace_bad, worst_rise, max_support, redrawn)};
}

Outcome unrolling_fidelity(Lab& lab) {
  const ConcatDictionary& d = lab.dict(true);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd Y(64, 100);
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y.data()[i] = u(rng);
  const SolverConfig cfg;
  const Eigen::MatrixXd D = d.synthesis();
  double worst_z = 0.0, worst_x = 0.0;
  for (int T : {3, 5, 8, 10}) {
    const NetworkParams net = init_from_ista(d, cfg, T, OutputSpace::kRgb192);
    const ForwardTrace tr = forward_batch(net, Y);
    const Eigen::MatrixXd Z = oracle::ista_explicit_batch(d.projected, Y, cfg.mu, d.lipschitz, T - 2);
    worst_z = std::max(worst_z, (tr.z.back() - Z).cwiseAbs().maxCoeff());
    worst_x = std::max(worst_x, (tr.output - D * Z).cwiseAbs().maxCoeff());
  }
  return {worst_z <= 1e-10 && worst_x <= 1e-10,
          fmt("T in {3,5,8,10}, 100 patches: max |dz| %.2e, max |dx| %.2e", worst_z, worst_x)};
}

Outcome gradient_checks() {
  int checked = 0, skipped = 0;
  std::size_t entries = 0, failures = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 100; checked < 50; ++seed) {
    const int m = 3 + static_cast<int>(seed % 10);
    const int T = 3 + static_cast<int>((seed / 10) % 3);
    const NetworkParams net = oracle::random_network(m, T, 8, 6, seed);
    Eigen::MatrixXd Y(8, 4), X(6, 4);
    std::mt19937_64 rng(seed * 7 + 1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
    // Finite differences are meaningless across a soft-threshold kink.
    if (oracle::kink_margin(net, Y) < 1e-3) {
      ++skipped;
      continue;
    }
    const auto r = oracle::gradient_check(net, Y, X, 1e-5, 1e-4, 1e-8);
    entries += r.entries;
    failures += r.failures;
    worst = std::max(worst, r.worst_relative);
    ++checked;
  }
  return {failures == 0, fmt("50 nets (m<=12, T<=5), %zu entries, %zu failures, worst rel %.2e, %d draws near kinks",
                             entries, failures, worst, skipped)};
}

Outcome training_efficacy(Lab& lab) {
  const NetworkParams init = lab.init(true, 8, InitMode::kBlock);
  const TrainResult& res = lab.trained(true, 8);
  const TrainingPairs held = lab.pairs(lab.test_images(), true, {kPsi8}, 5000, 99);
  const double before = patch_psnr(clip01(infer_batch(init, held.inputs)), held.targets);
  const double after = patch_psnr(clip01(infer_batch(res.params, held.inputs)), held.targets);
  return {after - before >= 0.5,
          fmt("held-out patch PSNR %.2f -> %.2f dB (+%.2f), best epoch %d", before, after, after - before,
              res.best_epoch)};
}

Outcome reconstruction_margin(Lab& lab) {
  const auto& imgs = lab.test_images();
  const NetworkParams& coded = lab.trained(true, 8).params;
  const NetworkParams& clear = lab.trained(false, 8).params;
  double bil = 0.0, net = 0.0, clr = 0.0;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const DepthMap depth = DepthMap::uniform(imgs[i].width, imgs[i].height, kPsi8);
    const RawBayerImage rc = lab.capture(imgs[i], true, depth, 10 + i);
    const RawBayerImage rk = lab.capture(imgs[i], false, depth, 10 + i);
    bil += psnr(demosaic_bilinear(rc), imgs[i]);
    net += float_psnr(rc, coded, imgs[i], 2);
    clr += float_psnr(rk, clear, imgs[i], 2);
  }
  const double n = static_cast<double>(imgs.size());
  bil /= n, net /= n, clr /= n;
  return {imgs.size() >= 5 && net - bil >= 1.0 && net - clr >= 0.3,
          fmt("%zu images: bilinear %.2f, coded net %.2f (+%.2f), clear net %.2f (coded +%.2f) dB", imgs.size(),
              bil, net, net - bil, clr, net - clr)};
}

Outcome multi_depth(Lab& lab) {
  const TrainingPairs p = lab.pairs(lab.train_images(), true, {0, 1, 2, 3, 4, 5, 6, 7}, 50000, 4);
  TrainConfig tc;
  tc.seed = 4;
  const NetworkParams net = sgd_train(lab.init(true, 8, InitMode::kMarginal), p.inputs, p.targets, tc).params;
  const std::array<int, 4> psi = {1, 3, 5, 7};  // 2, 4, 6, 8
  int wins = 0, regions = 0;
  double worst = 1e9;
  std::string per_region;
  std::array<double, 4> gain{};
  const auto& imgs = lab.test_images();
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const RgbImage& img = imgs[i];
    const RawBayerImage raw = lab.capture(img, true, DepthMap::quadrants(img.width, img.height, psi), 20 + i);
    ReconstructionJob job;
    job.raw = &raw;
    job.network = &net;
    job.stride = 2;
    const RgbImage rec = reconstruct_image(job).image;
    const RgbImage blurred = demosaic_bilinear(raw);
    const int h2 = img.height / 2, w2 = img.width / 2;
    const std::array<std::array<int, 4>, 4> box = {{{0, h2, 0, w2}, {0, h2, w2, img.width},
                                                    {h2, img.height, 0, w2}, {h2, img.height, w2, img.width}}};
    for (int q = 0; q < 4; ++q) {
      const auto& b = box[q];
      const double d = psnr_region(rec, img, b[0], b[1], b[2], b[3]) - psnr_region(blurred, img, b[0], b[1], b[2], b[3]);
      gain[q] += d / static_cast<double>(imgs.size());
      worst = std::min(worst, d);
      wins += d > 0.0;
      ++regions;
    }
  }
  for (int q = 0; q < 4; ++q) per_region += fmt(" psi%d %+.2f", 2 * (q + 1), gain[q]);
  return {wins == regions, fmt("%d/%d regions improved over %zu scenes; mean gain dB:%s; worst %+.2f", wins, regions,
                               imgs.size(), per_region.c_str(), worst)};
}

Outcome fixed_point_fidelity(Lab& lab) {
  const auto& imgs = lab.test_images();
  std::string detail;
  bool ok = true;
  for (int T : {4, 8}) {
    const NetworkParams& net = lab.trained(true, T).params;
    const FixedNetwork fx = lab.quantized(T);
    double fl = 0.0, fi = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      const RawBayerImage raw =
          lab.capture(imgs[i], true, DepthMap::uniform(imgs[i].width, imgs[i].height, kPsi8), 10 + i);
      const double a = float_psnr(raw, net, imgs[i], 2), b = fixed_psnr(raw, fx, imgs[i], 2);
      fl += a;
      fi += b;
      worst = std::max(worst, a - b);
    }
    fl /= static_cast<double>(imgs.size());
    fi /= static_cast<double>(imgs.size());
    ok = ok && worst <= 0.5;
    detail += fmt("T=%d float %.2f fixed %.2f (worst loss %.2f dB); ", T, fl, fi, worst);
  }
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> word(-32768, 32767), len(1, FixedSpec::kMaxMaccLength), shift(0, 40);
  int mismatches = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const int n = len(rng);
    std::vector<std::int16_t> w(n), x(n);
    for (int i = 0; i < n; ++i) {
      w[i] = static_cast<std::int16_t>(word(rng));
      x[i] = static_cast<std::int16_t>(word(rng));
    }
    const int s = shift(rng);
    const std::int64_t init = static_cast<std::int64_t>(word(rng)) * (1 << 14);
    mismatches += fx_macc(w, x, s, init) != oracle::macc_bigint(w, x, s, init);
  }
  ok = ok && mismatches == 0;
  detail += fmt("MACC 1e5 trials, %d mismatches", mismatches);
  return {ok, detail};
}

Outcome cycle_model_check() {
  const CycleReport r = cycle_model(4, 1920, 1080, 8, 125e6);
  return {r.serial_core_cycles == 448 && r.fps >= 14.0 && r.fps <= 22.0,
          fmt("T=4 core %lld cycles, 1080p stride 8 @125 MHz: %.2f fps (pipelined bound %.2f)", r.serial_core_cycles,
              r.fps, r.fps_pipelined_bound)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Compares two artifact trees; JSON files are compared with the timestamp removed.
std::vector<std::string> tree_diff(const fs::path& a, const fs::path& b) {
  std::vector<std::string> diffs;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (count_b != files.size()) diffs.push_back("file count");
  for (const auto& rel : files) {
    if (!fs::exists(b / rel)) {
      diffs.push_back(rel.string() + " missing");
      continue;
    }
    std::string x = slurp(a / rel), y = slurp(b / rel);
    if (rel.extension() == ".json") {
      auto strip = [](const std::string& s) {
        nlohmann::json j = nlohmann::json::parse(s);
        if (j.is_object()) j.erase("timestamp");
        return j.dump();
      };
      x = strip(x);
      y = strip(y);
    }
    if (x != y) diffs.push_back(rel.string());
  }
  return diffs;
}

Outcome cli_determinism(const fs::path& cli, const fs::path& data, const fs::path& work) {
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  const fs::path corpus = root / "corpus";
  fs::create_directories(corpus);
  for (const char* f : {"00_astronaut.png", "03_rocket.png"}) fs::copy_file(data / "corpus/test" / f, corpus / f);
  const fs::path run = root / "run";
  const std::string R = run.string() + "/";
  const std::string img = (data / "corpus/test/00_astronaut.png").string();
  const std::string train = (data / "corpus/train").string();
  const std::vector<std::string> commands = {
      "simulate --input " + img + " --psi 8 --seed 7 --out " + R + "cap.pgm --preview " + R + "cap_preview.png",
      "simulate --input " + img + " --psi 2,4,6,8 --layout quadrants --noise 0.01 --seed 8 --out " + R + "quad.pgm",
      "dict build --out " + R + "d.eddc --kernels-out " + R + "k.edks",
      "dict inspect --dict " + R + "d.eddc > " + R + "inspect.json",
      "solve --dict " + R + "d.eddc --raw " + R + "cap.pgm --method ista --iters 10 --stride 8 --out " + R + "ista.png",
      "solve --dict " + R + "d.eddc --raw " + R + "cap.pgm --method omp --atoms 4 --stride 8 --out " + R + "omp.png",
      "train --dict " + R + "d.eddc --data " + train + " --out " + R + "net.ednn --T 4 --patches 2000 --epochs 2 --seed 3",
      "train --dict " + R + "d.eddc --kernels " + R + "k.edks --data " + train + " --out " + R +
          "net_m.ednn --T 3 --psi 2,8 --patches 1000 --epochs 1 --output-space ycbcr422 --seed 5",
      "quantize --net " + R + "net.ednn --calib " + train + " --patches 500 --seed 4 --out " + R + "net.edfx",
      "reconstruct --raw " + R + "cap.pgm --net " + R + "net.ednn --stride 4 --out " + R + "rec.png --gt " + img,
      "infer --raw " + R + "quad.pgm --net " + R + "net.edfx --stride 4 --out " + R + "rec_fx.png",
      "evaluate --corpus " + corpus.string() + " --net " + R + "net.ednn --fixed " + R +
          "net.edfx --stride 8 --seed 5 --out " + R + "eval.csv",
      "cycles --T 8 --stride 4 --out " + R + "cycles.json",
  };
  auto pass = [&](const char* threads, const std::string& name) -> std::string {
    fs::remove_all(run);
    fs::create_directories(run);
    setenv("EDOF_THREADS", threads, 1);
    for (const auto& c : commands) {
      const std::string line = cli.string() + " " + c + (c.find(" > ") == std::string::npos ? " > /dev/null" : "");
      const int raw = std::system(line.c_str());
      if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) return "command failed: " + c;
    }
    fs::rename(run, root / name);
    return {};
  };
  using Pass = std::pair<const char*, const char*>;
  for (const auto& [threads, name] : std::array<Pass, 3>{Pass{"1", "a"}, Pass{"1", "b"}, Pass{"4", "c"}}) {
    const std::string err = pass(threads, name);
    if (!err.empty()) {
      unsetenv("EDOF_THREADS");
      return {false, err};
    }
  }
  unsetenv("EDOF_THREADS");
  const auto rerun = tree_diff(root / "a", root / "b");
  const auto threads = tree_diff(root / "a", root / "c");
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) files += e.is_regular_file();
  std::string detail = fmt("%zu commands, %zu artifacts; rerun diffs %zu, 1-vs-4-thread diffs %zu", commands.size(),
                           files, rerun.size(), threads.size());
  for (const auto& d : rerun) detail += " [rerun:" + d + "]";
  for (const auto& d : threads) detail += " [threads:" + d + "]";
  return {rerun.empty() && threads.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run"};
  fs::path cli, data, work;
  std::vector<int> only;
  app.add_option("--cli", cli, "edof executable")->required();
  app.add_option("--data", data, "Data directory with corpus/train and corpus/test")->required();
  app.add_option("--work", work, "Scratch directory")->required();
  app.add_option("--only", only, "Run just these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  Lab lab(data);
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "ISTA correctness", 60, [] { return ista_correctness(); }},
      {2, "unrolling fidelity", 60, [&] { return unrolling_fidelity(lab); }},
      {3, "gradient checks", 120, [] { return gradient_checks(); }},
      {4, "training efficacy", 1800, [&] { return training_efficacy(lab); }},
      {5, "reconstruction margin", 600, [&] { return reconstruction_margin(lab); }},
      {6, "multi-depth blindness", 300, [&] { return multi_depth(lab); }},
      {7, "fixed-point fidelity", 600, [&] { return fixed_point_fidelity(lab); }},
      {8, "cycle model", 1, [] { return cycle_model_check(); }},
      {9, "determinism", 300, [&] { return cli_determinism(cli, data, work); }},
  };

  nlohmann::json summary = nlohmann::json::array();
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.budget_s;
    const bool ok = o.pass && in_time;
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail
              << fmt(" [%.1f s of %.0f s%s]", s, c.budget_s, in_time ? "" : ", over budget") << std::endl;
    summary.push_back({{"criterion", c.id}, {"name", c.name}, {"pass", ok}, {"detail", o.detail}, {"seconds", s}});
  }
  std::ofstream(work / "acceptance.json") << summary.dump(2) << '\n';
  return failed == 0 ? 0 : 1;
}
