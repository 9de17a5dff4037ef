// edof: command-line surface for simulation, dictionary building, solving, training,
// quantization, reconstruction, evaluation and the cycle model.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "config.hpp"
#include "edof/binary_io.hpp"
#include "edof/fixedpoint.hpp"
#include "edof/image_io.hpp"
#include "edof/pipeline.hpp"
#include "edof/sensor.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace edof::cli {
namespace {

/// A named input that does not exist.
class MissingFile : public std::runtime_error {
 public:
  explicit MissingFile(const fs::path& p) : std::runtime_error("missing file: " + p.string()), path(p) {}
  fs::path path;
};

const fs::path& need(const fs::path& p) {
  if (!fs::exists(p)) throw MissingFile(p);
  return p;
}

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(need(dir))) throw std::invalid_argument("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw std::invalid_argument("no PNG images in " + dir.string());
  return out;
}

std::vector<RgbImage> load_images(const std::vector<fs::path>& files) {
  std::vector<RgbImage> v;
  for (const auto& f : files) v.push_back(read_png(f));
  return v;
}

std::string container_magic(const fs::path& p) {
  std::ifstream in(need(p), std::ios::binary);
  char m[4] = {};
  in.read(m, 4);
  return std::string(m, static_cast<std::size_t>(in.gcount()));
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << std::endl; }

// Options shared by subcommands that build optics.
struct Common {
  std::string config_path;
  std::map<std::string, std::string> optics;
  std::string mask;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "JSON experiment config");
    for (const char* f : {"aperture_radius", "wavelengths", "nominal_depth", "focal_length", "image_distance",
                          "pupil_grid_size", "kernel_size", "pixel_pitch"}) {
      app->add_option(std::string("--optics.") + f, optics[f], std::string("Override optics.") + f);
    }
    app->add_option("--mask", mask, "Phase mask: standard|on | clear|off")
        ->check(CLI::IsMember({"standard", "clear", "on", "off"}));
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(need(config_path));
    for (const auto& [field, value] : optics) {
      if (!value.empty()) set_optics_field(cfg.optics, field, value);
    }
    if (mask == "clear" || mask == "off") cfg.mask.enabled = false;
    if (mask == "standard" || mask == "on") cfg.mask.enabled = true;
    cfg.validate();
    return cfg;
  }

  std::vector<fs::path> inputs() const {
    if (config_path.empty()) return {};
    return {config_path};
  }
};

BlurKernelSet kernels_for(const ExperimentConfig& cfg, const std::string& kernels_path) {
  if (!kernels_path.empty()) return load_kernel_set(need(kernels_path));
  return build_kernel_set(cfg.optics, cfg.mask, cfg.psi_grid);
}

std::vector<int> indices_on_grid(const std::vector<double>& grid, const std::string& psi_text) {
  std::vector<int> idx;
  for (double p : parse_number_list(psi_text)) idx.push_back(psi_index(grid, p));
  return idx;
}

// ---------------------------------------------------------------------------

int run_simulate(const Common& common, const fs::path& image, const std::string& psi_text,
                 const std::string& depth_map, const std::string& layout, double noise, bool noise_set,
                 std::uint64_t seed, const fs::path& out, const std::string& preview) {
  ExperimentConfig cfg = common.resolve();
  const RgbImage scene = read_png(need(image));
  if (!noise_set) noise = cfg.noise_sigma;

  BlurKernelSet kernels;
  DepthMap depth;
  if (!depth_map.empty()) {
    const GrayImage map = read_pgm(need(depth_map));
    if (map.width != scene.width || map.height != scene.height) {
      throw std::invalid_argument("depth map size differs from the image");
    }
    kernels = build_kernel_set(cfg.optics, cfg.mask, cfg.psi_grid);
    depth = DepthMap::uniform(scene.width, scene.height, 0);
    for (std::size_t i = 0; i < map.samples.size(); ++i) {
      if (map.samples[i] >= kernels.psi_grid.size()) throw std::invalid_argument("depth map index outside the psi grid");
      depth.index[i] = map.samples[i];
    }
  } else {
    const auto psi = parse_number_list(psi_text);
    std::vector<double> grid = psi;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    kernels = build_kernel_set(cfg.optics, cfg.mask, grid);
    std::vector<int> idx;
    for (double p : psi) idx.push_back(psi_index(grid, p));
    if (layout == "quadrants") {
      if (idx.size() != 4) throw std::invalid_argument("quadrant layout needs four psi values");
      depth = DepthMap::quadrants(scene.width, scene.height, {idx[0], idx[1], idx[2], idx[3]});
    } else {
      depth = strip_depth_map(scene.width, scene.height, idx);
    }
  }
  const RawBayerImage raw = simulate_capture(scene, kernels, depth, cfg.pattern, noise, seed);
  write_raw(raw, out);

  Manifest m;
  m.subcommand = "simulate";
  m.arguments = {{"image", image.string()}, {"psi", psi_text}, {"depth_map", depth_map}, {"layout", layout},
                 {"noise", noise}, {"out", out.string()}};
  m.config = config_to_json(cfg);
  m.seed = seed;
  m.inputs = common.inputs();
  m.inputs.push_back(image);
  if (!depth_map.empty()) m.inputs.push_back(depth_map);
  m.outputs = {out, raw_sidecar_path(out)};
  if (!preview.empty()) {
    write_png(demosaic_bilinear(raw), preview);
    m.outputs.push_back(preview);
  }
  write_manifest(m, out);
  print_json({{"raw", out.string()}, {"width", raw.width}, {"height", raw.height},
              {"pattern", std::string(to_string(raw.pattern))}});
  return 0;
}

int run_dict_build(const Common& common, int k, const fs::path& out, const std::string& kernels_out) {
  ExperimentConfig cfg = common.resolve();
  if (k > 0) cfg.dictionary_atoms = k;
  const BlurKernelSet kernels = build_kernel_set(cfg.optics, cfg.mask, cfg.psi_grid);
  const ConcatDictionary dict =
      build_concat_dictionary(dct_dictionary(8, cfg.dictionary_atoms), kernels, cfg.pattern);
  save_dictionary(dict, out);
  Manifest m;
  m.subcommand = "dict build";
  m.arguments = {{"k", cfg.dictionary_atoms}, {"out", out.string()}, {"kernels_out", kernels_out}};
  m.config = config_to_json(cfg);
  m.seed = cfg.seed;
  m.inputs = common.inputs();
  m.outputs = {out};
  if (!kernels_out.empty()) {
    save_kernel_set(kernels, kernels_out);
    m.outputs.push_back(kernels_out);
  }
  m.report = {{"n", dict.clear.n()}, {"k", dict.clear.k()}, {"q", dict.q()}, {"lipschitz", dict.lipschitz}};
  write_manifest(m, out);
  print_json(m.report);
  return 0;
}

int run_dict_inspect(const fs::path& path) {
  const ConcatDictionary dict = load_dictionary(need(path));
  const Eigen::MatrixXd G = dict.clear.atoms.transpose() * dict.clear.atoms;
  const double coherence = (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  print_json({{"n", dict.clear.n()},
              {"k", dict.clear.k()},
              {"q", dict.q()},
              {"psi_grid", dict.psi_grid},
              {"pattern", std::string(to_string(dict.pattern))},
              {"measurement_dim", dict.measurement_dim()},
              {"atom_count", dict.atom_count()},
              {"lipschitz", dict.lipschitz},
              {"mutual_coherence", coherence}});
  return 0;
}

int run_solve(const Common& common, const fs::path& dict_path, const fs::path& raw_path, const fs::path& out,
              int stride, double mu, int iterations, const std::string& method, int atoms, const std::string& gt) {
  ExperimentConfig cfg = common.resolve();
  if (mu >= 0.0) cfg.solver.mu = mu;
  if (iterations > 0) cfg.solver.iterations = iterations;
  const ConcatDictionary dict = load_dictionary(need(dict_path));
  const RawBayerImage raw = read_raw(need(raw_path));
  RgbImage truth;
  if (!gt.empty()) truth = read_png(need(gt));
  const RgbImage* truth_ptr = gt.empty() ? nullptr : &truth;
  const auto rep = method == "omp" ? reconstruct_with_omp(raw, dict, atoms, stride, truth_ptr)
                                   : reconstruct_with_solver(raw, dict, cfg.solver, stride, truth_ptr);
  write_png(rep.image, out);
  Manifest m;
  m.subcommand = "solve";
  m.arguments = {{"dict", dict_path.string()}, {"raw", raw_path.string()}, {"out", out.string()},
                 {"stride", stride}, {"method", method}, {"atoms", atoms}, {"gt", gt}};
  m.config = config_to_json(cfg);
  m.seed = cfg.seed;
  m.inputs = common.inputs();
  m.inputs.insert(m.inputs.end(), {dict_path, raw_path});
  m.outputs = {out};
  m.report = {{"patches", rep.patches}, {"mode", rep.mode}};
  if (rep.psnr_db) m.report["psnr_db"] = *rep.psnr_db;
  write_manifest(m, out);
  ordered_json r = m.report;
  r["seconds"] = rep.seconds;
  print_json(r);
  return 0;
}

struct TrainArgs {
  std::string dict;
  std::string net;
  std::string kernels;
  std::string data;
  fs::path out;
  int T = 8;
  std::size_t patches = 50000;
  std::string psi = "8";
  std::string init;
  double lr = -1.0;
  int epochs = -1;
  int batch = -1;
  std::uint64_t seed = 0;
  double noise = -1.0;
  double mu = -1.0;
  std::string output_space = "rgb192";
  double input_offset = 0.5;
};

int run_train(const Common& common, const TrainArgs& a) {
  ExperimentConfig cfg = common.resolve();
  if (a.lr >= 0.0) cfg.train.learning_rate = a.lr;
  if (a.epochs >= 0) cfg.train.epochs = a.epochs;
  if (a.batch > 0) cfg.train.batch_size = a.batch;
  if (a.mu >= 0.0) cfg.solver.mu = a.mu;
  if (a.noise >= 0.0) cfg.noise_sigma = a.noise;
  cfg.train.seed = a.seed;
  fs::path data = a.data.empty() ? cfg.train_corpus : fs::path(a.data);
  if (data.empty()) throw std::invalid_argument("train needs --data or corpus.train in the config");
  cfg.train.dataset_path = data;
  cfg.validate();
  if (a.dict.empty() == a.net.empty()) throw std::invalid_argument("train needs exactly one of --dict or --net");

  const BlurKernelSet kernels = kernels_for(cfg, a.kernels);
  const std::vector<int> idx = indices_on_grid(kernels.psi_grid, a.psi);
  NetworkParams init;
  if (!a.dict.empty()) {
    const ConcatDictionary dict = load_dictionary(need(a.dict));
    InitOptions io;
    const std::string mode = a.init.empty() ? (idx.size() == 1 ? "block" : "marginal") : a.init;
    io.mode = parse_init_mode(mode);
    io.block = idx.size() == 1 ? idx.front() : -1;
    io.input_offset = a.input_offset;
    init = init_from_ista(dict, cfg.solver, a.T, OutputSpace::kRgb192, io);
  } else {
    init = load_network(need(a.net));
    if (init.output_space != OutputSpace::kRgb192) throw std::invalid_argument("--net must be an RGB192 network");
  }

  TrainingPairConfig pc;
  pc.count = a.patches;
  pc.psi_indices = idx;
  pc.pattern = init.pattern;
  pc.noise_sigma = cfg.noise_sigma;
  pc.seed = a.seed;
  const std::vector<fs::path> files = png_files(data);
  const TrainingPairs pairs = make_training_pairs(load_images(files), kernels, pc);
  TrainResult res = sgd_train(init, pairs.inputs, pairs.targets, cfg.train);
  NetworkParams final_net = res.params;
  const OutputSpace space = parse_output_space(a.output_space);
  if (space == OutputSpace::kYCbCr422) final_net = to_ycbcr422(final_net);
  save_network(final_net, a.out);

  Manifest m;
  m.subcommand = "train";
  m.arguments = {{"dict", a.dict}, {"net", a.net}, {"kernels", a.kernels}, {"data", data.string()},
                 {"out", a.out.string()}, {"T", a.T}, {"patches", a.patches}, {"psi", a.psi},
                 {"init", a.init}, {"output_space", a.output_space}, {"input_offset", a.input_offset}};
  m.config = config_to_json(cfg);
  m.seed = a.seed;
  m.inputs = common.inputs();
  if (!a.dict.empty()) m.inputs.push_back(a.dict);
  if (!a.net.empty()) m.inputs.push_back(a.net);
  m.inputs.insert(m.inputs.end(), files.begin(), files.end());
  m.outputs = {a.out};
  m.report = {{"initial_train_loss", res.initial_train_loss},
              {"initial_validation_loss", res.initial_validation_loss},
              {"train_loss", res.train_loss},
              {"validation_loss", res.validation_loss},
              {"best_epoch", res.best_epoch}};
  write_manifest(m, a.out);
  print_json(m.report);
  return 0;
}

int run_quantize(const Common& common, const fs::path& net_path, const fs::path& calib, const fs::path& out,
                 std::size_t patches, const std::string& psi, std::uint64_t seed, double noise,
                 const std::string& kernels_path) {
  ExperimentConfig cfg = common.resolve();
  if (noise >= 0.0) cfg.noise_sigma = noise;
  NetworkParams net = load_network(need(net_path));
  if (net.output_space == OutputSpace::kRgb192) net = to_ycbcr422(net);
  const BlurKernelSet kernels = kernels_for(cfg, kernels_path);
  TrainingPairConfig pc;
  pc.count = patches;
  pc.psi_indices = indices_on_grid(kernels.psi_grid, psi);
  pc.pattern = net.pattern;
  pc.noise_sigma = cfg.noise_sigma;
  pc.seed = seed;
  const std::vector<fs::path> files = png_files(calib);
  const TrainingPairs pairs = make_training_pairs(load_images(files), kernels, pc);
  const ScalePlan plan = calibrate_scales(net, pairs.inputs);
  const FixedNetwork fx = quantize_network(net, plan);
  save_fixed_network(fx, out);

  Manifest m;
  m.subcommand = "quantize";
  m.arguments = {{"net", net_path.string()}, {"calib", calib.string()}, {"out", out.string()},
                 {"patches", patches}, {"psi", psi}};
  m.config = config_to_json(cfg);
  m.seed = seed;
  m.inputs = common.inputs();
  m.inputs.push_back(net_path);
  m.inputs.insert(m.inputs.end(), files.begin(), files.end());
  m.outputs = {out};
  m.report = {{"input_frac", plan.input_frac}, {"coeff_frac", plan.coeff_frac},
              {"output_frac", plan.output_frac}, {"weight_frac", plan.weight_frac}};
  write_manifest(m, out);
  print_json(m.report);
  return 0;
}

int run_reconstruct(const std::string& name, const fs::path& raw_path, const fs::path& net_path, int stride,
                    const fs::path& out, const std::string& gt) {
  const RawBayerImage raw = read_raw(need(raw_path));
  RgbImage truth;
  if (!gt.empty()) truth = read_png(need(gt));
  ReconstructionJob job;
  job.raw = &raw;
  job.stride = stride;
  job.ground_truth = gt.empty() ? nullptr : &truth;
  NetworkParams net;
  FixedNetwork fx;
  const std::string magic = container_magic(net_path);
  if (magic == "EDNN") {
    net = load_network(net_path);
    job.network = &net;
  } else if (magic == "EDFX") {
    fx = load_fixed_network(net_path);
    job.fixed = &fx;
  } else {
    throw std::invalid_argument("not an EDNN or EDFX container: " + net_path.string());
  }
  const ReconstructionReport rep = reconstruct_image(job);
  write_png(rep.image, out);

  Manifest m;
  m.subcommand = name;
  m.arguments = {{"raw", raw_path.string()}, {"net", net_path.string()}, {"stride", stride},
                 {"out", out.string()}, {"gt", gt}};
  m.config = ordered_json::object();
  m.inputs = {raw_path, net_path};
  if (!gt.empty()) m.inputs.push_back(gt);
  m.outputs = {out};
  m.report = {{"patches", rep.patches}, {"mode", rep.mode}};
  if (rep.psnr_db) m.report["psnr_db"] = *rep.psnr_db;
  write_manifest(m, out);
  ordered_json r;
  r["psnr_db"] = rep.psnr_db ? ordered_json(*rep.psnr_db) : ordered_json(nullptr);
  r["seconds"] = rep.seconds;
  r["patches"] = rep.patches;
  r["mode"] = rep.mode;
  print_json(r);
  return 0;
}

int run_evaluate(const Common& common, const std::string& corpus, const std::string& net_path,
                 const std::string& fixed_path, const std::string& dict_path, const std::string& psi,
                 double noise, std::uint64_t seed, int stride, const fs::path& out) {
  ExperimentConfig cfg = common.resolve();
  if (noise >= 0.0) cfg.noise_sigma = noise;
  const fs::path dir = corpus.empty() ? cfg.test_corpus : fs::path(corpus);
  if (dir.empty()) throw std::invalid_argument("evaluate needs --corpus or corpus.test in the config");
  const std::vector<fs::path> files = png_files(dir);

  NetworkParams net;
  FixedNetwork fx;
  ConcatDictionary dict;
  if (!net_path.empty()) net = load_network(need(net_path));
  if (!fixed_path.empty()) fx = load_fixed_network(need(fixed_path));
  if (!dict_path.empty()) dict = load_dictionary(need(dict_path));

  const auto psi_values = parse_number_list(psi);
  std::vector<double> grid = psi_values;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const BlurKernelSet kernels = build_kernel_set(cfg.optics, cfg.mask, grid);
  std::vector<int> idx;
  for (double p : psi_values) idx.push_back(psi_index(grid, p));

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write: " + out.string());
  csv << "image,method,psnr_db\n";
  ordered_json summary = ordered_json::object();
  std::map<std::string, std::pair<double, int>> totals;
  auto row = [&](const fs::path& f, const std::string& method, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    csv << f.filename().string() << ',' << method << ',' << buf << '\n';
    totals[method].first += v;
    totals[method].second += 1;
  };
  for (std::size_t i = 0; i < files.size(); ++i) {
    const RgbImage truth = read_png(files[i]);
    const DepthMap depth = strip_depth_map(truth.width, truth.height, idx);
    const RawBayerImage raw = simulate_capture(truth, kernels, depth, cfg.pattern, cfg.noise_sigma, seed + i);
    row(files[i], "blurred_bilinear", psnr(demosaic_bilinear(raw), truth));
    ReconstructionJob job;
    job.raw = &raw;
    job.stride = stride;
    job.ground_truth = &truth;
    if (!net_path.empty()) {
      job.network = &net;
      row(files[i], "network", *reconstruct_image(job).psnr_db);
      job.network = nullptr;
    }
    if (!fixed_path.empty()) {
      job.fixed = &fx;
      row(files[i], "network_fixed", *reconstruct_image(job).psnr_db);
      job.fixed = nullptr;
    }
    if (!dict_path.empty()) {
      row(files[i], "ista", *reconstruct_with_solver(raw, dict, cfg.solver, stride, &truth).psnr_db);
    }
  }
  csv.close();
  for (const auto& [method, t] : totals) summary[method] = t.first / t.second;

  Manifest m;
  m.subcommand = "evaluate";
  m.arguments = {{"corpus", dir.string()}, {"net", net_path}, {"fixed", fixed_path}, {"dict", dict_path},
                 {"psi", psi}, {"stride", stride}, {"out", out.string()}};
  m.config = config_to_json(cfg);
  m.seed = seed;
  m.inputs = common.inputs();
  m.inputs.insert(m.inputs.end(), files.begin(), files.end());
  for (const auto& p : {net_path, fixed_path, dict_path}) {
    if (!p.empty()) m.inputs.push_back(p);
  }
  m.outputs = {out};
  m.report = {{"mean_psnr_db", summary}};
  write_manifest(m, out);
  print_json(m.report);
  return 0;
}

int run_cycles(int T, int width, int height, int stride, double clock, const std::string& out) {
  const CycleReport r = cycle_model(T, width, height, stride, clock);
  ordered_json j{{"T", r.T},
                 {"serial_core_cycles", r.serial_core_cycles},
                 {"overhead_cycles", r.overhead_cycles},
                 {"serial_latency_cycles", r.serial_latency_cycles},
                 {"bottleneck_cycles", r.bottleneck_cycles},
                 {"bottleneck_stage", r.bottleneck_stage},
                 {"patches_per_frame", r.patches_per_frame},
                 {"cycles_per_frame", r.cycles_per_frame},
                 {"clock_hz", r.clock_hz},
                 {"fps", r.fps},
                 {"fps_pipelined_bound", r.fps_pipelined_bound},
                 {"fps_overhead_per_patch", r.fps_overhead_per_patch}};
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write: " + out);
    f << j.dump(2) << '\n';
    f.close();
    Manifest m;
    m.subcommand = "cycles";
    m.arguments = {{"T", T}, {"width", width}, {"height", height}, {"stride", stride}, {"clock", clock}};
    m.config = ordered_json::object();
    m.outputs = {out};
    m.report = j;
    write_manifest(m, out);
  }
  print_json(j);
  return 0;
}

void emit_error(const std::string& kind, const std::string& message, const std::string& path = {}) {
  ordered_json j{{"error", kind}, {"message", message}};
  if (!path.empty()) j["path"] = path;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended depth-of-field imaging: simulation, sparse recovery, unrolled networks"};
  app.require_subcommand(1);
  std::function<int()> action;

  // simulate
  Common sim_common;
  std::string sim_image, sim_psi = "8", sim_depth, sim_layout = "strips", sim_preview;
  fs::path sim_out;
  double sim_noise = 0.0;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "Blur, mosaic and add noise to a PNG scene");
  sim_common.add_to(sim);
  sim->add_option("--image,--input", sim_image, "Scene PNG")->required();
  sim->add_option("--psi", sim_psi, "Defocus value, comma list (one region each) or PGM index map");
  sim->add_option("--depth-map", sim_depth, "PGM of psi-grid indices (overrides --psi)");
  sim->add_option("--layout", sim_layout, "Region layout for several psi values")
      ->check(CLI::IsMember({"strips", "quadrants"}));
  auto* sim_noise_opt = sim->add_option("--noise,--noise-sigma", sim_noise, "Gaussian sensor noise sigma");
  sim->add_option("--seed", sim_seed, "Noise seed")->required();
  sim->add_option("--out", sim_out, "Output raw PGM (a .json sidecar is written beside it)")->required();
  sim->add_option("--preview", sim_preview, "Optional bilinear-demosaiced PNG of the capture");
  sim->callback([&] {
    action = [&] {
      if (fs::path(sim_psi).extension() == ".pgm") sim_depth = sim_psi;
      return run_simulate(sim_common, sim_image, sim_psi, sim_depth, sim_layout, sim_noise, sim_noise_opt->count() > 0,
                          sim_seed, sim_out, sim_preview);
    };
  });

  // dict
  auto* dict = app.add_subcommand("dict", "Build or inspect blurred dictionaries");
  dict->require_subcommand(1);
  Common dict_common;
  int dict_k = 0;
  fs::path dict_out;
  std::string dict_kernels_out, dict_inspect_path;
  auto* dict_build = dict->add_subcommand("build", "Build the concatenated blurred dictionary");
  dict_common.add_to(dict_build);
  dict_build->add_option("--k", dict_k, "Atoms per dictionary (3 p^2, p >= 8)");
  dict_build->add_option("--out", dict_out, "Output EDDC file")->required();
  dict_build->add_option("--kernels-out", dict_kernels_out, "Also write the EDKS kernel set");
  dict_build->callback([&] { action = [&] { return run_dict_build(dict_common, dict_k, dict_out, dict_kernels_out); }; });
  auto* dict_inspect = dict->add_subcommand("inspect", "Summarize an EDDC file");
  dict_inspect->add_option("--dict", dict_inspect_path, "EDDC file")->required();
  dict_inspect->callback([&] { action = [&] { return run_dict_inspect(dict_inspect_path); }; });

  // solve
  Common solve_common;
  std::string solve_dict, solve_raw, solve_gt;
  fs::path solve_out;
  int solve_stride = 8, solve_iter = 0, solve_atoms = 8;
  std::string solve_method = "ista";
  double solve_mu = -1.0;
  auto* solve = app.add_subcommand("solve", "Reconstruct a raw frame with ISTA");
  solve_common.add_to(solve);
  solve->add_option("--dict", solve_dict, "EDDC file")->required();
  solve->add_option("--raw", solve_raw, "Raw PGM")->required();
  solve->add_option("--out", solve_out, "Output PNG")->required();
  solve->add_option("--stride", solve_stride, "Patch stride")->check(CLI::IsMember({2, 4, 8}));
  solve->add_option("--mu", solve_mu, "Sparsity weight");
  solve->add_option("--iterations,--iters", solve_iter, "ISTA iterations");
  solve->add_option("--method", solve_method, "ista | omp")->check(CLI::IsMember({"ista", "omp"}));
  solve->add_option("--atoms", solve_atoms, "OMP atom budget per patch")->check(CLI::PositiveNumber);
  solve->add_option("--gt", solve_gt, "Ground-truth PNG for PSNR");
  solve->callback([&] {
    action = [&] { return run_solve(solve_common, solve_dict, solve_raw, solve_out, solve_stride, solve_mu, solve_iter, solve_method, solve_atoms, solve_gt); };
  });

  // train
  Common train_common;
  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Initialize from ISTA and train with SGD");
  train_common.add_to(train);
  train->add_option("--dict", ta.dict, "EDDC file to initialize from");
  train->add_option("--net", ta.net, "EDNN file to continue training");
  train->add_option("--kernels", ta.kernels, "EDKS kernels for the training blur (default: from config)");
  train->add_option("--data", ta.data, "Directory of clear training PNGs");
  train->add_option("--out", ta.out, "Output EDNN file")->required();
  train->add_option("--T", ta.T, "Network depth (>= 3)");
  train->add_option("--patches", ta.patches, "Training patches");
  train->add_option("--psi", ta.psi, "Training psi value(s)");
  train->add_option("--init", ta.init, "full | block | marginal")->check(CLI::IsMember({"full", "block", "marginal"}));
  train->add_option("--lr", ta.lr, "Learning rate");
  train->add_option("--epochs", ta.epochs, "Epochs");
  train->add_option("--batch", ta.batch, "Minibatch size");
  train->add_option("--seed", ta.seed, "Seed for patches, split and shuffling")->required();
  train->add_option("--noise", ta.noise, "Sensor noise sigma");
  train->add_option("--mu", ta.mu, "Sparsity weight for the ISTA initialization");
  train->add_option("--output-space", ta.output_space, "rgb192 | ycbcr422")->check(CLI::IsMember({"rgb192", "ycbcr422"}));
  train->add_option("--input-offset", ta.input_offset, "Gray level removed before the I stage");
  train->callback([&] { action = [&] { return run_train(train_common, ta); }; });

  // quantize
  Common q_common;
  std::string q_net, q_calib, q_psi = "8", q_kernels;
  fs::path q_out;
  std::size_t q_patches = 2000;
  std::uint64_t q_seed = 0;
  double q_noise = -1.0;
  auto* quant = app.add_subcommand("quantize", "Calibrate scales and quantize a network to 16-bit");
  q_common.add_to(quant);
  quant->add_option("--net", q_net, "EDNN file")->required();
  quant->add_option("--calib", q_calib, "Directory of calibration PNGs")->required();
  quant->add_option("--out", q_out, "Output EDFX file")->required();
  quant->add_option("--patches", q_patches, "Calibration patches (>= 100)");
  quant->add_option("--psi", q_psi, "Calibration psi value(s)");
  quant->add_option("--kernels", q_kernels, "EDKS kernels (default: from config)");
  quant->add_option("--seed", q_seed, "Patch sampling seed")->required();
  quant->add_option("--noise", q_noise, "Sensor noise sigma");
  quant->callback([&] {
    action = [&] { return run_quantize(q_common, q_net, q_calib, q_out, q_patches, q_psi, q_seed, q_noise, q_kernels); };
  });

  // reconstruct / infer
  std::string r_raw, r_net, r_gt;
  fs::path r_out;
  int r_stride = 2;
  for (const char* name : {"reconstruct", "infer"}) {
    auto* rc = app.add_subcommand(name, std::string(name) == "infer" ? "Alias of reconstruct"
                                                                     : "Reconstruct a raw frame with a network");
    rc->add_option("--raw", r_raw, "Raw PGM")->required();
    rc->add_option("--net", r_net, "EDNN or EDFX file")->required();
    rc->add_option("--stride", r_stride, "Patch stride")->check(CLI::IsMember({2, 4, 8}));
    rc->add_option("--out", r_out, "Output PNG")->required();
    rc->add_option("--gt", r_gt, "Ground-truth PNG for PSNR");
    const std::string n = name;
    rc->callback([&, n] { action = [&, n] { return run_reconstruct(n, r_raw, r_net, r_stride, r_out, r_gt); }; });
  }

  // evaluate
  Common e_common;
  std::string e_corpus, e_net, e_fixed, e_dict, e_psi = "8";
  fs::path e_out;
  double e_noise = -1.0;
  std::uint64_t e_seed = 0;
  int e_stride = 2;
  auto* eval = app.add_subcommand("evaluate", "PSNR table over a corpus (CSV)");
  e_common.add_to(eval);
  eval->add_option("--corpus", e_corpus, "Directory of ground-truth PNGs");
  eval->add_option("--net", e_net, "EDNN file");
  eval->add_option("--fixed", e_fixed, "EDFX file");
  eval->add_option("--dict", e_dict, "EDDC file (adds an ISTA row)");
  eval->add_option("--psi", e_psi, "Capture psi value(s); several give vertical strips");
  eval->add_option("--noise", e_noise, "Sensor noise sigma");
  eval->add_option("--seed", e_seed, "Noise seed")->required();
  eval->add_option("--stride", e_stride, "Patch stride")->check(CLI::IsMember({2, 4, 8}));
  eval->add_option("--out", e_out, "Output CSV")->required();
  eval->callback([&] {
    action = [&] { return run_evaluate(e_common, e_corpus, e_net, e_fixed, e_dict, e_psi, e_noise, e_seed, e_stride, e_out); };
  });

  // cycles
  int c_T = 4, c_w = 1920, c_h = 1080, c_stride = 8;
  double c_clock = 125e6;
  std::string c_preset, c_out;
  auto* cyc = app.add_subcommand("cycles", "Clock-cycle and throughput model");
  cyc->add_option("--T", c_T, "Network depth");
  cyc->add_option("--width", c_w, "Frame width");
  cyc->add_option("--height", c_h, "Frame height");
  cyc->add_option("--stride", c_stride, "Patch stride");
  cyc->add_option("--clock", c_clock, "Clock in Hz");
  cyc->add_option("--clock-preset", c_preset, "125MHz | 100MHz")->check(CLI::IsMember({"125MHz", "100MHz"}));
  cyc->add_option("--out", c_out, "Optional JSON report file");
  cyc->callback([&] {
    action = [&] {
      if (c_preset == "100MHz") c_clock = 100e6;
      if (c_preset == "125MHz") c_clock = 125e6;
      return run_cycles(c_T, c_w, c_h, c_stride, c_clock, c_out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }
  try {
    return action ? action() : 2;
  } catch (const MissingFile& e) {
    emit_error("missing_file", e.what(), e.path.string());
  } catch (const SchemaError& e) {
    emit_error("schema", e.what());
  } catch (const std::invalid_argument& e) {
    emit_error("invalid_argument", e.what());
  } catch (const TrainingDiverged& e) {
    emit_error("diverged", e.what());
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
  }
  return 2;
}

}  // namespace edof::cli

int main(int argc, char** argv) { return edof::cli::main(argc, argv); }
