#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace edof::cli {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw SchemaError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where + "." + key + " has the wrong type");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  optics.validate();
  mask.validate();
  if (psi_grid.empty()) throw std::invalid_argument("psi_grid must be non-empty");
  solver.validate();
  train.validate();
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
}

void apply_config_json(ExperimentConfig& cfg, const json& j) {
  check_keys(j, {"optics", "mask", "psi_grid", "pattern", "dictionary_atoms", "solver", "train",
                 "noise_sigma", "corpus", "seed"},
             "config");
  if (j.contains("optics")) {
    const json& o = j.at("optics");
    check_keys(o, {"aperture_radius", "wavelengths", "nominal_depth", "focal_length", "image_distance",
                   "pupil_grid_size", "kernel_size", "pixel_pitch"},
               "optics");
    read(o, "aperture_radius", cfg.optics.aperture_radius, "optics");
    read(o, "wavelengths", cfg.optics.wavelengths, "optics");
    read(o, "nominal_depth", cfg.optics.nominal_depth, "optics");
    read(o, "focal_length", cfg.optics.focal_length, "optics");
    read(o, "image_distance", cfg.optics.image_distance, "optics");
    read(o, "pupil_grid_size", cfg.optics.pupil_grid_size, "optics");
    read(o, "kernel_size", cfg.optics.kernel_size, "optics");
    read(o, "pixel_pitch", cfg.optics.pixel_pitch, "optics");
  }
  if (j.contains("mask")) {
    const json& m = j.at("mask");
    check_keys(m, {"enabled", "rings"}, "mask");
    read(m, "enabled", cfg.mask.enabled, "mask");
    if (m.contains("rings")) {
      if (!m.at("rings").is_array()) throw SchemaError("mask.rings must be an array");
      cfg.mask.rings.clear();
      for (const auto& r : m.at("rings")) {
        check_keys(r, {"inner", "outer", "phase"}, "mask.rings[]");
        PhaseMaskSpec::Ring ring;
        read(r, "inner", ring.inner, "mask.rings[]");
        read(r, "outer", ring.outer, "mask.rings[]");
        read(r, "phase", ring.phase, "mask.rings[]");
        cfg.mask.rings.push_back(ring);
      }
    }
  }
  read(j, "psi_grid", cfg.psi_grid, "config");
  if (j.contains("pattern")) {
    std::string p;
    read(j, "pattern", p, "config");
    cfg.pattern = parse_cfa_pattern(p);
  }
  read(j, "dictionary_atoms", cfg.dictionary_atoms, "config");
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"mu", "iterations", "tolerance"}, "solver");
    read(s, "mu", cfg.solver.mu, "solver");
    read(s, "iterations", cfg.solver.iterations, "solver");
    read(s, "tolerance", cfg.solver.tolerance, "solver");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, {"learning_rate", "batch_size", "epochs", "seed", "validation_fraction", "dataset_path"},
               "train");
    read(t, "learning_rate", cfg.train.learning_rate, "train");
    read(t, "batch_size", cfg.train.batch_size, "train");
    read(t, "epochs", cfg.train.epochs, "train");
    read(t, "seed", cfg.train.seed, "train");
    read(t, "validation_fraction", cfg.train.validation_fraction, "train");
    std::string ds;
    read(t, "dataset_path", ds, "train");
    if (!ds.empty()) cfg.train.dataset_path = ds;
  }
  read(j, "noise_sigma", cfg.noise_sigma, "config");
  if (j.contains("corpus")) {
    const json& c = j.at("corpus");
    check_keys(c, {"train", "test"}, "corpus");
    std::string s;
    read(c, "train", s, "corpus");
    if (!s.empty()) cfg.train_corpus = s;
    s.clear();
    read(c, "test", s, "corpus");
    if (!s.empty()) cfg.test_corpus = s;
  }
  read(j, "seed", cfg.seed, "config");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("config is not valid JSON: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  apply_config_json(cfg, j);
  return cfg;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["optics"] = {{"aperture_radius", cfg.optics.aperture_radius},
                 {"wavelengths", cfg.optics.wavelengths},
                 {"nominal_depth", cfg.optics.nominal_depth},
                 {"focal_length", cfg.optics.focal_length},
                 {"image_distance", cfg.optics.image_distance},
                 {"pupil_grid_size", cfg.optics.pupil_grid_size},
                 {"kernel_size", cfg.optics.kernel_size},
                 {"pixel_pitch", cfg.optics.pixel_pitch}};
  nlohmann::ordered_json rings = nlohmann::ordered_json::array();
  for (const auto& r : cfg.mask.rings) {
    rings.push_back({{"inner", r.inner}, {"outer", r.outer}, {"phase", r.phase}});
  }
  j["mask"] = {{"enabled", cfg.mask.enabled}, {"rings", rings}};
  j["psi_grid"] = cfg.psi_grid;
  j["pattern"] = std::string(to_string(cfg.pattern));
  j["dictionary_atoms"] = cfg.dictionary_atoms;
  j["solver"] = {{"mu", cfg.solver.mu}, {"iterations", cfg.solver.iterations}, {"tolerance", cfg.solver.tolerance}};
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"batch_size", cfg.train.batch_size},
                {"epochs", cfg.train.epochs},
                {"seed", cfg.train.seed},
                {"validation_fraction", cfg.train.validation_fraction},
                {"dataset_path", cfg.train.dataset_path.string()}};
  j["noise_sigma"] = cfg.noise_sigma;
  j["corpus"] = {{"train", cfg.train_corpus.string()}, {"test", cfg.test_corpus.string()}};
  j["seed"] = cfg.seed;
  return j;
}

void set_optics_field(OpticsSpec& o, const std::string& field, const std::string& value) {
  auto number = [&]() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) throw SchemaError("optics." + field + " expects a number, got '" + value + "'");
    return v;
  };
  if (field == "aperture_radius") o.aperture_radius = number();
  else if (field == "nominal_depth") o.nominal_depth = number();
  else if (field == "focal_length") o.focal_length = number();
  else if (field == "image_distance") o.image_distance = number();
  else if (field == "pixel_pitch") o.pixel_pitch = number();
  else if (field == "pupil_grid_size") o.pupil_grid_size = static_cast<int>(number());
  else if (field == "kernel_size") o.kernel_size = static_cast<int>(number());
  else if (field == "wavelengths") {
    const auto w = parse_number_list(value);
    if (w.size() != 3) throw SchemaError("optics.wavelengths expects three values");
    o.wavelengths = {w[0], w[1], w[2]};
  } else {
    throw SchemaError("unknown optics field: " + field);
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw SchemaError("not a number list: '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw SchemaError("empty number list");
  return out;
}

int psi_index(const std::vector<double>& grid, double psi) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (std::abs(grid[j] - psi) < 1e-9) return static_cast<int>(j);
  }
  throw std::invalid_argument("psi " + std::to_string(psi) + " is not on the configured grid");
}

}  // namespace edof::cli
