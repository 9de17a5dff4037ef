#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "edof/network.hpp"
#include "edof/optics.hpp"
#include "edof/sparse.hpp"

namespace edof::cli {

/// Malformed or unknown configuration keys.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one experiment needs; JSON file < command-line overrides.
struct ExperimentConfig {
  OpticsSpec optics;
  PhaseMaskSpec mask = PhaseMaskSpec::standard();
  std::vector<double> psi_grid = default_psi_grid();
  CfaPattern pattern = CfaPattern::kRGGB;
  int dictionary_atoms = 192;
  SolverConfig solver;
  TrainConfig train;
  /// Sensor noise sigma used when simulating captures and training pairs.
  double noise_sigma = 0.005;
  std::filesystem::path train_corpus;
  std::filesystem::path test_corpus;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Reads `path` (keys: optics, mask, psi_grid, pattern, dictionary_atoms, solver, train,
/// noise_sigma, corpus, seed). Unknown keys are schema errors.
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// Sets one `optics.<field>` value from its command-line text.
void set_optics_field(OpticsSpec& optics, const std::string& field, const std::string& value);

/// "1,2,3" -> {1, 2, 3}.
std::vector<double> parse_number_list(const std::string& text);

/// Grid index of psi (exact match within 1e-9).
int psi_index(const std::vector<double>& grid, double psi);

}  // namespace edof::cli
