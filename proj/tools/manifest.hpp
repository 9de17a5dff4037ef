#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace edof::cli {

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& path);

struct Manifest {
  std::string subcommand;
  nlohmann::ordered_json arguments = nlohmann::ordered_json::object();
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json report = nlohmann::ordered_json::object();
};

/// Writes `<primary_output>.manifest.json`. Only the `timestamp` field varies between runs.
void write_manifest(const Manifest& m, const std::filesystem::path& primary_output);

}  // namespace edof::cli
