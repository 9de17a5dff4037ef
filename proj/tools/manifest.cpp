#include "manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "edof/binary_io.hpp"

#ifndef EDOF_VERSION
#define EDOF_VERSION "unknown"
#endif

namespace edof::cli {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return fnv1a_hex(std::string(bytes.begin(), bytes.end()));
}

void write_manifest(const Manifest& m, const std::filesystem::path& primary_output) {
  nlohmann::ordered_json j;
  j["tool"] = "edof";
  j["version"] = EDOF_VERSION;
  j["subcommand"] = m.subcommand;
  j["arguments"] = m.arguments;
  j["config"] = m.config;
  j["config_hash"] = fnv1a_hex(m.config.dump());
  j["seed"] = m.seed;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& p : m.inputs) {
    inputs.push_back({{"path", p.string()}, {"fnv1a", std::filesystem::is_regular_file(p) ? file_digest(p) : ""}});
  }
  j["inputs"] = inputs;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) outputs.push_back({{"path", p.string()}, {"fnv1a", file_digest(p)}});
  j["outputs"] = outputs;
  j["report"] = m.report;

  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["timestamp"] = stamp;

  std::filesystem::path path = primary_output;
  path += ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace edof::cli
