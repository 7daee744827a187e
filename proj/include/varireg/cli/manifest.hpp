#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace varireg::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();  // every default materialized
  std::map<std::string, std::string> input_digests;  // path -> sha256 hex
  std::string version = kToolVersion;
  std::uint64_t seed = 42;
  int threads = 0;
  bool deterministic = true;
  std::map<std::string, double> timings;  // seconds
  int exit_code = 0;
};

// Lower-case hex SHA-256 of a file's bytes. Throws Error(io) if unreadable.
std::string sha256_file(const std::filesystem::path& path);

nlohmann::json to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace varireg::cli
