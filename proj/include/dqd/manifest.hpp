#pragma once

// Run manifests: a JSON record written next to every command's outputs.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqd/error.hpp"

namespace dqd {

inline constexpr const char* kToolVersion = "0.3.0";

/// 64-bit FNV-1a over the file's bytes, as 16 lowercase hex digits.
inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string() + " for digest");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

struct ManifestInput {
  std::string path;
  std::string digest;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> options;
  std::vector<ManifestInput> inputs;
  std::vector<std::string> outputs;
  std::string tool_version = kToolVersion;
  double duration_seconds = 0.0;

  void add_input(const std::filesystem::path& p) {
    inputs.push_back({p.string(), file_digest(p), std::filesystem::file_size(p)});
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["options"] = options;
    j["inputs"] = nlohmann::json::array();
    for (const auto& in : inputs) {
      j["inputs"].push_back({{"path", in.path}, {"fnv1a64", in.digest}, {"bytes", in.bytes}});
    }
    j["outputs"] = outputs;
    j["tool_version"] = tool_version;
    j["duration_seconds"] = duration_seconds;
    return j;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot create manifest " + path.string());
    out << to_json().dump(2) << '\n';
  }
};

/// Wall-clock stopwatch for manifest durations.
class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace dqd
