#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace mobgen::cli {

/// Record of one command invocation, written as manifest.json in the output
/// directory. Two runs with the same seed, config and inputs differ only in
/// the timestamps.
class RunManifest {
 public:
  RunManifest(std::string command, std::uint64_t seed, nlohmann::json config);

  /// Registers an input file by digest (directories: digest over their files).
  void add_input(const std::string& role, const std::filesystem::path& path);
  /// Registers a produced file or directory, digested when the run finishes.
  void add_artifact(const std::filesystem::path& path);
  void set_status(int exit_code, const std::string& message = "");

  nlohmann::json to_json() const;
  /// Digests the artifacts, stamps the end time and writes <dir>/manifest.json.
  void write(const std::filesystem::path& dir);

  const std::string& config_digest() const { return config_digest_; }
  const std::map<std::string, std::string>& input_digests() const { return inputs_; }

 private:
  std::string command_;
  std::uint64_t seed_;
  nlohmann::json config_;
  std::string config_digest_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> input_paths_;
  std::vector<std::filesystem::path> artifacts_;
  std::map<std::string, std::string> artifact_digests_;
  std::chrono::system_clock::time_point started_;
  std::chrono::system_clock::time_point finished_;
  std::string out_dir_;
  int exit_code_ = 0;
  std::string message_;
};

/// SHA-256 of a file, or of the sorted (relative path, file digest) list of a directory.
std::string digest_path(const std::filesystem::path& path);

/// Version string of this build.
std::string version();

/// UTC timestamp in ISO 8601 with seconds.
std::string iso_time(std::chrono::system_clock::time_point t);

}  // namespace mobgen::cli
