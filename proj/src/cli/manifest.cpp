#include "mobgen/cli/manifest.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <vector>

#include "mobgen/errors.hpp"
#include "mobgen/numerics/digest.hpp"

#ifndef MOBGEN_VERSION
#define MOBGEN_VERSION "0.0.0"
#endif

namespace mobgen::cli {

namespace fs = std::filesystem;

std::string version() { return MOBGEN_VERSION; }

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string digest_path(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) return numerics::sha256_file(path);
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& entry : fs::recursive_directory_iterator(path)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    entries.emplace_back(fs::relative(entry.path(), path).generic_string(), numerics::sha256_file(entry.path()));
  }
  std::sort(entries.begin(), entries.end());
  std::string text;
  for (const auto& [name, digest] : entries) text += name + '\t' + digest + '\n';
  return numerics::sha256_hex(text);
}

RunManifest::RunManifest(std::string command, std::uint64_t seed, nlohmann::json config)
    : command_(std::move(command)),
      seed_(seed),
      config_(std::move(config)),
      config_digest_(numerics::sha256_hex(config_.dump())),
      started_(std::chrono::system_clock::now()) {}

void RunManifest::add_input(const std::string& role, const fs::path& path) {
  inputs_[role] = digest_path(path);
  input_paths_[role] = path.string();
}

void RunManifest::add_artifact(const fs::path& path) { artifacts_.push_back(path); }

void RunManifest::set_status(int exit_code, const std::string& message) {
  exit_code_ = exit_code;
  message_ = message;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [role, digest] : inputs_) inputs[role] = {{"path", input_paths_.at(role)}, {"sha256", digest}};
  nlohmann::json artifacts = nlohmann::json::object();
  for (const auto& [path, digest] : artifact_digests_) artifacts[path] = digest;
  nlohmann::json j{{"command", command_},
                   {"version", version()},
                   {"seed", seed_},
                   {"config", config_},
                   {"config_sha256", config_digest_},
                   {"out", out_dir_},
                   {"inputs", inputs},
                   {"artifacts", artifacts},
                   {"started_at", iso_time(started_)},
                   {"finished_at", iso_time(finished_)},
                   {"exit_code", exit_code_}};
  if (!message_.empty()) j["message"] = message_;
  return j;
}

void RunManifest::write(const fs::path& dir) {
  finished_ = std::chrono::system_clock::now();
  out_dir_ = dir.string();
  artifact_digests_.clear();
  for (const fs::path& p : artifacts_) {
    std::error_code ec;
    if (!fs::exists(p, ec)) continue;
    artifact_digests_[fs::relative(p, dir).generic_string()] = digest_path(p);
  }
  const fs::path out = dir / "manifest.json";
  std::ofstream file(out, std::ios::binary);
  if (!file) throw IoError("cannot write " + out.string());
  file << to_json().dump(2) << '\n';
  if (!file) throw IoError("write failed: " + out.string());
}

}  // namespace mobgen::cli
