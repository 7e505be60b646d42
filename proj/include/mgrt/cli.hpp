#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mgrt {

/// The caption-style summary line, e.g. "Score: $2.74. Avg Batt Charge: 79.301%".
std::string format_score(double cost_dollars, double avg_charge_pct);

std::uint64_t file_digest(const std::filesystem::path& path);
std::string digest_hex(std::uint64_t digest);

/// Everything needed to replay a command: canonical flag tokens plus digests
/// of the files the run read. Written next to each command's primary output.
struct RunManifest {
  std::string version;
  std::string command;
  std::vector<std::string> flags;  // tokens like "--init-soc=80"
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest hex
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

int run_cli(int argc, const char* const* argv);

}  // namespace mgrt
