#ifndef TRAJRL_TOOLS_RUN_CONFIG_H_
#define TRAJRL_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "trajrl/environment.h"
#include "trajrl/ppo.h"
#include "trajrl/search.h"

namespace trajrl::cli {

// Baseline search that never plans a halt; stops come from the fallback.
inline search::SearchConfig cruising_search() {
  search::SearchConfig s;
  s.allow_halt = false;
  return s;
}

// Everything a run depends on. Cost weights and the safety settings live in
// `episode`.
struct RunConfig {
  env::EpisodeConfig episode;
  policy::PpoConfig ppo;
  search::SearchConfig search = cruising_search();
  std::string out_dir = "runs/default";
  std::uint64_t seed = 0;

  // Copies the shared settings (seed, lattice bounds) into the sections.
  void sync();
  void validate() const;
};

// YAML mapping with optional sections environment, cost, safety, search,
// ppo plus top-level seed and out_dir. Missing keys keep their defaults,
// unknown keys are errors. Throws FormatError naming the line.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical text listing every key; parse_run_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);
std::string hash_hex(std::uint64_t hash);

}  // namespace trajrl::cli

#endif  // TRAJRL_TOOLS_RUN_CONFIG_H_
