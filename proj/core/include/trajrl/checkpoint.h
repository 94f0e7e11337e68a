#ifndef TRAJRL_CHECKPOINT_H_
#define TRAJRL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trajrl/policy.h"
#include "trajrl/ppo.h"

namespace trajrl::policy {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to evaluate a policy or resume its training. Layout is
// described in docs/checkpoint.md.
struct Checkpoint {
  TrainingState state;
  std::string config_text;  // run configuration the parameters came from
  std::uint64_t config_hash = 0;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
// Throws FormatError with the offending line number.
Checkpoint read_checkpoint(std::istream& in);

// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace trajrl::policy

#endif  // TRAJRL_CHECKPOINT_H_
