#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "combexplain/errors.hpp"
#include "combexplain/model.hpp"

namespace combexplain {

inline constexpr int kCheckpointVersion = 1;

// Checkpoint is missing, of another format version, or does not fit the
// current embeddings.
class CheckpointError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Checkpoint {
  TrainingState state;
  std::uint64_t seed = 0;
};

// JSON: format tag, version, epoch, seed, θ by name, adapter, AdamW moments.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

Checkpoint parse_checkpoint(std::istream& in, const AdamWOptions& adam = {});
Checkpoint load_checkpoint(const std::filesystem::path& path, const AdamWOptions& adam = {});

// Throws CheckpointError unless the adapter is empty or matches `embedding_dim`.
void check_compatible(const Checkpoint& ckpt, std::size_t embedding_dim);

}  // namespace combexplain
