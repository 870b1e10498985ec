#pragma once

#include <filesystem>
#include <vector>

#include "mgtd/config.hpp"
#include "mgtd/tensor.hpp"

namespace mgtd {

// A trained model snapshot: full config (including contrastive mode, seed and
// label coding), per-epoch metric history, and the parameter tensors. Params
// are always float32-quantized (ParamSet::quantized_f32), so a save/load
// round trip is bit-exact and evaluation from a loaded checkpoint matches
// evaluation from the in-memory one.
struct Checkpoint {
  TrainConfig config;
  int best_epoch = 0;
  std::vector<EpochRecord> history;
  ParamSet params;
};

// Single-file container: magic + version, a JSON header (config, label
// coding, seed, metric history, best epoch), then each tensor as
// name + shape + little-endian float32 data.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mgtd
