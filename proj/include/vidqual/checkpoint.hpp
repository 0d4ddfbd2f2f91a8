#ifndef VIDQUAL_CHECKPOINT_HPP
#define VIDQUAL_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "vidqual/model.hpp"

// Self-describing checkpoint container: magic, JSON header (config, vocab,
// lineage, parameter index), then raw little-endian doubles in index order.
namespace vq::ckpt {

struct LoadedCheckpoint {
  model::Model model;
  std::vector<std::string> lineage;  // root-first chain of checkpoint names
};

void save_checkpoint(const std::string& path, const model::Model& model,
                     const std::vector<std::string>& lineage);
LoadedCheckpoint load_checkpoint(const std::string& path);

// Stable hash of the model configuration; train resume refuses a mismatch.
std::string config_hash(const model::ModelConfig& config);

}  // namespace vq::ckpt

#endif  // VIDQUAL_CHECKPOINT_HPP
