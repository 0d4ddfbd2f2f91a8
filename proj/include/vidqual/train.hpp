#ifndef VIDQUAL_TRAIN_HPP
#define VIDQUAL_TRAIN_HPP

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vidqual/model.hpp"

// Three-stage curriculum trainer: freeze masks, warmup + cosine schedule,
// AdamW, and the scorer/assistant checkpoint lineage.
namespace vq::train {

struct Hyperparams {
  double lr_max = 1e-5;  // full-scale reference default; toy runs override it
  std::string schedule = "cosine";
  double warmup_fraction = 0.03;
  double weight_decay = 0.0;
  int batch_videos = 8;
  int grad_accum = 1;
  double epochs = 1.0;
  std::string optimizer = "adamw";
};

void validate(const Hyperparams& hp);

struct FreezeMask {
  std::set<std::string> trainable_groups;
};

// S1 phases train only their own pathway; Stage 2/3 tune everything.
FreezeMask freeze_mask_for(data::Stage stage);

// Linear warmup from 0 to lr_max over round(warmup_fraction * total) steps,
// then cosine decay to 0 at the final step.
double lr_at(int step, int total_steps, const Hyperparams& hp);

struct StepMetrics {
  int step = 0;
  std::string stage;
  double lr = 0.0;
  double loss = 0.0;
};

std::string metrics_line(const StepMetrics& m);

// Frame-container cache keyed by path; training revisits clips often.
class ClipStore {
 public:
  const synth::Clip& get(const std::string& path);

 private:
  std::map<std::string, synth::Clip> cache_;
};

struct TrainResult {
  std::vector<StepMetrics> metrics;
};

// One pass over the corpus under the stage's freeze mask. Every pair must
// carry the stage's tag. Metrics are appended to the log stream as
// JSON-lines when one is given.
TrainResult train_stage(model::Model& model,
                        const std::vector<data::InstructionPair>& corpus,
                        data::Stage stage, const Hyperparams& hp,
                        std::uint64_t seed, ClipStore& clips,
                        std::ostream* metrics_log = nullptr);

// Seeded uniform shuffle of the concatenation; record multiset preserved.
std::vector<data::InstructionPair> mix_datasets(
    const std::vector<data::InstructionPair>& s2_corpus,
    const std::vector<data::InstructionPair>& s3_corpus, std::uint64_t seed);

struct CurriculumPlan {
  // Ordered (stage, corpus); order must follow
  // S1_spatial -> S1_motion -> S2_ugc -> {S2_stream | S3}.
  std::vector<std::pair<data::Stage, std::vector<data::InstructionPair>>> stages;
  bool mixed = false;  // combine S2_ugc + S3 into one shuffled stage
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
};

struct CurriculumResult {
  // Checkpoint name -> model snapshot. Always contains "pretrained"; the
  // sequential path adds "ugc_scorer" and, per supplied corpora,
  // "streaming_scorer" / "assistant".
  std::map<std::string, model::Model> checkpoints;
  std::map<std::string, std::vector<std::string>> lineage;
  std::vector<StepMetrics> metrics;
};

CurriculumResult run_curriculum(model::Model base, const CurriculumPlan& plan,
                                ClipStore& clips,
                                std::ostream* metrics_log = nullptr);

}  // namespace vq::train

#endif  // VIDQUAL_TRAIN_HPP
