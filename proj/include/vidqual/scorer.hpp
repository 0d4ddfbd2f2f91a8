#ifndef VIDQUAL_SCORER_HPP
#define VIDQUAL_SCORER_HPP

#include <array>
#include <string>
#include <vector>

#include "vidqual/model.hpp"
#include "vidqual/quality.hpp"

// Quality-score inference: teacher-forced template decoding, level-logit
// extraction, and the weighted-softmax score.
namespace vq::score {

// Indexed [High, Good, Fair, Poor, Low], matching quality::QualityLevel.
struct LevelLogits {
  std::array<double, 5> values{};
};

struct QualityScore {
  double value = 0.0;  // in [0, 1]
};

struct ScoringTemplate {
  // Must contain exactly one {LEVEL} slot.
  std::string answer_template = "The quality of the video is {LEVEL}.";
};

void validate(const ScoringTemplate& tpl);

struct LevelLogitsResult {
  LevelLogits logits;
  std::vector<std::string> diagnostics;  // multi-token level words, etc.
};

// Teacher-forces the template up to the {LEVEL} slot and reads, at that
// position, the logits of the five level-word token ids resolved through
// the model's vocabulary.
LevelLogitsResult extract_level_logits(const model::Model& model,
                                       const data::InstructionPair& prompt,
                                       const synth::Clip& clip,
                                       const ScoringTemplate& tpl);

// Q = sum_i w_i * softmax(P)_i over the five levels.
QualityScore weighted_score(const LevelLogits& logits,
                            const quality::LevelWeights& weights);

// Softmax over the five level logits (max-subtracted).
std::array<double, 5> level_probs(const LevelLogits& logits);

struct ScoreRecord {
  std::string video_id;
  double score = 0.0;
  std::array<double, 5> probs{};  // [High..Low]
};

// attach_system_prompt(score mode) -> extract_level_logits -> weighted_score.
ScoreRecord score_video(const model::Model& model,
                        const data::VideoManifestEntry& entry,
                        const synth::Clip& clip,
                        const ScoringTemplate& tpl = {});

std::string score_record_line(const ScoreRecord& record);

}  // namespace vq::score

#endif  // VIDQUAL_SCORER_HPP
