#include "vidqual/scorer.hpp"

#include <cmath>

#include "json.hpp"

namespace vq::score {

namespace {

constexpr const char* kSlot = "{LEVEL}";

}  // namespace

void validate(const ScoringTemplate& tpl) {
  const size_t first = tpl.answer_template.find(kSlot);
  require(first != std::string::npos,
          "scoring template: missing {LEVEL} slot");
  require(tpl.answer_template.find(kSlot, first + 1) == std::string::npos,
          "scoring template: more than one {LEVEL} slot");
}

LevelLogitsResult extract_level_logits(const model::Model& model,
                                       const data::InstructionPair& prompt,
                                       const synth::Clip& clip,
                                       const ScoringTemplate& tpl) {
  validate(tpl);
  const auto& tok = model.tokenizer;
  // Teacher-force everything before the slot; the next-token logits at the
  // final position score the level word.
  const std::string prefix =
      tpl.answer_template.substr(0, tpl.answer_template.find(kSlot));
  const std::vector<int> prefix_ids = tok.encode(prefix);

  const auto bundle = model::build_prompt_sequence(
      model, prompt, clip, model::Layout::PerKeyframe, prefix_ids);
  const Mat logits = model::decoder_forward(model, bundle.seq.embeddings);
  const int last = logits.rows - 1;

  LevelLogitsResult out;
  for (auto level : quality::kAllLevels) {
    const std::string& word = quality::level_word(level);
    const std::vector<int> ids = tok.encode(word);
    require(!ids.empty() && ids[0] != tok.unk_id(),
            "extract_level_logits: level word '" + word +
                "' is not in the model vocabulary");
    if (ids.size() > 1)
      out.diagnostics.push_back("level word '" + word +
                                "' tokenizes to multiple tokens; using the "
                                "first-token logit");
    out.logits.values[static_cast<int>(level)] = logits.at(last, ids[0]);
  }
  return out;
}

std::array<double, 5> level_probs(const LevelLogits& logits) {
  double mx = logits.values[0];
  for (double v : logits.values) {
    require(std::isfinite(v), "level logits must be finite");
    mx = std::max(mx, v);
  }
  std::array<double, 5> probs{};
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    probs[i] = std::exp(logits.values[i] - mx);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

QualityScore weighted_score(const LevelLogits& logits,
                            const quality::LevelWeights& weights) {
  quality::validate(weights);
  const auto probs = level_probs(logits);
  double q = 0.0;
  for (int i = 0; i < 5; ++i) q += weights.weights[i] * probs[i];
  return {q};
}

ScoreRecord score_video(const model::Model& model,
                        const data::VideoManifestEntry& entry,
                        const synth::Clip& clip, const ScoringTemplate& tpl) {
  data::InstructionPair prompt;
  prompt.id = entry.id + "-score";
  prompt.video_id = entry.id;
  prompt.stage = data::Stage::S2_ugc;
  prompt.task_tag = data::TaskTag::Level;
  prompt.question = templates::stage2_question();
  prompt.answer = "-";  // unused; scoring teacher-forces the template
  prompt = data::attach_system_prompt(prompt, entry,
                                      data::SystemPromptMode::Score);

  const auto extracted = extract_level_logits(model, prompt, clip, tpl);
  ScoreRecord record;
  record.video_id = entry.id;
  record.probs = level_probs(extracted.logits);
  record.score = weighted_score(extracted.logits, quality::LevelWeights{}).value;
  return record;
}

std::string score_record_line(const ScoreRecord& record) {
  nlohmann::ordered_json j;
  j["video_id"] = record.video_id;
  j["score"] = record.score;
  j["level_probs"] = record.probs;
  return j.dump();
}

}  // namespace vq::score
