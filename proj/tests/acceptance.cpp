// Acceptance gate: one pass/fail line per criterion, non-zero exit if any
// criterion fails. Each check is self-contained and uses independent
// oracles rather than the library's own intermediate results.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "vidqual/checkpoint.hpp"
#include "vidqual/corpus.hpp"
#include "vidqual/eval.hpp"
#include "vidqual/scorer.hpp"
#include "vidqual/train.hpp"

using namespace vq;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      detail = msg;
    }
  }
};

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(dir);
  return dir.string();
}

// ---- shared toy fixtures ----------------------------------------------

model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.embed_dim = 16;
  c.decoder_layers = 1;
  c.decoder_heads = 2;
  c.mlp_hidden = 24;
  c.keyframe_resolution = 8;
  c.vision_patch = 4;
  c.motion_frame_resolution = 4;
  c.max_motion_positions = 16;
  c.max_positions = 256;
  return c;
}

synth::SynthConfig tiny_synth() {
  synth::SynthConfig c;
  c.frame_size = 8;
  c.duration_s = 2.0;
  c.frame_rate = 2.0;
  return c;
}

// Score-mode prompts keep training and scoring prefixes identical and the
// sequences short.
std::vector<data::InstructionPair> level_pairs(
    const std::vector<data::VideoManifestEntry>& entries) {
  std::vector<data::InstructionPair> pairs;
  for (const auto& entry : entries)
    pairs.push_back(data::attach_system_prompt(
        data::build_stage2_ugc_pair(entry), entry,
        data::SystemPromptMode::Score));
  return pairs;
}

nn::Tokenizer tokenizer_over(
    const std::vector<std::vector<data::InstructionPair>>& corpora) {
  std::vector<std::string> texts;
  for (const auto& corpus : corpora)
    for (const auto& pair : corpus) {
      texts.push_back(pair.system_prompt);
      texts.push_back(pair.question);
      texts.push_back(pair.answer);
    }
  return nn::Tokenizer::build(texts);
}

// ---- criteria ---------------------------------------------------------

// Weighted-softmax scoring formula against an independent oracle.
Check criterion_1() {
  Check c;
  const std::array<double, 5> w = {1.0, 0.75, 0.5, 0.25, 0.0};
  auto oracle = [&](const std::array<double, 5>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double z = 0.0;
    for (double x : v) z += std::exp(x - mx);
    double q = 0.0;
    for (int i = 0; i < 5; ++i) q += w[i] * std::exp(v[i] - mx) / z;
    return q;
  };
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 5> v;
    for (auto& x : v) x = dist(rng);
    const double got = score::weighted_score({v}, {}).value;
    c.expect(std::abs(got - oracle(v)) < 1e-9, "oracle mismatch");
    std::array<double, 5> shifted = v;
    for (auto& x : shifted) x += 3.5;
    c.expect(std::abs(score::weighted_score({shifted}, {}).value - got) < 1e-9,
             "shift invariance violated");
  }
  const double equal = score::weighted_score({{2, 2, 2, 2, 2}}, {}).value;
  c.expect(std::abs(equal - 0.5) < 1e-12, "equal logits != 0.5");
  return c;
}

// Exhaustive level binning against an interval oracle.
Check criterion_2() {
  Check c;
  auto oracle = [](double s) {
    if (s >= 80.0) return quality::QualityLevel::High;
    if (s >= 60.0) return quality::QualityLevel::Good;
    if (s >= 40.0) return quality::QualityLevel::Fair;
    if (s >= 20.0) return quality::QualityLevel::Poor;
    return quality::QualityLevel::Low;
  };
  int prev = 99;
  for (double s = 0.0; s <= 100.0; s += 0.25) {
    const auto got = quality::mos_to_level({s});
    c.expect(got == oracle(s), "bin mismatch at " + std::to_string(s));
    c.expect(static_cast<int>(got) <= prev, "non-monotone binning");
    prev = static_cast<int>(got);
  }
  c.expect(quality::mos_to_level({100.0}) == quality::QualityLevel::High,
           "100 is not High");
  return c;
}

// Stalling analytics against a run-length brute force.
Check criterion_3() {
  Check c;
  auto oracle = [](const std::vector<std::uint8_t>& flags, double fps) {
    quality::StallingSummary s;
    size_t ones = 0, last_end = 0, run = 0;
    for (size_t i = 0; i <= flags.size(); ++i) {
      const bool stall = i < flags.size() && flags[i];
      if (stall) {
        ++run;
        ++ones;
        last_end = i + 1;
      } else if (run) {
        s.event_durations.push_back(run / fps);
        run = 0;
      }
    }
    s.event_count = static_cast<int>(s.event_durations.size());
    s.stall_ratio = double(ones) / flags.size();
    size_t lead = 0;
    while (lead < flags.size() && flags[lead]) ++lead;
    s.initial_buffering = lead / fps;
    s.tail_gap = (flags.size() - last_end) / fps;
    return s;
  };

  const quality::StallingTrace worked{{0, 0, 1, 1, 1, 0, 0, 1, 0, 0}, 1.0};
  const auto ws = quality::summarize_stalling(worked);
  c.expect(ws.event_count == 2 && ws.event_durations == std::vector<double>{3, 1} &&
               ws.stall_ratio == 0.4 && ws.initial_buffering == 0.0 &&
               ws.tail_gap == 2.0,
           "worked example mismatch");

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_real_distribution<double> fps_dist(1.0, 60.0);
  for (int iter = 0; iter < 1000; ++iter) {
    quality::StallingTrace trace;
    trace.frame_rate = fps_dist(rng);
    trace.flags.resize(len(rng));
    for (auto& f : trace.flags) f = static_cast<std::uint8_t>(bit(rng));
    const auto got = quality::summarize_stalling(trace);
    const auto want = oracle(trace.flags, trace.frame_rate);
    c.expect(got.event_count == want.event_count &&
                 got.event_durations == want.event_durations &&
                 std::abs(got.stall_ratio - want.stall_ratio) < 1e-12 &&
                 std::abs(got.initial_buffering - want.initial_buffering) <
                     1e-12 &&
                 std::abs(got.tail_gap - want.tail_gap) < 1e-12,
             "random trace mismatch at iter " + std::to_string(iter));
  }
  return c;
}

// Correlation metrics against independent statistical oracles.
Check criterion_4() {
  Check c;
  auto pearson = [](const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
      sxy += x[i] * y[i];
      sxx += x[i] * x[i];
      syy += y[i] * y[i];
    }
    return (sxy - sx * sy / n) /
           std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  };
  auto ranks = [](const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      int less = 0, equal = 0;
      for (double v : x) {
        if (v < x[i]) ++less;
        if (v == x[i]) ++equal;
      }
      r[i] = less + (equal - 1) / 2.0 + 1.0;
    }
    return r;
  };

  c.expect(std::abs(*eval::srcc({1, 2, 3}, {5, 9, 11}) - 1.0) < 1e-9,
           "monotone != 1");
  c.expect(std::abs(*eval::srcc({1, 2, 3}, {3, 2, 1}) + 1.0) < 1e-9,
           "reversed != -1");
  c.expect(std::abs(*eval::plcc({1, 2, 3, 4}, {1, 3, 2, 4}) - 0.8) < 1e-9,
           "4-point PLCC != 0.8");

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(3, 50);
  std::uniform_int_distribution<int> grid(0, 5);  // ties guaranteed
  for (int iter = 0; iter < 200; ++iter) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = grid(rng) + 0.25 * grid(rng);
      y[i] = grid(rng) + 0.25 * grid(rng);
    }
    const bool degenerate =
        std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    const auto s = eval::srcc(x, y);
    const auto p = eval::plcc(x, y);
    if (degenerate) {
      c.expect(!s && !p, "constant vector should be undefined");
      continue;
    }
    c.expect(std::abs(*s - pearson(ranks(x), ranks(y))) < 1e-9,
             "srcc oracle mismatch");
    c.expect(std::abs(*p - pearson(x, y)) < 1e-9, "plcc oracle mismatch");
  }
  return c;
}

// Freeze schedule: Stage-1 phases leave all other groups bitwise intact;
// Stage 2 updates every group.
Check criterion_5() {
  Check c;
  const auto dir = temp_dir("vq-accept-freeze");
  const auto corpus = synth::generate_synthetic_corpus(11, 6, tiny_synth(), dir);

  std::vector<data::InstructionPair> spatial, motion;
  for (const auto& e : corpus.entries) {
    std::vector<quality::DistortionLabel> sp, mo;
    for (auto l : e.distortions)
      (quality::is_motion_distortion(l) ? mo : sp).push_back(l);
    spatial.push_back(data::attach_system_prompt(
        data::build_stage1_spatial_pair(e, sp, 1), e,
        data::SystemPromptMode::Score));
    motion.push_back(data::attach_system_prompt(
        data::build_stage1_motion_pair(e, mo, 1), e,
        data::SystemPromptMode::Score));
  }
  const auto ugc = level_pairs(corpus.entries);
  const auto base =
      model::init_model(tiny_config(), tokenizer_over({spatial, motion, ugc}), 2);

  train::Hyperparams hp;
  hp.lr_max = 1e-3;
  hp.epochs = 1.0;  // six pairs, one batch: exactly one optimizer step
  train::ClipStore clips;

  auto changed = [&](const model::Model& after) {
    std::set<std::string> out;
    for (const auto& [name, mat] : base.params)
      if (after.params.at(name).v != mat.v) out.insert(model::group_of(name));
    return out;
  };

  auto m = base;
  train::train_stage(m, spatial, data::Stage::S1_spatial, hp, 1, clips);
  c.expect(changed(m) ==
               std::set<std::string>{"vision_encoder", "vision_projector"},
           "S1_spatial freeze violated");

  m = base;
  train::train_stage(m, motion, data::Stage::S1_motion, hp, 1, clips);
  c.expect(changed(m) == std::set<std::string>{"motion_extractor",
                                               "motion_projector",
                                               "motion_positions"},
           "S1_motion freeze violated");

  m = base;
  train::train_stage(m, ugc, data::Stage::S2_ugc, hp, 1, clips);
  const std::set<std::string> all(model::param_groups().begin(),
                                  model::param_groups().end());
  c.expect(changed(m) == all, "Stage-2 step missed a parameter group");
  return c;
}

// Motion-token alignment at the default tau/alpha.
Check criterion_6() {
  Check c;
  const model::ModelConfig defaults;  // tau = 4, alpha = 4
  for (int frames = 1; frames <= 128; ++frames)
    c.expect(model::motion_token_count(frames, defaults) == frames,
             "count mismatch at " + std::to_string(frames) + " frames");
  return c;
}

// Projector gradients against central finite differences.
Check criterion_7() {
  Check c;
  data::InstructionPair pair;
  pair.id = "g0";
  pair.video_id = "g0";
  pair.system_prompt = "rate this clip : [image] with motion [motion] .";
  pair.question = "how does it look ?";
  pair.answer = "the quality of the video is fair .";
  pair.stage = data::Stage::S2_ugc;
  pair.task_tag = data::TaskTag::Level;
  const auto clip = synth::generate_clip(7, 0, 0.4, tiny_synth());
  const auto m = model::init_model(
      tiny_config(),
      nn::Tokenizer::build({pair.system_prompt, pair.question, pair.answer}),
      3);

  model::ParamMap grads;
  model::loss_and_gradients(m, pair, clip, model::Layout::PerKeyframe, grads);
  auto loss_of = [&](const model::Model& probe) {
    return model::sequence_loss(
        probe,
        model::build_training_sequence(probe, pair, clip,
                                       model::Layout::PerKeyframe));
  };

  const double h = 1e-5;
  std::mt19937_64 rng(5);
  for (const auto& [name, g] : grads) {
    if (model::group_of(name) != "vision_projector" &&
        model::group_of(name) != "motion_projector")
      continue;
    std::uniform_int_distribution<size_t> pick(0, g.size() - 1);
    for (int probe_i = 0; probe_i < 6; ++probe_i) {
      const size_t i = pick(rng);
      model::Model plus = m, minus = m;
      plus.params.at(name).v[i] += h;
      minus.params.at(name).v[i] -= h;
      const double fd = (loss_of(plus) - loss_of(minus)) / (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(g.v[i]), 1e-6});
      c.expect(std::abs(fd - g.v[i]) / denom < 1e-3,
               "gradient mismatch in " + name);
    }
  }
  return c;
}

// Toy overfit at the default small config: 20 pairs, <= 500 steps, loss
// halves.
Check criterion_8() {
  Check c;
  const auto dir = temp_dir("vq-accept-overfit");
  synth::SynthConfig sc;  // defaults match the default model resolutions
  const auto corpus = synth::generate_synthetic_corpus(21, 20, sc, dir);
  const auto pairs = level_pairs(corpus.entries);

  model::ModelConfig mc;  // default small config
  auto m = model::init_model(mc, tokenizer_over({pairs}), 8);

  train::Hyperparams hp;
  hp.lr_max = 1e-2;
  hp.batch_videos = 20;  // full batch: one step per epoch
  hp.epochs = 120.0;     // 120 steps, well under the 500-step budget
  train::ClipStore clips;
  const auto result =
      train::train_stage(m, pairs, data::Stage::S2_ugc, hp, 1, clips);

  c.expect(static_cast<int>(result.metrics.size()) <= 500, "step budget blown");
  const double first = result.metrics.front().loss;
  const double last = result.metrics.back().loss;
  c.expect(last < 0.5 * first,
           "loss " + std::to_string(first) + " -> " + std::to_string(last) +
               " did not halve");
  return c;
}

// Desk-scale correlation experiment: 200 synthetic clips, 80/20 split,
// curriculum-trained toy scorer, held-out SRCC >= 0.8.
Check criterion_9() {
  Check c;
  const auto dir = temp_dir("vq-accept-corr");
  const auto corpus =
      synth::generate_synthetic_corpus(31, 200, tiny_synth(), dir);

  // Fixed-seed 80/20 split.
  std::vector<int> order(corpus.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(31, "accept-split"));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<data::VideoManifestEntry> train_set, held_out;
  for (size_t i = 0; i < order.size(); ++i)
    (i < 160 ? train_set : held_out).push_back(corpus.entries[order[i]]);

  std::vector<data::InstructionPair> spatial, motion;
  for (const auto& e : train_set) {
    std::vector<quality::DistortionLabel> sp, mo;
    for (auto l : e.distortions)
      (quality::is_motion_distortion(l) ? mo : sp).push_back(l);
    spatial.push_back(data::attach_system_prompt(
        data::build_stage1_spatial_pair(e, sp, 1), e,
        data::SystemPromptMode::Score));
    motion.push_back(data::attach_system_prompt(
        data::build_stage1_motion_pair(e, mo, 1), e,
        data::SystemPromptMode::Score));
  }
  const auto ugc = level_pairs(train_set);

  train::CurriculumPlan plan;
  plan.seed = 31;
  plan.hyperparams.lr_max = 1e-2;
  plan.hyperparams.epochs = 6.0;
  plan.stages = {{data::Stage::S1_spatial, spatial},
                 {data::Stage::S1_motion, motion},
                 {data::Stage::S2_ugc, ugc}};
  train::ClipStore clips;
  auto result = train::run_curriculum(
      model::init_model(tiny_config(), tokenizer_over({spatial, motion, ugc}),
                        31),
      plan, clips);
  const auto& scorer = result.checkpoints.at("ugc_scorer");

  const auto eval_result = eval::evaluate_scoring(
      [&](const data::VideoManifestEntry& e) {
        return score::score_video(scorer, e, clips.get(e.media_ref)).score;
      },
      held_out);
  c.expect(eval_result.failures == 0, "scoring failures on held-out clips");
  c.expect(eval_result.srcc.has_value(), "held-out SRCC undefined");
  const double srcc = eval_result.srcc.value_or(0.0);
  c.expect(srcc >= 0.8, "held-out SRCC " + std::to_string(srcc) + " < 0.8");
  c.detail = "held-out SRCC " + std::to_string(srcc);
  return c;
}

// Dataset count law and golden-file byte equality for every template.
Check criterion_10() {
  Check c;
  data::OverallDepiction depiction;
  depiction.items = {{"sharpness", "good", "throughout the playback",
                      std::nullopt},
                     {"noise", "quite severe", "in the second half",
                      std::nullopt}};
  depiction.free_text = "mostly clean footage with late noise";
  const auto vocab =
      data::ControlledVocab::load(std::string(VQ_SOURCE_DIR) + "/data");

  data::VideoManifestEntry entry;
  entry.id = "g";
  entry.media_ref = "g.vqf";
  entry.duration_s = 4.0;
  entry.frame_rate = 4.0;
  entry.source_dataset = "test";
  entry.mos = quality::MosScore{55.0, 0.0, 100.0};

  const auto pairs = data::build_stage3_pairs(
      entry, depiction, vocab,
      data::make_stub_extension_client(depiction, vocab));
  c.expect(pairs.size() == 6, "count law: got " + std::to_string(pairs.size()));
  std::map<data::TaskTag, int> by_tag;
  for (const auto& p : pairs) ++by_tag[p.task_tag];
  c.expect(by_tag[data::TaskTag::QualityCentric] == 3 &&
               by_tag[data::TaskTag::TemporalCentric] == 1 &&
               by_tag[data::TaskTag::Extended] == 1 &&
               by_tag[data::TaskTag::Causal] == 1,
           "count law per tag violated");

  auto golden = [](const std::string& name) {
    std::ifstream in(std::string(VQ_SOURCE_DIR) + "/tests/golden/" + name,
                     std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  };
  using SPM = templates::SystemPromptMode;
  c.expect(templates::system_prompt_template(SPM::Train) ==
               golden("system_prompt_train.txt"),
           "train system prompt drifted");
  c.expect(templates::system_prompt_template(SPM::Score) ==
               golden("system_prompt_score.txt"),
           "score system prompt drifted");
  c.expect(templates::system_prompt_template(SPM::Understand) ==
               golden("system_prompt_understand.txt"),
           "understand system prompt drifted");
  c.expect(templates::quality_centric_template() ==
               golden("extension_quality_centric.txt"),
           "quality-centric template drifted");
  c.expect(templates::temporal_centric_template() ==
               golden("extension_temporal_centric.txt"),
           "temporal-centric template drifted");
  c.expect(templates::extended_conversation_template() ==
               golden("extension_extended_conversation.txt"),
           "extended-conversation template drifted");
  c.expect(templates::rewrite_template() == golden("extension_rewrite.txt"),
           "rewrite template drifted");
  return c;
}

// Corpus write/read identity on 10,000 randomized pairs; byte-stable.
Check criterion_11() {
  Check c;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> word(0, 25);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> stage_pick(0, 4);
  std::uniform_int_distribution<int> flag(0, 1);
  auto text = [&] {
    std::string out;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += static_cast<char>('a' + word(rng));
      out += static_cast<char>('a' + word(rng));
    }
    return out;
  };

  // Task tags legal for each stage, used to keep pairs valid.
  const std::map<data::Stage, data::TaskTag> tag_for = {
      {data::Stage::S1_spatial, data::TaskTag::Distortion},
      {data::Stage::S1_motion, data::TaskTag::Distortion},
      {data::Stage::S2_ugc, data::TaskTag::Level},
      {data::Stage::S2_stream, data::TaskTag::Level},
      {data::Stage::S3, data::TaskTag::QualityCentric}};

  std::vector<data::InstructionPair> pairs(10000);
  for (int i = 0; i < 10000; ++i) {
    auto& p = pairs[i];
    p.id = "p" + std::to_string(i);
    p.video_id = "v" + std::to_string(i % 997);
    p.system_prompt = text();
    p.question = text() + " ?";
    p.answer = text() + " .";
    p.stage = static_cast<data::Stage>(stage_pick(rng));
    p.task_tag = tag_for.at(p.stage);
    p.media.frames_dir = "frames/" + p.video_id + ".vqf";
    p.media.fps = 2.0 + flag(rng);
    p.media.duration_s = 2.0;
    if (flag(rng)) {
      quality::StallingTrace trace;
      trace.frame_rate = p.media.fps;
      trace.flags = {0, 1, 1, 0};
      p.stalling = trace;
    }
  }

  const auto dir = temp_dir("vq-accept-corpus");
  const std::string path_a = dir + "/corpus-a.jsonl";
  const std::string path_b = dir + "/corpus-b.jsonl";
  data::write_corpus(path_a, pairs);
  const auto back = data::read_corpus(path_a);
  c.expect(back.size() == pairs.size(), "pair count changed");
  for (size_t i = 0; i < pairs.size() && c.ok; ++i) {
    const auto& a = pairs[i];
    const auto& b = back[i];
    c.expect(a.id == b.id && a.video_id == b.video_id &&
                 a.system_prompt == b.system_prompt &&
                 a.question == b.question && a.answer == b.answer &&
                 a.stage == b.stage && a.task_tag == b.task_tag &&
                 a.media.frames_dir == b.media.frames_dir &&
                 a.media.fps == b.media.fps &&
                 a.stalling.has_value() == b.stalling.has_value(),
             "round-trip mismatch at pair " + std::to_string(i));
  }
  data::write_corpus(path_b, back);
  std::ifstream fa(path_a, std::ios::binary), fb(path_b, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                            std::istreambuf_iterator<char>());
  c.expect(!bytes_a.empty() && bytes_a == bytes_b,
           "re-serialization is not byte-stable");
  return c;
}

}  // namespace

int main() {
  const std::array<std::pair<std::string, Check (*)()>, 11> criteria = {{
      {"scoring-formula oracle", criterion_1},
      {"level binning", criterion_2},
      {"stalling analytics", criterion_3},
      {"correlation metrics", criterion_4},
      {"freeze schedule", criterion_5},
      {"motion-token alignment", criterion_6},
      {"gradient check", criterion_7},
      {"toy overfit", criterion_8},
      {"desk-scale correlation", criterion_9},
      {"dataset count law + goldens", criterion_10},
      {"corpus round-trip", criterion_11},
  }};

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("criterion %2zu: %s — %s%s%s (%.1fs)\n", i + 1,
                result.ok ? "PASS" : "FAIL", criteria[i].first.c_str(),
                result.detail.empty() ? "" : "; ", result.detail.c_str(),
                seconds);
    if (!result.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
