#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "vidqual/corpus.hpp"
#include "vidqual/dataset.hpp"
#include "vidqual/synth.hpp"

using namespace vq;
using namespace vq::data;
using quality::DistortionLabel;
using quality::QualityLevel;

namespace {

const std::string kDataDir = std::string(VQ_SOURCE_DIR) + "/data";
const std::string kGoldenDir = std::string(VQ_SOURCE_DIR) + "/tests/golden";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

VideoManifestEntry ugc_entry(const std::string& id, double mos100) {
  VideoManifestEntry e;
  e.id = id;
  e.media_ref = "frames/" + id + ".vqf";
  e.duration_s = 8.0;
  e.frame_rate = 30.0;
  e.source_dataset = "test";
  e.kind = MediaKind::UgcVideo;
  e.mos = quality::MosScore{mos100, 0.0, 100.0};
  return e;
}

// Manifest with a fixed per-level histogram, High..Low order.
std::vector<VideoManifestEntry> histogram_manifest(
    const std::array<int, 5>& counts) {
  const std::array<double, 5> mos = {90, 70, 50, 30, 10};
  std::vector<VideoManifestEntry> manifest;
  int next = 0;
  for (int level = 0; level < 5; ++level)
    for (int i = 0; i < counts[level]; ++i)
      manifest.push_back(
          ugc_entry("v" + std::to_string(next++), mos[level]));
  return manifest;
}

}  // namespace

TEST_CASE("golden prompt templates are byte-stable") {
  CHECK(templates::system_prompt_template(SystemPromptMode::Train) ==
        read_file(kGoldenDir + "/system_prompt_train.txt"));
  CHECK(templates::system_prompt_template(SystemPromptMode::Score) ==
        read_file(kGoldenDir + "/system_prompt_score.txt"));
  CHECK(templates::system_prompt_template(SystemPromptMode::Understand) ==
        read_file(kGoldenDir + "/system_prompt_understand.txt"));
  CHECK(templates::quality_centric_template() ==
        read_file(kGoldenDir + "/extension_quality_centric.txt"));
  CHECK(templates::temporal_centric_template() ==
        read_file(kGoldenDir + "/extension_temporal_centric.txt"));
  CHECK(templates::extended_conversation_template() ==
        read_file(kGoldenDir + "/extension_extended_conversation.txt"));
  CHECK(templates::rewrite_template() ==
        read_file(kGoldenDir + "/extension_rewrite.txt"));
}

TEST_CASE("render_system_prompt substitutes length and frame count") {
  const auto p =
      templates::render_system_prompt(SystemPromptMode::Train, 8.0, 30.0);
  CHECK(p.find("This video is 8 seconds long") != std::string::npos);
  CHECK(p.find("all 240 frames") != std::string::npos);
  CHECK(p.find("[image]") != std::string::npos);
  CHECK(p.find("[motion]") != std::string::npos);
  CHECK(p.find("[length]") == std::string::npos);
  CHECK(p.find("[num frames]") == std::string::npos);
  CHECK_THROWS_AS(
      templates::render_system_prompt(SystemPromptMode::Train, 0.0, 30.0),
      Error);
}

TEST_CASE("plan_sampling follows the level histogram proportionally") {
  // 60/20/10/5/5 at target 20: exact quotas 12/4/2/1/1, no remainders.
  const auto manifest = histogram_manifest({60, 20, 10, 5, 5});
  const auto plan = plan_sampling(manifest, 20, 42);
  CHECK(plan.per_level_counts.at(QualityLevel::High) == 12);
  CHECK(plan.per_level_counts.at(QualityLevel::Good) == 4);
  CHECK(plan.per_level_counts.at(QualityLevel::Fair) == 2);
  CHECK(plan.per_level_counts.at(QualityLevel::Poor) == 1);
  CHECK(plan.per_level_counts.at(QualityLevel::Low) == 1);
  CHECK(plan.selected_ids.size() == 20);
  CHECK(plan.warnings.empty());

  std::set<std::string> unique(plan.selected_ids.begin(),
                               plan.selected_ids.end());
  CHECK(unique.size() == plan.selected_ids.size());
  std::set<std::string> all_ids;
  for (const auto& e : manifest) all_ids.insert(e.id);
  for (const auto& id : plan.selected_ids) CHECK(all_ids.count(id) == 1);

  // Deterministic per seed; a different seed reshuffles the selection.
  CHECK(plan_sampling(manifest, 20, 42).selected_ids == plan.selected_ids);
  CHECK(plan_sampling(manifest, 20, 43).selected_ids != plan.selected_ids);
}

TEST_CASE("plan_sampling rounds with largest remainders and clamps quotas") {
  {
    // 7/3 split at target 5: exact 3.5/1.5; both remainders tie at 0.5 and
    // the High..Low tiebreak gives High the extra slot.
    const auto plan = plan_sampling(histogram_manifest({7, 3, 0, 0, 0}), 5, 1);
    CHECK(plan.per_level_counts.at(QualityLevel::High) == 4);
    CHECK(plan.per_level_counts.at(QualityLevel::Good) == 1);
  }
  {
    // Degenerate histogram: every video in one level.
    const auto plan = plan_sampling(histogram_manifest({0, 0, 10, 0, 0}), 4, 1);
    CHECK(plan.per_level_counts.at(QualityLevel::Fair) == 4);
    CHECK(plan.selected_ids.size() == 4);
  }
  CHECK_THROWS_AS(plan_sampling(histogram_manifest({3, 0, 0, 0, 0}), 4, 1),
                  Error);
  CHECK_THROWS_AS(plan_sampling({}, 0, 1), Error);
}

TEST_CASE("stage-1 spatial builder lists options and labels") {
  const auto entry = ugc_entry("vid1", 55.0);
  const std::vector<DistortionLabel> labels = {DistortionLabel::Noise,
                                               DistortionLabel::SpatialBlur};
  const auto pair = build_stage1_spatial_pair(entry, labels, 7);
  CHECK(pair.stage == Stage::S1_spatial);
  CHECK(pair.task_tag == TaskTag::Distortion);
  CHECK(pair.video_id == "vid1");
  for (auto label : quality::spatial_distortions())
    CHECK(pair.question.find(quality::distortion_name(label)) !=
          std::string::npos);
  CHECK(pair.answer.find("spatial distortions") != std::string::npos);
  CHECK(pair.answer.find(quality::distortion_name(DistortionLabel::Noise)) !=
        std::string::npos);
  CHECK(pair.answer.find(quality::distortion_name(
            DistortionLabel::SpatialBlur)) != std::string::npos);
  validate(pair);

  // Same seed, same record; option order is part of the seeded output.
  CHECK(build_stage1_spatial_pair(entry, labels, 7).question == pair.question);
  CHECK(build_stage1_spatial_pair(entry, labels, 8).question != pair.question);

  // No labels: the no-distortion answer.
  const auto clean = build_stage1_spatial_pair(entry, {}, 7);
  CHECK(clean.answer == "There is no salient distortion in the video.");

  // Motion labels are rejected by the spatial builder.
  CHECK_THROWS_AS(
      build_stage1_spatial_pair(entry, {DistortionLabel::Flicker}, 7), Error);
}

TEST_CASE("stage-1 motion builder covers the motion label set") {
  const auto entry = ugc_entry("vid2", 55.0);
  const auto pair =
      build_stage1_motion_pair(entry, {DistortionLabel::Stuttering}, 7);
  CHECK(pair.stage == Stage::S1_motion);
  CHECK(pair.question.find("motion distortions") != std::string::npos);
  CHECK(pair.answer.find("stuttering") != std::string::npos);
  validate(pair);

  VideoManifestEntry image = entry;
  image.kind = MediaKind::Image;
  CHECK_THROWS_AS(build_stage1_motion_pair(image, {}, 7), Error);
  CHECK_THROWS_AS(
      build_stage1_motion_pair(entry, {DistortionLabel::Noise}, 7), Error);
}

TEST_CASE("stage-2 ugc builder emits the fixed level answer") {
  const auto pair = build_stage2_ugc_pair(ugc_entry("vid3", 90.0));
  CHECK(pair.question == templates::stage2_question());
  CHECK(pair.answer == "The quality of the video is High.");
  validate(pair);
  CHECK(build_stage2_ugc_pair(ugc_entry("x", 45.0)).answer ==
        "The quality of the video is Fair.");

  VideoManifestEntry no_mos = ugc_entry("vid4", 50.0);
  no_mos.mos.reset();
  CHECK_THROWS_AS(build_stage2_ugc_pair(no_mos), Error);
}

TEST_CASE("stage-2 streaming builder embeds the stalling record") {
  VideoManifestEntry entry = ugc_entry("vid5", 35.0);
  entry.kind = MediaKind::StreamingVideo;
  entry.stalling = quality::StallingTrace{{0, 0, 1, 1, 1, 0, 0, 1, 0, 0}, 1.0};

  const auto binary = build_stage2_streaming_pair(entry, StallingFormat::Binary);
  CHECK(binary.stage == Stage::S2_stream);
  CHECK(binary.question.find("0011100100") != std::string::npos);
  CHECK(binary.question.find(templates::stage2_question()) !=
        std::string::npos);
  CHECK(binary.answer == "The quality of the video is Poor.");
  REQUIRE(binary.stalling.has_value());
  CHECK(binary.stalling->flags == entry.stalling->flags);
  validate(binary);

  const auto summary =
      build_stage2_streaming_pair(entry, StallingFormat::Summary);
  CHECK(summary.question.find("number of stalling events is 2") !=
        std::string::npos);
  CHECK(summary.question.find("3, 1 seconds") != std::string::npos);
  CHECK(summary.question.find("total video length is 0.4") !=
        std::string::npos);
  CHECK(summary.question.find("initial buffering time is 0 seconds") !=
        std::string::npos);
  CHECK(summary.question.find("end of the playback is 2 seconds") !=
        std::string::npos);

  // No stall events: the durations slot reads "none".
  entry.stalling = quality::StallingTrace{{0, 0, 0, 0}, 1.0};
  const auto clean = build_stage2_streaming_pair(entry, StallingFormat::Summary);
  CHECK(clean.question.find("each stalling event is none;") !=
        std::string::npos);

  CHECK_THROWS_AS(
      build_stage2_streaming_pair(ugc_entry("x", 50.0), StallingFormat::Binary),
      Error);
}

TEST_CASE("controlled vocabulary loads from the data directory") {
  const auto vocab = ControlledVocab::load(kDataDir);
  CHECK(vocab.has_attribute("sharpness"));
  CHECK(vocab.has_attribute("fluency"));
  CHECK(!vocab.has_attribute("weather"));
  CHECK(vocab.polarity("high") == 1);
  CHECK(vocab.polarity("relatively severe") == -1);
  CHECK_THROWS_AS(vocab.polarity("sideways"), Error);
  CHECK(!vocab.temporal_phrases.empty());
}

TEST_CASE("causal builder inserts the contrast connective at the polarity flip") {
  const auto vocab = ControlledVocab::load(kDataDir);
  OverallDepiction d;
  d.reference_level = QualityLevel::Good;
  d.items.push_back({"sharpness", "high", "throughout the playback",
                     std::nullopt});
  d.items.push_back({"noise", "relatively severe",
                     "in the second half of the video", std::nullopt});
  d.free_text = "Sharp overall but noisy late.";

  const auto pair = build_causal_pair(d, ugc_entry("vid6", 70.0), vocab);
  CHECK(pair.answer ==
        "The quality of the video is Good. "
        "The sharpness is high throughout the playback. "
        "However, the noise is relatively severe in the second half of the "
        "video.");
  CHECK(pair.question == templates::causal_question());
  validate(pair);

  // All-negative depictions never get the connective.
  OverallDepiction neg = d;
  neg.items = {{"noise", "mild", "throughout the playback", std::nullopt},
               {"brightness", "low", "throughout the playback", std::nullopt}};
  const auto p2 = build_causal_pair(neg, ugc_entry("vid7", 30.0), vocab);
  CHECK(p2.answer.find("However") == std::string::npos);

  OverallDepiction bad = d;
  bad.items[0].attribute = "weather";
  CHECK_THROWS_AS(build_causal_pair(bad, ugc_entry("vid8", 70.0), vocab),
                  Error);
}

TEST_CASE("extension prompt rendering emits the documented prompt counts") {
  OverallDepiction d;
  d.items.push_back({"sharpness", "high", "throughout the playback",
                     std::nullopt});
  d.free_text = "The sharpness is high throughout the playback.";
  const auto prompts = render_extension_prompts(d);
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[0].find("create exactly 3 questions") != std::string::npos);
  CHECK(prompts[1].find("related to the temporal aspect") != std::string::npos);
  CHECK(prompts[2].find("create only 1 extended question") !=
        std::string::npos);
  for (const auto& p : prompts) {
    CHECK(p.find(d.free_text) != std::string::npos);
    CHECK(p.find("[overall depiction]") == std::string::npos);
  }

  InContextDepiction ic{"The top-left corner flickers at the 3-rd second mark.",
                        DepictionFocus::Temporal};
  const auto rewrite = render_extension_prompts(ic);
  REQUIRE(rewrite.size() == 1);
  CHECK(rewrite[0].find("rewrite only 1 question") != std::string::npos);
  CHECK(rewrite[0].find(ic.text) != std::string::npos);

  ExtendedConversation ec{"The low light explains the heavy noise.",
                          DepictionFocus::Cause};
  CHECK(render_extension_prompts(ec).size() == 1);

  AigcDepiction aigc{"good", "well aligned", "moderate", "faithful",
                     "consistent", 3};
  const auto ap = render_extension_prompts(aigc);
  REQUIRE(ap.size() == 2);
  CHECK(ap[0].find("Temporal alignment: well aligned") != std::string::npos);
  CHECK(ap[1].find("create only 1 extended question") != std::string::npos);
}

TEST_CASE("parse_extension_response handles the numbered three-pair layout") {
  const std::string text =
      "Question 1: Question: Is the sharpness of the video high throughout "
      "the playback? A. Yes B. No Answer: A. "
      "Question 2: Question: How is the degree of the sharpness of the video "
      "throughout the playback? A. High B. Relatively good C. Relatively poor "
      "D. Extremely low. Answer: B. "
      "Question 3: Question: How would you rate the sharpness of the video "
      "throughout playback? Answer: Average";
  const auto parsed = parse_extension_response(text);
  REQUIRE(parsed.pairs.size() == 3);
  CHECK(parsed.diagnostics.empty());
  CHECK(parsed.pairs[0].question ==
        "Is the sharpness of the video high throughout the playback? A. Yes "
        "B. No");
  CHECK(parsed.pairs[0].answer == "A.");
  CHECK(parsed.pairs[1].answer == "B.");
  CHECK(parsed.pairs[2].answer == "Average");
}

TEST_CASE("parse_extension_response reports malformed fragments") {
  {
    const auto p = parse_extension_response(
        "Question: Is it sharp? Answer: Yes. Question: Is it bright?");
    REQUIRE(p.pairs.size() == 1);
    REQUIRE(p.diagnostics.size() == 1);
    CHECK(p.diagnostics[0].find("without answer") != std::string::npos);
  }
  {
    const auto p =
        parse_extension_response("Answer: Yes. Question: Q? Answer: A.");
    REQUIRE(p.pairs.size() == 1);
    CHECK(p.pairs[0].question == "Q?");
    REQUIRE(p.diagnostics.size() == 1);
    CHECK(p.diagnostics[0].find("orphan") != std::string::npos);
  }
  {
    const auto p = parse_extension_response("no markers at all");
    CHECK(p.pairs.empty());
    CHECK(!p.diagnostics.empty());
  }
  {
    // Case-insensitive markers.
    const auto p = parse_extension_response("QUESTION: Q? ANSWER: A.");
    REQUIRE(p.pairs.size() == 1);
    CHECK(p.pairs[0].question == "Q?");
    CHECK(p.pairs[0].answer == "A.");
  }
  {
    // Empty answer segment is an incomplete pair, not an empty record.
    const auto p = parse_extension_response("Question: Q? Answer:");
    CHECK(p.pairs.empty());
    CHECK(!p.diagnostics.empty());
  }
}

TEST_CASE("attach_system_prompt fills the media reference") {
  const auto entry = ugc_entry("vid9", 60.0);
  auto pair = build_stage2_ugc_pair(entry);
  pair = attach_system_prompt(pair, entry, SystemPromptMode::Train);
  CHECK(pair.system_prompt.find("This video is 8 seconds long") !=
        std::string::npos);
  CHECK(pair.system_prompt.find("all 240 frames") != std::string::npos);
  CHECK(pair.media.frames_dir == entry.media_ref);
  CHECK(pair.media.fps == 30.0);
  CHECK(pair.media.duration_s == 8.0);

  VideoManifestEntry bad = entry;
  bad.duration_s = 0.0;
  CHECK_THROWS_AS(attach_system_prompt(pair, bad, SystemPromptMode::Train),
                  Error);
}

TEST_CASE("stage-3 build yields six pairs with the stub client") {
  const auto vocab = ControlledVocab::load(kDataDir);
  OverallDepiction d;
  d.reference_level = QualityLevel::Fair;
  d.items.push_back({"sharpness", "high", "in the first half of the video",
                     std::nullopt});
  d.items.push_back({"noise", "relatively severe",
                     "in the second half of the video", std::nullopt});
  d.free_text =
      "The sharpness is high in the first half of the video, but the noise "
      "is relatively severe in the second half.";

  const auto entry = ugc_entry("vid10", 50.0);
  const auto pairs = build_stage3_pairs(entry, d, vocab,
                                        make_stub_extension_client(d, vocab));
  REQUIRE(pairs.size() == 6);
  std::map<TaskTag, int> by_tag;
  for (const auto& p : pairs) {
    validate(p);
    CHECK(p.stage == Stage::S3);
    CHECK(p.video_id == "vid10");
    ++by_tag[p.task_tag];
  }
  CHECK(by_tag[TaskTag::QualityCentric] == 3);
  CHECK(by_tag[TaskTag::TemporalCentric] == 1);
  CHECK(by_tag[TaskTag::Extended] == 1);
  CHECK(by_tag[TaskTag::Causal] == 1);

  // Ids are unique across the bundle.
  std::set<std::string> ids;
  for (const auto& p : pairs) ids.insert(p.id);
  CHECK(ids.size() == pairs.size());
}

TEST_CASE("stage/task-tag legality matrix") {
  CHECK(stage_allows_task(Stage::S1_spatial, TaskTag::Distortion));
  CHECK(!stage_allows_task(Stage::S1_spatial, TaskTag::Level));
  CHECK(stage_allows_task(Stage::S2_ugc, TaskTag::Level));
  CHECK(!stage_allows_task(Stage::S2_ugc, TaskTag::Causal));
  CHECK(stage_allows_task(Stage::S3, TaskTag::Causal));
  CHECK(stage_allows_task(Stage::S3, TaskTag::InContext));
  CHECK(!stage_allows_task(Stage::S3, TaskTag::Distortion));

  InstructionPair bad;
  bad.id = "bad";
  bad.question = "q";
  bad.answer = "a";
  bad.stage = Stage::S2_ugc;
  bad.task_tag = TaskTag::Distortion;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("corpus lines round-trip byte-for-byte") {
  // Randomized pairs across every legal stage/tag combination.
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> word(0, 25);
  std::uniform_int_distribution<int> len(1, 12);
  std::bernoulli_distribution coin(0.5);
  auto random_text = [&]() {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += std::string(1 + word(rng) % 7, static_cast<char>('a' + word(rng)));
    }
    return s;
  };
  const std::vector<std::pair<Stage, TaskTag>> combos = {
      {Stage::S1_spatial, TaskTag::Distortion},
      {Stage::S1_motion, TaskTag::Distortion},
      {Stage::S2_ugc, TaskTag::Level},
      {Stage::S2_stream, TaskTag::Level},
      {Stage::S3, TaskTag::QualityCentric},
      {Stage::S3, TaskTag::TemporalCentric},
      {Stage::S3, TaskTag::Extended},
      {Stage::S3, TaskTag::InContext},
      {Stage::S3, TaskTag::Causal},
  };
  std::vector<InstructionPair> pairs;
  for (int i = 0; i < 10000; ++i) {
    InstructionPair p;
    p.id = "p" + std::to_string(i);
    p.video_id = "v" + std::to_string(i % 97);
    auto [stage, tag] = combos[i % combos.size()];
    p.stage = stage;
    p.task_tag = tag;
    p.system_prompt = random_text();
    p.question = random_text();
    p.answer = random_text();
    p.media.frames_dir = "frames/" + p.video_id + ".vqf";
    p.media.fps = 1.0 + (i % 59);
    p.media.duration_s = 1.0 + (i % 31);
    if (coin(rng)) {
      quality::StallingTrace t;
      t.frame_rate = p.media.fps;
      const int n = 1 + i % 40;
      for (int f = 0; f < n; ++f) t.flags.push_back(coin(rng) ? 1 : 0);
      p.stalling = t;
    }
    pairs.push_back(std::move(p));
  }

  for (const auto& p : pairs) {
    const std::string line = corpus_line(p);
    const auto back = parse_corpus_line(line, 1);
    CHECK(corpus_line(back) == line);
  }

  const std::string path = temp_path("vq_corpus_test.jsonl");
  write_corpus(path, pairs);
  const auto loaded = read_corpus(path);
  REQUIRE(loaded.size() == pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i)
    CHECK(corpus_line(loaded[i]) == corpus_line(pairs[i]));
  std::filesystem::remove(path);
}

TEST_CASE("corpus parser reports the offending line") {
  try {
    parse_corpus_line("{not json", 17);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 17") != std::string::npos);
  }
  // Structurally valid JSON with an illegal stage/tag combination.
  InstructionPair p;
  p.id = "x";
  p.video_id = "v";
  p.stage = Stage::S1_spatial;
  p.task_tag = TaskTag::Distortion;
  p.question = "q";
  p.answer = "a";
  std::string line = corpus_line(p);
  const size_t pos = line.find("\"distortion\"");
  REQUIRE(pos != std::string::npos);
  line.replace(pos, 12, "\"level\"");
  CHECK_THROWS_AS(parse_corpus_line(line, 1), Error);
}

TEST_CASE("manifest and annotations round-trip") {
  std::vector<VideoManifestEntry> entries;
  entries.push_back(ugc_entry("m1", 88.0));
  entries[0].distortions = {DistortionLabel::Noise,
                            DistortionLabel::CompressionArtifact};
  VideoManifestEntry stream = ugc_entry("m2", 42.0);
  stream.kind = MediaKind::StreamingVideo;
  stream.stalling = quality::StallingTrace{{1, 0, 0, 1, 1}, 2.0};
  entries.push_back(stream);

  const std::string path = temp_path("vq_manifest_test.json");
  write_manifest(path, entries);
  const auto loaded = read_manifest(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "m1");
  CHECK(loaded[0].mos->value == 88.0);
  CHECK(loaded[0].distortions == entries[0].distortions);
  CHECK(loaded[1].kind == MediaKind::StreamingVideo);
  REQUIRE(loaded[1].stalling.has_value());
  CHECK(loaded[1].stalling->flags == stream.stalling->flags);
  CHECK(loaded[1].stalling->frame_rate == 2.0);
  std::filesystem::remove(path);

  AnnotationSet set;
  VideoAnnotations ann;
  OverallDepiction d;
  d.reference_level = QualityLevel::Poor;
  d.items.push_back({"noise", "quite severe", "throughout the playback",
                     std::string("in the sky region")});
  d.free_text = "Severe noise throughout.";
  ann.overall = d;
  ann.in_context.push_back({"Flicker at the start.", DepictionFocus::Temporal});
  ann.extended.push_back({"Reshoot with a tripod.", DepictionFocus::Reshoot});
  ann.aigc = AigcDepiction{"fair", "loose", "static", "partial", "shaky", 2};
  set["m1"] = ann;

  const std::string apath = temp_path("vq_annotations_test.json");
  write_annotations(apath, set);
  const auto back = read_annotations(apath);
  REQUIRE(back.count("m1") == 1);
  const auto& b = back.at("m1");
  REQUIRE(b.overall.has_value());
  CHECK(b.overall->reference_level == QualityLevel::Poor);
  REQUIRE(b.overall->items.size() == 1);
  CHECK(b.overall->items[0].location == std::string("in the sky region"));
  REQUIRE(b.in_context.size() == 1);
  CHECK(b.in_context[0].focus == DepictionFocus::Temporal);
  REQUIRE(b.extended.size() == 1);
  CHECK(b.extended[0].focus == DepictionFocus::Reshoot);
  REQUIRE(b.aigc.has_value());
  CHECK(b.aigc->reference_level == 2);
  std::filesystem::remove(apath);
}

TEST_CASE("synthetic clips are deterministic and round-trip through .vqf") {
  synth::SynthConfig cfg;
  cfg.frame_size = 16;
  cfg.duration_s = 3.0;
  cfg.frame_rate = 4.0;
  const auto a = synth::generate_clip(5, 0, 0.3, cfg);
  const auto b = synth::generate_clip(5, 0, 0.3, cfg);
  REQUIRE(a.frames.size() == 12);
  for (size_t f = 0; f < a.frames.size(); ++f)
    CHECK(a.frames[f].v == b.frames[f].v);
  CHECK(synth::generate_clip(5, 1, 0.3, cfg).frames[0].v != a.frames[0].v);
  for (const auto& frame : a.frames)
    for (double px : frame.v) {
      CHECK(px >= 0.0);
      CHECK(px <= 1.0);
    }

  const std::string path = temp_path("vq_clip_test.vqf");
  synth::write_frames(path, a);
  const auto back = synth::read_frames(path);
  REQUIRE(back.frames.size() == a.frames.size());
  CHECK(back.frame_rate == doctest::Approx(4.0));
  for (size_t f = 0; f < a.frames.size(); ++f)
    for (size_t i = 0; i < a.frames[f].size(); ++i)
      CHECK(back.frames[f].v[i] ==
            doctest::Approx(a.frames[f].v[i]).epsilon(1e-6));
  std::filesystem::remove(path);

  CHECK(synth::keyframes_at_1fps(a).size() == 3);
  const auto motion = synth::motion_frames(a, 8);
  REQUIRE(motion.size() == 12);
  CHECK(motion[0].rows == 8);

  CHECK(synth::proxy_mos(0.0).value == 100.0);
  CHECK(synth::proxy_mos(1.0).value == 0.0);
  CHECK(synth::proxy_mos(0.25).value == doctest::Approx(75.0));
  CHECK(synth::implied_distortions(0.0).empty());
  CHECK(synth::implied_distortions(0.9).size() == 4);
}

TEST_CASE("synthetic corpus writes a loadable manifest and annotations") {
  const std::string dir = temp_path("vq_synth_corpus_test");
  std::filesystem::remove_all(dir);
  synth::SynthConfig cfg;
  cfg.frame_size = 12;
  cfg.duration_s = 2.0;
  cfg.frame_rate = 2.0;
  cfg.streaming_fraction = 0.3;
  const auto corpus = synth::generate_synthetic_corpus(11, 10, cfg, dir);
  REQUIRE(corpus.entries.size() == 10);

  const auto manifest = read_manifest(dir + "/manifest.json");
  REQUIRE(manifest.size() == 10);
  int streaming = 0;
  for (const auto& e : manifest) {
    validate(e);
    CHECK(std::filesystem::exists(e.media_ref));
    if (e.kind == MediaKind::StreamingVideo) {
      ++streaming;
      CHECK(e.stalling.has_value());
    }
  }
  CHECK(streaming == 3);

  const auto annotations = read_annotations(dir + "/annotations.json");
  const auto vocab = ControlledVocab::load(kDataDir);
  REQUIRE(annotations.size() == 10);
  for (const auto& [id, ann] : annotations) {
    REQUIRE(ann.overall.has_value());
    validate(*ann.overall, vocab);
  }

  // The Stage-3 pipeline runs end to end on a synthetic video.
  const auto& entry = corpus.entries[5];
  const auto& depiction = *corpus.annotations.at(entry.id).overall;
  const auto pairs = build_stage3_pairs(
      entry, depiction, vocab, make_stub_extension_client(depiction, vocab));
  CHECK(pairs.size() == 6);
  std::filesystem::remove_all(dir);
}
