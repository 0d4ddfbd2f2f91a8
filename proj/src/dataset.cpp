#include "vidqual/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace vq::data {

namespace {

using quality::DistortionLabel;
using quality::QualityLevel;

const std::array<std::string, 4> kMediaKindNames = {"image", "ugc_video",
                                                    "streaming_video",
                                                    "aigc_video"};
const std::array<std::string, 5> kStageNames = {"S1_spatial", "S1_motion",
                                                "S2_ugc", "S2_stream", "S3"};
const std::array<std::string, 7> kTaskTagNames = {
    "distortion",      "level",    "quality_centric", "temporal_centric",
    "extended",        "in_context", "causal"};
const std::array<std::string, 7> kFocusNames = {
    "temporal", "spatial", "cause", "severity", "reshoot", "postprocess",
    "attribute"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string media_word(const VideoManifestEntry& entry) {
  return entry.kind == MediaKind::Image ? "image" : "video";
}

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

QualityLevel entry_level(const VideoManifestEntry& entry) {
  require(entry.mos.has_value(), "entry '" + entry.id + "' has no MOS");
  return quality::mos_to_level(quality::normalize_mos(*entry.mos));
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper((unsigned char)s[0]));
  return s;
}

InstructionPair stage1_pair(const VideoManifestEntry& entry,
                            const std::vector<DistortionLabel>& labels,
                            const std::vector<DistortionLabel>& universe,
                            bool motion, std::uint64_t seed) {
  for (auto l : labels)
    require(std::find(universe.begin(), universe.end(), l) != universe.end(),
            "stage-1 label '" + quality::distortion_name(l) +
                "' is outside the " +
                std::string(motion ? "motion" : "spatial") + " label set");
  // Candidate options are the full label universe, shuffled under the seed.
  std::vector<DistortionLabel> options = universe;
  std::mt19937_64 rng(derive_seed(seed, motion ? "s1-motion-options"
                                               : "s1-spatial-options"));
  std::shuffle(options.begin(), options.end(), rng);

  std::vector<std::string> option_names;
  std::vector<std::string> answer_names;  // in option order, so seed-stable
  for (auto o : options) {
    option_names.push_back(quality::distortion_name(o));
    if (std::find(labels.begin(), labels.end(), o) != labels.end())
      answer_names.push_back(quality::distortion_name(o));
  }

  const std::string kind = motion ? "motion" : "spatial";
  std::string question = templates::stage1_question_template();
  question = templates::substitute(question, "{media}", media_word(entry));
  question = templates::substitute(question, "{kind}", kind);
  question = templates::substitute(question, "{options}",
                                   join(option_names, ", "));

  std::string answer;
  if (answer_names.empty()) {
    answer = templates::substitute(
        templates::stage1_no_distortion_answer_template(), "{media}",
        media_word(entry));
  } else {
    answer = templates::stage1_answer_template();
    answer = templates::substitute(answer, "{media}", media_word(entry));
    answer = templates::substitute(answer, "{kind}", kind);
    answer = templates::substitute(answer, "{labels}",
                                   join(answer_names, ", "));
  }

  InstructionPair pair;
  pair.video_id = entry.id;
  pair.stage = motion ? Stage::S1_motion : Stage::S1_spatial;
  pair.task_tag = TaskTag::Distortion;
  pair.id = entry.id + "-" + stage_name(pair.stage) + "-distortion";
  pair.question = question;
  pair.answer = answer;
  return pair;
}

std::string level_answer(QualityLevel level) {
  return templates::substitute(templates::stage2_answer_template(), "{LEVEL}",
                               quality::level_word(level));
}

}  // namespace

const std::string& media_kind_name(MediaKind kind) {
  return kMediaKindNames[static_cast<int>(kind)];
}

std::optional<MediaKind> media_kind_from_name(const std::string& name) {
  for (int i = 0; i < 4; ++i)
    if (kMediaKindNames[i] == name) return static_cast<MediaKind>(i);
  return std::nullopt;
}

const std::string& stage_name(Stage stage) {
  return kStageNames[static_cast<int>(stage)];
}

std::optional<Stage> stage_from_name(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  return std::nullopt;
}

const std::string& task_tag_name(TaskTag tag) {
  return kTaskTagNames[static_cast<int>(tag)];
}

std::optional<TaskTag> task_tag_from_name(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (kTaskTagNames[i] == name) return static_cast<TaskTag>(i);
  return std::nullopt;
}

const std::string& focus_name(DepictionFocus focus) {
  return kFocusNames[static_cast<int>(focus)];
}

std::optional<DepictionFocus> focus_from_name(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (kFocusNames[i] == name) return static_cast<DepictionFocus>(i);
  return std::nullopt;
}

bool stage_allows_task(Stage stage, TaskTag tag) {
  switch (stage) {
    case Stage::S1_spatial:
    case Stage::S1_motion:
      return tag == TaskTag::Distortion;
    case Stage::S2_ugc:
    case Stage::S2_stream:
      return tag == TaskTag::Level;
    case Stage::S3:
      return tag == TaskTag::QualityCentric || tag == TaskTag::TemporalCentric ||
             tag == TaskTag::Extended || tag == TaskTag::InContext ||
             tag == TaskTag::Causal;
  }
  return false;
}

void validate(const VideoManifestEntry& entry) {
  require(!entry.id.empty(), "manifest entry without id");
  if (entry.kind != MediaKind::Image)
    require(entry.duration_s > 0.0,
            "entry '" + entry.id + "': videos need duration > 0");
  if (entry.kind == MediaKind::StreamingVideo)
    require(entry.stalling.has_value(),
            "entry '" + entry.id + "': streaming videos carry a stalling trace");
  if (entry.stalling) quality::validate(*entry.stalling);
}

void validate(const InstructionPair& pair) {
  require(!pair.question.empty() && !pair.answer.empty(),
          "instruction pair '" + pair.id + "': question and answer non-empty");
  require(stage_allows_task(pair.stage, pair.task_tag),
          "instruction pair '" + pair.id + "': stage/task_tag combination " +
              stage_name(pair.stage) + "/" + task_tag_name(pair.task_tag) +
              " is invalid");
}

ControlledVocab ControlledVocab::load(const std::string& dir) {
  ControlledVocab v;
  auto read_lines = [](const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open vocabulary file " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      lines.push_back(line);
    }
    return lines;
  };
  v.attributes = read_lines(dir + "/attributes.txt");
  for (const auto& line : read_lines(dir + "/degrees.txt")) {
    const size_t tab = line.find('\t');
    require(tab != std::string::npos,
            "degrees.txt: expected 'degree<TAB>pos|neg': " + line);
    const std::string name = trim(line.substr(0, tab));
    const std::string pol = trim(line.substr(tab + 1));
    require(pol == "pos" || pol == "neg",
            "degrees.txt: polarity must be pos or neg: " + line);
    v.degree_polarity[name] = pol == "pos" ? 1 : -1;
  }
  v.temporal_phrases = read_lines(dir + "/temporal.txt");
  require(!v.attributes.empty() && !v.degree_polarity.empty(),
          "controlled vocabulary is empty");
  return v;
}

bool ControlledVocab::has_attribute(const std::string& a) const {
  return std::find(attributes.begin(), attributes.end(), a) != attributes.end();
}

bool ControlledVocab::has_degree(const std::string& d) const {
  return degree_polarity.count(d) > 0;
}

int ControlledVocab::polarity(const std::string& degree) const {
  auto it = degree_polarity.find(degree);
  require(it != degree_polarity.end(), "unknown degree '" + degree + "'");
  return it->second;
}

void validate(const OverallDepiction& depiction, const ControlledVocab& vocab) {
  require(!depiction.items.empty(), "overall depiction needs at least one item");
  require(!trim(depiction.free_text).empty(),
          "overall depiction needs non-empty free text");
  for (const auto& item : depiction.items) {
    require(vocab.has_attribute(item.attribute),
            "attribute '" + item.attribute + "' is not in the vocabulary");
    require(vocab.has_degree(item.degree),
            "degree '" + item.degree + "' is not in the vocabulary");
  }
}

void validate(const AigcDepiction& depiction) {
  require(!depiction.visual_quality.empty() &&
              !depiction.temporal_alignment.empty() &&
              !depiction.dynamic_degree.empty() &&
              !depiction.text_to_video_alignment.empty() &&
              !depiction.factual_consistency.empty(),
          "AIGC depiction needs all five aspects");
  require(depiction.reference_level >= 1 && depiction.reference_level <= 4,
          "AIGC reference level must lie in 1..4");
}

SamplingPlan plan_sampling(const std::vector<VideoManifestEntry>& manifest,
                           int target_count, std::uint64_t seed) {
  require(!manifest.empty(), "plan_sampling: empty manifest");
  require(target_count >= 0 &&
              target_count <= static_cast<int>(manifest.size()),
          "plan_sampling: target_count must lie in [0, |manifest|]");

  std::array<std::vector<std::string>, 5> per_level_ids;
  for (const auto& entry : manifest)
    per_level_ids[static_cast<int>(entry_level(entry))].push_back(entry.id);

  const double total = static_cast<double>(manifest.size());
  std::array<int, 5> quota{};
  std::array<double, 5> remainder{};
  int assigned = 0;
  for (int i = 0; i < 5; ++i) {
    const double exact = target_count * per_level_ids[i].size() / total;
    quota[i] = static_cast<int>(exact);
    remainder[i] = exact - quota[i];
    assigned += quota[i];
  }
  // Largest-remainder rounding; ties broken by level order High..Low.
  std::array<int, 5> order = {0, 1, 2, 3, 4};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[a] > remainder[b];
  });
  for (int k = 0; assigned < target_count; k = (k + 1) % 5) {
    const int i = order[k];
    if (quota[i] < static_cast<int>(per_level_ids[i].size())) {
      ++quota[i];
      ++assigned;
    }
  }

  SamplingPlan plan;
  plan.seed = seed;
  // Clamp quotas that exceed availability and redistribute the shortfall.
  int shortfall = 0;
  for (int i = 0; i < 5; ++i) {
    const int avail = static_cast<int>(per_level_ids[i].size());
    if (quota[i] > avail) {
      shortfall += quota[i] - avail;
      plan.warnings.push_back("quota for level " +
                              quality::level_word(static_cast<QualityLevel>(i)) +
                              " clamped to " + std::to_string(avail));
      quota[i] = avail;
    }
  }
  for (int k = 0; shortfall > 0; k = (k + 1) % 5) {
    const int i = order[k];
    if (quota[i] < static_cast<int>(per_level_ids[i].size())) {
      ++quota[i];
      --shortfall;
    }
  }

  for (int i = 0; i < 5; ++i) {
    auto ids = per_level_ids[i];
    std::mt19937_64 rng(
        derive_seed(seed, "sampling-level-" + std::to_string(i)));
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(quota[i]);
    plan.per_level_counts[static_cast<QualityLevel>(i)] = quota[i];
    plan.selected_ids.insert(plan.selected_ids.end(), ids.begin(), ids.end());
  }
  return plan;
}

InstructionPair build_stage1_spatial_pair(
    const VideoManifestEntry& entry,
    const std::vector<DistortionLabel>& labels, std::uint64_t seed) {
  require(entry.kind == MediaKind::Image || entry.kind == MediaKind::UgcVideo,
          "stage-1 spatial pairs need an image or ugc_video entry");
  return stage1_pair(entry, labels, quality::spatial_distortions(), false,
                     seed);
}

InstructionPair build_stage1_motion_pair(
    const VideoManifestEntry& entry,
    const std::vector<DistortionLabel>& labels, std::uint64_t seed) {
  require(entry.kind != MediaKind::Image,
          "stage-1 motion pairs need a video entry");
  return stage1_pair(entry, labels, quality::motion_distortions(), true, seed);
}

InstructionPair build_stage2_ugc_pair(const VideoManifestEntry& entry) {
  const QualityLevel level = entry_level(entry);
  InstructionPair pair;
  pair.video_id = entry.id;
  pair.stage = Stage::S2_ugc;
  pair.task_tag = TaskTag::Level;
  pair.id = entry.id + "-S2_ugc-level";
  pair.question = templates::stage2_question();
  pair.answer = level_answer(level);
  return pair;
}

InstructionPair build_stage2_streaming_pair(const VideoManifestEntry& entry,
                                            StallingFormat format) {
  require(entry.kind == MediaKind::StreamingVideo && entry.stalling,
          "stage-2 streaming pairs need a streaming_video entry with a trace");
  const QualityLevel level = entry_level(entry);

  std::string preamble;
  if (format == StallingFormat::Binary) {
    preamble = templates::substitute(
        templates::streaming_binary_preamble_template(), "{sequence}",
        quality::encode_stalling_binary(*entry.stalling));
  } else {
    const auto s = quality::summarize_stalling(*entry.stalling);
    std::vector<std::string> durations;
    for (double d : s.event_durations) durations.push_back(format_number(d));
    std::string tpl = templates::streaming_summary_preamble_template();
    tpl = templates::substitute(tpl, "{count}",
                                std::to_string(s.event_count));
    tpl = templates::substitute(
        tpl, "{durations}",
        durations.empty() ? std::string("none")
                          : join(durations, ", ") + " seconds");
    tpl = templates::substitute(tpl, "{ratio}", format_number(s.stall_ratio));
    tpl = templates::substitute(tpl, "{initial}",
                                format_number(s.initial_buffering));
    tpl = templates::substitute(tpl, "{tail}", format_number(s.tail_gap));
    preamble = tpl;
  }

  InstructionPair pair;
  pair.video_id = entry.id;
  pair.stage = Stage::S2_stream;
  pair.task_tag = TaskTag::Level;
  pair.id = entry.id + "-S2_stream-level";
  pair.question = preamble + templates::stage2_question();
  pair.answer = level_answer(level);
  pair.stalling = entry.stalling;
  return pair;
}

namespace {

std::string render_item_sentence(const DepictionItem& item, bool contrast) {
  std::string body = "the " + item.attribute + " is " + item.degree + " " +
                     item.temporal;
  if (item.location) body += ", " + *item.location;
  if (contrast) return "However, " + body + ".";
  return capitalize(body) + ".";
}

}  // namespace

InstructionPair build_causal_pair(const OverallDepiction& depiction,
                                  const VideoManifestEntry& entry,
                                  const ControlledVocab& vocab) {
  validate(depiction, vocab);
  std::string justification;
  int prev_polarity = 0;
  for (const auto& item : depiction.items) {
    const int pol = vocab.polarity(item.degree);
    const bool contrast = prev_polarity > 0 && pol < 0;
    if (!justification.empty()) justification += " ";
    justification += render_item_sentence(item, contrast);
    prev_polarity = pol;
  }

  InstructionPair pair;
  pair.video_id = entry.id;
  pair.stage = Stage::S3;
  pair.task_tag = TaskTag::Causal;
  pair.id = entry.id + "-S3-causal";
  pair.question = templates::causal_question();
  pair.answer = level_answer(depiction.reference_level) + " " + justification;
  return pair;
}

std::vector<std::string> render_extension_prompts(
    const OverallDepiction& depiction) {
  require(!trim(depiction.free_text).empty(),
          "render_extension_prompts: depiction free text is empty");
  require(!depiction.items.empty(),
          "render_extension_prompts: depiction has no items");
  const std::string& body = depiction.free_text;
  return {
      templates::substitute(templates::quality_centric_template(),
                            "[overall depiction]", body),
      templates::substitute(templates::temporal_centric_template(),
                            "[overall depiction]", body),
      templates::substitute(templates::extended_conversation_template(),
                            "[overall depiction]", body),
  };
}

std::vector<std::string> render_extension_prompts(
    const InContextDepiction& depiction) {
  require(!trim(depiction.text).empty(),
          "render_extension_prompts: in-context depiction text is empty");
  return {templates::substitute(templates::rewrite_template(), "[depiction]",
                                depiction.text)};
}

std::vector<std::string> render_extension_prompts(
    const ExtendedConversation& conversation) {
  require(!trim(conversation.text).empty(),
          "render_extension_prompts: extended conversation text is empty");
  return {templates::substitute(templates::rewrite_template(), "[depiction]",
                                conversation.text)};
}

std::string aigc_depiction_body(const AigcDepiction& d) {
  validate(d);
  return "Visual quality: " + d.visual_quality +
         " Temporal alignment: " + d.temporal_alignment +
         " Dynamic degree: " + d.dynamic_degree +
         " Text-to-video alignment: " + d.text_to_video_alignment +
         " Factual consistency: " + d.factual_consistency;
}

std::vector<std::string> render_extension_prompts(
    const AigcDepiction& depiction) {
  // AIGC clips are short; the temporal-centric prompt is skipped.
  const std::string body = aigc_depiction_body(depiction);
  return {
      templates::substitute(templates::quality_centric_template(),
                            "[overall depiction]", body),
      templates::substitute(templates::extended_conversation_template(),
                            "[overall depiction]", body),
  };
}

ParsedExtension parse_extension_response(const std::string& text) {
  // Marker scan: "question" (optionally "question N") or "answer", each
  // followed by ':', case-insensitive.
  struct Marker {
    bool question;
    size_t begin;  // first char of the marker word
    size_t end;    // one past the ':'
  };
  std::vector<Marker> markers;
  const std::string low = lower(text);
  for (size_t i = 0; i < low.size(); ++i) {
    for (const char* word : {"question", "answer"}) {
      const size_t wlen = std::strlen(word);
      if (low.compare(i, wlen, word) != 0) continue;
      if (i > 0 && std::isalnum(static_cast<unsigned char>(low[i - 1])))
        continue;
      size_t j = i + wlen;
      if (word[0] == 'q') {
        size_t k = j;
        while (k < low.size() && std::isspace(static_cast<unsigned char>(low[k])))
          ++k;
        size_t digits = k;
        while (digits < low.size() &&
               std::isdigit(static_cast<unsigned char>(low[digits])))
          ++digits;
        if (digits > k) j = digits;
      }
      while (j < low.size() && std::isspace(static_cast<unsigned char>(low[j])))
        ++j;
      if (j < low.size() && low[j] == ':') {
        markers.push_back({word[0] == 'q', i, j + 1});
        i = j;
      }
      break;
    }
  }

  ParsedExtension out;
  std::string pending_question;
  bool in_answer = false;
  std::string pending_answer;
  auto flush_pair = [&]() {
    if (in_answer) {
      if (!pending_question.empty() && !pending_answer.empty()) {
        out.pairs.push_back({pending_question, pending_answer});
      } else {
        out.diagnostics.push_back("dropped incomplete pair near 'Answer:'");
      }
    } else if (!pending_question.empty()) {
      out.diagnostics.push_back("dropped question without answer: '" +
                                pending_question + "'");
    }
    pending_question.clear();
    pending_answer.clear();
    in_answer = false;
  };

  for (size_t m = 0; m < markers.size(); ++m) {
    const size_t text_begin = markers[m].end;
    const size_t text_end =
        m + 1 < markers.size() ? markers[m + 1].begin : text.size();
    const std::string segment = trim(text.substr(text_begin, text_end - text_begin));
    if (markers[m].question) {
      // "Question 1: Question:" numbering yields an empty segment between
      // two question markers; the later marker supersedes silently.
      if (in_answer || !pending_question.empty()) flush_pair();
      pending_question = segment;
    } else {
      if (pending_question.empty()) {
        out.diagnostics.push_back("orphan 'Answer:' marker dropped");
        continue;
      }
      in_answer = true;
      pending_answer = segment;
      flush_pair();
    }
  }
  flush_pair();
  if (out.pairs.empty())
    out.diagnostics.push_back("no complete question/answer pairs found");
  return out;
}

InstructionPair attach_system_prompt(InstructionPair pair,
                                     const VideoManifestEntry& entry,
                                     SystemPromptMode mode) {
  require(entry.duration_s > 0.0,
          "attach_system_prompt: entry '" + entry.id + "' has no duration");
  require(entry.frame_rate > 0.0,
          "attach_system_prompt: entry '" + entry.id + "' has no frame rate");
  pair.system_prompt =
      templates::render_system_prompt(mode, entry.duration_s, entry.frame_rate);
  pair.media.frames_dir = entry.media_ref;
  pair.media.fps = entry.frame_rate;
  pair.media.duration_s = entry.duration_s;
  return pair;
}

namespace {

enum class PromptKind { Quality, Temporal, Extended, Rewrite };

PromptKind classify_prompt(const std::string& prompt) {
  if (prompt.find("create exactly 3 questions") != std::string::npos)
    return PromptKind::Quality;
  if (prompt.find("related to the temporal aspect") != std::string::npos)
    return PromptKind::Temporal;
  if (prompt.find("create only 1 extended question") != std::string::npos)
    return PromptKind::Extended;
  if (prompt.find("rewrite only 1 question") != std::string::npos ||
      prompt.find("please rewrite only 1 question") != std::string::npos ||
      prompt.find("one brief in-context quality depiction") != std::string::npos)
    return PromptKind::Rewrite;
  fail("stub extension client: unrecognized prompt");
}

std::string pick_other_degree(const ControlledVocab& vocab,
                              const std::string& not_this, size_t index) {
  std::vector<std::string> names;
  for (const auto& [name, pol] : vocab.degree_polarity)
    if (name != not_this) names.push_back(name);
  require(!names.empty(), "degree vocabulary too small for stub extension");
  return names[index % names.size()];
}

}  // namespace

ExtensionClient make_stub_extension_client(const OverallDepiction& depiction,
                                           const ControlledVocab& vocab) {
  return [depiction, vocab](const std::string& prompt) -> std::string {
    const auto& items = depiction.items;
    auto item = [&](size_t i) -> const DepictionItem& {
      return items[i % items.size()];
    };
    std::ostringstream out;
    switch (classify_prompt(prompt)) {
      case PromptKind::Quality: {
        const auto& a = item(0);
        const auto& b = item(1);
        const auto& c = item(2);
        out << "Question 1: Question: Is the " << a.attribute
            << " of the video " << a.degree << " " << a.temporal
            << "? A. Yes B. No Answer: A. Yes ";
        out << "Question 2: Question: How is the " << b.attribute
            << " of the video " << b.temporal << "? A. " << b.degree << " B. "
            << pick_other_degree(vocab, b.degree, 0) << " C. "
            << pick_other_degree(vocab, b.degree, 1) << " Answer: A. "
            << b.degree << " ";
        out << "Question 3: Question: How would you rate the " << c.attribute
            << " of the video " << c.temporal << "? Answer: The "
            << c.attribute << " is " << c.degree << ".";
        return out.str();
      }
      case PromptKind::Temporal: {
        const auto& a = item(0);
        out << "Question: When is the " << a.attribute
            << " of the video noticeable? Answer: The " << a.attribute
            << " is " << a.degree << " " << a.temporal << ".";
        return out.str();
      }
      case PromptKind::Extended: {
        const auto& a = item(0);
        out << "Question: What could be done to improve the quality of this "
               "video? Answer: Addressing the "
            << a.attribute << " being " << a.degree
            << " would improve the overall quality.";
        return out.str();
      }
      case PromptKind::Rewrite:
        break;
    }
    fail("stub extension client: rewrite prompt sent to depiction client");
  };
}

ExtensionClient make_stub_extension_client(const InContextDepiction& depiction) {
  const std::string text = depiction.text;
  return [text](const std::string&) -> std::string {
    return "Question: What quality phenomenon occurs at the described moment "
           "or region of the video? Answer: " +
           text;
  };
}

ExtensionClient make_stub_extension_client(
    const ExtendedConversation& conversation) {
  const std::string text = conversation.text;
  return [text](const std::string&) -> std::string {
    return "Question: What does the extended quality discussion of this video "
           "conclude? Answer: " +
           text;
  };
}

std::vector<InstructionPair> build_stage3_pairs(
    const VideoManifestEntry& entry, const OverallDepiction& depiction,
    const ControlledVocab& vocab, const ExtensionClient& client) {
  validate(depiction, vocab);
  const auto prompts = render_extension_prompts(depiction);
  const std::array<TaskTag, 3> tags = {TaskTag::QualityCentric,
                                       TaskTag::TemporalCentric,
                                       TaskTag::Extended};
  std::vector<InstructionPair> pairs;
  for (size_t p = 0; p < prompts.size(); ++p) {
    const auto parsed = parse_extension_response(client(prompts[p]));
    int index = 0;
    for (const auto& qa : parsed.pairs) {
      InstructionPair pair;
      pair.video_id = entry.id;
      pair.stage = Stage::S3;
      pair.task_tag = tags[p];
      pair.id = entry.id + "-S3-" + task_tag_name(tags[p]) + "-" +
                std::to_string(index++);
      pair.question = qa.question;
      pair.answer = qa.answer;
      pairs.push_back(std::move(pair));
    }
  }
  pairs.push_back(build_causal_pair(depiction, entry, vocab));
  return pairs;
}

}  // namespace vq::data
