#ifndef VIDQUAL_DATASET_HPP
#define VIDQUAL_DATASET_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidqual/quality.hpp"
#include "vidqual/templates.hpp"

// Instruction-record construction: sampling plans, the stage builders, the
// GPT-extension prompt renderer and response parser, and system-prompt
// attachment. All builders are pure functions of (inputs, seed).
namespace vq::data {

enum class MediaKind { Image, UgcVideo, StreamingVideo, AigcVideo };

const std::string& media_kind_name(MediaKind kind);
std::optional<MediaKind> media_kind_from_name(const std::string& name);

struct VideoManifestEntry {
  std::string id;
  std::string media_ref;  // frames container path
  double duration_s = 0.0;
  double frame_rate = 0.0;
  std::string source_dataset;
  MediaKind kind = MediaKind::UgcVideo;
  std::optional<quality::MosScore> mos;
  std::optional<quality::StallingTrace> stalling;
  std::vector<quality::DistortionLabel> distortions;
};

void validate(const VideoManifestEntry& entry);

struct DepictionItem {
  std::string attribute;  // from the controlled attribute vocabulary
  std::string degree;     // from the controlled degree vocabulary
  std::string temporal;
  std::optional<std::string> location;
};

struct OverallDepiction {
  std::vector<DepictionItem> items;  // at least one
  std::string free_text;
  quality::QualityLevel reference_level = quality::QualityLevel::Fair;
};

struct AigcDepiction {
  std::string visual_quality;
  std::string temporal_alignment;
  std::string dynamic_degree;
  std::string text_to_video_alignment;
  std::string factual_consistency;
  int reference_level = 1;  // 1..4
};

enum class DepictionFocus {
  Temporal,
  Spatial,
  Cause,
  Severity,
  Reshoot,
  Postprocess,
  Attribute,
};

const std::string& focus_name(DepictionFocus focus);
std::optional<DepictionFocus> focus_from_name(const std::string& name);

struct InContextDepiction {
  std::string text;
  DepictionFocus focus = DepictionFocus::Spatial;
};

struct ExtendedConversation {
  std::string text;
  DepictionFocus focus = DepictionFocus::Attribute;
};

enum class Stage { S1_spatial, S1_motion, S2_ugc, S2_stream, S3 };
enum class TaskTag {
  Distortion,
  Level,
  QualityCentric,
  TemporalCentric,
  Extended,
  InContext,
  Causal,
};

const std::string& stage_name(Stage stage);
std::optional<Stage> stage_from_name(const std::string& name);
const std::string& task_tag_name(TaskTag tag);
std::optional<TaskTag> task_tag_from_name(const std::string& name);
// Which task tags are legal for a stage.
bool stage_allows_task(Stage stage, TaskTag tag);

struct MediaRef {
  std::string frames_dir;
  double fps = 0.0;
  double duration_s = 0.0;
};

// One system-prompt + question + answer record; the unit of training data.
struct InstructionPair {
  std::string id;
  std::string video_id;
  std::string system_prompt;
  std::string question;
  std::string answer;
  Stage stage = Stage::S1_spatial;
  TaskTag task_tag = TaskTag::Distortion;
  MediaRef media;
  std::optional<quality::StallingTrace> stalling;
};

void validate(const InstructionPair& pair);

struct SamplingPlan {
  std::vector<std::string> selected_ids;
  std::map<quality::QualityLevel, int> per_level_counts;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Controlled vocabularies for depiction attributes / degrees / temporal
// phrases, loaded from plain data files so edits need no code change.
struct ControlledVocab {
  std::vector<std::string> attributes;
  std::map<std::string, int> degree_polarity;  // +1 positive, -1 negative
  std::vector<std::string> temporal_phrases;

  static ControlledVocab load(const std::string& dir);
  bool has_attribute(const std::string& a) const;
  bool has_degree(const std::string& d) const;
  // +1 / -1; throws on unknown degree.
  int polarity(const std::string& degree) const;
};

void validate(const OverallDepiction& depiction, const ControlledVocab& vocab);
void validate(const AigcDepiction& depiction);

// Per-level quotas proportional to the manifest's level histogram
// (largest-remainder rounding); uniform seeded selection within each level.
SamplingPlan plan_sampling(const std::vector<VideoManifestEntry>& manifest,
                           int target_count, std::uint64_t seed);

InstructionPair build_stage1_spatial_pair(
    const VideoManifestEntry& entry,
    const std::vector<quality::DistortionLabel>& labels, std::uint64_t seed);

InstructionPair build_stage1_motion_pair(
    const VideoManifestEntry& entry,
    const std::vector<quality::DistortionLabel>& labels, std::uint64_t seed);

InstructionPair build_stage2_ugc_pair(const VideoManifestEntry& entry);

enum class StallingFormat { Binary, Summary };

InstructionPair build_stage2_streaming_pair(const VideoManifestEntry& entry,
                                            StallingFormat format);

InstructionPair build_causal_pair(const OverallDepiction& depiction,
                                  const VideoManifestEntry& entry,
                                  const ControlledVocab& vocab);

// Overall depictions yield exactly 3 prompt requests (quality-centric
// batch-of-3, temporal-centric, extended conversation); in-context and
// extended inputs yield exactly 1 rewrite prompt each.
std::vector<std::string> render_extension_prompts(
    const OverallDepiction& depiction);
std::vector<std::string> render_extension_prompts(
    const InContextDepiction& depiction);
std::vector<std::string> render_extension_prompts(
    const ExtendedConversation& conversation);
// AIGC depictions skip the temporal-centric prompt; the five aspects are
// concatenated into the depiction body.
std::vector<std::string> render_extension_prompts(
    const AigcDepiction& depiction);
std::string aigc_depiction_body(const AigcDepiction& depiction);

struct QaPair {
  std::string question;
  std::string answer;
};

struct ParsedExtension {
  std::vector<QaPair> pairs;
  std::vector<std::string> diagnostics;
};

// Extracts ordered (question, answer) pairs by scanning for "Question:" /
// "Answer:" markers (case-insensitive, optional "Question N:" numbering).
// Incomplete trailing fragments are dropped and reported.
ParsedExtension parse_extension_response(const std::string& text);

using SystemPromptMode = templates::SystemPromptMode;

// Prepends the mode-specific system prompt with [length] / [num frames]
// substituted; [image] and [motion] stay symbolic.
InstructionPair attach_system_prompt(InstructionPair pair,
                                     const VideoManifestEntry& entry,
                                     SystemPromptMode mode);

// Pluggable extension client: maps a rendered prompt to a raw response
// text. The default offline client fabricates a well-formed response
// deterministically from the depiction, so no network is ever required.
using ExtensionClient = std::function<std::string(const std::string& prompt)>;

ExtensionClient make_stub_extension_client(const OverallDepiction& depiction,
                                           const ControlledVocab& vocab);
ExtensionClient make_stub_extension_client(const InContextDepiction& depiction);
ExtensionClient make_stub_extension_client(
    const ExtendedConversation& conversation);

// Full Stage-3 build for one video: 3 quality-centric + 1 temporal-centric +
// 1 extended pair via render/parse, plus 1 causal pair.
std::vector<InstructionPair> build_stage3_pairs(
    const VideoManifestEntry& entry, const OverallDepiction& depiction,
    const ControlledVocab& vocab, const ExtensionClient& client);

}  // namespace vq::data

#endif  // VIDQUAL_DATASET_HPP
