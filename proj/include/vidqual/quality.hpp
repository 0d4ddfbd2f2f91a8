#ifndef VIDQUAL_QUALITY_HPP
#define VIDQUAL_QUALITY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vidqual/common.hpp"

// Pure quality-assessment math: MOS normalization, five-level binning,
// level weights, and stalling-trace analytics. Everything here is
// deterministic and side-effect free.
namespace vq::quality {

// Five quality levels, ordered best to worst. The integer value doubles as
// the index into LevelWeights.
enum class QualityLevel : int { High = 0, Good = 1, Fair = 2, Poor = 3, Low = 4 };

inline constexpr std::array<QualityLevel, 5> kAllLevels = {
    QualityLevel::High, QualityLevel::Good, QualityLevel::Fair,
    QualityLevel::Poor, QualityLevel::Low};

const std::string& level_word(QualityLevel level);
// Case-insensitive lookup of a level word; empty if the word is not a level.
std::optional<QualityLevel> level_from_word(const std::string& word);

// A raw MOS in its source dataset's units together with the declared scale.
struct MosScore {
  double value = 0.0;
  double scale_min = 0.0;
  double scale_max = 0.0;
};

struct NormalizedScore {
  double value = 0.0;  // in [0, 100]
};

// Scoring weight vector, indexed [High, Good, Fair, Poor, Low].
struct LevelWeights {
  std::array<double, 5> weights = {1.0, 0.75, 0.5, 0.25, 0.0};
};

void validate(const LevelWeights& w);

// Per-frame playback flags: 1 = stalled, 0 = smooth.
struct StallingTrace {
  std::vector<std::uint8_t> flags;
  double frame_rate = 0.0;  // frames per second
};

void validate(const StallingTrace& trace);

struct StallingSummary {
  int event_count = 0;
  std::vector<double> event_durations;  // seconds, one per event
  double stall_ratio = 0.0;             // stalled frames / total frames
  double initial_buffering = 0.0;       // leading stall, seconds
  double tail_gap = 0.0;  // last-stall-end to playback end, seconds
};

// Stalls longer than this are classified as long stalls in reports.
inline constexpr double kLongStallSeconds = 2.0;

enum class DistortionLabel : int {
  // spatial
  CompressionArtifact = 0,
  SpatialBlur,
  MotionBlur,
  Noise,
  Overexposure,
  Underexposure,
  LowContrast,
  HighContrast,
  Oversaturation,
  Desaturation,
  BlockEffect,
  // motion
  Flicker,
  Stuttering,
};

const std::vector<DistortionLabel>& spatial_distortions();  // 11 labels
const std::vector<DistortionLabel>& motion_distortions();   // 2 labels
const std::string& distortion_name(DistortionLabel label);
bool is_motion_distortion(DistortionLabel label);
std::optional<DistortionLabel> distortion_from_name(const std::string& name);

// Affine map of a MOS onto [0, 100] using the declared scale bounds.
NormalizedScore normalize_mos(const MosScore& mos);

// 20-point bins, half-open with a closed top: [80,100] -> High.
QualityLevel mos_to_level(const NormalizedScore& score);

double level_weight(QualityLevel level, const LevelWeights& weights);

// One '0'/'1' character per frame, original order.
std::string encode_stalling_binary(const StallingTrace& trace);
// Inverse of the encoding; frame rate must be supplied by the caller.
StallingTrace parse_stalling_binary(const std::string& text, double frame_rate);

StallingSummary summarize_stalling(const StallingTrace& trace);

}  // namespace vq::quality

#endif  // VIDQUAL_QUALITY_HPP
