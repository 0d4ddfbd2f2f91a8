#include "vidqual/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace vq {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace vq

namespace vq::quality {

namespace {

const std::array<std::string, 5> kLevelWords = {"High", "Good", "Fair", "Poor",
                                                "Low"};

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

const std::array<std::string, 13> kDistortionNames = {
    "compression artifact", "spatial blur",  "motion blur", "noise",
    "overexposure",         "underexposure", "low contrast", "high contrast",
    "oversaturation",       "desaturation",  "block effect",
    "flicker (camera shake)", "stuttering"};

}  // namespace

const std::string& level_word(QualityLevel level) {
  return kLevelWords[static_cast<int>(level)];
}

std::optional<QualityLevel> level_from_word(const std::string& word) {
  const std::string w = lower(word);
  for (int i = 0; i < 5; ++i)
    if (lower(kLevelWords[i]) == w) return static_cast<QualityLevel>(i);
  return std::nullopt;
}

void validate(const LevelWeights& w) {
  for (int i = 0; i < 5; ++i)
    require(w.weights[i] >= 0.0 && w.weights[i] <= 1.0,
            "LevelWeights: weights must lie in [0,1]");
  for (int i = 1; i < 5; ++i)
    require(w.weights[i - 1] > w.weights[i],
            "LevelWeights: weights must be strictly decreasing");
}

void validate(const StallingTrace& trace) {
  require(!trace.flags.empty(), "StallingTrace: flags must be non-empty");
  require(trace.frame_rate > 0.0, "StallingTrace: frame_rate must be > 0");
  for (auto f : trace.flags)
    require(f == 0 || f == 1, "StallingTrace: flags must be 0 or 1");
}

const std::vector<DistortionLabel>& spatial_distortions() {
  static const std::vector<DistortionLabel> labels = {
      DistortionLabel::CompressionArtifact, DistortionLabel::SpatialBlur,
      DistortionLabel::MotionBlur,          DistortionLabel::Noise,
      DistortionLabel::Overexposure,        DistortionLabel::Underexposure,
      DistortionLabel::LowContrast,         DistortionLabel::HighContrast,
      DistortionLabel::Oversaturation,      DistortionLabel::Desaturation,
      DistortionLabel::BlockEffect};
  return labels;
}

const std::vector<DistortionLabel>& motion_distortions() {
  static const std::vector<DistortionLabel> labels = {DistortionLabel::Flicker,
                                                      DistortionLabel::Stuttering};
  return labels;
}

const std::string& distortion_name(DistortionLabel label) {
  return kDistortionNames[static_cast<int>(label)];
}

bool is_motion_distortion(DistortionLabel label) {
  return label == DistortionLabel::Flicker ||
         label == DistortionLabel::Stuttering;
}

std::optional<DistortionLabel> distortion_from_name(const std::string& name) {
  for (int i = 0; i < static_cast<int>(kDistortionNames.size()); ++i)
    if (kDistortionNames[i] == name) return static_cast<DistortionLabel>(i);
  return std::nullopt;
}

NormalizedScore normalize_mos(const MosScore& mos) {
  require(mos.scale_min < mos.scale_max,
          "normalize_mos: degenerate scale (scale_min >= scale_max)");
  require(mos.value >= mos.scale_min && mos.value <= mos.scale_max,
          "normalize_mos: value outside declared scale");
  return {100.0 * (mos.value - mos.scale_min) /
          (mos.scale_max - mos.scale_min)};
}

QualityLevel mos_to_level(const NormalizedScore& score) {
  const double s = score.value;
  require(s >= 0.0 && s <= 100.0, "mos_to_level: score outside [0,100]");
  if (s < 20.0) return QualityLevel::Low;
  if (s < 40.0) return QualityLevel::Poor;
  if (s < 60.0) return QualityLevel::Fair;
  if (s < 80.0) return QualityLevel::Good;
  return QualityLevel::High;
}

double level_weight(QualityLevel level, const LevelWeights& weights) {
  validate(weights);
  return weights.weights[static_cast<int>(level)];
}

std::string encode_stalling_binary(const StallingTrace& trace) {
  validate(trace);
  std::string out;
  out.reserve(trace.flags.size());
  for (auto f : trace.flags) out.push_back(f ? '1' : '0');
  return out;
}

StallingTrace parse_stalling_binary(const std::string& text,
                                    double frame_rate) {
  StallingTrace trace;
  trace.frame_rate = frame_rate;
  trace.flags.reserve(text.size());
  for (char c : text) {
    require(c == '0' || c == '1',
            "parse_stalling_binary: character outside {0,1}");
    trace.flags.push_back(c == '1' ? 1 : 0);
  }
  validate(trace);
  return trace;
}

StallingSummary summarize_stalling(const StallingTrace& trace) {
  validate(trace);
  StallingSummary s;
  const size_t n = trace.flags.size();
  const double fps = trace.frame_rate;
  size_t stalled = 0;
  size_t run = 0;
  size_t last_stall_end = 0;  // one past the final stalled frame
  for (size_t i = 0; i <= n; ++i) {
    const bool stall = i < n && trace.flags[i] == 1;
    if (stall) {
      ++run;
      ++stalled;
      last_stall_end = i + 1;
    } else if (run > 0) {
      s.event_durations.push_back(static_cast<double>(run) / fps);
      run = 0;
    }
  }
  s.event_count = static_cast<int>(s.event_durations.size());
  s.stall_ratio = static_cast<double>(stalled) / static_cast<double>(n);
  // Leading run of stalled frames is initial buffering.
  size_t lead = 0;
  while (lead < n && trace.flags[lead] == 1) ++lead;
  s.initial_buffering = static_cast<double>(lead) / fps;
  s.tail_gap = static_cast<double>(n - last_stall_end) / fps;
  return s;
}

}  // namespace vq::quality
