#include "vidqual/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

namespace vq::synth {

namespace {

constexpr char kMagic[4] = {'V', 'Q', 'F', '1'};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

Mat box_blur(const Mat& img, int radius) {
  if (radius <= 0) return img;
  Mat out(img.rows, img.cols);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      double acc = 0.0;
      int count = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy < 0 || yy >= img.rows || xx < 0 || xx >= img.cols) continue;
          acc += img.at(yy, xx);
          ++count;
        }
      }
      out.at(y, x) = acc / count;
    }
  }
  return out;
}

Mat avg_pool(const Mat& img, int out_size) {
  Mat out(out_size, out_size);
  for (int y = 0; y < out_size; ++y) {
    const int y0 = y * img.rows / out_size;
    const int y1 = std::max(y0 + 1, (y + 1) * img.rows / out_size);
    for (int x = 0; x < out_size; ++x) {
      const int x0 = x * img.cols / out_size;
      const int x1 = std::max(x0 + 1, (x + 1) * img.cols / out_size);
      double acc = 0.0;
      for (int yy = y0; yy < y1; ++yy)
        for (int xx = x0; xx < x1; ++xx) acc += img.at(yy, xx);
      out.at(y, x) = acc / ((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

}  // namespace

Clip generate_clip(std::uint64_t seed, int index, double magnitude,
                   const SynthConfig& config) {
  require(magnitude >= 0.0 && magnitude <= 1.0,
          "generate_clip: magnitude must lie in [0,1]");
  std::mt19937_64 rng(derive_seed(seed, "clip-" + std::to_string(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n_frames =
      std::max(1, static_cast<int>(std::lround(config.duration_s * config.frame_rate)));
  const int size = config.frame_size;
  const double freq_x = 1.0 + 3.0 * unit(rng);
  const double freq_y = 1.0 + 3.0 * unit(rng);
  const double phase = 6.283185307179586 * unit(rng);
  const double vel = 0.05 + 0.2 * unit(rng);

  const double noise_sigma = 0.35 * magnitude;
  const double brightness_shift = -0.35 * magnitude;
  const int blur_radius = static_cast<int>(std::lround(2.0 * magnitude));
  const bool stutter = magnitude > 0.5;

  std::normal_distribution<double> noise(0.0, 1.0);
  Clip clip;
  clip.frame_rate = config.frame_rate;
  for (int f = 0; f < n_frames; ++f) {
    // Frame-repeat stutter: hold every other frame at high magnitude.
    const int src = stutter ? (f / 2) * 2 : f;
    const double t = src * vel;
    Mat img(size, size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double u = static_cast<double>(x) / size;
        const double v = static_cast<double>(y) / size;
        img.at(y, x) = 0.5 + 0.35 * std::sin(6.28318 * (freq_x * u + t) + phase) *
                                  std::cos(6.28318 * freq_y * v);
      }
    img = box_blur(img, blur_radius);
    for (auto& px : img.v)
      px = clamp01(px + brightness_shift + noise_sigma * noise(rng));
    clip.frames.push_back(std::move(img));
  }
  return clip;
}

quality::MosScore proxy_mos(double magnitude) {
  return {100.0 * (1.0 - magnitude), 0.0, 100.0};
}

std::vector<quality::DistortionLabel> implied_distortions(double magnitude) {
  std::vector<quality::DistortionLabel> labels;
  if (magnitude >= 0.15) labels.push_back(quality::DistortionLabel::Noise);
  if (magnitude >= 0.25) labels.push_back(quality::DistortionLabel::SpatialBlur);
  if (magnitude >= 0.4)
    labels.push_back(quality::DistortionLabel::Underexposure);
  if (magnitude > 0.5) labels.push_back(quality::DistortionLabel::Stuttering);
  return labels;
}

void write_frames(const std::string& path, const Clip& clip) {
  require(!clip.frames.empty(), "write_frames: empty clip");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_frames: cannot open " + path);
  out.write(kMagic, 4);
  const std::int32_t n = static_cast<std::int32_t>(clip.frames.size());
  const std::int32_t h = clip.frames[0].rows;
  const std::int32_t w = clip.frames[0].cols;
  const float fps = static_cast<float>(clip.frame_rate);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&fps), 4);
  for (const auto& frame : clip.frames) {
    require(frame.rows == h && frame.cols == w,
            "write_frames: inconsistent frame shapes");
    for (double px : frame.v) {
      const float f = static_cast<float>(px);
      out.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
  require(out.good(), "write_frames: write failed for " + path);
}

Clip read_frames(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_frames: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kMagic, 4) == 0,
          "read_frames: bad magic in " + path);
  std::int32_t n, h, w;
  float fps;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&fps), 4);
  require(in.good() && n > 0 && h > 0 && w > 0, "read_frames: bad header");
  Clip clip;
  clip.frame_rate = fps;
  for (int f = 0; f < n; ++f) {
    Mat img(h, w);
    for (auto& px : img.v) {
      float v;
      in.read(reinterpret_cast<char*>(&v), 4);
      px = v;
    }
    clip.frames.push_back(std::move(img));
  }
  require(in.good(), "read_frames: truncated file " + path);
  return clip;
}

std::vector<Mat> keyframes_at_1fps(const Clip& clip) {
  require(!clip.frames.empty() && clip.frame_rate > 0.0,
          "keyframes_at_1fps: empty clip");
  std::vector<Mat> keys;
  const int n = static_cast<int>(clip.frames.size());
  for (int second = 0;; ++second) {
    const int idx = static_cast<int>(std::floor(second * clip.frame_rate));
    if (idx >= n) break;
    keys.push_back(clip.frames[idx]);
  }
  if (keys.empty()) keys.push_back(clip.frames[0]);
  return keys;
}

std::vector<Mat> motion_frames(const Clip& clip, int motion_resolution) {
  std::vector<Mat> out;
  out.reserve(clip.frames.size());
  for (const auto& frame : clip.frames) out.push_back(avg_pool(frame, motion_resolution));
  return out;
}

SynthCorpus generate_synthetic_corpus(std::uint64_t seed, int n_videos,
                                      const SynthConfig& config,
                                      const std::string& out_dir) {
  require(n_videos >= 1, "generate_synthetic_corpus: n_videos must be >= 1");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  SynthCorpus corpus;
  std::mt19937_64 rng(derive_seed(seed, "corpus"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n_streaming =
      static_cast<int>(std::lround(config.streaming_fraction * n_videos));

  for (int i = 0; i < n_videos; ++i) {
    const double magnitude =
        config.fixed_magnitude >= 0.0
            ? config.fixed_magnitude
            : config.magnitude_min +
                  (config.magnitude_max - config.magnitude_min) * unit(rng);
    const Clip clip = generate_clip(seed, i, magnitude, config);

    char name[32];
    std::snprintf(name, sizeof(name), "clip%04d", i);
    const std::string frames_path = out_dir + "/" + name + ".vqf";
    write_frames(frames_path, clip);

    data::VideoManifestEntry entry;
    entry.id = name;
    entry.media_ref = frames_path;
    entry.duration_s = config.duration_s;
    entry.frame_rate = config.frame_rate;
    entry.source_dataset = "synthetic";
    entry.kind = i < n_streaming ? data::MediaKind::StreamingVideo
                                 : data::MediaKind::UgcVideo;
    entry.mos = proxy_mos(magnitude);
    entry.distortions = implied_distortions(magnitude);
    if (entry.kind == data::MediaKind::StreamingVideo) {
      // Stall run length scales with magnitude; placed deterministically.
      quality::StallingTrace trace;
      trace.frame_rate = config.frame_rate;
      const int n_frames = static_cast<int>(clip.frames.size());
      trace.flags.assign(n_frames, 0);
      const int stall_len =
          static_cast<int>(std::lround(magnitude * n_frames * 0.5));
      const int start = n_frames > stall_len
                            ? static_cast<int>(derive_seed(seed, entry.id) %
                                               (n_frames - stall_len + 1))
                            : 0;
      for (int f = start; f < start + stall_len && f < n_frames; ++f)
        trace.flags[f] = 1;
      entry.stalling = trace;
    }

    // Procedural overall depiction mirroring the injected distortions.
    data::VideoAnnotations ann;
    data::OverallDepiction depiction;
    depiction.reference_level =
        quality::mos_to_level(quality::normalize_mos(*entry.mos));
    if (magnitude < 0.15) {
      depiction.items.push_back(
          {"sharpness", "high", "throughout the playback", std::nullopt});
      depiction.free_text =
          "The video has high sharpness throughout the playback, with "
          "natural brightness and a stable picture.";
    } else {
      depiction.items.push_back(
          {"noise", magnitude > 0.6 ? "very severe" : "relatively severe",
           "throughout the playback", std::nullopt});
      if (magnitude >= 0.4)
        depiction.items.push_back(
            {"brightness", "low", "throughout the playback", std::nullopt});
      if (magnitude > 0.5)
        depiction.items.push_back(
            {"fluency", "poor", "throughout the playback", std::nullopt});
      depiction.free_text =
          "The video shows noticeable noise throughout the playback" +
          std::string(magnitude >= 0.4 ? ", and the brightness is low" : "") +
          std::string(magnitude > 0.5
                          ? ", with stuttering that reduces the fluency"
                          : "") +
          ".";
    }
    ann.overall = depiction;
    corpus.annotations[entry.id] = ann;
    corpus.entries.push_back(std::move(entry));
  }

  data::write_manifest(out_dir + "/manifest.json", corpus.entries);
  data::write_annotations(out_dir + "/annotations.json", corpus.annotations);
  return corpus;
}

}  // namespace vq::synth
