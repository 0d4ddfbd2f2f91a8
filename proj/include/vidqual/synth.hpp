#ifndef VIDQUAL_SYNTH_HPP
#define VIDQUAL_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vidqual/corpus.hpp"
#include "vidqual/tensor.hpp"

// Desk-scale synthetic corpus: procedurally generated moving patterns with
// controlled distortions and a proxy MOS that is a fixed monotone function
// of the injected distortion magnitude.
namespace vq::synth {

struct SynthConfig {
  int frame_size = 24;       // square frames, pixels
  double duration_s = 4.0;   // per clip
  double frame_rate = 4.0;   // dense frames per second
  double streaming_fraction = 0.0;  // share of clips emitted as streaming
  // Distortion magnitude per clip is drawn uniformly from this range unless
  // fixed_magnitude >= 0.
  double magnitude_min = 0.0;
  double magnitude_max = 1.0;
  double fixed_magnitude = -1.0;
};

// Frames of one clip, each frame_size x frame_size, values in [0, 1].
struct Clip {
  std::vector<Mat> frames;
  double frame_rate = 0.0;
};

// Deterministic clip for (seed, index): a drifting sinusoidal pattern with
// magnitude-scaled additive noise, box blur, brightness shift, and
// frame-repeat stutter at high magnitudes.
Clip generate_clip(std::uint64_t seed, int index, double magnitude,
                   const SynthConfig& config);

// Proxy MOS on [0, 100]: zero distortion maps to the scale max, full
// distortion to the scale min.
quality::MosScore proxy_mos(double magnitude);

// Distortion labels implied by a clip's magnitude.
std::vector<quality::DistortionLabel> implied_distortions(double magnitude);

struct SynthCorpus {
  std::vector<data::VideoManifestEntry> entries;
  data::AnnotationSet annotations;
};

// Writes frames containers under out_dir (one .vqf file per clip), plus
// manifest.json and annotations.json. Byte-identical for a fixed seed.
SynthCorpus generate_synthetic_corpus(std::uint64_t seed, int n_videos,
                                      const SynthConfig& config,
                                      const std::string& out_dir);

// Frames container round-trip (magic "VQF1", float32 payload).
void write_frames(const std::string& path, const Clip& clip);
Clip read_frames(const std::string& path);

// Keyframes at 1 fps (original resolution) for the vision path.
std::vector<Mat> keyframes_at_1fps(const Clip& clip);
// All frames average-pooled to the motion resolution.
std::vector<Mat> motion_frames(const Clip& clip, int motion_resolution);

}  // namespace vq::synth

#endif  // VIDQUAL_SYNTH_HPP
