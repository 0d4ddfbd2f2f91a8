#ifndef VIDQUAL_MODEL_HPP
#define VIDQUAL_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vidqual/dataset.hpp"
#include "vidqual/nn.hpp"
#include "vidqual/synth.hpp"
#include "vidqual/tensor.hpp"

// The miniature multimodal stack: keyframe encoding, dual-rate motion-token
// extraction, projection, motion positional embeddings, interleaving, and a
// small decoder-only transformer with hand-written backward passes. All
// arithmetic is double precision; forward results are bit-reproducible.
namespace vq::model {

struct ModelConfig {
  int embed_dim = 64;
  int decoder_layers = 2;
  int decoder_heads = 4;
  int mlp_hidden = 128;
  int keyframe_resolution = 24;   // full-scale reference: 336
  int vision_patch = 6;           // strided-conv patch edge, tokens = (res/patch)^2
  int motion_frame_resolution = 12;  // full-scale reference: 224
  int tau = 4;                    // slow-path sampling interval, frames
  int alpha = 4;                  // slow/fast interval ratio
  int max_motion_positions = 64;
  int max_positions = 768;
  int vocab_size = 0;  // filled in at init from the tokenizer

  // (res/patch)^2; toy default 16, full-scale reference 196.
  int vision_tokens_per_keyframe() const;
  // Fast-path temporal stride tau/alpha; 1 at the defaults.
  int motion_stride() const;
};

void validate(const ModelConfig& config);

using ParamMap = std::map<std::string, Mat>;

// Parameter-group names; the freeze machinery and checkpoints key on these.
const std::vector<std::string>& param_groups();
// Group prefix of a parameter name ("decoder.l0.wq" -> "decoder").
std::string group_of(const std::string& param_name);

struct Model {
  ModelConfig config;
  nn::Tokenizer tokenizer;
  ParamMap params;
};

Model init_model(const ModelConfig& config, nn::Tokenizer tokenizer,
                 std::uint64_t seed);

struct VisualTokenSeq {
  std::vector<Mat> chunks;  // one per keyframe, tokens_per_keyframe x width
};

struct MotionTokenSeq {
  Mat tokens;  // n_sampled x width
  bool positions_applied = false;
};

// Forward activations retained for the media backward pass.
struct MediaCache {
  // vision: one entry per keyframe
  std::vector<Mat> vision_patches;   // n_tok x patch^2
  std::vector<Mat> vision_encoded;   // n_tok x d (encoder output)
  std::vector<Mat> vision_z1;        // pre-GELU projector hidden
  std::vector<Mat> vision_u;         // post-GELU projector hidden
  // motion
  Mat motion_flat;      // n_sampled x mres^2
  Mat motion_spatial;   // n_sampled x d
  Mat motion_windows;   // n_sampled x 3d (zero-padded temporal windows)
  Mat motion_temporal;  // n_sampled x d (extractor output)
  Mat motion_z1;
  Mat motion_u;
};

int motion_token_count(int n_frames, const ModelConfig& config);

VisualTokenSeq encode_keyframes(const Model& model,
                                const std::vector<Mat>& keyframes,
                                MediaCache* cache = nullptr);
MotionTokenSeq extract_motion_tokens(const Model& model,
                                     const std::vector<Mat>& dense_frames,
                                     MediaCache* cache = nullptr);
VisualTokenSeq project_vision(const Model& model, const VisualTokenSeq& seq,
                              MediaCache* cache = nullptr);
MotionTokenSeq project_motion(const Model& model, const MotionTokenSeq& seq,
                              MediaCache* cache = nullptr);
// Token i += table row i. Rejects overflow and double application.
void add_motion_positions(const Model& model, MotionTokenSeq& seq);

enum class Layout { PerKeyframe, Block };

// Chunk sizes for splitting n_motion tokens across n_keyframes chunks;
// remainder goes to the last chunk.
std::vector<int> motion_partition(int n_motion, int n_keyframes);

struct InterleavedSequence {
  // Per row: text token id, or -1 for a media row.
  std::vector<int> token_ids;
  Mat embeddings;  // T x d, before decoder positional add
  // Row provenance for the backward pass: kind 0 text, 1 visual, 2 motion.
  struct RowSrc {
    int kind = 0;
    int chunk = 0;  // keyframe index for visual rows
    int row = 0;    // row within the chunk / motion matrix
  };
  std::vector<RowSrc> rows;
  int answer_begin = -1;  // first answer row; -1 when no answer span
};

InterleavedSequence interleave(const Model& model, const VisualTokenSeq& visual,
                               const MotionTokenSeq& motion,
                               const std::vector<int>& prefix_ids,
                               const std::vector<int>& question_ids,
                               const std::vector<int>& answer_ids,
                               Layout layout);

// Decoder activations retained for the backward pass.
struct ForwardCache;

// Adds positional rows, runs the decoder stack, returns T x vocab logits.
Mat decoder_forward(const Model& model, const Mat& embeddings,
                    ForwardCache* cache = nullptr);

// Mean next-token cross-entropy over positions where answer_mask is 1.
// logits row t scores targets[t]; masked rows only.
double generation_loss(const Mat& logits, const std::vector<int>& targets,
                       const std::vector<std::uint8_t>& answer_mask);

// Fully assembled training example.
struct SequenceBundle {
  InterleavedSequence seq;
  std::vector<int> targets;             // size T; -1 where undefined
  std::vector<std::uint8_t> answer_mask;  // size T
  MediaCache media;
  int n_keyframes = 0;
};

// Builds the interleaved training sequence for one instruction pair:
// system prompt tokens, visual/motion chunks, question, answer, <eos>.
SequenceBundle build_training_sequence(const Model& model,
                                       const data::InstructionPair& pair,
                                       const synth::Clip& clip, Layout layout);
// Same sequence without the answer span (generation / scoring prefix).
// answer_prefix may carry a teacher-forced partial answer.
SequenceBundle build_prompt_sequence(const Model& model,
                                     const data::InstructionPair& pair,
                                     const synth::Clip& clip, Layout layout,
                                     const std::vector<int>& answer_prefix = {});

// Forward + loss + full backward; gradients are accumulated (+=) into
// grads, which may be empty or pre-sized. Returns the loss.
double loss_and_gradients(const Model& model, const data::InstructionPair& pair,
                          const synth::Clip& clip, Layout layout,
                          ParamMap& grads);

// Forward-only loss for a built bundle.
double sequence_loss(const Model& model, const SequenceBundle& bundle);

struct GenerationResult {
  std::vector<int> token_ids;               // generated ids, without <eos>
  std::vector<std::vector<double>> step_logits;  // one vocab row per step
  std::string text;
};

// Greedy decoding: argmax each step, stop at <eos> or max_tokens.
GenerationResult generate(const Model& model, const data::InstructionPair& pair,
                          const synth::Clip& clip, int max_tokens,
                          Layout layout = Layout::PerKeyframe);

}  // namespace vq::model

#endif  // VIDQUAL_MODEL_HPP
