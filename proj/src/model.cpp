#include "vidqual/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vidqual/kernels.hpp"

namespace vq::model {

namespace {

using kernels::add_row_bias;
using kernels::gelu;
using kernels::gelu_backward;
using kernels::gemm;
using kernels::softmax_rows;
using kernels::softmax_rows_backward;

constexpr double kRmsEps = 1e-6;
constexpr double kMaskedScore = -1e30;

Mat slice_cols(const Mat& x, int c0, int n) {
  Mat out(x.rows, n);
  for (int r = 0; r < x.rows; ++r)
    for (int c = 0; c < n; ++c) out.at(r, c) = x.at(r, c0 + c);
  return out;
}

void add_to_cols(Mat& dst, const Mat& src, int c0) {
  for (int r = 0; r < src.rows; ++r)
    for (int c = 0; c < src.cols; ++c) dst.at(r, c0 + c) += src.at(r, c);
}

Mat col_sums(const Mat& x) {
  Mat out(1, x.cols);
  for (int r = 0; r < x.rows; ++r)
    for (int c = 0; c < x.cols; ++c) out.at(0, c) += x.at(r, c);
  return out;
}

void accumulate(Mat& dst, const Mat& src) {
  if (dst.rows == 0) dst = Mat(src.rows, src.cols);
  require(dst.same_shape(src), "gradient shape mismatch");
  kernels::add_inplace(dst, src);
}

// y_r = g .* x_r / rms(x_r); rms values retained for the backward pass.
void rmsnorm(const Mat& x, const Mat& g, Mat& y, std::vector<double>& rms) {
  y = Mat(x.rows, x.cols);
  rms.resize(x.rows);
  for (int r = 0; r < x.rows; ++r) {
    double ss = 0.0;
    for (int c = 0; c < x.cols; ++c) ss += x.at(r, c) * x.at(r, c);
    const double rv = std::sqrt(ss / x.cols + kRmsEps);
    rms[r] = rv;
    for (int c = 0; c < x.cols; ++c) y.at(r, c) = g.at(0, c) * x.at(r, c) / rv;
  }
}

void rmsnorm_backward(const Mat& x, const Mat& g, const std::vector<double>& rms,
                      const Mat& dy, Mat& dx, Mat& dg) {
  dx = Mat(x.rows, x.cols);
  if (dg.rows == 0) dg = Mat(1, x.cols);
  const int d = x.cols;
  for (int r = 0; r < x.rows; ++r) {
    const double rv = rms[r];
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      dg.at(0, c) += dy.at(r, c) * x.at(r, c) / rv;
      s += dy.at(r, c) * g.at(0, c) * x.at(r, c);
    }
    for (int c = 0; c < d; ++c)
      dx.at(r, c) =
          dy.at(r, c) * g.at(0, c) / rv - x.at(r, c) * s / (d * rv * rv * rv);
  }
}

Mat flatten_frame(const Mat& frame) {
  Mat out(1, static_cast<int>(frame.size()));
  std::copy(frame.v.begin(), frame.v.end(), out.v.begin());
  return out;
}

const Mat& p(const Model& m, const std::string& name) {
  auto it = m.params.find(name);
  require(it != m.params.end(), "missing model parameter '" + name + "'");
  return it->second;
}

std::string layer_prefix(int l) { return "decoder.l" + std::to_string(l) + "."; }

// Two-layer MLP + GELU shared by both projectors.
Mat projector_forward(const Model& m, const std::string& group, const Mat& x,
                      Mat* z1_out, Mat* u_out) {
  Mat z1, u, y;
  gemm(x, false, p(m, group + ".w1"), false, z1);
  add_row_bias(z1, p(m, group + ".b1"));
  gelu(z1, u);
  gemm(u, false, p(m, group + ".w2"), false, y);
  add_row_bias(y, p(m, group + ".b2"));
  if (z1_out) *z1_out = z1;
  if (u_out) *u_out = u;
  return y;
}

// dy -> dx; parameter grads accumulated under the group prefix.
Mat projector_backward(const Model& m, const std::string& group, const Mat& x,
                       const Mat& z1, const Mat& u, const Mat& dy,
                       ParamMap& grads) {
  Mat dw2, du, dz1, dw1, dx;
  gemm(u, true, dy, false, dw2);
  accumulate(grads[group + ".w2"], dw2);
  accumulate(grads[group + ".b2"], col_sums(dy));
  gemm(dy, false, p(m, group + ".w2"), true, du);
  gelu_backward(z1, du, dz1);
  gemm(x, true, dz1, false, dw1);
  accumulate(grads[group + ".w1"], dw1);
  accumulate(grads[group + ".b1"], col_sums(dz1));
  gemm(dz1, false, p(m, group + ".w1"), true, dx);
  return dx;
}

}  // namespace

int ModelConfig::vision_tokens_per_keyframe() const {
  const int n = keyframe_resolution / vision_patch;
  return n * n;
}

int ModelConfig::motion_stride() const { return tau / alpha; }

void validate(const ModelConfig& c) {
  require(c.embed_dim > 0 && c.decoder_layers > 0 && c.decoder_heads > 0 &&
              c.mlp_hidden > 0,
          "model config: dimensions must be positive");
  require(c.embed_dim % c.decoder_heads == 0,
          "model config: embed_dim must divide evenly across heads");
  require(c.tau >= 1 && c.alpha >= 1, "model config: tau and alpha must be >= 1");
  require(c.tau % c.alpha == 0,
          "model config: tau must be a multiple of alpha (integral stride)");
  require(c.keyframe_resolution > 0 && c.vision_patch > 0 &&
              c.keyframe_resolution % c.vision_patch == 0,
          "model config: keyframe resolution must be a multiple of the patch");
  require(c.motion_frame_resolution > 0,
          "model config: motion resolution must be positive");
  require(c.max_motion_positions > 0 && c.max_positions > 0,
          "model config: position capacities must be positive");
}

const std::vector<std::string>& param_groups() {
  static const std::vector<std::string> groups = {
      "vision_encoder", "vision_projector", "motion_extractor",
      "motion_projector", "motion_positions", "decoder", "embeddings"};
  return groups;
}

std::string group_of(const std::string& param_name) {
  const size_t dot = param_name.find('.');
  require(dot != std::string::npos,
          "parameter name without group prefix: " + param_name);
  const std::string group = param_name.substr(0, dot);
  require(std::find(param_groups().begin(), param_groups().end(), group) !=
              param_groups().end(),
          "unknown parameter group '" + group + "'");
  return group;
}

Model init_model(const ModelConfig& config, nn::Tokenizer tokenizer,
                 std::uint64_t seed) {
  validate(config);
  Model m;
  m.config = config;
  m.config.vocab_size = tokenizer.size();
  m.tokenizer = std::move(tokenizer);

  const int d = config.embed_dim;
  const int h = config.mlp_hidden;
  const int patch = config.vision_patch * config.vision_patch;
  const int mres = config.motion_frame_resolution * config.motion_frame_resolution;

  auto noise = [&](const std::string& name, int r, int c, double scale) {
    std::mt19937_64 rng(derive_seed(seed, "init-" + name));
    std::normal_distribution<double> dist(0.0, scale);
    Mat mat(r, c);
    for (auto& v : mat.v) v = dist(rng);
    m.params[name] = std::move(mat);
  };
  auto zeros = [&](const std::string& name, int r, int c) {
    m.params[name] = Mat(r, c);
  };
  auto ones = [&](const std::string& name, int c) {
    Mat mat(1, c);
    std::fill(mat.v.begin(), mat.v.end(), 1.0);
    m.params[name] = std::move(mat);
  };

  noise("embeddings.token", m.config.vocab_size, d, 0.02);
  noise("embeddings.pos", config.max_positions, d, 0.02);

  noise("vision_encoder.patch_w", patch, d, 0.02);
  zeros("vision_encoder.patch_b", 1, d);
  noise("vision_projector.w1", d, h, 0.02);
  zeros("vision_projector.b1", 1, h);
  noise("vision_projector.w2", h, d, 0.02);
  zeros("vision_projector.b2", 1, d);

  noise("motion_extractor.spatial_w", mres, d, 0.02);
  zeros("motion_extractor.spatial_b", 1, d);
  noise("motion_extractor.temporal_w", 3 * d, d, 0.02);
  zeros("motion_extractor.temporal_b", 1, d);
  noise("motion_projector.w1", d, h, 0.02);
  zeros("motion_projector.b1", 1, h);
  noise("motion_projector.w2", h, d, 0.02);
  zeros("motion_projector.b2", 1, d);

  noise("motion_positions.table", config.max_motion_positions, d, 0.02);

  for (int l = 0; l < config.decoder_layers; ++l) {
    const std::string pre = layer_prefix(l);
    ones(pre + "ln1_g", d);
    noise(pre + "wq", d, d, 0.02);
    noise(pre + "wk", d, d, 0.02);
    noise(pre + "wv", d, d, 0.02);
    noise(pre + "wo", d, d, 0.02);
    ones(pre + "ln2_g", d);
    noise(pre + "mlp_w1", d, h, 0.02);
    zeros(pre + "mlp_b1", 1, h);
    noise(pre + "mlp_w2", h, d, 0.02);
    zeros(pre + "mlp_b2", 1, d);
  }
  ones("decoder.final_g", d);
  noise("decoder.head_w", d, m.config.vocab_size, 0.02);

  for (const auto& [name, mat] : m.params) group_of(name);  // names well-formed
  return m;
}

int motion_token_count(int n_frames, const ModelConfig& config) {
  const int stride = config.motion_stride();
  require(n_frames >= stride, "motion tokens: frame count below the stride");
  return (n_frames + stride - 1) / stride;  // ceiling sampling
}

VisualTokenSeq encode_keyframes(const Model& model,
                                const std::vector<Mat>& keyframes,
                                MediaCache* cache) {
  require(!keyframes.empty(), "encode_keyframes: need at least one keyframe");
  const auto& cfg = model.config;
  const int res = cfg.keyframe_resolution;
  const int patch = cfg.vision_patch;
  const int per_side = res / patch;

  VisualTokenSeq seq;
  for (const auto& frame : keyframes) {
    require(frame.rows == res && frame.cols == res,
            "encode_keyframes: keyframe not at keyframe_resolution");
    Mat patches(per_side * per_side, patch * patch);
    for (int py = 0; py < per_side; ++py)
      for (int px = 0; px < per_side; ++px) {
        double* row = patches.row(py * per_side + px);
        int k = 0;
        for (int y = 0; y < patch; ++y)
          for (int x = 0; x < patch; ++x)
            row[k++] = frame.at(py * patch + y, px * patch + x);
      }
    Mat tokens;
    gemm(patches, false, p(model, "vision_encoder.patch_w"), false, tokens);
    add_row_bias(tokens, p(model, "vision_encoder.patch_b"));
    if (cache) {
      cache->vision_patches.push_back(patches);
      cache->vision_encoded.push_back(tokens);
    }
    seq.chunks.push_back(std::move(tokens));
  }
  return seq;
}

MotionTokenSeq extract_motion_tokens(const Model& model,
                                     const std::vector<Mat>& dense_frames,
                                     MediaCache* cache) {
  require(!dense_frames.empty(), "extract_motion_tokens: no frames");
  const auto& cfg = model.config;
  const int mres = cfg.motion_frame_resolution;
  const int stride = cfg.motion_stride();
  const int n = static_cast<int>(dense_frames.size());
  const int count = motion_token_count(n, cfg);

  // Fast-path frames only: indices 0, stride, 2*stride, ...
  Mat flat(count, mres * mres);
  for (int i = 0; i < count; ++i) {
    const Mat& frame = dense_frames[i * stride];
    require(frame.rows == mres && frame.cols == mres,
            "extract_motion_tokens: frame not at motion_frame_resolution");
    std::copy(frame.v.begin(), frame.v.end(), flat.row(i));
  }

  Mat spatial;
  gemm(flat, false, p(model, "motion_extractor.spatial_w"), false, spatial);
  add_row_bias(spatial, p(model, "motion_extractor.spatial_b"));

  // Width-3 temporal convolution, zero-padded, length preserving.
  const int d = cfg.embed_dim;
  Mat windows(count, 3 * d);
  for (int i = 0; i < count; ++i)
    for (int k = 0; k < 3; ++k) {
      const int src = i + k - 1;
      if (src < 0 || src >= count) continue;
      for (int c = 0; c < d; ++c)
        windows.at(i, k * d + c) = spatial.at(src, c);
    }
  Mat temporal;
  gemm(windows, false, p(model, "motion_extractor.temporal_w"), false, temporal);
  add_row_bias(temporal, p(model, "motion_extractor.temporal_b"));

  if (cache) {
    cache->motion_flat = flat;
    cache->motion_spatial = spatial;
    cache->motion_windows = windows;
    cache->motion_temporal = temporal;
  }
  MotionTokenSeq seq;
  seq.tokens = std::move(temporal);
  return seq;
}

VisualTokenSeq project_vision(const Model& model, const VisualTokenSeq& seq,
                              MediaCache* cache) {
  VisualTokenSeq out;
  for (const auto& chunk : seq.chunks) {
    require(chunk.cols == model.config.embed_dim,
            "project_vision: input width mismatch");
    Mat z1, u;
    out.chunks.push_back(
        projector_forward(model, "vision_projector", chunk, &z1, &u));
    if (cache) {
      cache->vision_z1.push_back(std::move(z1));
      cache->vision_u.push_back(std::move(u));
    }
  }
  return out;
}

MotionTokenSeq project_motion(const Model& model, const MotionTokenSeq& seq,
                              MediaCache* cache) {
  require(seq.tokens.cols == model.config.embed_dim,
          "project_motion: input width mismatch");
  require(!seq.positions_applied,
          "project_motion: positions must be applied after projection");
  Mat z1, u;
  MotionTokenSeq out;
  out.tokens = projector_forward(model, "motion_projector", seq.tokens, &z1, &u);
  if (cache) {
    cache->motion_z1 = std::move(z1);
    cache->motion_u = std::move(u);
  }
  return out;
}

void add_motion_positions(const Model& model, MotionTokenSeq& seq) {
  require(!seq.positions_applied,
          "add_motion_positions: positions already applied");
  const Mat& table = p(model, "motion_positions.table");
  require(seq.tokens.rows <= table.rows,
          "add_motion_positions: more motion tokens than position slots");
  require(seq.tokens.cols == table.cols,
          "add_motion_positions: width mismatch");
  for (int r = 0; r < seq.tokens.rows; ++r)
    for (int c = 0; c < seq.tokens.cols; ++c)
      seq.tokens.at(r, c) += table.at(r, c);
  seq.positions_applied = true;
}

std::vector<int> motion_partition(int n_motion, int n_keyframes) {
  require(n_keyframes >= 1, "motion_partition: need at least one keyframe");
  require(n_motion >= 0, "motion_partition: negative motion count");
  std::vector<int> sizes(n_keyframes, n_motion / n_keyframes);
  sizes.back() += n_motion % n_keyframes;
  return sizes;
}

InterleavedSequence interleave(const Model& model, const VisualTokenSeq& visual,
                               const MotionTokenSeq& motion,
                               const std::vector<int>& prefix_ids,
                               const std::vector<int>& question_ids,
                               const std::vector<int>& answer_ids,
                               Layout layout) {
  require(!visual.chunks.empty(), "interleave: no visual chunks");
  const int d = model.config.embed_dim;
  const int n_motion = motion.tokens.rows;
  if (n_motion > 0)
    require(motion.positions_applied,
            "interleave: motion positions must be applied first");
  for (const auto& chunk : visual.chunks)
    require(chunk.cols == d, "interleave: visual width mismatch");

  const int n_key = static_cast<int>(visual.chunks.size());
  int total = static_cast<int>(prefix_ids.size() + question_ids.size() +
                               answer_ids.size()) +
              n_motion;
  for (const auto& chunk : visual.chunks) total += chunk.rows;
  require(total <= model.config.max_positions,
          "interleave: sequence exceeds max_positions");

  InterleavedSequence out;
  out.token_ids.reserve(total);
  out.rows.reserve(total);
  out.embeddings = Mat(total, d);
  const Mat& token_emb = p(model, "embeddings.token");

  int t = 0;
  auto put_text = [&](int id) {
    require(id >= 0 && id < token_emb.rows, "interleave: token id out of range");
    out.token_ids.push_back(id);
    out.rows.push_back({0, 0, 0});
    std::copy(token_emb.row(id), token_emb.row(id) + d, out.embeddings.row(t));
    ++t;
  };
  auto put_visual = [&](int chunk) {
    const Mat& v = visual.chunks[chunk];
    for (int r = 0; r < v.rows; ++r) {
      out.token_ids.push_back(-1);
      out.rows.push_back({1, chunk, r});
      std::copy(v.row(r), v.row(r) + d, out.embeddings.row(t));
      ++t;
    }
  };
  auto put_motion = [&](int begin, int count) {
    for (int r = begin; r < begin + count; ++r) {
      out.token_ids.push_back(-1);
      out.rows.push_back({2, 0, r});
      std::copy(motion.tokens.row(r), motion.tokens.row(r) + d,
                out.embeddings.row(t));
      ++t;
    }
  };

  for (int id : prefix_ids) put_text(id);
  if (layout == Layout::PerKeyframe) {
    const auto sizes = motion_partition(n_motion, n_key);
    int cursor = 0;
    for (int kf = 0; kf < n_key; ++kf) {
      put_visual(kf);
      put_motion(cursor, sizes[kf]);
      cursor += sizes[kf];
    }
  } else {
    for (int kf = 0; kf < n_key; ++kf) put_visual(kf);
    put_motion(0, n_motion);
  }
  for (int id : question_ids) put_text(id);
  out.answer_begin = answer_ids.empty() ? -1 : t;
  for (int id : answer_ids) put_text(id);
  require(t == total, "interleave: length bookkeeping broken");
  return out;
}

// Per-layer decoder activations.
struct LayerCache {
  Mat x_in;
  Mat h1;
  std::vector<double> r1;
  Mat q, k, v;
  std::vector<Mat> att;  // per head, T x T
  Mat ocat;
  Mat x2;
  Mat h2;
  std::vector<double> r2;
  Mat z1, u;
};

struct ForwardCache {
  Mat x0;
  std::vector<LayerCache> layers;
  Mat x_final;
  Mat hf;
  std::vector<double> rf;
};

namespace {

void attention_forward(const Model& m, int layer, const Mat& h1, LayerCache* lc,
                       Mat& out) {
  const auto& cfg = m.config;
  const int d = cfg.embed_dim;
  const int heads = cfg.decoder_heads;
  const int dh = d / heads;
  const int T = h1.rows;
  const std::string pre = layer_prefix(layer);

  Mat q, k, v;
  gemm(h1, false, p(m, pre + "wq"), false, q);
  gemm(h1, false, p(m, pre + "wk"), false, k);
  gemm(h1, false, p(m, pre + "wv"), false, v);

  Mat ocat(T, d);
  std::vector<Mat> att;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    const Mat qh = slice_cols(q, h * dh, dh);
    const Mat kh = slice_cols(k, h * dh, dh);
    const Mat vh = slice_cols(v, h * dh, dh);
    Mat scores;
    gemm(qh, false, kh, true, scores);
    for (int i = 0; i < T; ++i) {
      for (int j = 0; j < T; ++j)
        scores.at(i, j) = j <= i ? scores.at(i, j) * scale : kMaskedScore;
    }
    Mat a;
    softmax_rows(scores, a);
    Mat oh;
    gemm(a, false, vh, false, oh);
    add_to_cols(ocat, oh, h * dh);
    if (lc) att.push_back(std::move(a));
  }
  gemm(ocat, false, p(m, pre + "wo"), false, out);
  if (lc) {
    lc->q = std::move(q);
    lc->k = std::move(k);
    lc->v = std::move(v);
    lc->att = std::move(att);
    lc->ocat = std::move(ocat);
  }
}

}  // namespace

Mat decoder_forward(const Model& model, const Mat& embeddings,
                    ForwardCache* cache) {
  const auto& cfg = model.config;
  const int T = embeddings.rows;
  require(T >= 1, "decoder_forward: empty sequence");
  require(T <= cfg.max_positions, "decoder_forward: sequence too long");
  require(embeddings.cols == cfg.embed_dim, "decoder_forward: width mismatch");

  Mat x = embeddings;
  const Mat& pos = p(model, "embeddings.pos");
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < cfg.embed_dim; ++c) x.at(t, c) += pos.at(t, c);
  if (cache) cache->x0 = x;

  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const std::string pre = layer_prefix(l);
    LayerCache lc;
    LayerCache* lcp = cache ? &lc : nullptr;
    if (lcp) lcp->x_in = x;

    Mat h1;
    std::vector<double> r1;
    rmsnorm(x, p(model, pre + "ln1_g"), h1, r1);
    Mat attn;
    attention_forward(model, l, h1, lcp, attn);
    kernels::add_inplace(x, attn);
    if (lcp) {
      lcp->h1 = std::move(h1);
      lcp->r1 = std::move(r1);
      lcp->x2 = x;
    }

    Mat h2;
    std::vector<double> r2;
    rmsnorm(x, p(model, pre + "ln2_g"), h2, r2);
    Mat z1, u, mlp;
    gemm(h2, false, p(model, pre + "mlp_w1"), false, z1);
    add_row_bias(z1, p(model, pre + "mlp_b1"));
    gelu(z1, u);
    gemm(u, false, p(model, pre + "mlp_w2"), false, mlp);
    add_row_bias(mlp, p(model, pre + "mlp_b2"));
    kernels::add_inplace(x, mlp);
    if (lcp) {
      lcp->h2 = std::move(h2);
      lcp->r2 = std::move(r2);
      lcp->z1 = std::move(z1);
      lcp->u = std::move(u);
      cache->layers.push_back(std::move(lc));
    }
  }

  Mat hf;
  std::vector<double> rf;
  rmsnorm(x, p(model, "decoder.final_g"), hf, rf);
  Mat logits;
  gemm(hf, false, p(model, "decoder.head_w"), false, logits);
  if (cache) {
    cache->x_final = std::move(x);
    cache->hf = std::move(hf);
    cache->rf = std::move(rf);
  }
  return logits;
}

double generation_loss(const Mat& logits, const std::vector<int>& targets,
                       const std::vector<std::uint8_t>& answer_mask) {
  require(static_cast<int>(targets.size()) == logits.rows &&
              targets.size() == answer_mask.size(),
          "generation_loss: length mismatch");
  double total = 0.0;
  int n = 0;
  for (int t = 0; t < logits.rows; ++t) {
    if (!answer_mask[t]) continue;
    const int target = targets[t];
    require(target >= 0 && target < logits.cols,
            "generation_loss: target id out of range");
    double mx = logits.at(t, 0);
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, logits.at(t, c));
    double lse = 0.0;
    for (int c = 0; c < logits.cols; ++c)
      lse += std::exp(logits.at(t, c) - mx);
    total += std::log(lse) + mx - logits.at(t, target);
    ++n;
  }
  require(n > 0, "generation_loss: empty answer mask");
  return total / n;
}

namespace {

void decoder_backward(const Model& model, const ForwardCache& cache,
                      const Mat& dlogits, ParamMap& grads, Mat& dembeddings) {
  const auto& cfg = model.config;
  const int d = cfg.embed_dim;
  const int heads = cfg.decoder_heads;
  const int dh = d / heads;
  const int T = dlogits.rows;

  Mat dhead, dhf;
  gemm(cache.hf, true, dlogits, false, dhead);
  accumulate(grads["decoder.head_w"], dhead);
  gemm(dlogits, false, p(model, "decoder.head_w"), true, dhf);

  Mat dx;
  rmsnorm_backward(cache.x_final, p(model, "decoder.final_g"), cache.rf, dhf,
                   dx, grads["decoder.final_g"]);

  for (int l = cfg.decoder_layers - 1; l >= 0; --l) {
    const std::string pre = layer_prefix(l);
    const LayerCache& lc = cache.layers[l];

    // MLP block: x3 = x2 + mlp(rmsnorm(x2)).
    const Mat& dm = dx;
    Mat dw2, du, dz1, dw1, dh2;
    gemm(lc.u, true, dm, false, dw2);
    accumulate(grads[pre + "mlp_w2"], dw2);
    accumulate(grads[pre + "mlp_b2"], col_sums(dm));
    gemm(dm, false, p(model, pre + "mlp_w2"), true, du);
    gelu_backward(lc.z1, du, dz1);
    gemm(lc.h2, true, dz1, false, dw1);
    accumulate(grads[pre + "mlp_w1"], dw1);
    accumulate(grads[pre + "mlp_b1"], col_sums(dz1));
    gemm(dz1, false, p(model, pre + "mlp_w1"), true, dh2);
    Mat dx2;
    rmsnorm_backward(lc.x2, p(model, pre + "ln2_g"), lc.r2, dh2, dx2,
                     grads[pre + "ln2_g"]);
    kernels::add_inplace(dx2, dx);

    // Attention block: x2 = x + attn(rmsnorm(x)).
    const Mat& da = dx2;
    Mat docat, dwo;
    gemm(lc.ocat, true, da, false, dwo);
    accumulate(grads[pre + "wo"], dwo);
    gemm(da, false, p(model, pre + "wo"), true, docat);

    Mat dq(T, d), dk(T, d), dv(T, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < heads; ++h) {
      const Mat doh = slice_cols(docat, h * dh, dh);
      const Mat kh = slice_cols(lc.k, h * dh, dh);
      const Mat vh = slice_cols(lc.v, h * dh, dh);
      const Mat qh = slice_cols(lc.q, h * dh, dh);
      const Mat& a = lc.att[h];
      Mat dvh, dah, ds, dqh, dkh;
      gemm(a, true, doh, false, dvh);
      gemm(doh, false, vh, true, dah);
      softmax_rows_backward(a, dah, ds);
      for (auto& val : ds.v) val *= scale;
      gemm(ds, false, kh, false, dqh);
      gemm(ds, true, qh, false, dkh);
      add_to_cols(dq, dqh, h * dh);
      add_to_cols(dk, dkh, h * dh);
      add_to_cols(dv, dvh, h * dh);
    }

    Mat dwq, dwk, dwv, dh1, tmp;
    gemm(lc.h1, true, dq, false, dwq);
    accumulate(grads[pre + "wq"], dwq);
    gemm(lc.h1, true, dk, false, dwk);
    accumulate(grads[pre + "wk"], dwk);
    gemm(lc.h1, true, dv, false, dwv);
    accumulate(grads[pre + "wv"], dwv);
    gemm(dq, false, p(model, pre + "wq"), true, dh1);
    gemm(dk, false, p(model, pre + "wk"), true, tmp);
    kernels::add_inplace(dh1, tmp);
    gemm(dv, false, p(model, pre + "wv"), true, tmp);
    kernels::add_inplace(dh1, tmp);

    Mat dx_in;
    rmsnorm_backward(lc.x_in, p(model, pre + "ln1_g"), lc.r1, dh1, dx_in,
                     grads[pre + "ln1_g"]);
    kernels::add_inplace(dx_in, dx2);
    dx = std::move(dx_in);
  }

  // Positional rows: x0 = embeddings + pos[0..T).
  Mat& dpos = grads["embeddings.pos"];
  if (dpos.rows == 0) dpos = Mat(p(model, "embeddings.pos").rows, d);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < d; ++c) dpos.at(t, c) += dx.at(t, c);
  dembeddings = std::move(dx);
}

void media_backward(const Model& model, const MediaCache& cache,
                    const std::vector<Mat>& dvis, const Mat& dmotion,
                    ParamMap& grads) {
  const int d = model.config.embed_dim;
  // Vision chain, one chunk per keyframe; projector grads accumulate.
  for (size_t kf = 0; kf < dvis.size(); ++kf) {
    const Mat dv0 = projector_backward(model, "vision_projector",
                                       cache.vision_encoded[kf],
                                       cache.vision_z1[kf], cache.vision_u[kf],
                                       dvis[kf], grads);
    Mat dwe;
    gemm(cache.vision_patches[kf], true, dv0, false, dwe);
    accumulate(grads["vision_encoder.patch_w"], dwe);
    accumulate(grads["vision_encoder.patch_b"], col_sums(dv0));
  }

  if (dmotion.rows == 0) return;
  // Positional table sits at the end of the motion chain.
  Mat& dtable = grads["motion_positions.table"];
  if (dtable.rows == 0)
    dtable = Mat(p(model, "motion_positions.table").rows, d);
  for (int r = 0; r < dmotion.rows; ++r)
    for (int c = 0; c < d; ++c) dtable.at(r, c) += dmotion.at(r, c);

  const Mat dt = projector_backward(model, "motion_projector",
                                    cache.motion_temporal, cache.motion_z1,
                                    cache.motion_u, dmotion, grads);
  Mat dwt;
  gemm(cache.motion_windows, true, dt, false, dwt);
  accumulate(grads["motion_extractor.temporal_w"], dwt);
  accumulate(grads["motion_extractor.temporal_b"], col_sums(dt));
  Mat dwin;
  gemm(dt, false, p(model, "motion_extractor.temporal_w"), true, dwin);

  const int count = dmotion.rows;
  Mat dspatial(count, d);
  for (int i = 0; i < count; ++i)
    for (int k = 0; k < 3; ++k) {
      const int src = i + k - 1;
      if (src < 0 || src >= count) continue;
      for (int c = 0; c < d; ++c)
        dspatial.at(src, c) += dwin.at(i, k * d + c);
    }
  Mat dws;
  gemm(cache.motion_flat, true, dspatial, false, dws);
  accumulate(grads["motion_extractor.spatial_w"], dws);
  accumulate(grads["motion_extractor.spatial_b"], col_sums(dspatial));
}

SequenceBundle build_sequence_impl(const Model& model,
                                   const data::InstructionPair& pair,
                                   const synth::Clip& clip, Layout layout,
                                   const std::vector<int>& answer_ids) {
  SequenceBundle bundle;
  const auto keyframes = synth::keyframes_at_1fps(clip);
  bundle.n_keyframes = static_cast<int>(keyframes.size());
  const auto dense =
      synth::motion_frames(clip, model.config.motion_frame_resolution);

  VisualTokenSeq encoded = encode_keyframes(model, keyframes, &bundle.media);
  VisualTokenSeq visual = project_vision(model, encoded, &bundle.media);
  MotionTokenSeq raw = extract_motion_tokens(model, dense, &bundle.media);
  MotionTokenSeq motion = project_motion(model, raw, &bundle.media);
  add_motion_positions(model, motion);

  const auto& tok = model.tokenizer;
  std::string prompt_text = pair.system_prompt;
  const std::vector<int> prefix_ids = tok.encode(prompt_text);
  const std::vector<int> question_ids = tok.encode(pair.question);
  bundle.seq = interleave(model, visual, motion, prefix_ids, question_ids,
                          answer_ids, layout);

  const int T = static_cast<int>(bundle.seq.token_ids.size());
  bundle.targets.assign(T, -1);
  bundle.answer_mask.assign(T, 0);
  for (int t = 0; t + 1 < T; ++t) {
    if (bundle.seq.token_ids[t + 1] >= 0)
      bundle.targets[t] = bundle.seq.token_ids[t + 1];
    if (bundle.seq.answer_begin >= 0 && t + 1 >= bundle.seq.answer_begin)
      bundle.answer_mask[t] = 1;
  }
  return bundle;
}

}  // namespace

SequenceBundle build_training_sequence(const Model& model,
                                       const data::InstructionPair& pair,
                                       const synth::Clip& clip, Layout layout) {
  require(!pair.answer.empty(), "build_training_sequence: empty answer");
  std::vector<int> answer_ids = model.tokenizer.encode(pair.answer);
  answer_ids.push_back(model.tokenizer.eos_id());
  return build_sequence_impl(model, pair, clip, layout, answer_ids);
}

SequenceBundle build_prompt_sequence(const Model& model,
                                     const data::InstructionPair& pair,
                                     const synth::Clip& clip, Layout layout,
                                     const std::vector<int>& answer_prefix) {
  return build_sequence_impl(model, pair, clip, layout, answer_prefix);
}

double sequence_loss(const Model& model, const SequenceBundle& bundle) {
  const Mat logits = decoder_forward(model, bundle.seq.embeddings, nullptr);
  return generation_loss(logits, bundle.targets, bundle.answer_mask);
}

double loss_and_gradients(const Model& model, const data::InstructionPair& pair,
                          const synth::Clip& clip, Layout layout,
                          ParamMap& grads) {
  SequenceBundle bundle = build_training_sequence(model, pair, clip, layout);
  ForwardCache cache;
  const Mat logits = decoder_forward(model, bundle.seq.embeddings, &cache);
  const double loss =
      generation_loss(logits, bundle.targets, bundle.answer_mask);

  // dLoss/dlogits = (softmax - onehot)/n on masked rows, 0 elsewhere.
  int n_masked = 0;
  for (auto m : bundle.answer_mask) n_masked += m;
  Mat dlogits(logits.rows, logits.cols);
  for (int t = 0; t < logits.rows; ++t) {
    if (!bundle.answer_mask[t]) continue;
    double mx = logits.at(t, 0);
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, logits.at(t, c));
    double lse = 0.0;
    for (int c = 0; c < logits.cols; ++c)
      lse += std::exp(logits.at(t, c) - mx);
    for (int c = 0; c < logits.cols; ++c)
      dlogits.at(t, c) = std::exp(logits.at(t, c) - mx) / lse / n_masked;
    dlogits.at(t, bundle.targets[t]) -= 1.0 / n_masked;
  }

  Mat demb;
  decoder_backward(model, cache, dlogits, grads, demb);

  // Route embedding-row gradients to their sources.
  const int d = model.config.embed_dim;
  Mat& dtok = grads["embeddings.token"];
  if (dtok.rows == 0) dtok = Mat(p(model, "embeddings.token").rows, d);
  std::vector<Mat> dvis;
  for (const auto& chunk : bundle.media.vision_encoded)
    dvis.emplace_back(chunk.rows, d);
  Mat dmotion(bundle.media.motion_temporal.rows, d);
  for (int t = 0; t < demb.rows; ++t) {
    const auto& src = bundle.seq.rows[t];
    if (src.kind == 0) {
      const int id = bundle.seq.token_ids[t];
      for (int c = 0; c < d; ++c) dtok.at(id, c) += demb.at(t, c);
    } else if (src.kind == 1) {
      for (int c = 0; c < d; ++c) dvis[src.chunk].at(src.row, c) += demb.at(t, c);
    } else {
      for (int c = 0; c < d; ++c) dmotion.at(src.row, c) += demb.at(t, c);
    }
  }
  media_backward(model, bundle.media, dvis, dmotion, grads);
  return loss;
}

GenerationResult generate(const Model& model, const data::InstructionPair& pair,
                          const synth::Clip& clip, int max_tokens,
                          Layout layout) {
  require(max_tokens > 0, "generate: max_tokens must be positive");
  SequenceBundle bundle = build_prompt_sequence(model, pair, clip, layout);
  Mat emb = bundle.seq.embeddings;
  const Mat& token_emb = p(model, "embeddings.token");
  const int d = model.config.embed_dim;

  GenerationResult result;
  for (int step = 0; step < max_tokens; ++step) {
    require(emb.rows < model.config.max_positions,
            "generate: sequence exceeds max_positions");
    const Mat logits = decoder_forward(model, emb, nullptr);
    const int last = logits.rows - 1;
    int best = 0;
    for (int c = 1; c < logits.cols; ++c)
      if (logits.at(last, c) > logits.at(last, best)) best = c;
    result.step_logits.emplace_back(logits.row(last),
                                    logits.row(last) + logits.cols);
    if (best == model.tokenizer.eos_id()) break;
    result.token_ids.push_back(best);

    Mat grown(emb.rows + 1, d);
    std::copy(emb.v.begin(), emb.v.end(), grown.v.begin());
    std::copy(token_emb.row(best), token_emb.row(best) + d,
              grown.row(emb.rows));
    emb = std::move(grown);
  }
  result.text = model.tokenizer.decode(result.token_ids);
  return result;
}

}  // namespace vq::model
