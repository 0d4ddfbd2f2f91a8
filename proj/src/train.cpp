#include "vidqual/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "vidqual/kernels.hpp"

namespace vq::train {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct AdamState {
  model::ParamMap m;
  model::ParamMap v;
  int t = 0;
};

void adamw_step(model::Model& model, const model::ParamMap& grads,
                const FreezeMask& mask, double lr, const Hyperparams& hp,
                AdamState& state) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, state.t);
  const double bc2 = 1.0 - std::pow(kAdamBeta2, state.t);
  for (auto& [name, param] : model.params) {
    if (!mask.trainable_groups.count(model::group_of(name))) continue;
    auto git = grads.find(name);
    if (git == grads.end() || git->second.rows == 0) continue;
    const Mat& g = git->second;
    require(g.same_shape(param), "adamw: gradient shape mismatch for " + name);
    Mat& m = state.m[name];
    Mat& v = state.v[name];
    if (m.rows == 0) m = Mat(param.rows, param.cols);
    if (v.rows == 0) v = Mat(param.rows, param.cols);
    for (size_t i = 0; i < param.size(); ++i) {
      m.v[i] = kAdamBeta1 * m.v[i] + (1.0 - kAdamBeta1) * g.v[i];
      v.v[i] = kAdamBeta2 * v.v[i] + (1.0 - kAdamBeta2) * g.v[i] * g.v[i];
      const double mhat = m.v[i] / bc1;
      const double vhat = v.v[i] / bc2;
      param.v[i] -=
          lr * (mhat / (std::sqrt(vhat) + kAdamEps) + hp.weight_decay * param.v[i]);
    }
  }
}

// Shared loop for a stage corpus under a fixed mask.
TrainResult train_loop(model::Model& model,
                       const std::vector<data::InstructionPair>& corpus,
                       const FreezeMask& mask, const std::string& stage_name,
                       const Hyperparams& hp, std::uint64_t seed,
                       ClipStore& clips, std::ostream* metrics_log) {
  validate(hp);
  require(!corpus.empty(), "train: empty corpus for stage " + stage_name);
  require(!mask.trainable_groups.empty(), "train: empty freeze mask");

  const int n = static_cast<int>(corpus.size());
  // Accumulation folds into the effective batch; gradients are averaged.
  const int batch = std::min(hp.batch_videos * hp.grad_accum, n);
  const int steps_per_epoch = (n + batch - 1) / batch;
  const int total_steps = std::max(
      1, static_cast<int>(std::ceil(hp.epochs * steps_per_epoch)));

  TrainResult result;
  AdamState adam;
  int step = 0;
  std::vector<int> order(n);
  for (int epoch = 0; step < total_steps; ++epoch) {
    for (int i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(
        derive_seed(seed, stage_name + "-epoch-" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    for (int b = 0; b < steps_per_epoch && step < total_steps; ++b, ++step) {
      model::ParamMap grads;
      double loss_sum = 0.0;
      int count = 0;
      for (int i = b * batch; i < std::min(n, (b + 1) * batch); ++i) {
        const auto& pair = corpus[order[i]];
        const auto& clip = clips.get(pair.media.frames_dir);
        loss_sum += model::loss_and_gradients(model, pair, clip,
                                              model::Layout::PerKeyframe, grads);
        ++count;
      }
      for (auto& [name, g] : grads)
        for (auto& gv : g.v) gv /= count;

      const double lr = lr_at(step, total_steps, hp);
      adamw_step(model, grads, mask, lr, hp, adam);

      StepMetrics m;
      m.step = step;
      m.stage = stage_name;
      m.lr = lr;
      m.loss = loss_sum / count;
      if (metrics_log) *metrics_log << metrics_line(m) << "\n";
      result.metrics.push_back(std::move(m));
    }
  }
  return result;
}

FreezeMask all_groups_mask() {
  FreezeMask mask;
  for (const auto& g : model::param_groups()) mask.trainable_groups.insert(g);
  return mask;
}

}  // namespace

void validate(const Hyperparams& hp) {
  require(hp.lr_max > 0.0, "hyperparams: lr_max must be positive");
  require(hp.schedule == "cosine", "hyperparams: unknown schedule " + hp.schedule);
  require(hp.optimizer == "adamw", "hyperparams: unknown optimizer " + hp.optimizer);
  require(hp.warmup_fraction >= 0.0 && hp.warmup_fraction < 1.0,
          "hyperparams: warmup_fraction must lie in [0,1)");
  require(hp.weight_decay >= 0.0, "hyperparams: negative weight decay");
  require(hp.batch_videos >= 1 && hp.grad_accum >= 1,
          "hyperparams: batch and accumulation must be >= 1");
  require(hp.epochs > 0.0, "hyperparams: epochs must be positive");
}

FreezeMask freeze_mask_for(data::Stage stage) {
  FreezeMask mask;
  switch (stage) {
    case data::Stage::S1_spatial:
      mask.trainable_groups = {"vision_encoder", "vision_projector"};
      return mask;
    case data::Stage::S1_motion:
      mask.trainable_groups = {"motion_extractor", "motion_projector",
                               "motion_positions"};
      return mask;
    case data::Stage::S2_ugc:
    case data::Stage::S2_stream:
    case data::Stage::S3:
      return all_groups_mask();
  }
  fail("freeze_mask_for: invalid stage");
}

double lr_at(int step, int total_steps, const Hyperparams& hp) {
  require(total_steps >= 1 && step >= 0 && step < total_steps,
          "lr_at: step out of range");
  const int warmup =
      static_cast<int>(std::lround(hp.warmup_fraction * total_steps));
  if (warmup > 0 && step < warmup)
    return hp.lr_max * step / warmup;  // lr(0) = 0, linear ramp
  if (total_steps == warmup) return hp.lr_max;
  const double progress =
      static_cast<double>(step - warmup) / (total_steps - warmup);
  return hp.lr_max * 0.5 * (1.0 + std::cos(progress * 3.14159265358979323846));
}

std::string metrics_line(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["stage"] = m.stage;
  j["lr"] = m.lr;
  j["loss"] = m.loss;
  return j.dump();
}

const synth::Clip& ClipStore::get(const std::string& path) {
  auto it = cache_.find(path);
  if (it == cache_.end())
    it = cache_.emplace(path, synth::read_frames(path)).first;
  return it->second;
}

TrainResult train_stage(model::Model& model,
                        const std::vector<data::InstructionPair>& corpus,
                        data::Stage stage, const Hyperparams& hp,
                        std::uint64_t seed, ClipStore& clips,
                        std::ostream* metrics_log) {
  for (const auto& pair : corpus)
    require(pair.stage == stage,
            "train_stage: pair '" + pair.id + "' is tagged " +
                data::stage_name(pair.stage) + ", expected " +
                data::stage_name(stage));
  return train_loop(model, corpus, freeze_mask_for(stage),
                    data::stage_name(stage), hp, seed, clips, metrics_log);
}

std::vector<data::InstructionPair> mix_datasets(
    const std::vector<data::InstructionPair>& s2_corpus,
    const std::vector<data::InstructionPair>& s3_corpus, std::uint64_t seed) {
  require(!s2_corpus.empty() && !s3_corpus.empty(),
          "mix_datasets: both corpora must be non-empty");
  std::vector<data::InstructionPair> mixed = s2_corpus;
  mixed.insert(mixed.end(), s3_corpus.begin(), s3_corpus.end());
  std::mt19937_64 rng(derive_seed(seed, "mix-datasets"));
  std::shuffle(mixed.begin(), mixed.end(), rng);
  return mixed;
}

CurriculumResult run_curriculum(model::Model base, const CurriculumPlan& plan,
                                ClipStore& clips, std::ostream* metrics_log) {
  require(!plan.stages.empty(), "run_curriculum: empty plan");
  // Curriculum order: S1_spatial -> S1_motion -> S2_ugc -> {S2_stream | S3};
  // the enum order encodes the lineage order, each stage at most once.
  int prev = -1;
  std::map<data::Stage, const std::vector<data::InstructionPair>*> by_stage;
  for (const auto& [stage, corpus] : plan.stages) {
    const int idx = static_cast<int>(stage);
    require(idx > prev, "run_curriculum: stages out of lineage order");
    prev = idx;
    by_stage[stage] = &corpus;
  }
  require(by_stage.count(data::Stage::S1_spatial) &&
              by_stage.count(data::Stage::S1_motion) &&
              by_stage.count(data::Stage::S2_ugc),
          "run_curriculum: plan needs S1_spatial, S1_motion and S2_ugc");
  if (plan.mixed) {
    require(by_stage.count(data::Stage::S3),
            "run_curriculum: mixed plan needs an S3 corpus");
    require(!by_stage.count(data::Stage::S2_stream),
            "run_curriculum: mixed plan cannot carry a streaming stage");
  }

  CurriculumResult result;
  auto log_all = [&](TrainResult r) {
    result.metrics.insert(result.metrics.end(), r.metrics.begin(),
                          r.metrics.end());
  };
  const auto& hp = plan.hyperparams;

  log_all(train_stage(base, *by_stage.at(data::Stage::S1_spatial),
                      data::Stage::S1_spatial, hp, plan.seed, clips,
                      metrics_log));
  log_all(train_stage(base, *by_stage.at(data::Stage::S1_motion),
                      data::Stage::S1_motion, hp, plan.seed, clips,
                      metrics_log));
  result.checkpoints["pretrained"] = base;
  result.lineage["pretrained"] = {"pretrained"};

  if (plan.mixed) {
    const auto mixed = mix_datasets(*by_stage.at(data::Stage::S2_ugc),
                                    *by_stage.at(data::Stage::S3), plan.seed);
    log_all(train_loop(base, mixed, freeze_mask_for(data::Stage::S3),
                       "S2_ugc+S3", hp, plan.seed, clips, metrics_log));
    result.checkpoints["assistant"] = std::move(base);
    result.lineage["assistant"] = {"pretrained", "assistant"};
    return result;
  }

  log_all(train_stage(base, *by_stage.at(data::Stage::S2_ugc),
                      data::Stage::S2_ugc, hp, plan.seed, clips, metrics_log));
  result.checkpoints["ugc_scorer"] = base;
  result.lineage["ugc_scorer"] = {"pretrained", "ugc_scorer"};

  if (by_stage.count(data::Stage::S2_stream)) {
    model::Model streaming = result.checkpoints.at("ugc_scorer");
    log_all(train_stage(streaming, *by_stage.at(data::Stage::S2_stream),
                        data::Stage::S2_stream, hp, plan.seed, clips,
                        metrics_log));
    result.checkpoints["streaming_scorer"] = std::move(streaming);
    result.lineage["streaming_scorer"] = {"pretrained", "ugc_scorer",
                                          "streaming_scorer"};
  }
  if (by_stage.count(data::Stage::S3)) {
    // The assistant branches from ugc_scorer, never from streaming_scorer.
    model::Model assistant = result.checkpoints.at("ugc_scorer");
    log_all(train_stage(assistant, *by_stage.at(data::Stage::S3),
                        data::Stage::S3, hp, plan.seed, clips, metrics_log));
    result.checkpoints["assistant"] = std::move(assistant);
    result.lineage["assistant"] = {"pretrained", "ugc_scorer", "assistant"};
  }
  return result;
}

}  // namespace vq::train
