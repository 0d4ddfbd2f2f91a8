// Command-line entry points for the pipeline: synthetic data, dataset
// construction, curriculum training, batch scoring, and the two
// evaluations. Logs go to stderr, data to files; every failure exits
// non-zero with a one-line machine-readable error on stderr.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vidqual/checkpoint.hpp"
#include "vidqual/corpus.hpp"
#include "vidqual/eval.hpp"
#include "vidqual/scorer.hpp"
#include "vidqual/train.hpp"

namespace {

using namespace vq;
using ordered_json = nlohmann::ordered_json;

struct SynthOpts {
  std::uint64_t seed = 0;
  int count = 10;
  std::string out;
  synth::SynthConfig config;
};

int cmd_synth_data(const SynthOpts& o) {
  std::filesystem::create_directories(o.out);
  const auto corpus =
      synth::generate_synthetic_corpus(o.seed, o.count, o.config, o.out);
  std::cerr << "synth-data: wrote " << corpus.entries.size() << " clips to "
            << o.out << "\n";
  return 0;
}

struct BuildOpts {
  std::string manifest;
  std::string annotations;
  std::string vocab_dir;
  std::string stages = "S1_spatial,S1_motion,S2_ugc";
  std::string out;
  std::uint64_t seed = 0;
  int target_count = -1;  // -1: use the whole manifest
};

std::vector<data::Stage> parse_stages(const std::string& csv) {
  std::vector<data::Stage> stages;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto stage = data::stage_from_name(token);
    require(stage.has_value(), "unknown stage '" + token + "'");
    stages.push_back(*stage);
  }
  require(!stages.empty(), "no stages requested");
  return stages;
}

int cmd_build_dataset(const BuildOpts& o) {
  auto manifest = data::read_manifest(o.manifest);
  if (o.target_count >= 0) {
    const auto plan = data::plan_sampling(manifest, o.target_count, o.seed);
    for (const auto& warning : plan.warnings)
      std::cerr << "build-dataset: " << warning << "\n";
    std::vector<data::VideoManifestEntry> selected;
    for (const auto& entry : manifest)
      if (std::find(plan.selected_ids.begin(), plan.selected_ids.end(),
                    entry.id) != plan.selected_ids.end())
        selected.push_back(entry);
    manifest = std::move(selected);
  }

  data::AnnotationSet annotations;
  if (!o.annotations.empty())
    annotations = data::read_annotations(o.annotations);

  std::vector<data::InstructionPair> pairs;
  auto add = [&](data::InstructionPair pair,
                 const data::VideoManifestEntry& entry) {
    pairs.push_back(data::attach_system_prompt(
        std::move(pair), entry, data::SystemPromptMode::Train));
  };

  for (const auto stage : parse_stages(o.stages)) {
    for (const auto& entry : manifest) {
      std::vector<quality::DistortionLabel> spatial, motion;
      for (auto label : entry.distortions)
        (quality::is_motion_distortion(label) ? motion : spatial)
            .push_back(label);
      switch (stage) {
        case data::Stage::S1_spatial:
          if (entry.kind == data::MediaKind::Image ||
              entry.kind == data::MediaKind::UgcVideo)
            add(data::build_stage1_spatial_pair(entry, spatial, o.seed),
                entry);
          break;
        case data::Stage::S1_motion:
          if (entry.kind != data::MediaKind::Image)
            add(data::build_stage1_motion_pair(entry, motion, o.seed), entry);
          break;
        case data::Stage::S2_ugc:
          if (entry.mos && entry.kind != data::MediaKind::StreamingVideo)
            add(data::build_stage2_ugc_pair(entry), entry);
          break;
        case data::Stage::S2_stream:
          if (entry.kind == data::MediaKind::StreamingVideo && entry.stalling) {
            add(data::build_stage2_streaming_pair(entry,
                                                  data::StallingFormat::Binary),
                entry);
            add(data::build_stage2_streaming_pair(
                    entry, data::StallingFormat::Summary),
                entry);
          }
          break;
        case data::Stage::S3: {
          const auto it = annotations.find(entry.id);
          if (it == annotations.end() || !it->second.overall) break;
          const auto vocab = data::ControlledVocab::load(o.vocab_dir);
          const auto client =
              data::make_stub_extension_client(*it->second.overall, vocab);
          for (auto& pair : data::build_stage3_pairs(entry, *it->second.overall,
                                                     vocab, client))
            add(std::move(pair), entry);
          break;
        }
      }
    }
  }
  require(!pairs.empty(), "no pairs produced; check stages and manifest");
  data::write_corpus(o.out, pairs);
  std::cerr << "build-dataset: wrote " << pairs.size() << " pairs to " << o.out
            << "\n";
  return 0;
}

model::ModelConfig model_config_from(const ordered_json& j) {
  model::ModelConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.decoder_heads = j.value("decoder_heads", c.decoder_heads);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  c.keyframe_resolution = j.value("keyframe_resolution", c.keyframe_resolution);
  c.vision_patch = j.value("vision_patch", c.vision_patch);
  c.motion_frame_resolution =
      j.value("motion_frame_resolution", c.motion_frame_resolution);
  c.tau = j.value("tau", c.tau);
  c.alpha = j.value("alpha", c.alpha);
  c.max_motion_positions =
      j.value("max_motion_positions", c.max_motion_positions);
  c.max_positions = j.value("max_positions", c.max_positions);
  return c;
}

train::Hyperparams hyperparams_from(const ordered_json& j) {
  train::Hyperparams hp;
  hp.lr_max = j.value("lr_max", hp.lr_max);
  hp.schedule = j.value("schedule", hp.schedule);
  hp.warmup_fraction = j.value("warmup_fraction", hp.warmup_fraction);
  hp.weight_decay = j.value("weight_decay", hp.weight_decay);
  hp.batch_videos = j.value("batch_videos", hp.batch_videos);
  hp.grad_accum = j.value("grad_accum", hp.grad_accum);
  hp.epochs = j.value("epochs", hp.epochs);
  hp.optimizer = j.value("optimizer", hp.optimizer);
  return hp;
}

// Train config schema (JSON object):
//   seed        integer
//   out_dir     string; checkpoints, metrics.jsonl and config_hash land here
//   model       object, ModelConfig fields (all optional)
//   hyperparams object, Hyperparams fields (all optional)
//   mixed       bool; combine the S2_ugc and S3 corpora into one stage
//   stages      object stage-name -> corpus path; curriculum order enforced
int cmd_train(const std::string& config_path) {
  std::ifstream in(config_path);
  require(in.good(), "cannot open config " + config_path);
  ordered_json cfg;
  try {
    cfg = ordered_json::parse(in);
  } catch (const std::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }

  const std::uint64_t seed = cfg.value("seed", 0);
  const std::string out_dir = cfg.at("out_dir").get<std::string>();
  std::filesystem::create_directories(out_dir);

  train::CurriculumPlan plan;
  plan.seed = seed;
  plan.mixed = cfg.value("mixed", false);
  plan.hyperparams = hyperparams_from(cfg.value("hyperparams", ordered_json::object()));

  std::vector<std::string> texts;
  // Stage map keys are stage names; the map preserves insertion order, and
  // run_curriculum enforces the curriculum order.
  for (const auto& [name, path] : cfg.at("stages").items()) {
    const auto stage = data::stage_from_name(name);
    require(stage.has_value(), "unknown stage '" + name + "' in config");
    auto corpus = data::read_corpus(path.get<std::string>());
    for (const auto& pair : corpus) {
      texts.push_back(pair.system_prompt);
      texts.push_back(pair.question);
      texts.push_back(pair.answer);
    }
    plan.stages.emplace_back(*stage, std::move(corpus));
  }

  auto model = model::init_model(
      model_config_from(cfg.value("model", ordered_json::object())),
      nn::Tokenizer::build(texts), seed);

  // Refuse to write into a run directory trained under a different config.
  const std::string hash = ckpt::config_hash(model.config);
  const std::string hash_path = out_dir + "/config_hash";
  if (std::filesystem::exists(hash_path)) {
    std::ifstream h(hash_path);
    std::string prior;
    h >> prior;
    require(prior == hash, "config hash mismatch with existing run in " +
                               out_dir + " (" + prior + " != " + hash + ")");
  }

  std::ofstream metrics(out_dir + "/metrics.jsonl");
  require(metrics.good(), "cannot write metrics log in " + out_dir);
  train::ClipStore clips;
  auto result = train::run_curriculum(std::move(model), plan, clips, &metrics);

  for (const auto& [name, snapshot] : result.checkpoints)
    ckpt::save_checkpoint(out_dir + "/" + name + ".ckpt", snapshot,
                          result.lineage.at(name));
  {
    std::ofstream h(hash_path);
    h << hash << "\n";
  }
  std::cerr << "train: " << result.metrics.size() << " steps, "
            << result.checkpoints.size() << " checkpoints in " << out_dir
            << "\n";
  return 0;
}

struct ScoreOpts {
  std::string checkpoint;
  std::string manifest;
  std::string out;
};

int cmd_score(const ScoreOpts& o, bool report_only) {
  const auto loaded = ckpt::load_checkpoint(o.checkpoint);
  const auto manifest = data::read_manifest(o.manifest);
  train::ClipStore clips;

  if (!report_only) {
    std::ofstream out(o.out);
    require(out.good(), "cannot open output " + o.out);
    for (const auto& entry : manifest) {
      const auto record = score::score_video(loaded.model, entry,
                                             clips.get(entry.media_ref));
      out << score::score_record_line(record) << "\n";
    }
    std::cerr << "score: wrote " << manifest.size() << " records to " << o.out
              << "\n";
    return 0;
  }

  const auto result = eval::evaluate_scoring(
      [&](const data::VideoManifestEntry& entry) {
        return score::score_video(loaded.model, entry,
                                  clips.get(entry.media_ref))
            .score;
      },
      manifest);
  ordered_json report;
  report["n"] = result.n;
  report["failures"] = result.failures;
  report["srcc"] = result.srcc ? ordered_json(*result.srcc) : nullptr;
  report["plcc"] = result.plcc ? ordered_json(*result.plcc) : nullptr;
  std::ofstream out(o.out);
  require(out.good(), "cannot open output " + o.out);
  out << report.dump(2) << "\n";
  std::cerr << "eval-scoring: n=" << result.n << " srcc="
            << (result.srcc ? std::to_string(*result.srcc) : "undefined")
            << "\n";
  return 0;
}

struct UnderstandOpts {
  std::string checkpoint;
  std::string benchmark;
  std::string judge = "stub";
  std::string out;
  int max_tokens = 48;
};

eval::JudgeClient judge_from_spec(const std::string& spec) {
  if (spec == "stub") return eval::make_stub_judge();
  if (spec.rfind("replay:", 0) == 0)
    return eval::make_replay_judge(spec.substr(7));
  if (spec.rfind("http:", 0) == 0) {
    // http:HOST:PORT/ROUTE
    const std::string rest = spec.substr(5);
    const auto colon = rest.find(':');
    const auto slash = rest.find('/', colon == std::string::npos ? 0 : colon);
    require(colon != std::string::npos && slash != std::string::npos &&
                colon < slash,
            "judge spec must be http:HOST:PORT/ROUTE");
    const int port = std::stoi(rest.substr(colon + 1, slash - colon - 1));
    return eval::make_http_judge(rest.substr(0, colon), port,
                                 rest.substr(slash));
  }
  fail("unknown judge spec '" + spec + "' (stub | replay:PATH | http:...)");
}

int cmd_eval_understanding(const UnderstandOpts& o) {
  const auto loaded = ckpt::load_checkpoint(o.checkpoint);
  const auto ingest = eval::read_benchmark(o.benchmark);
  if (ingest.skipped_multi_video)
    std::cerr << "eval-understanding: skipped " << ingest.skipped_multi_video
              << " multi-video items\n";
  train::ClipStore clips;

  const auto respond = [&](const eval::BenchmarkItem& item) {
    const auto& clip = clips.get(item.video_ref);
    data::VideoManifestEntry entry;
    entry.id = item.id;
    entry.media_ref = item.video_ref;
    entry.frame_rate = clip.frame_rate;
    entry.duration_s = clip.frames.size() / clip.frame_rate;

    data::InstructionPair prompt;
    prompt.video_id = item.id;
    prompt.question = item.question;
    if (!item.options.empty()) {
      prompt.question += " Options:";
      for (const auto& option : item.options) prompt.question += " " + option;
    }
    prompt.answer = "-";  // unused by generation
    prompt = data::attach_system_prompt(prompt, entry,
                                        data::SystemPromptMode::Understand);
    return model::generate(loaded.model, prompt, clip, o.max_tokens).text;
  };

  const auto report = eval::evaluate_understanding(respond, ingest.items,
                                                   judge_from_spec(o.judge));
  std::ofstream out(o.out);
  require(out.good(), "cannot open output " + o.out);
  out << eval::report_json(report) << "\n";
  std::cerr << eval::report_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale video-quality instruction pipeline"};
  app.require_subcommand(1);

  SynthOpts synth_opts;
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic corpus");
  synth->add_option("--seed", synth_opts.seed);
  synth->add_option("--count", synth_opts.count)->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_opts.out)->required();
  synth->add_option("--frame-size", synth_opts.config.frame_size);
  synth->add_option("--duration", synth_opts.config.duration_s);
  synth->add_option("--fps", synth_opts.config.frame_rate);
  synth->add_option("--streaming-fraction",
                    synth_opts.config.streaming_fraction);
  synth->add_option("--fixed-magnitude", synth_opts.config.fixed_magnitude);

  BuildOpts build_opts;
  auto* build =
      app.add_subcommand("build-dataset", "build an instruction corpus");
  build->add_option("--manifest", build_opts.manifest)->required();
  build->add_option("--annotations", build_opts.annotations);
  build->add_option("--vocab-dir", build_opts.vocab_dir);
  build->add_option("--stages", build_opts.stages);
  build->add_option("--out", build_opts.out)->required();
  build->add_option("--seed", build_opts.seed);
  build->add_option("--target-count", build_opts.target_count);

  std::string train_config;
  auto* train_cmd = app.add_subcommand("train", "run the curriculum");
  train_cmd->add_option("--config", train_config)->required();

  ScoreOpts score_opts;
  auto* score_cmd = app.add_subcommand("score", "batch quality scoring");
  score_cmd->add_option("--checkpoint", score_opts.checkpoint)->required();
  score_cmd->add_option("--manifest", score_opts.manifest)->required();
  score_cmd->add_option("--out", score_opts.out)->required();

  ScoreOpts evals_opts;
  auto* evals = app.add_subcommand("eval-scoring",
                                   "score a manifest and report SRCC/PLCC");
  evals->add_option("--checkpoint", evals_opts.checkpoint)->required();
  evals->add_option("--manifest", evals_opts.manifest)->required();
  evals->add_option("--out", evals_opts.out)->required();

  UnderstandOpts und_opts;
  auto* und = app.add_subcommand("eval-understanding",
                                 "grade a benchmark with a judge");
  und->add_option("--checkpoint", und_opts.checkpoint)->required();
  und->add_option("--benchmark", und_opts.benchmark)->required();
  und->add_option("--judge", und_opts.judge);
  und->add_option("--out", und_opts.out)->required();
  und->add_option("--max-tokens", und_opts.max_tokens);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth_data(synth_opts);
    if (build->parsed()) return cmd_build_dataset(build_opts);
    if (train_cmd->parsed()) return cmd_train(train_config);
    if (score_cmd->parsed()) return cmd_score(score_opts, false);
    if (evals->parsed()) return cmd_score(evals_opts, true);
    if (und->parsed()) return cmd_eval_understanding(und_opts);
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 1;
}
