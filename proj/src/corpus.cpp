#include "vidqual/corpus.hpp"

#include <fstream>

#include "json.hpp"

namespace vq::data {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json mos_to_json(const quality::MosScore& mos) {
  return ordered_json{{"value", mos.value},
                      {"scale_min", mos.scale_min},
                      {"scale_max", mos.scale_max}};
}

quality::MosScore mos_from_json(const ordered_json& j) {
  return {j.at("value").get<double>(), j.at("scale_min").get<double>(),
          j.at("scale_max").get<double>()};
}

ordered_json stalling_to_json(const quality::StallingTrace& trace) {
  return ordered_json{{"flags", quality::encode_stalling_binary(trace)},
                      {"frame_rate", trace.frame_rate}};
}

quality::StallingTrace stalling_from_json(const ordered_json& j) {
  return quality::parse_stalling_binary(j.at("flags").get<std::string>(),
                                        j.at("frame_rate").get<double>());
}

}  // namespace

std::string corpus_line(const InstructionPair& pair) {
  ordered_json j;
  j["id"] = pair.id;
  j["video_id"] = pair.video_id;
  j["stage"] = stage_name(pair.stage);
  j["task_tag"] = task_tag_name(pair.task_tag);
  j["system_prompt"] = pair.system_prompt;
  j["question"] = pair.question;
  j["answer"] = pair.answer;
  j["media"] = ordered_json{{"frames_dir", pair.media.frames_dir},
                            {"fps", pair.media.fps},
                            {"duration_s", pair.media.duration_s}};
  if (pair.stalling) j["stalling"] = stalling_to_json(*pair.stalling);
  return j.dump();
}

InstructionPair parse_corpus_line(const std::string& line, int line_number) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    fail("corpus line " + std::to_string(line_number) +
         ": malformed JSON: " + e.what());
  }
  try {
    InstructionPair pair;
    pair.id = j.at("id").get<std::string>();
    pair.video_id = j.at("video_id").get<std::string>();
    auto stage = stage_from_name(j.at("stage").get<std::string>());
    require(stage.has_value(), "unknown stage");
    pair.stage = *stage;
    auto tag = task_tag_from_name(j.at("task_tag").get<std::string>());
    require(tag.has_value(), "unknown task_tag");
    pair.task_tag = *tag;
    pair.system_prompt = j.at("system_prompt").get<std::string>();
    pair.question = j.at("question").get<std::string>();
    pair.answer = j.at("answer").get<std::string>();
    const auto& m = j.at("media");
    pair.media.frames_dir = m.at("frames_dir").get<std::string>();
    pair.media.fps = m.at("fps").get<double>();
    pair.media.duration_s = m.at("duration_s").get<double>();
    if (j.contains("stalling")) pair.stalling = stalling_from_json(j.at("stalling"));
    validate(pair);
    return pair;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail("corpus line " + std::to_string(line_number) + ": " + e.what());
  }
}

void write_corpus(const std::string& path,
                  const std::vector<InstructionPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_corpus: cannot open " + path);
  for (const auto& pair : pairs) out << corpus_line(pair) << "\n";
  require(out.good(), "write_corpus: write failed for " + path);
}

std::vector<InstructionPair> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_corpus: cannot open " + path);
  std::vector<InstructionPair> pairs;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    pairs.push_back(parse_corpus_line(line, line_number));
  }
  return pairs;
}

void write_manifest(const std::string& path,
                    const std::vector<VideoManifestEntry>& entries) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json j;
    j["id"] = e.id;
    j["media_ref"] = e.media_ref;
    j["duration_s"] = e.duration_s;
    j["frame_rate"] = e.frame_rate;
    j["source_dataset"] = e.source_dataset;
    j["kind"] = media_kind_name(e.kind);
    if (e.mos) j["mos"] = mos_to_json(*e.mos);
    if (e.stalling) j["stalling"] = stalling_to_json(*e.stalling);
    if (!e.distortions.empty()) {
      ordered_json d = ordered_json::array();
      for (auto label : e.distortions) d.push_back(quality::distortion_name(label));
      j["distortions"] = d;
    }
    arr.push_back(j);
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_manifest: cannot open " + path);
  out << ordered_json{{"entries", arr}}.dump(2) << "\n";
}

std::vector<VideoManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_manifest: cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail("read_manifest: malformed JSON in " + path + ": " + e.what());
  }
  std::vector<VideoManifestEntry> entries;
  for (const auto& item : j.at("entries")) {
    VideoManifestEntry e;
    e.id = item.at("id").get<std::string>();
    e.media_ref = item.at("media_ref").get<std::string>();
    e.duration_s = item.at("duration_s").get<double>();
    e.frame_rate = item.at("frame_rate").get<double>();
    e.source_dataset = item.at("source_dataset").get<std::string>();
    auto kind = media_kind_from_name(item.at("kind").get<std::string>());
    require(kind.has_value(), "read_manifest: unknown kind for " + e.id);
    e.kind = *kind;
    if (item.contains("mos")) e.mos = mos_from_json(item.at("mos"));
    if (item.contains("stalling")) e.stalling = stalling_from_json(item.at("stalling"));
    if (item.contains("distortions")) {
      for (const auto& name : item.at("distortions")) {
        auto label = quality::distortion_from_name(name.get<std::string>());
        require(label.has_value(),
                "read_manifest: unknown distortion for " + e.id);
        e.distortions.push_back(*label);
      }
    }
    validate(e);
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

ordered_json depiction_to_json(const OverallDepiction& d) {
  ordered_json items = ordered_json::array();
  for (const auto& item : d.items) {
    ordered_json ji{{"attribute", item.attribute},
                    {"degree", item.degree},
                    {"temporal", item.temporal}};
    if (item.location) ji["location"] = *item.location;
    items.push_back(ji);
  }
  return ordered_json{{"items", items},
                      {"free_text", d.free_text},
                      {"reference_level", quality::level_word(d.reference_level)}};
}

OverallDepiction depiction_from_json(const ordered_json& j) {
  OverallDepiction d;
  for (const auto& ji : j.at("items")) {
    DepictionItem item;
    item.attribute = ji.at("attribute").get<std::string>();
    item.degree = ji.at("degree").get<std::string>();
    item.temporal = ji.at("temporal").get<std::string>();
    if (ji.contains("location"))
      item.location = ji.at("location").get<std::string>();
    d.items.push_back(std::move(item));
  }
  d.free_text = j.at("free_text").get<std::string>();
  auto level = quality::level_from_word(
      j.at("reference_level").get<std::string>());
  require(level.has_value(), "annotations: unknown reference level");
  d.reference_level = *level;
  return d;
}

}  // namespace

void write_annotations(const std::string& path, const AnnotationSet& set) {
  ordered_json root;
  for (const auto& [video_id, ann] : set) {
    ordered_json j;
    if (ann.overall) j["overall"] = depiction_to_json(*ann.overall);
    if (!ann.in_context.empty()) {
      ordered_json arr = ordered_json::array();
      for (const auto& d : ann.in_context)
        arr.push_back(ordered_json{{"text", d.text}, {"focus", focus_name(d.focus)}});
      j["in_context"] = arr;
    }
    if (!ann.extended.empty()) {
      ordered_json arr = ordered_json::array();
      for (const auto& d : ann.extended)
        arr.push_back(ordered_json{{"text", d.text}, {"focus", focus_name(d.focus)}});
      j["extended"] = arr;
    }
    if (ann.aigc) {
      const auto& a = *ann.aigc;
      j["aigc"] = ordered_json{
          {"visual_quality", a.visual_quality},
          {"temporal_alignment", a.temporal_alignment},
          {"dynamic_degree", a.dynamic_degree},
          {"text_to_video_alignment", a.text_to_video_alignment},
          {"factual_consistency", a.factual_consistency},
          {"reference_level", a.reference_level}};
    }
    root[video_id] = j;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_annotations: cannot open " + path);
  out << root.dump(2) << "\n";
}

AnnotationSet read_annotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_annotations: cannot open " + path);
  ordered_json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    fail("read_annotations: malformed JSON in " + path + ": " + e.what());
  }
  AnnotationSet set;
  for (auto it = root.begin(); it != root.end(); ++it) {
    VideoAnnotations ann;
    const auto& j = it.value();
    if (j.contains("overall")) ann.overall = depiction_from_json(j.at("overall"));
    if (j.contains("in_context")) {
      for (const auto& d : j.at("in_context")) {
        auto focus = focus_from_name(d.at("focus").get<std::string>());
        require(focus.has_value(), "annotations: unknown focus");
        ann.in_context.push_back({d.at("text").get<std::string>(), *focus});
      }
    }
    if (j.contains("extended")) {
      for (const auto& d : j.at("extended")) {
        auto focus = focus_from_name(d.at("focus").get<std::string>());
        require(focus.has_value(), "annotations: unknown focus");
        ann.extended.push_back({d.at("text").get<std::string>(), *focus});
      }
    }
    if (j.contains("aigc")) {
      const auto& a = j.at("aigc");
      AigcDepiction d;
      d.visual_quality = a.at("visual_quality").get<std::string>();
      d.temporal_alignment = a.at("temporal_alignment").get<std::string>();
      d.dynamic_degree = a.at("dynamic_degree").get<std::string>();
      d.text_to_video_alignment = a.at("text_to_video_alignment").get<std::string>();
      d.factual_consistency = a.at("factual_consistency").get<std::string>();
      d.reference_level = a.at("reference_level").get<int>();
      ann.aigc = d;
    }
    set[it.key()] = std::move(ann);
  }
  return set;
}

}  // namespace vq::data
