#ifndef VIDQUAL_CORPUS_HPP
#define VIDQUAL_CORPUS_HPP

#include <map>
#include <string>
#include <vector>

#include "vidqual/dataset.hpp"

// Serialization of instruction corpora, video manifests, and annotation
// sidecars. The corpus is JSON-lines with a fixed field order so golden
// tests can be byte-stable.
namespace vq::data {

// One object per line: {id, video_id, stage, task_tag, system_prompt,
// question, answer, media:{frames_dir, fps, duration_s},
// stalling:{flags, frame_rate}}; stalling only when present.
void write_corpus(const std::string& path,
                  const std::vector<InstructionPair>& pairs);
std::vector<InstructionPair> read_corpus(const std::string& path);

std::string corpus_line(const InstructionPair& pair);
InstructionPair parse_corpus_line(const std::string& line, int line_number);

// Per-video annotations feeding the Stage-3 builders.
struct VideoAnnotations {
  std::optional<OverallDepiction> overall;
  std::vector<InContextDepiction> in_context;
  std::vector<ExtendedConversation> extended;
  std::optional<AigcDepiction> aigc;
};

using AnnotationSet = std::map<std::string, VideoAnnotations>;  // by video id

void write_manifest(const std::string& path,
                    const std::vector<VideoManifestEntry>& entries);
std::vector<VideoManifestEntry> read_manifest(const std::string& path);

void write_annotations(const std::string& path, const AnnotationSet& set);
AnnotationSet read_annotations(const std::string& path);

}  // namespace vq::data

#endif  // VIDQUAL_CORPUS_HPP
