#ifndef VIDQUAL_EVAL_HPP
#define VIDQUAL_EVAL_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidqual/dataset.hpp"

// Correlation metrics for scoring and category-accuracy evaluation for
// understanding, with a pluggable judge client.
namespace vq::eval {

// Spearman rank correlation with average ranks for ties; nullopt when
// either vector is constant (undefined). Lengths must match and be >= 3.
std::optional<double> srcc(const std::vector<double>& x,
                           const std::vector<double>& y);
// Pearson linear correlation; same preconditions and constant handling.
std::optional<double> plcc(const std::vector<double>& x,
                           const std::vector<double>& y);

struct ScoringEval {
  std::optional<double> srcc;
  std::optional<double> plcc;
  int n = 0;
  int failures = 0;  // videos whose scoring threw
};

// Applies the scorer to every entry (ground truth = normalized MOS) and
// computes both metrics. Failing entries are excluded and counted.
ScoringEval evaluate_scoring(
    const std::function<double(const data::VideoManifestEntry&)>& scorer,
    const std::vector<data::VideoManifestEntry>& entries);

enum class QType { Binary, Multi, Open };
enum class Concern { Tech, Temp, Other };

const std::string& qtype_name(QType q);
std::optional<QType> qtype_from_name(const std::string& name);
const std::string& concern_name(Concern c);
std::optional<Concern> concern_from_name(const std::string& name);

struct BenchmarkItem {
  std::string id;
  std::string question;
  std::vector<std::string> options;  // Multi carries >= 2
  std::string reference_answer;
  QType qtype = QType::Open;
  Concern concern = Concern::Other;
  std::string video_ref;
};

void validate(const BenchmarkItem& item);

struct BenchmarkIngest {
  std::vector<BenchmarkItem> items;
  int skipped_multi_video = 0;  // multi-video questions are out of scope
};

// JSON-lines, one item per line; items listing several videos are skipped
// with a count, malformed lines are an error with the line number.
BenchmarkIngest read_benchmark(const std::string& path);
std::string benchmark_line(const BenchmarkItem& item);

enum class Verdict { Correct, Partial, Wrong, Ungraded };

struct JudgeReply {
  Verdict verdict = Verdict::Ungraded;
  std::string rationale;
};

// (question, reference, response) -> verdict.
using JudgeClient = std::function<JudgeReply(
    const std::string&, const std::string&, const std::string&)>;

struct EvalCell {
  int correct = 0;
  int total = 0;
  double accuracy() const { return total ? double(correct) / total : 0.0; }
};

struct EvalReport {
  EvalCell overall;
  std::map<QType, EvalCell> by_qtype;
  std::map<Concern, EvalCell> by_concern;
  int ungraded = 0;
  bool partial = false;  // set when any item went ungraded
};

// Responder abstracts greedy generation so tests can script answers.
using Responder = std::function<std::string(const BenchmarkItem&)>;

// Binary/Multi graded by normalized option matching when the response names
// a unique option, otherwise via the judge; Open always via the judge.
EvalReport evaluate_understanding(const Responder& respond,
                                  const std::vector<BenchmarkItem>& items,
                                  const JudgeClient& judge);

std::string report_json(const EvalReport& report);
// Plain-text accuracy table: question types x quality concerns + overall.
std::string report_table(const EvalReport& report);

// Deterministic offline judge: Correct when the normalized reference answer
// appears in the normalized response, else Wrong.
JudgeClient make_stub_judge();
// Replays verdicts recorded as JSON-lines {question, reference, response,
// verdict, rationale}; unmatched triples come back Ungraded.
JudgeClient make_replay_judge(const std::string& path);
// POSTs {question, reference, response} to an HTTP endpoint returning
// {verdict, rationale}; retries with capped backoff, timeout -> Ungraded.
JudgeClient make_http_judge(const std::string& host, int port,
                            const std::string& route, int timeout_ms = 5000,
                            int max_retries = 2);

// Shared normalization used by option matching and the stub judge:
// lowercase, punctuation stripped, whitespace collapsed.
std::string normalize_answer(const std::string& text);

}  // namespace vq::eval

#endif  // VIDQUAL_EVAL_HPP
