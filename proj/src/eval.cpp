#include "vidqual/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "vidqual/quality.hpp"

namespace vq::eval {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> average_ranks(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (i + j) / 2.0 + 1.0;  // 1-based average rank
    for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant vector
  return sxy / std::sqrt(sxx * syy);
}

void check_lengths(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "correlation: length mismatch");
  require(x.size() >= 3, "correlation: need at least 3 pairs");
  for (double v : x) require(std::isfinite(v), "correlation: non-finite value");
  for (double v : y) require(std::isfinite(v), "correlation: non-finite value");
}

const std::array<std::string, 3> kQTypeNames = {"binary", "multi", "open"};
const std::array<std::string, 3> kConcernNames = {"tech", "temp", "other"};

}  // namespace

std::optional<double> srcc(const std::vector<double>& x,
                           const std::vector<double>& y) {
  check_lengths(x, y);
  return pearson(average_ranks(x), average_ranks(y));
}

std::optional<double> plcc(const std::vector<double>& x,
                           const std::vector<double>& y) {
  check_lengths(x, y);
  return pearson(x, y);
}

ScoringEval evaluate_scoring(
    const std::function<double(const data::VideoManifestEntry&)>& scorer,
    const std::vector<data::VideoManifestEntry>& entries) {
  ScoringEval out;
  std::vector<double> predicted, truth;
  for (const auto& entry : entries) {
    require(entry.mos.has_value(),
            "evaluate_scoring: entry '" + entry.id + "' has no MOS");
    double score = 0.0;
    try {
      score = scorer(entry);
    } catch (const std::exception&) {
      ++out.failures;
      continue;
    }
    predicted.push_back(score);
    truth.push_back(quality::normalize_mos(*entry.mos).value);
  }
  out.n = static_cast<int>(predicted.size());
  if (out.n >= 3) {
    out.srcc = srcc(predicted, truth);
    out.plcc = plcc(predicted, truth);
  }
  return out;
}

const std::string& qtype_name(QType q) {
  return kQTypeNames[static_cast<int>(q)];
}

std::optional<QType> qtype_from_name(const std::string& name) {
  for (int i = 0; i < 3; ++i)
    if (kQTypeNames[i] == name) return static_cast<QType>(i);
  return std::nullopt;
}

const std::string& concern_name(Concern c) {
  return kConcernNames[static_cast<int>(c)];
}

std::optional<Concern> concern_from_name(const std::string& name) {
  for (int i = 0; i < 3; ++i)
    if (kConcernNames[i] == name) return static_cast<Concern>(i);
  return std::nullopt;
}

void validate(const BenchmarkItem& item) {
  require(!item.question.empty() && !item.reference_answer.empty(),
          "benchmark item '" + item.id + "': question and reference required");
  if (item.qtype == QType::Multi)
    require(item.options.size() >= 2,
            "benchmark item '" + item.id + "': multi items carry >= 2 options");
}

std::string benchmark_line(const BenchmarkItem& item) {
  ordered_json j;
  j["id"] = item.id;
  j["question"] = item.question;
  if (!item.options.empty()) j["options"] = item.options;
  j["reference_answer"] = item.reference_answer;
  j["qtype"] = qtype_name(item.qtype);
  j["concern"] = concern_name(item.concern);
  j["videos"] = std::vector<std::string>{item.video_ref};
  return j.dump();
}

BenchmarkIngest read_benchmark(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_benchmark: cannot open " + path);
  BenchmarkIngest out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail("benchmark line " + std::to_string(line_number) +
           ": malformed JSON: " + e.what());
    }
    try {
      const auto videos = j.at("videos").get<std::vector<std::string>>();
      if (videos.size() != 1) {
        ++out.skipped_multi_video;  // out of scope per the eval protocol
        continue;
      }
      BenchmarkItem item;
      item.id = j.at("id").get<std::string>();
      item.question = j.at("question").get<std::string>();
      if (j.contains("options"))
        item.options = j.at("options").get<std::vector<std::string>>();
      item.reference_answer = j.at("reference_answer").get<std::string>();
      auto qt = qtype_from_name(j.at("qtype").get<std::string>());
      require(qt.has_value(), "unknown qtype");
      item.qtype = *qt;
      auto cc = concern_from_name(j.at("concern").get<std::string>());
      require(cc.has_value(), "unknown concern");
      item.concern = *cc;
      item.video_ref = videos[0];
      validate(item);
      out.items.push_back(std::move(item));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail("benchmark line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

std::string normalize_answer(const std::string& text) {
  std::string out;
  bool space_pending = false;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (space_pending && !out.empty()) out += ' ';
      space_pending = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      space_pending = true;
    }
  }
  return out;
}

namespace {

// Index of the unique option named in the text; -1 when none or ambiguous.
// A match is either the option's letter (a, b, ...) standing alone or the
// option's normalized body appearing as a substring.
int match_option(const std::vector<std::string>& options,
                 const std::string& text) {
  const std::string norm = " " + normalize_answer(text) + " ";
  int found = -1;
  for (size_t i = 0; i < options.size(); ++i) {
    const std::string letter(1, static_cast<char>('a' + i));
    std::string body = normalize_answer(options[i]);
    // Strip a leading "a " left by "A." style option labels.
    if (body.size() > 2 && body[0] == letter[0] && body[1] == ' ')
      body = body.substr(2);
    const bool letter_hit =
        norm.find(" " + letter + " ") != std::string::npos;
    const bool body_hit = !body.empty() && norm.find(body) != std::string::npos;
    if (letter_hit || body_hit) {
      if (found >= 0 && found != static_cast<int>(i)) return -1;
      found = static_cast<int>(i);
    }
  }
  return found;
}

}  // namespace

EvalReport evaluate_understanding(const Responder& respond,
                                  const std::vector<BenchmarkItem>& items,
                                  const JudgeClient& judge) {
  EvalReport report;
  for (const auto& item : items) {
    validate(item);
    const std::string response = respond(item);

    Verdict verdict = Verdict::Ungraded;
    bool matched = false;
    if (item.qtype != QType::Open && !item.options.empty()) {
      const int got = match_option(item.options, response);
      const int want = match_option(item.options, item.reference_answer);
      if (got >= 0 && want >= 0) {
        verdict = got == want ? Verdict::Correct : Verdict::Wrong;
        matched = true;
      }
    }
    if (!matched && item.qtype != QType::Open &&
        normalize_answer(response) == normalize_answer(item.reference_answer)) {
      verdict = Verdict::Correct;
      matched = true;
    }
    if (!matched)
      verdict = judge(item.question, item.reference_answer, response).verdict;

    if (verdict == Verdict::Ungraded) {
      ++report.ungraded;
      report.partial = true;
      continue;
    }
    const int correct = verdict == Verdict::Correct ? 1 : 0;
    ++report.overall.total;
    report.overall.correct += correct;
    ++report.by_qtype[item.qtype].total;
    report.by_qtype[item.qtype].correct += correct;
    ++report.by_concern[item.concern].total;
    report.by_concern[item.concern].correct += correct;
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  ordered_json j;
  auto cell = [](const EvalCell& c) {
    return ordered_json{
        {"correct", c.correct}, {"total", c.total}, {"accuracy", c.accuracy()}};
  };
  j["overall"] = cell(report.overall);
  ordered_json q;
  for (int i = 0; i < 3; ++i) {
    const auto t = static_cast<QType>(i);
    auto it = report.by_qtype.find(t);
    q[qtype_name(t)] = cell(it == report.by_qtype.end() ? EvalCell{} : it->second);
  }
  j["by_qtype"] = q;
  ordered_json c;
  for (int i = 0; i < 3; ++i) {
    const auto t = static_cast<Concern>(i);
    auto it = report.by_concern.find(t);
    c[concern_name(t)] =
        cell(it == report.by_concern.end() ? EvalCell{} : it->second);
  }
  j["by_concern"] = c;
  j["ungraded"] = report.ungraded;
  j["partial"] = report.partial;
  return j.dump(2);
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  auto row = [&](const std::string& name, const EvalCell& c) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-10s %8d %8d %9.4f\n", name.c_str(),
                  c.correct, c.total, c.accuracy());
    out << buf;
  };
  out << "category    correct    total  accuracy\n";
  for (int i = 0; i < 3; ++i) {
    const auto t = static_cast<QType>(i);
    auto it = report.by_qtype.find(t);
    row(qtype_name(t), it == report.by_qtype.end() ? EvalCell{} : it->second);
  }
  for (int i = 0; i < 3; ++i) {
    const auto t = static_cast<Concern>(i);
    auto it = report.by_concern.find(t);
    row(concern_name(t),
        it == report.by_concern.end() ? EvalCell{} : it->second);
  }
  row("overall", report.overall);
  if (report.ungraded)
    out << "ungraded: " << report.ungraded << " (report is partial)\n";
  return out.str();
}

}  // namespace vq::eval
