#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <thread>
#include <tuple>

#include "httplib.h"
#include "json.hpp"
#include "vidqual/eval.hpp"

namespace vq::eval {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<Verdict> verdict_from_name(const std::string& name) {
  if (name == "correct") return Verdict::Correct;
  if (name == "partial") return Verdict::Partial;
  if (name == "wrong") return Verdict::Wrong;
  if (name == "ungraded") return Verdict::Ungraded;
  return std::nullopt;
}

}  // namespace

JudgeClient make_stub_judge() {
  return [](const std::string&, const std::string& reference,
            const std::string& response) -> JudgeReply {
    const std::string ref = normalize_answer(reference);
    const std::string got = normalize_answer(response);
    if (!ref.empty() && got.find(ref) != std::string::npos)
      return {Verdict::Correct, "reference answer contained in response"};
    return {Verdict::Wrong, "reference answer not found in response"};
  };
}

JudgeClient make_replay_judge(const std::string& path) {
  using Key = std::tuple<std::string, std::string, std::string>;
  auto table = std::make_shared<std::map<Key, JudgeReply>>();

  std::ifstream in(path, std::ios::binary);
  require(in.good(), "make_replay_judge: cannot open " + path);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail("replay judge line " + std::to_string(line_number) +
           ": malformed JSON: " + e.what());
    }
    const auto verdict = verdict_from_name(j.at("verdict").get<std::string>());
    require(verdict.has_value(), "replay judge line " +
                                     std::to_string(line_number) +
                                     ": unknown verdict");
    JudgeReply reply{*verdict, j.value("rationale", "")};
    (*table)[{j.at("question").get<std::string>(),
              j.at("reference").get<std::string>(),
              j.at("response").get<std::string>()}] = reply;
  }

  return [table](const std::string& question, const std::string& reference,
                 const std::string& response) -> JudgeReply {
    auto it = table->find({question, reference, response});
    if (it == table->end())
      return {Verdict::Ungraded, "no recorded verdict for this triple"};
    return it->second;
  };
}

JudgeClient make_http_judge(const std::string& host, int port,
                            const std::string& route, int timeout_ms,
                            int max_retries) {
  require(port > 0 && !route.empty() && route[0] == '/',
          "make_http_judge: invalid endpoint");
  require(timeout_ms > 0 && max_retries >= 0,
          "make_http_judge: invalid timeout or retry count");
  return [host, port, route, timeout_ms,
          max_retries](const std::string& question, const std::string& reference,
                       const std::string& response) -> JudgeReply {
    ordered_json body;
    body["question"] = question;
    body["reference"] = reference;
    body["response"] = response;
    const std::string payload = body.dump();

    int backoff_ms = 100;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms = std::min(backoff_ms * 2, 2000);  // capped backoff
      }
      httplib::Client client(host, port);
      client.set_connection_timeout(0, timeout_ms * 1000);
      client.set_read_timeout(0, timeout_ms * 1000);
      auto res = client.Post(route, payload, "application/json");
      if (!res || res->status != 200) continue;
      try {
        const auto j = ordered_json::parse(res->body);
        const auto verdict =
            verdict_from_name(j.at("verdict").get<std::string>());
        if (!verdict) continue;
        return {*verdict, j.value("rationale", "")};
      } catch (const std::exception&) {
        continue;  // malformed reply counts as a failed attempt
      }
    }
    return {Verdict::Ungraded, "judge endpoint unavailable"};
  };
}

}  // namespace vq::eval
