#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cctype>
#include <cmath>
#include <random>

#include "doctest.h"
#include "vidqual/quality.hpp"

using namespace vq::quality;

namespace {

// Independent run-length oracle: walks transitions instead of runs.
StallingSummary oracle_summarize(const StallingTrace& trace) {
  StallingSummary s;
  const auto& f = trace.flags;
  const double fps = trace.frame_rate;
  int stalled = 0;
  int run = 0;
  int last_one = -1;
  for (size_t i = 0; i < f.size(); ++i) {
    if (f[i]) {
      ++stalled;
      last_one = static_cast<int>(i);
      ++run;
    } else {
      if (run) s.event_durations.push_back(run / fps);
      run = 0;
    }
  }
  if (run) s.event_durations.push_back(run / fps);
  s.event_count = static_cast<int>(s.event_durations.size());
  s.stall_ratio = double(stalled) / f.size();
  size_t lead = 0;
  while (lead < f.size() && f[lead]) ++lead;
  s.initial_buffering = lead / fps;
  s.tail_gap = (f.size() - (last_one + 1)) / fps;
  return s;
}

StallingTrace random_trace(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 400);
  std::uniform_real_distribution<double> fps(1.0, 60.0);
  std::bernoulli_distribution bit(0.3);
  StallingTrace t;
  t.frame_rate = fps(rng);
  const int n = len(rng);
  for (int i = 0; i < n; ++i) t.flags.push_back(bit(rng) ? 1 : 0);
  return t;
}

}  // namespace

TEST_CASE("normalize_mos maps declared scales onto [0,100]") {
  CHECK(normalize_mos({3.5, 1, 5}).value == doctest::Approx(62.5));
  CHECK(normalize_mos({1, 1, 5}).value == doctest::Approx(0.0));
  CHECK(normalize_mos({87.3, 0, 100}).value == doctest::Approx(87.3));
  CHECK_THROWS_AS(normalize_mos({2, 2, 2}), vq::Error);
  CHECK_THROWS_AS(normalize_mos({9, 1, 5}), vq::Error);
}

TEST_CASE("normalize_mos is affine and order preserving") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(1.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    double a = d(rng), b = d(rng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    CHECK(normalize_mos({a, 1, 5}).value < normalize_mos({b, 1, 5}).value);
  }
}

TEST_CASE("mos_to_level bins with a closed top boundary") {
  CHECK(mos_to_level({70}) == QualityLevel::Good);
  CHECK(mos_to_level({0}) == QualityLevel::Low);
  CHECK(mos_to_level({100}) == QualityLevel::High);
  CHECK(mos_to_level({19.999}) == QualityLevel::Low);
  CHECK(mos_to_level({20}) == QualityLevel::Poor);
  CHECK(mos_to_level({80}) == QualityLevel::High);
  CHECK_THROWS_AS(mos_to_level({100.5}), vq::Error);
  CHECK_THROWS_AS(mos_to_level({-0.5}), vq::Error);
}

TEST_CASE("mos_to_level is monotone and total over [0,100]") {
  int prev = static_cast<int>(QualityLevel::Low);
  for (double s = 0.0; s <= 100.0; s += 0.25) {
    const int cur = static_cast<int>(mos_to_level({s}));
    CHECK(cur <= prev);  // enum index decreases as quality rises
    prev = cur;
  }
}

TEST_CASE("level weights match the scoring weight vector") {
  LevelWeights w;
  CHECK(level_weight(QualityLevel::High, w) == 1.0);
  CHECK(level_weight(QualityLevel::Good, w) == 0.75);
  CHECK(level_weight(QualityLevel::Fair, w) == 0.5);
  CHECK(level_weight(QualityLevel::Poor, w) == 0.25);
  CHECK(level_weight(QualityLevel::Low, w) == 0.0);
  LevelWeights bad;
  bad.weights = {1, 1, 0.5, 0.25, 0};
  CHECK_THROWS_AS(level_weight(QualityLevel::High, bad), vq::Error);
}

TEST_CASE("level words round-trip case-insensitively") {
  for (auto level : kAllLevels) {
    CHECK(level_from_word(level_word(level)) == level);
    std::string lower = level_word(level);
    for (auto& c : lower) c = static_cast<char>(std::tolower(c));
    CHECK(level_from_word(lower) == level);
  }
  CHECK(!level_from_word("Great").has_value());
}

TEST_CASE("distortion label sets are disjoint with the stated sizes") {
  CHECK(spatial_distortions().size() == 11);
  CHECK(motion_distortions().size() == 2);
  for (auto s : spatial_distortions()) CHECK(!is_motion_distortion(s));
  for (auto m : motion_distortions()) CHECK(is_motion_distortion(m));
  CHECK(distortion_from_name("noise") == DistortionLabel::Noise);
  CHECK(distortion_from_name("flicker (camera shake)") ==
        DistortionLabel::Flicker);
  CHECK(!distortion_from_name("rain").has_value());
}

TEST_CASE("encode_stalling_binary transcribes flags") {
  CHECK(encode_stalling_binary({{0, 0, 1, 1, 0}, 1.0}) == "00110");
  CHECK(encode_stalling_binary({{0}, 1.0}) == "0");
}

TEST_CASE("encode/parse round-trip on random traces") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_trace(rng);
    const auto back = parse_stalling_binary(encode_stalling_binary(t), t.frame_rate);
    CHECK(back.flags == t.flags);
  }
}

TEST_CASE("summarize_stalling worked examples") {
  {
    const auto s = summarize_stalling({{0, 0, 1, 1, 1, 0, 0, 1, 0, 0}, 1.0});
    CHECK(s.event_count == 2);
    REQUIRE(s.event_durations.size() == 2);
    CHECK(s.event_durations[0] == doctest::Approx(3.0));
    CHECK(s.event_durations[1] == doctest::Approx(1.0));
    CHECK(s.stall_ratio == doctest::Approx(0.4));
    CHECK(s.initial_buffering == doctest::Approx(0.0));
    CHECK(s.tail_gap == doctest::Approx(2.0));
  }
  {
    const auto s = summarize_stalling({std::vector<std::uint8_t>(10, 0), 1.0});
    CHECK(s.event_count == 0);
    CHECK(s.stall_ratio == 0.0);
    CHECK(s.initial_buffering == 0.0);
    CHECK(s.tail_gap == doctest::Approx(10.0));
  }
  {
    const auto s = summarize_stalling({{1, 1, 0, 0}, 2.0});
    CHECK(s.event_count == 1);
    CHECK(s.event_durations[0] == doctest::Approx(1.0));
    CHECK(s.stall_ratio == doctest::Approx(0.5));
    CHECK(s.initial_buffering == doctest::Approx(1.0));
    CHECK(s.tail_gap == doctest::Approx(1.0));
  }
}

TEST_CASE("summarize_stalling agrees with the transition oracle") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_trace(rng);
    const auto got = summarize_stalling(t);
    const auto want = oracle_summarize(t);
    CHECK(got.event_count == want.event_count);
    REQUIRE(got.event_durations.size() == want.event_durations.size());
    for (size_t k = 0; k < want.event_durations.size(); ++k)
      CHECK(got.event_durations[k] == doctest::Approx(want.event_durations[k]));
    CHECK(got.stall_ratio == doctest::Approx(want.stall_ratio).epsilon(1e-12));
    CHECK(got.initial_buffering == doctest::Approx(want.initial_buffering));
    CHECK(got.tail_gap == doctest::Approx(want.tail_gap));
    // event_count equals the number of 0->1 transitions (leading 1 counts).
    int transitions = t.flags[0] == 1 ? 1 : 0;
    for (size_t k = 1; k < t.flags.size(); ++k)
      if (t.flags[k] == 1 && t.flags[k - 1] == 0) ++transitions;
    CHECK(got.event_count == transitions);
    // Stalled seconds match ratio x total seconds.
    double stalled = 0;
    for (double d : got.event_durations) stalled += d;
    CHECK(stalled ==
          doctest::Approx(got.stall_ratio * t.flags.size() / t.frame_rate)
              .epsilon(1e-9));
  }
}
