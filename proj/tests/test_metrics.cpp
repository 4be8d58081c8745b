// Copyright 2026 The Beltline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <random>

#include "doctest.h"

#include "beltline/error.h"
#include "beltline/metrics.h"
#include "oracles.h"

using namespace beltline;

namespace {

InspectionEvent event(std::uint64_t id, Outcome v, Truth t, double t_ms) {
  InspectionEvent e;
  e.t_ms = t_ms;
  e.object_id = id;
  e.case_kind = CaseKind::B;
  e.truth = t;
  e.verdict = v;
  e.tools = {{"resistor_site", v == Outcome::Pass ? 1.0 : 0.0, v == Outcome::Pass, ""}};
  e.latency_ms = 9.25;
  e.timeline = {t_ms - 20.0, t_ms - 20.0, t_ms - 10.75, t_ms - 5.75};
  return e;
}

// Rejects every write until told otherwise.
class FlakySink : public LineSink {
 public:
  bool fail = true;
  std::vector<std::string> lines;
  bool write_line(std::string_view line) override {
    if (fail) return false;
    lines.emplace_back(line);
    return true;
  }
};

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("record follows the positive-is-defective convention") {
  ConfusionCounts c;
  c = record(c, Outcome::Fail, Truth::Defective);
  CHECK(c.vp == 1);
  c = record(c, Outcome::Pass, Truth::Defective);
  CHECK(c.fn == 1);
  c = record(c, Outcome::Fail, Truth::Good);
  CHECK(c.fp == 1);
  c = record(c, Outcome::Pass, Truth::Good);
  CHECK(c.vn == 1);
  CHECK(c.total() == 4);
}

TEST_CASE("sensitivity examples") {
  CHECK(sensitivity({5, 0, 0, 0}) == 100.0);
  CHECK(sensitivity({2499, 0, 0, 1}) == 99.96);
  CHECK_FALSE(sensitivity({0, 3, 3, 0}).has_value());
}

TEST_CASE("specificity examples") {
  CHECK(specificity({0, 0, 7, 0}) == 100.0);
  CHECK(specificity({0, 2, 1537, 0}) == 99.87);
  CHECK(specificity({0, 5, 0, 0}) == 0.0);
  CHECK_FALSE(specificity({4, 0, 0, 1}).has_value());
}

TEST_CASE("percentages agree with exact long division") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t den = 1 + rng() % 100000;
    const std::uint64_t num = rng() % (den + 1);
    REQUIRE(percent_2dp(num, den) == double(oracle::percent_hundredths(num, den)) / 100.0);
  }
  // Exact half-way cases round up.
  CHECK(percent_2dp(1, 8) == 12.5);
  CHECK(percent_2dp(1, 16) == 6.25);
  CHECK(percent_2dp(1, 80000) == 0.0);   // 0.00125 -> 0.00
  CHECK(percent_2dp(1, 40000) == 0.0);   // 0.0025 -> 0.00
  CHECK(percent_2dp(1, 20000) == 0.01);  // 0.005 -> 0.01
}

TEST_CASE("throughput") {
  CHECK(throughput(3268, 1422.0) == doctest::Approx(137.9).epsilon(1e-3));
  CHECK(throughput(0, 10.0) == 0.0);
  CHECK(throughput(390, 60.0) == 390.0);
  CHECK_THROWS_AS(throughput(10, 0.0), RangeError);
}

TEST_CASE("empty log summary") {
  const auto s = summarize(EventLog{});
  CHECK(s.inspected == 0);
  CHECK_FALSE(s.sensitivity_pct);
  CHECK_FALSE(s.specificity_pct);
  CHECK(s.throughput_per_min == 0.0);
  CHECK(format_percent(s.sensitivity_pct) == "-");
}

TEST_CASE("summary counts match the recorded events") {
  EventLog log;
  log.append_event(event(1, Outcome::Fail, Truth::Defective, 100.0));
  log.append_event(event(2, Outcome::Pass, Truth::Defective, 250.0));
  log.append_event(event(3, Outcome::Pass, Truth::Good, 400.0));
  const auto s = summarize(log);
  CHECK(s.counts == ConfusionCounts{1, 0, 1, 1});
  CHECK(s.inspected == 3);
  CHECK(s.elapsed_s == 0.4);
  CHECK(s.sensitivity_pct == 50.0);
  CHECK(s.specificity_pct == 100.0);
  CHECK(s.throughput_per_min == doctest::Approx(450.0));
}

TEST_CASE("event lines carry the documented fields") {
  const auto line = serialize_event(event(7, Outcome::Pass, Truth::Good, 12.5));
  for (const char* key : {"\"t_ms\"", "\"object_id\"", "\"case\"", "\"truth\"", "\"verdict\"",
                          "\"tools\"", "\"latency_ms\"", "\"timeline\"", "\"missed_triggers\""})
    CHECK(line.find(key) != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(parse_event(line) == event(7, Outcome::Pass, Truth::Good, 12.5));
  CHECK_THROWS_AS(parse_event("{\"t_ms\": 1}"), Error);
}

TEST_CASE("replaying a saved log reproduces the summary") {
  std::mt19937_64 rng(4);
  EventLog log;
  for (std::uint64_t i = 1; i <= 500; ++i) {
    auto e = event(i, rng() % 2 ? Outcome::Pass : Outcome::Fail,
                   rng() % 2 ? Truth::Good : Truth::Defective, 153.8461 * double(i) + 0.001 * double(rng() % 997));
    e.missed_triggers = i / 100;
    e.tools[0].value = double(rng() % 10000) / 7.0;
    log.append_event(e);
  }
  const auto again = EventLog::parse(log.serialize());
  CHECK(again.size() == log.size());
  CHECK(summarize(again) == summarize(log));
  CHECK(again.serialize() == log.serialize());
}

TEST_CASE("file sink appends whole lines") {
  const auto path = std::filesystem::temp_directory_path() / "beltline_test_log.jsonl";
  {
    auto sink = std::make_shared<FileSink>(path);
    EventLog log(sink);
    CHECK(log.append_event(event(1, Outcome::Fail, Truth::Defective, 1.0)));
    CHECK(log.append_event(event(2, Outcome::Pass, Truth::Good, 2.0)));
  }
  const auto loaded = EventLog::load(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.events()[1].object_id == 2);
  std::filesystem::remove(path);
}

TEST_CASE("sink failures keep the record and retry later") {
  auto sink = std::make_shared<FlakySink>();
  EventLog log(sink);
  CHECK_FALSE(log.append_event(event(1, Outcome::Fail, Truth::Defective, 1.0)));
  CHECK(log.unwritten() == 1);
  CHECK(log.size() == 1);
  CHECK(log.write_failures() == 1);
  sink->fail = false;
  CHECK(log.append_event(event(2, Outcome::Pass, Truth::Good, 2.0)));
  CHECK(log.unwritten() == 0);
  REQUIRE(sink->lines.size() == 2);
  CHECK(parse_event(sink->lines[0]).object_id == 1);  // order preserved
}

TEST_CASE("CSV follows the results-table column order") {
  CHECK(summary_csv_header() == "case,inspected,elapsed_s,fp,fn,sensitivity,specificity");
  RunSummary s;
  s.inspected = 4;
  s.elapsed_s = 1.5;
  s.counts = {2, 0, 2, 0};
  s.sensitivity_pct = 100.0;
  CHECK(summary_csv_row(CaseKind::C, s) == "C,4,1.500,0,0,100.00,-");
}

}  // TEST_SUITE
