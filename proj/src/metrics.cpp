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

#include "beltline/metrics.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "beltline/error.h"

namespace beltline {

using ojson = nlohmann::ordered_json;

ConfusionCounts record(ConfusionCounts c, Outcome verdict, Truth truth) {
  const bool fail = verdict == Outcome::Fail;
  if (truth == Truth::Defective)
    ++(fail ? c.vp : c.fn);
  else
    ++(fail ? c.fp : c.vn);
  return c;
}

double percent_2dp(std::uint64_t num, std::uint64_t den) {
  // round_half_up(10000 * num / den) hundredths of a percent.
  const std::uint64_t hundredths = (20000 * num + den) / (2 * den);
  return double(hundredths) / 100.0;
}

std::optional<double> sensitivity(const ConfusionCounts& c) {
  if (c.vp + c.fn == 0) return std::nullopt;
  return percent_2dp(c.vp, c.vp + c.fn);
}

std::optional<double> specificity(const ConfusionCounts& c) {
  if (c.vn + c.fp == 0) return std::nullopt;
  return percent_2dp(c.vn, c.vn + c.fp);
}

double throughput(std::uint64_t inspected, double elapsed_s) {
  if (!(elapsed_s > 0.0))
    throw RangeError("elapsed_s", "throughput needs a positive elapsed time");
  return 60.0 * double(inspected) / elapsed_s;
}

namespace {

ojson tool_json(const ToolResult& t) {
  ojson j{{"id", t.id}, {"value", t.value}, {"pass", t.pass}};
  if (!t.diagnostic.empty()) j["diagnostic"] = t.diagnostic;
  return j;
}

}  // namespace

std::string serialize_event(const InspectionEvent& e) {
  ojson tools = ojson::array();
  for (const auto& t : e.tools) tools.push_back(tool_json(t));
  ojson j{{"t_ms", e.t_ms},
          {"object_id", e.object_id},
          {"case", to_string(e.case_kind)},
          {"truth", to_string(e.truth)},
          {"verdict", to_string(e.verdict)},
          {"tools", std::move(tools)},
          {"latency_ms", e.latency_ms},
          {"timeline",
           {{"edge_ms", e.timeline.edge_ms},
            {"trigger_ms", e.timeline.trigger_ms},
            {"capture_ms", e.timeline.capture_ms},
            {"verdict_ms", e.timeline.verdict_ms}}},
          {"missed_triggers", e.missed_triggers}};
  return j.dump();
}

InspectionEvent parse_event(std::string_view line) {
  InspectionEvent e;
  try {
    const auto j = ojson::parse(line);
    e.t_ms = j.at("t_ms").get<double>();
    e.object_id = j.at("object_id").get<std::uint64_t>();
    const auto kind = parse_case_kind(j.at("case").get<std::string>());
    const auto truth = parse_truth(j.at("truth").get<std::string>());
    const auto verdict = parse_outcome(j.at("verdict").get<std::string>());
    if (!kind || !truth || !verdict) throw Error("bad enum value");
    e.case_kind = *kind;
    e.truth = *truth;
    e.verdict = *verdict;
    for (const auto& t : j.at("tools")) {
      ToolResult r;
      r.id = t.at("id").get<std::string>();
      r.value = t.at("value").get<double>();
      r.pass = t.at("pass").get<bool>();
      if (t.contains("diagnostic")) r.diagnostic = t["diagnostic"].get<std::string>();
      e.tools.push_back(std::move(r));
    }
    e.latency_ms = j.at("latency_ms").get<double>();
    if (j.contains("timeline")) {
      const auto& tl = j["timeline"];
      e.timeline = {tl.at("edge_ms").get<double>(), tl.at("trigger_ms").get<double>(),
                    tl.at("capture_ms").get<double>(), tl.at("verdict_ms").get<double>()};
    }
    e.missed_triggers = j.value("missed_triggers", std::uint64_t{0});
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("event log: ") + ex.what());
  }
  return e;
}

FileSink::FileSink(const std::filesystem::path& path, bool truncate) {
  const int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC | (truncate ? O_TRUNC : 0);
  fd_ = ::open(path.c_str(), flags, 0644);
  if (fd_ < 0) throw Error("event log: cannot open " + path.string());
}

FileSink::~FileSink() {
  if (fd_ >= 0) ::close(fd_);
}

bool FileSink::write_line(std::string_view line) {
  std::string buf;
  buf.reserve(line.size() + 1);
  buf.append(line);
  buf.push_back('\n');
  for (;;) {
    const ssize_t n = ::write(fd_, buf.data(), buf.size());
    if (n == static_cast<ssize_t>(buf.size())) return true;
    if (n < 0 && errno == EINTR) continue;
    return false;
  }
}

bool EventLog::append_event(const InspectionEvent& event) {
  events_.push_back(event);
  unwritten_.push_back(serialize_event(event));
  return flush();
}

bool EventLog::flush() {
  if (!sink_) {
    unwritten_.clear();
    return true;
  }
  std::size_t done = 0;
  for (; done < unwritten_.size(); ++done) {
    if (!sink_->write_line(unwritten_[done])) {
      ++write_failures_;
      break;
    }
  }
  unwritten_.erase(unwritten_.begin(), unwritten_.begin() + done);
  return unwritten_.empty();
}

std::string EventLog::serialize() const {
  std::string out;
  for (const auto& e : events_) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

EventLog EventLog::parse(std::string_view jsonl) {
  EventLog log;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos)
      log.events_.push_back(parse_event(line));
    pos = end + 1;
  }
  return log;
}

EventLog EventLog::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("event log: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

RunSummary summarize(std::span<const InspectionEvent> events) {
  RunSummary s;
  for (const auto& e : events) {
    s.counts = record(s.counts, e.verdict, e.truth);
    s.elapsed_s = std::max(s.elapsed_s, e.t_ms / 1000.0);
    s.missed_triggers = std::max(s.missed_triggers, e.missed_triggers);
  }
  s.inspected = s.counts.total();
  s.sensitivity_pct = sensitivity(s.counts);
  s.specificity_pct = specificity(s.counts);
  s.throughput_per_min = s.elapsed_s > 0.0 ? throughput(s.inspected, s.elapsed_s) : 0.0;
  return s;
}

RunSummary summarize(const EventLog& log) { return summarize(log.events()); }

std::string format_percent(const std::optional<double>& pct) {
  if (!pct) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *pct);
  return buf;
}

std::string summary_json(const RunSummary& s) {
  auto pct = [](const std::optional<double>& p) { return p ? ojson(*p) : ojson(nullptr); };
  ojson j{{"inspected", s.inspected},
          {"elapsed_s", s.elapsed_s},
          {"counts", {{"vp", s.counts.vp}, {"fp", s.counts.fp},
                      {"vn", s.counts.vn}, {"fn", s.counts.fn}}},
          {"sensitivity_pct", pct(s.sensitivity_pct)},
          {"specificity_pct", pct(s.specificity_pct)},
          {"throughput_per_min", s.throughput_per_min},
          {"missed_triggers", s.missed_triggers}};
  return j.dump(2);
}

std::string summary_csv_header() {
  return "case,inspected,elapsed_s,fp,fn,sensitivity,specificity";
}

std::string summary_csv_row(CaseKind kind, const RunSummary& s) {
  char elapsed[32];
  std::snprintf(elapsed, sizeof elapsed, "%.3f", s.elapsed_s);
  std::ostringstream os;
  os << to_string(kind) << ',' << s.inspected << ',' << elapsed << ','
     << s.counts.fp << ',' << s.counts.fn << ',' << format_percent(s.sensitivity_pct)
     << ',' << format_percent(s.specificity_pct);
  return os.str();
}

}  // namespace beltline
