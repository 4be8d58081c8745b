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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beltline/camera.h"
#include "beltline/controller.h"
#include "beltline/object.h"

namespace beltline {

/// Confusion counts with Defective as the positive class: a Fail verdict on
/// a defective part is a true positive.
struct ConfusionCounts {
  std::uint64_t vp = 0;  // defective, failed
  std::uint64_t fp = 0;  // good, failed
  std::uint64_t vn = 0;  // good, passed
  std::uint64_t fn = 0;  // defective, passed

  std::uint64_t total() const { return vp + fp + vn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts record(ConfusionCounts counts, Outcome verdict, Truth truth);

/// 100*vp/(vp+fn) rounded half-up to 2 decimals; nullopt when vp+fn = 0.
std::optional<double> sensitivity(const ConfusionCounts& c);
/// 100*vn/(vn+fp) rounded half-up to 2 decimals; nullopt when vn+fp = 0.
std::optional<double> specificity(const ConfusionCounts& c);

/// Percentage num/den at 2 decimals, computed in integers.
double percent_2dp(std::uint64_t num, std::uint64_t den);

/// Objects per minute. Throws RangeError when elapsed_s <= 0.
double throughput(std::uint64_t inspected, double elapsed_s);

struct RunSummary {
  std::uint64_t inspected = 0;
  double elapsed_s = 0.0;
  ConfusionCounts counts;
  std::optional<double> sensitivity_pct;
  std::optional<double> specificity_pct;
  double throughput_per_min = 0.0;
  std::uint64_t missed_triggers = 0;

  bool operator==(const RunSummary&) const = default;
};

/// Timestamps of one object's trip through the pipeline, in ms.
struct Timeline {
  double edge_ms = 0.0;
  double trigger_ms = 0.0;
  double capture_ms = 0.0;
  double verdict_ms = 0.0;

  bool operator==(const Timeline&) const = default;
};

/// One inspected object. `t_ms` is when the verdict (and its log line) is
/// issued; `missed_triggers` is the camera's running total at that moment,
/// so a log alone is enough to rebuild the run summary.
struct InspectionEvent {
  double t_ms = 0.0;
  std::uint64_t object_id = 0;
  CaseKind case_kind = CaseKind::A;
  Truth truth = Truth::Good;
  Outcome verdict = Outcome::Fail;
  std::vector<ToolResult> tools;
  double latency_ms = 0.0;  // trigger to verdict
  Timeline timeline;
  std::uint64_t missed_triggers = 0;

  bool operator==(const InspectionEvent&) const = default;
};

std::string serialize_event(const InspectionEvent& e);
InspectionEvent parse_event(std::string_view line);

/// Destination for log lines. Implementations write each line with a
/// single call so a crash never leaves a partial record.
class LineSink {
 public:
  virtual ~LineSink() = default;
  /// Returns false on I/O failure.
  virtual bool write_line(std::string_view line) = 0;
};

/// O_APPEND file; one write(2) per line.
class FileSink : public LineSink {
 public:
  explicit FileSink(const std::filesystem::path& path, bool truncate = true);
  ~FileSink() override;
  FileSink(const FileSink&) = delete;
  FileSink& operator=(const FileSink&) = delete;

  bool write_line(std::string_view line) override;

 private:
  int fd_ = -1;
};

/// Append-only JSON Lines event log. Every event is kept in memory; lines
/// that the sink failed to take stay queued and are retried on the next
/// append or flush().
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::shared_ptr<LineSink> sink) : sink_(std::move(sink)) {}

  /// Returns false if the sink rejected the line (the event is still held).
  bool append_event(const InspectionEvent& event);
  bool flush();

  std::span<const InspectionEvent> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  std::size_t unwritten() const { return unwritten_.size(); }
  std::uint64_t write_failures() const { return write_failures_; }

  std::string serialize() const;
  static EventLog parse(std::string_view jsonl);
  static EventLog load(const std::filesystem::path& path);

 private:
  std::vector<InspectionEvent> events_;
  std::vector<std::string> unwritten_;
  std::shared_ptr<LineSink> sink_;
  std::uint64_t write_failures_ = 0;
};

/// Summary from the log alone: elapsed runs from t = 0 to the last verdict
/// and missed triggers are taken from the last event.
RunSummary summarize(std::span<const InspectionEvent> events);
RunSummary summarize(const EventLog& log);

std::string summary_json(const RunSummary& s);
/// Table-style CSV: case,inspected,elapsed,fp,fn,sensitivity,specificity.
std::string summary_csv_header();
std::string summary_csv_row(CaseKind kind, const RunSummary& s);

/// "99.96" or "-" for undefined.
std::string format_percent(const std::optional<double>& pct);

}  // namespace beltline
