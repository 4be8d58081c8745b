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
#include <memory>
#include <string>

#include "beltline/config.h"
#include "beltline/metrics.h"

namespace beltline {

struct ServiceOptions {
  std::string bind = "127.0.0.1:8080";  // port 0 picks a free one
  int telemetry_hz = 10;
  /// Pace the simulation against the wall clock. When false the loop runs
  /// as fast as it can and telemetry is decimated in simulated time.
  bool realtime = true;
  /// Simulated ms per wall ms in realtime mode.
  double time_scale = 1.0;
  /// Issue a start command as soon as the loop is up.
  bool autostart = false;
};

ServiceOptions service_options(const SimConfig& cfg);

/// The station behind HTTP and WebSocket endpoints on one port:
///   GET  /state         latest telemetry frame
///   POST /command       {id, cmd, args} -> {proto_version, id, ok, error?, data?}
///   GET  /config        running configuration and parameter ranges
///   GET  /frame/latest  last captured frame as binary PGM
///   WS   /stream        telemetry frames pushed at telemetry_hz
///
/// A loop thread owns the simulation; network handlers only queue commands
/// and read published snapshots.
class Service {
 public:
  Service(SimConfig cfg, ServiceOptions opts, std::shared_ptr<LineSink> sink = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds, starts the loop and I/O threads and returns the bound port.
  std::uint16_t start();
  /// Stops accepting, closes sessions and joins all threads. Idempotent.
  void shutdown();

  /// Blocks until the current run has ended (or the service shut down) and
  /// returns its summary.
  RunSummary wait_for_run();

  std::uint16_t port() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

/// A sink that hands lines to a writer thread so the caller never waits on
/// the disk. Lines the inner sink rejects are retried in order.
class AsyncLineSink : public LineSink {
 public:
  explicit AsyncLineSink(std::shared_ptr<LineSink> inner);
  ~AsyncLineSink() override;

  bool write_line(std::string_view line) override;
  /// Blocks until every queued line has been written (or retried and failed
  /// for good at shutdown).
  void drain();
  std::uint64_t failures() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

}  // namespace beltline
