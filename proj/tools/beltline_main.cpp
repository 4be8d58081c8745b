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

// beltline: command-line front end for the inspection-line simulator.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "beltline/config.h"
#include "beltline/error.h"
#include "beltline/metrics.h"
#include "beltline/scenarios.h"
#include "beltline/service.h"
#include "beltline/simulation.h"

using namespace beltline;

namespace {

struct RunArgs {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> objects;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  bool headless = false;
  std::string serve;
  std::string log;
  std::string csv;
  double time_scale = 1.0;
};

SimConfig base_config(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

int cmd_run(const RunArgs& a) {
  SimConfig cfg = base_config(a.config);
  if (!a.scenario.empty()) {
    const auto kind = parse_case_kind(a.scenario);
    if (!kind) throw ConfigError("--scenario", "expected A, B or C");
    if (kind != cfg.scenario.case_kind) {
      cfg.scenario.case_kind = *kind;
      cfg.scenario.defect_model = default_defect_model(*kind);
    }
  }
  if (a.objects) {
    cfg.run.object_count = *a.objects;
    cfg.run.duration_s.reset();
  }
  if (a.duration) {
    cfg.run.duration_s = *a.duration;
    cfg.run.object_count.reset();
  }
  if (a.seed) cfg.run.seed = *a.seed;
  if (!a.log.empty()) cfg.run.log_path = a.log;
  if (a.headless) cfg.run.headless = true;
  if (!a.serve.empty()) cfg.server.bind = a.serve;
  cfg.scenario.seed = cfg.run.seed;
  cfg.validate();

  std::shared_ptr<LineSink> file;
  if (!cfg.run.log_path.empty()) file = std::make_shared<FileSink>(cfg.run.log_path);

  RunSummary summary;
  if (a.serve.empty()) {
    Simulation sim(cfg, file);
    sim.start();
    sim.run_to_end();
    if (sim.timed_out())
      std::cerr << "warning: run stopped at the simulated-time cap with "
                << sim.counters().spawned << " objects fed\n";
    if (sim.log().unwritten())
      std::cerr << "warning: " << sim.log().unwritten() << " log lines could not be written\n";
    summary = summarize(sim.log());
  } else {
    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t stop_set;
    sigemptyset(&stop_set);
    sigaddset(&stop_set, SIGINT);
    sigaddset(&stop_set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_set, nullptr);

    std::shared_ptr<AsyncLineSink> async;
    if (file) async = std::make_shared<AsyncLineSink>(file);
    ServiceOptions opts = service_options(cfg);
    opts.realtime = !a.headless;
    opts.time_scale = a.time_scale;
    opts.autostart = true;
    Service service(cfg, opts, async);
    const auto port = service.start();
    std::cerr << "serving on " << a.serve.substr(0, a.serve.rfind(':')) << ':' << port
              << " (Ctrl-C to stop)\n";
    std::thread reporter([&] {
      const auto s = service.wait_for_run();
      std::cerr << "run finished: " << s.inspected << " inspected\n";
    });
    int sig = 0;
    sigwait(&stop_set, &sig);
    service.shutdown();
    reporter.join();
    if (async) async->drain();
    summary = service.wait_for_run();
  }

  std::cout << summary_json(summary) << '\n';
  if (!a.csv.empty()) {
    std::FILE* f = std::fopen(a.csv.c_str(), "w");
    if (!f) throw Error("cannot write " + a.csv);
    std::fprintf(f, "%s\n%s\n", summary_csv_header().c_str(),
                 summary_csv_row(cfg.scenario.case_kind, summary).c_str());
    std::fclose(f);
  }
  return 0;
}

int cmd_replay(const std::string& log, bool csv) {
  const auto events = EventLog::load(log);
  const auto s = summarize(events);
  if (csv) {
    const CaseKind kind = events.size() ? events.events().front().case_kind : CaseKind::A;
    std::cout << summary_csv_header() << '\n' << summary_csv_row(kind, s) << '\n';
  } else {
    std::cout << summary_json(s) << '\n';
  }
  return 0;
}

struct FrameArgs {
  std::string config;
  std::string kind = "A";
  double defect = 0.0;
  std::uint64_t variant = 1;
  std::uint64_t seed = 1;
  double offset_px = 0.0;
  std::optional<double> sigma;
  std::string out;
};

int cmd_frame(const FrameArgs& a) {
  const SimConfig cfg = base_config(a.config);
  const auto kind = parse_case_kind(a.kind);
  if (!kind) throw ConfigError("--case", "expected A, B or C");
  if (a.defect < 0.0 || a.defect > 1.0) throw RangeError("defect", "--defect must be in 0..1");
  const DefectModel model = kind == cfg.scenario.case_kind ? cfg.scenario.defect_model
                                                           : default_defect_model(*kind);
  ObjectInstance obj;
  obj.id = a.variant;
  obj.case_kind = *kind;
  obj.appearance = good_appearance(*kind, a.variant, model);
  if (a.defect > 0.0) {
    obj.truth = Truth::Defective;
    obj.severity = a.defect;
    obj.appearance = defect_inject(*kind, a.defect, obj.appearance, a.variant, model);
  }
  RenderOptions opts;
  opts.noise_sigma = a.sigma.value_or(cfg.camera.noise_sigma);
  opts.offset_px = a.offset_px;
  const Frame frame = render(obj, set_illumination(cfg.controller.nivel_luz), a.seed, opts);
  write_pgm(a.out, frame);

  const Verdict v = run_recipe(frame, cfg.recipe(*kind));
  std::cout << "verdict " << to_string(v.outcome) << '\n';
  for (const auto& r : v.tool_results) {
    std::cout << "  " << r.id << " = " << r.value << (r.pass ? " pass" : " fail");
    if (!r.diagnostic.empty()) std::cout << " (" << r.diagnostic << ')';
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conveyor-belt visual inspection line simulator"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run the line and print the run summary");
  run->add_option("--config", ra.config, "JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--scenario", ra.scenario, "Case study A, B or C")
      ->check(CLI::IsMember({"A", "B", "C"}));
  auto* objects = run->add_option("--objects", ra.objects, "Stop after this many objects");
  auto* duration = run->add_option("--duration", ra.duration, "Stop after this many simulated seconds");
  objects->excludes(duration);
  run->add_option("--seed", ra.seed, "Scenario and noise seed");
  run->add_flag("--headless", ra.headless, "Run as fast as possible (no wall-clock pacing)");
  run->add_option("--serve", ra.serve, "Serve HTTP/WebSocket telemetry on HOST:PORT");
  run->add_option("--log", ra.log, "Write the JSONL event log here");
  run->add_option("--csv", ra.csv, "Also write the summary as CSV");
  run->add_option("--time-scale", ra.time_scale, "Simulated seconds per wall second when serving")
      ->check(CLI::PositiveNumber);

  std::string replay_log;
  bool replay_csv = false;
  auto* replay = app.add_subcommand("replay", "Recompute the summary from an event log");
  replay->add_option("--log", replay_log, "JSONL event log")->required()->check(CLI::ExistingFile);
  replay->add_flag("--csv", replay_csv, "Print CSV instead of JSON");

  FrameArgs fa;
  auto* frame = app.add_subcommand("frame", "Render one inspection frame to PGM");
  frame->add_option("--config", fa.config, "JSON configuration file")->check(CLI::ExistingFile);
  frame->add_option("--case", fa.kind, "Case study A, B or C")->check(CLI::IsMember({"A", "B", "C"}));
  frame->add_option("--defect", fa.defect, "Defect severity, 0 for a good part");
  frame->add_option("--variant", fa.variant, "Appearance variant");
  frame->add_option("--seed", fa.seed, "Noise seed");
  frame->add_option("--offset", fa.offset_px, "Horizontal offset from the field-of-view center, px");
  frame->add_option("--sigma", fa.sigma, "Noise sigma (default from config)");
  frame->add_option("--out", fa.out, "Output PGM path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(ra);
    if (*replay) return cmd_replay(replay_log, replay_csv);
    if (*frame) return cmd_frame(fa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
