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

#include "beltline/simulation.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "beltline/error.h"

namespace beltline {

namespace {

constexpr double kDtS = kTickMs / 1000.0;

// Object-count runs that stop making progress (belt stalled by a zero
// setpoint, say) are cut off after this much simulated time per object.
constexpr std::int64_t kCapBaseMs = 60'000;
constexpr std::int64_t kCapPerObjectMs = 5'000;

std::uint64_t stream_count(const SimConfig& cfg) {
  return cfg.run.object_count.value_or(0);
}

}  // namespace

std::uint64_t frame_seed(std::uint64_t run_seed, std::uint64_t object_id) {
  return mix64(mix64(run_seed ^ 0xc2b2ae3d27d4eb4fULL) ^ object_id);
}

Simulation::Simulation(SimConfig cfg, std::shared_ptr<LineSink> sink)
    : cfg_(std::move(cfg)),
      sink_(std::move(sink)),
      controller_(cfg_.controller),
      camera_(cfg_.camera),
      stream_(cfg_.scenario, stream_count(cfg_)) {
  cfg_.validate();
  reset_run();
}

// Ordered startup: attach the plant, load the scenario, apply controller
// parameters, load the recipes. Ticking begins on start().
void Simulation::reset_run() {
  motor_ = {};
  objects_.clear();
  sensor_ = {};
  sensor_delay_.clear();
  blocking_id_ = 0;
  auto scenario = cfg_.scenario;
  scenario.seed = cfg_.run.seed;
  stream_ = ObjectStream(scenario, stream_count(cfg_));
  controller_ = Controller(cfg_.controller);
  illum_ = set_illumination(cfg_.controller.nivel_luz);
  camera_ = Camera(cfg_.camera);
  recipes_.clear();
  for (auto kind : {CaseKind::A, CaseKind::B, CaseKind::C}) recipes_[kind] = cfg_.recipe(kind);
  log_ = EventLog(sink_);
  tracks_.clear();
  verdicts_.clear();
  latest_frame_.reset();
  last_verdict_.reset();
  now_ms_ = 0;
  period_pulses_ = 0;
  ticks_in_period_ = 0;
  last_period_pulses_ = 0.0;
  belt_speed_ = 0.0;
  running_ = false;
  finished_ = false;
  timed_out_ = false;
  feeding_ = false;
  fed_ = 0;
  resolved_ = 0;
  sensor_edges_ = 0;
  verdict_count_ = 0;
  uninspected_ = 0;
  counts_ = {};
  last_event_ms_ = 0.0;
}

void Simulation::start() {
  if (finished_) reset_run();
  running_ = true;
}

void Simulation::stop() {
  if (finished_) return;
  running_ = false;
  finished_ = true;
  log_.flush();
}

void Simulation::set_params(const ParamsPatch& patch) {
  // Validate before touching anything so a bad patch changes nothing.
  const ControllerParams next = beltline::set_params(controller_.params(), patch);
  controller_.apply(patch);
  cfg_.controller = next;
  illum_ = set_illumination(next.nivel_luz);
}

void Simulation::set_scenario(CaseKind kind) {
  if (kind == cfg_.scenario.case_kind) return;
  cfg_.scenario.case_kind = kind;
  cfg_.scenario.defect_model = default_defect_model(kind);
  auto scenario = cfg_.scenario;
  scenario.seed = cfg_.run.seed;
  const std::uint64_t total = stream_count(cfg_);
  const std::uint64_t left = total > fed_ ? total - fed_ : 0;
  stream_ = ObjectStream(scenario, total ? left : 0, fed_ + 1);
}

bool Simulation::step() {
  if (finished_) return false;
  if (!running_) return true;

  const auto& geom = cfg_.plant.geometry;
  motor_ = motor_step(motor_, motor_.duty, kDtS, cfg_.plant.motor);
  period_pulses_ += encoder_pulses(motor_, kDtS, cfg_.plant.motor);

  auto adv = belt_advance(objects_, motor_.omega_out, geom, kDtS);
  belt_speed_ = adv.belt_speed_cmps;
  now_ms_ += 1;
  for (const auto& o : adv.exited) {
    auto it = tracks_.find(o.id);
    if (it == tracks_.end()) continue;
    it->second.on_belt = false;
    if (!it->second.verdict_pending && !it->second.capture_scheduled) {
      ++uninspected_;
      resolve(o.id);
    }
  }

  feed();
  sense_and_trigger();
  capture_due();
  deliver_verdicts();

  if (++ticks_in_period_ >= controller_.params().control_period_ms) {
    last_period_pulses_ = double(period_pulses_);
    motor_.duty = controller_.control(last_period_pulses_);
    period_pulses_ = 0;
    ticks_in_period_ = 0;
  }

  if (done()) {
    running_ = false;
    finished_ = true;
    log_.flush();
  }
  return !finished_;
}

bool Simulation::done() {
  if (cfg_.run.duration_s)
    return double(now_ms_) >= *cfg_.run.duration_s * 1000.0;
  const std::uint64_t total = *cfg_.run.object_count;
  if (fed_ >= total && resolved_ >= total) return true;
  if (now_ms_ >= kCapBaseMs + kCapPerObjectMs * std::int64_t(total)) {
    timed_out_ = true;
    return true;
  }
  return false;
}

// Objects enter at the belt start once the line is first armed, one pitch
// behind the previous one.
void Simulation::feed() {
  if (!feeding_) {
    if (controller_.state().phase != Phase::Armed) return;
    feeding_ = true;
  }
  const auto total = cfg_.run.object_count;
  const double pitch = cfg_.scenario.pitch_cm;
  while (!total || fed_ < *total) {
    double x = 0.0;
    if (fed_ > 0) {
      if (objects_.empty() || objects_.back().id != fed_) {
        // Last one already left the belt; nothing to space against.
      } else {
        const double last_x = objects_.back().x_cm;
        if (last_x < pitch) return;
        x = last_x - pitch;
      }
    }
    auto o = stream_.next();
    o.x_cm = x;
    Track tr;
    tr.truth = o.truth;
    tr.case_kind = o.case_kind;
    tracks_[o.id] = tr;
    objects_.push_back(std::move(o));
    ++fed_;
  }
}

void Simulation::sense_and_trigger() {
  const auto& geom = cfg_.plant.geometry;
  SensorState raw = sensor_sample(objects_, geom, SensorState{});
  const int idx = raw.blocked ? blocking_object(objects_, geom) : -1;
  std::pair<bool, std::uint64_t> sample{raw.blocked, idx >= 0 ? objects_[idx].id : 0};

  if (cfg_.plant.sensor_latency_ms > 0) {
    sensor_delay_.push_back(sample);
    if (sensor_delay_.size() <= std::size_t(cfg_.plant.sensor_latency_ms)) {
      sample = {false, 0};
    } else {
      sample = sensor_delay_.front();
      sensor_delay_.pop_front();
    }
  }
  sensor_ = SensorState{sample.first, sensor_.blocked};
  if (sample.first) blocking_id_ = sample.second;

  const double now = double(now_ms_);
  if (sensor_.rising_edge()) {
    ++sensor_edges_;
    auto it = tracks_.find(blocking_id_);
    if (it != tracks_.end() && !it->second.edge_ms) it->second.edge_ms = now;
  }

  auto pulse = controller_.tick(sensor_, kTickMs, now);
  if (!pulse) return;
  pulse->object_id = blocking_id_;
  auto it = tracks_.find(blocking_id_);
  if (it != tracks_.end() && !it->second.trigger_ms) it->second.trigger_ms = pulse->start_ms;
  if (camera_.trigger(*pulse) && it != tracks_.end()) it->second.capture_scheduled = true;
}

void Simulation::capture_due() {
  const std::int64_t now_us = now_ms_ * 1000;
  auto cap = camera_.due(now_us);
  if (!cap) return;

  const auto& geom = cfg_.plant.geometry;
  const auto& cam = camera_.config();
  RenderOptions opts;
  opts.noise_sigma = cam.noise_sigma;
  if (cam.motion_blur) opts.blur_px = belt_speed_ * cam.exposure_ms / 1000.0 * kPxPerCm;

  const double capture_ms = double(cap->capture_us) / 1000.0;
  const auto obj = std::find_if(objects_.begin(), objects_.end(),
                                [&](const ObjectInstance& o) { return o.id == cap->object_id; });
  const std::uint64_t seed = frame_seed(cfg_.run.seed, cap->object_id);
  Frame frame;
  CaseKind kind = cfg_.scenario.case_kind;
  if (obj != objects_.end()) {
    // The tick lands up to 1 ms after the frame boundary; wind the object
    // back to where it was at capture.
    const double x_cap = obj->x_cm - belt_speed_ * (double(now_ms_) - capture_ms) / 1000.0;
    opts.offset_px = (x_cap - geom.inspect_pos_cm) * kPxPerCm;
    frame = render(*obj, illum_, seed, opts);
    kind = obj->case_kind;
  } else {
    frame = render_empty(illum_, seed, opts);
  }

  if (!cam.dump_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cam.dump_dir, ec);
    try {
      write_pgm(std::filesystem::path(cam.dump_dir) /
                    ("frame_" + std::to_string(cap->object_id) + ".pgm"),
                frame);
    } catch (const std::exception&) {
      // Frame dumps are a debugging aid; a full disk must not stop the line.
    }
  }

  Verdict verdict = run_recipe(frame, recipes_.at(kind));
  auto shared = std::make_shared<const Frame>(std::move(frame));
  latest_frame_ = FrameRef{cap->object_id, capture_ms, std::move(shared)};

  auto it = tracks_.find(cap->object_id);
  if (it != tracks_.end()) {
    it->second.capture_ms = capture_ms;
    it->second.capture_scheduled = false;
    it->second.verdict_pending = true;
  }
  verdicts_.push_back({cap->capture_us + camera_.inspection_us(), cap->object_id,
                       std::move(verdict)});
}

void Simulation::deliver_verdicts() {
  const std::int64_t now_us = now_ms_ * 1000;
  while (!verdicts_.empty() && verdicts_.front().at_us <= now_us) {
    PendingVerdict pv = std::move(verdicts_.front());
    verdicts_.pop_front();
    const Outcome outcome = pv.verdict.outcome;
    controller_.show(outcome);

    auto it = tracks_.find(pv.object_id);
    if (it == tracks_.end()) continue;  // pulse fired with nothing in front
    Track& tr = it->second;
    InspectionEvent e;
    e.t_ms = double(now_ms_);
    e.object_id = pv.object_id;
    e.case_kind = tr.case_kind;
    e.truth = tr.truth;
    e.verdict = outcome;
    e.tools = std::move(pv.verdict.tool_results);
    e.timeline.edge_ms = tr.edge_ms.value_or(0.0);
    e.timeline.trigger_ms = tr.trigger_ms.value_or(0.0);
    e.timeline.capture_ms = tr.capture_ms.value_or(0.0);
    e.timeline.verdict_ms = double(pv.at_us) / 1000.0;
    e.latency_ms = e.timeline.verdict_ms - e.timeline.trigger_ms;
    e.missed_triggers = camera_.missed_triggers();
    log_.append_event(e);

    counts_ = record(counts_, outcome, tr.truth);
    last_event_ms_ = e.t_ms;
    last_verdict_ = LastVerdict{pv.object_id, outcome, tr.truth, e.t_ms};
    ++verdict_count_;
    tr.verdict_pending = false;
    resolve(pv.object_id);
  }
}

void Simulation::resolve(std::uint64_t id) {
  tracks_.erase(id);
  ++resolved_;
}

RunSummary Simulation::run_to_end() {
  if (!running_ && !finished_) start();
  while (step()) {
  }
  return summary();
}

LineCounters Simulation::counters() const {
  LineCounters c;
  c.spawned = fed_;
  c.sensor_edges = sensor_edges_;
  c.pulses = camera_.pulses();
  c.captures = camera_.captures();
  c.missed_triggers = camera_.missed_triggers();
  c.verdicts = verdict_count_;
  c.uninspected = uninspected_;
  return c;
}

// Same arithmetic as summarize() over the log, kept incrementally so
// telemetry does not rescan the event history.
RunSummary Simulation::summary() const {
  RunSummary s;
  s.counts = counts_;
  s.inspected = counts_.total();
  s.elapsed_s = last_event_ms_ / 1000.0;
  s.sensitivity_pct = sensitivity(counts_);
  s.specificity_pct = specificity(counts_);
  s.throughput_per_min = s.elapsed_s > 0.0 ? throughput(s.inspected, s.elapsed_s) : 0.0;
  s.missed_triggers = log_.size() ? log_.events().back().missed_triggers : 0;
  return s;
}

TelemetryFrame Simulation::telemetry() const {
  TelemetryFrame t;
  const auto& st = controller_.state();
  t.t_ms = double(now_ms_);
  t.phase = st.phase;
  t.running = running_;
  t.terminal = finished_;
  t.belt_speed_cmps = belt_speed_;
  t.pulses_per_period = last_period_pulses_;
  t.setpoint = controller_.params().setpoint;
  t.duty = motor_.duty;
  t.nivel_luz = controller_.params().nivel_luz;
  t.green_led = st.green_led;
  t.red_led = st.red_led;
  t.case_kind = cfg_.scenario.case_kind;
  t.last_verdict = last_verdict_;
  t.counts = counts_;
  t.summary = summary();
  t.uninspected = uninspected_;
  if (latest_frame_) t.last_frame_ref = latest_frame_->object_id;
  t.object_x_cm.reserve(objects_.size());
  for (const auto& o : objects_) t.object_x_cm.push_back(o.x_cm);
  return t;
}

RunSummary run(const SimConfig& cfg, std::shared_ptr<LineSink> sink) {
  Simulation sim(cfg, std::move(sink));
  sim.start();
  sim.run_to_end();
  return summarize(sim.log());
}

}  // namespace beltline
