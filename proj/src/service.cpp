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

#include "beltline/service.h"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "beltline/error.h"
#include "beltline/protocol.h"
#include "beltline/simulation.h"
#include "beltline/vision.h"

namespace beltline {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

ServiceOptions service_options(const SimConfig& cfg) {
  ServiceOptions o;
  o.bind = cfg.server.bind;
  o.telemetry_hz = cfg.server.telemetry_hz;
  o.realtime = cfg.run.realtime;
  return o;
}

// ---------------------------------------------------------------- async sink

struct AsyncLineSink::State {
  std::shared_ptr<LineSink> inner;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> queue;
  bool busy = false;
  bool stopping = false;
  std::uint64_t failures = 0;
  std::thread writer;

  void run() {
    std::unique_lock lock(mu);
    for (;;) {
      cv.wait(lock, [&] { return stopping || !queue.empty(); });
      if (queue.empty()) return;
      std::string line = queue.front();
      busy = true;
      lock.unlock();
      const bool ok = inner->write_line(line);
      lock.lock();
      busy = false;
      if (ok) {
        queue.pop_front();
      } else {
        ++failures;
        if (stopping) {
          queue.clear();
        } else {
          cv.wait_for(lock, std::chrono::milliseconds(100));
        }
      }
      cv.notify_all();
    }
  }
};

AsyncLineSink::AsyncLineSink(std::shared_ptr<LineSink> inner) : state_(std::make_shared<State>()) {
  state_->inner = std::move(inner);
  state_->writer = std::thread([s = state_] { s->run(); });
}

AsyncLineSink::~AsyncLineSink() {
  {
    std::lock_guard lock(state_->mu);
    state_->stopping = true;
  }
  state_->cv.notify_all();
  state_->writer.join();
}

bool AsyncLineSink::write_line(std::string_view line) {
  {
    std::lock_guard lock(state_->mu);
    state_->queue.emplace_back(line);
  }
  state_->cv.notify_all();
  return true;
}

void AsyncLineSink::drain() {
  std::unique_lock lock(state_->mu);
  state_->cv.wait(lock, [&] { return state_->queue.empty() && !state_->busy; });
}

std::uint64_t AsyncLineSink::failures() const {
  std::lock_guard lock(state_->mu);
  return state_->failures;
}

// ------------------------------------------------------------------- service

namespace {

class WsSession;

std::pair<std::string, std::uint16_t> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("/server/bind", "expected host:port");
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("/server/bind", "bad port in '" + bind + "'");
  }
  if (port < 0 || port > 65535) throw ConfigError("/server/bind", "port out of range");
  return {host.empty() ? "0.0.0.0" : host, std::uint16_t(port)};
}

}  // namespace

struct Service::Impl {
  using ReplyFn = std::function<void(std::string body, bool ok)>;
  struct Pending {
    Command cmd;
    ReplyFn done;
  };

  SimConfig cfg;
  ServiceOptions opts;
  std::shared_ptr<LineSink> sink;

  net::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::vector<std::thread> io_threads;
  std::thread loop_thread;
  std::atomic<bool> stopping{false};
  bool started = false;
  std::uint16_t bound_port = 0;

  // Command queue into the loop.
  std::mutex cmd_mu;
  std::condition_variable cmd_cv;
  std::deque<Pending> commands;

  // Published snapshots, replaced wholesale by the loop.
  mutable std::mutex pub_mu;
  std::shared_ptr<const std::string> telemetry;
  std::shared_ptr<const std::string> config_doc;
  std::shared_ptr<const Frame> frame;
  std::vector<std::weak_ptr<WsSession>> subscribers;

  // Run completion.
  std::mutex run_mu;
  std::condition_variable run_cv;
  std::uint64_t runs_finished = 0;
  RunSummary last_summary;

  Impl(SimConfig c, ServiceOptions o, std::shared_ptr<LineSink> s)
      : cfg(std::move(c)), opts(std::move(o)), sink(std::move(s)) {}

  void submit(Command cmd, ReplyFn done) {
    {
      std::lock_guard lock(cmd_mu);
      if (stopping) {
        Reply r;
        r.id_json = cmd.id_json;
        r.ok = false;
        r.error_code = "unavailable";
        r.error_message = "service is shutting down";
        done(serialize_reply(r), false);
        return;
      }
      commands.push_back({std::move(cmd), std::move(done)});
    }
    cmd_cv.notify_all();
  }

  void publish(const Simulation& sim, bool config_changed);
  void loop();
  void accept();
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Service::Impl& impl) : ws_(std::move(socket)), impl_(impl) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  // Keeps only the newest undelivered message: a slow reader skips frames but
  // never sees them out of order.
  void deliver(std::shared_ptr<const std::string> msg) {
    net::post(ws_.get_executor(), [self = shared_from_this(), msg = std::move(msg)]() mutable {
      if (self->closed_) return;
      self->pending_ = std::move(msg);
      if (!self->writing_) self->write_next();
    });
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closed_) return;
      self->closed_ = true;
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
      beast::get_lowest_layer(self->ws_).close();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::shared_ptr<const std::string> first;
    {
      std::lock_guard lock(impl_.pub_mu);
      impl_.subscribers.push_back(weak_from_this());
      first = impl_.telemetry;
    }
    if (first) {
      pending_ = std::move(first);
      write_next();
    }
    do_read();
  }

  void write_next() {
    if (!pending_ || closed_) return;
    inflight_ = std::move(pending_);
    pending_.reset();
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*inflight_),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    inflight_.reset();
    if (ec) {
      closed_ = true;
      return;
    }
    write_next();
  }

  // Incoming messages are ignored; reading is how we notice the close.
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        return;
      }
      self->buffer_.consume(self->buffer_.size());
      self->do_read();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Service::Impl& impl_;
  beast::flat_buffer buffer_;
  std::shared_ptr<const std::string> pending_;
  std::shared_ptr<const std::string> inflight_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Service::Impl& impl) : stream_(std::move(socket)), impl_(impl) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  using Response = http::response<http::string_body>;

  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return do_close();
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/stream") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), impl_)->run(std::move(req_));
        return;
      }
      return send(make(http::status::not_found, "application/json",
                       R"({"error":"websocket endpoint is /stream"})"));
    }
    handle();
  }

  Response make(http::status status, std::string_view type, std::string body) const {
    Response res{status, req_.version()};
    res.set(http::field::server, "beltline");
    res.set(http::field::content_type, std::string(type));
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  void handle() {
    const auto target = std::string(req_.target());
    const auto path = target.substr(0, target.find('?'));
    const auto method = req_.method();

    if (method == http::verb::options) {
      auto res = make(http::status::no_content, "text/plain", "");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return send(std::move(res));
    }
    if (method == http::verb::get && path == "/state") {
      std::shared_ptr<const std::string> t;
      {
        std::lock_guard lock(impl_.pub_mu);
        t = impl_.telemetry;
      }
      return send(make(http::status::ok, "application/json", t ? *t : "{}"));
    }
    if (method == http::verb::get && path == "/config") {
      std::shared_ptr<const std::string> c;
      {
        std::lock_guard lock(impl_.pub_mu);
        c = impl_.config_doc;
      }
      return send(make(http::status::ok, "application/json", c ? *c : "{}"));
    }
    if (method == http::verb::get && path == "/frame/latest") {
      std::shared_ptr<const Frame> f;
      {
        std::lock_guard lock(impl_.pub_mu);
        f = impl_.frame;
      }
      if (!f)
        return send(make(http::status::not_found, "application/json",
                         R"({"error":"no frame captured yet"})"));
      const auto bytes = encode_pgm(*f);
      return send(make(http::status::ok, "image/x-portable-graymap",
                       std::string(bytes.begin(), bytes.end())));
    }
    if (method == http::verb::post && path == "/command") {
      Command cmd;
      try {
        cmd = parse_command(req_.body());
      } catch (const ProtocolError& e) {
        Reply r;
        r.id_json = command_id(req_.body());
        r.ok = false;
        r.error_code = e.code();
        r.error_field = e.field();
        r.error_message = e.what();
        const auto status = e.code() == "range" ? http::status::unprocessable_entity
                                                : http::status::bad_request;
        return send(make(status, "application/json", serialize_reply(r)));
      }
      // The loop replies from its own thread; hop back onto our strand.
      impl_.submit(std::move(cmd), [self = shared_from_this()](std::string body, bool ok) {
        net::post(self->stream_.get_executor(), [self, body = std::move(body), ok]() mutable {
          self->send(self->make(ok ? http::status::ok : http::status::unprocessable_entity,
                                "application/json", std::move(body)));
        });
      });
      return;
    }
    send(make(http::status::not_found, "application/json", R"({"error":"not found"})"));
  }

  void send(Response res) {
    res_ = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this(),
                                                res_->need_eof()));
  }

  void on_write(bool close, beast::error_code ec, std::size_t) {
    if (ec) return;
    if (close) return do_close();
    res_.reset();
    do_read();
  }

  void do_close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  Service::Impl& impl_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<Response> res_;
};

}  // namespace

void Service::Impl::accept() {
  acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), *this)->run();
    accept();
  });
}

void Service::Impl::publish(const Simulation& sim, bool config_changed) {
  auto t = std::make_shared<const std::string>(telemetry_json(sim.telemetry()));
  std::shared_ptr<const std::string> c;
  if (config_changed) {
    SimConfig now = sim.config();
    c = std::make_shared<const std::string>(config_json(now));
  }
  std::vector<std::shared_ptr<WsSession>> live;
  {
    std::lock_guard lock(pub_mu);
    telemetry = t;
    if (c) config_doc = c;
    if (const auto& f = sim.latest_frame()) frame = f->frame;
    std::erase_if(subscribers, [](const auto& w) { return w.expired(); });
    for (const auto& w : subscribers)
      if (auto s = w.lock()) live.push_back(std::move(s));
  }
  for (auto& s : live) s->deliver(t);
}

void Service::Impl::loop() {
  Simulation sim(cfg, sink);
  const std::int64_t period_ms = std::max<std::int64_t>(1, 1000 / opts.telemetry_hz);
  const auto wall_period = std::chrono::milliseconds(period_ms);
  if (opts.autostart) sim.start();
  publish(sim, true);

  bool was_running = false;
  bool was_finished = false;
  Clock::time_point wall0 = Clock::now();
  std::int64_t sim0 = 0;
  std::int64_t next_pub = sim.now_ms() + period_ms;
  Clock::time_point next_idle_pub = Clock::now() + wall_period;

  while (!stopping) {
    // Commands take effect between ticks only.
    std::deque<Pending> batch;
    {
      std::lock_guard lock(cmd_mu);
      batch.swap(commands);
    }
    for (auto& p : batch) {
      const Reply r = execute(sim, p.cmd);
      publish(sim, true);
      p.done(serialize_reply(r), r.ok);
    }

    if (sim.running() && !was_running) {
      wall0 = Clock::now();
      sim0 = sim.now_ms();
      next_pub = sim.now_ms() + period_ms;
    }
    was_running = sim.running();

    if (sim.running()) {
      std::int64_t budget = period_ms;
      if (opts.realtime) {
        const double wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - wall0).count();
        const auto target = sim0 + std::int64_t(wall_ms * opts.time_scale);
        budget = std::min<std::int64_t>(target - sim.now_ms(), period_ms);
        if (budget <= 0) {
          std::unique_lock cl(cmd_mu);
          cmd_cv.wait_for(cl, std::chrono::milliseconds(1),
                          [&] { return stopping.load() || !commands.empty(); });
          continue;
        }
      }
      for (std::int64_t i = 0; i < budget && sim.step(); ++i) {
        if (sim.now_ms() >= next_pub) {
          publish(sim, false);
          next_pub += period_ms;
        }
      }
    } else {
      if (Clock::now() >= next_idle_pub) {
        publish(sim, false);
        next_idle_pub = Clock::now() + wall_period;
      }
      std::unique_lock cl(cmd_mu);
      cmd_cv.wait_until(cl, next_idle_pub, [&] { return stopping.load() || !commands.empty(); });
    }

    if (sim.finished() && !was_finished) {
      publish(sim, false);
      std::lock_guard lock(run_mu);
      ++runs_finished;
      last_summary = sim.summary();
      run_cv.notify_all();
    }
    was_finished = sim.finished();
  }

  if (!sim.finished()) sim.stop();
  publish(sim, false);
  std::lock_guard lock(run_mu);
  last_summary = sim.summary();
  run_cv.notify_all();
}

Service::Service(SimConfig cfg, ServiceOptions opts, std::shared_ptr<LineSink> sink)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(opts), std::move(sink))) {
  impl_->cfg.validate();
  if (impl_->opts.telemetry_hz < 1) throw ConfigError("/server/telemetry_hz", "must be >= 1");
  if (!(impl_->opts.time_scale > 0.0)) throw Error("time_scale must be positive");
}

Service::~Service() { shutdown(); }

std::uint16_t Service::start() {
  auto& m = *impl_;
  if (m.started) return m.bound_port;
  const auto [host, port] = split_bind(m.opts.bind);
  const auto addr = net::ip::make_address(host);
  m.acceptor.emplace(net::make_strand(m.ioc));
  const tcp::endpoint ep{addr, port};
  m.acceptor->open(ep.protocol());
  m.acceptor->set_option(net::socket_base::reuse_address(true));
  m.acceptor->bind(ep);
  m.acceptor->listen(net::socket_base::max_listen_connections);
  m.bound_port = m.acceptor->local_endpoint().port();
  m.started = true;

  m.loop_thread = std::thread([&m] { m.loop(); });
  m.accept();
  for (int i = 0; i < 2; ++i) m.io_threads.emplace_back([&m] { m.ioc.run(); });
  return m.bound_port;
}

void Service::shutdown() {
  auto& m = *impl_;
  if (!m.started || m.stopping.exchange(true)) return;
  m.cmd_cv.notify_all();
  if (m.loop_thread.joinable()) m.loop_thread.join();
  // Answer anything that raced in after the loop's last drain.
  {
    std::lock_guard lock(m.cmd_mu);
    for (auto& p : m.commands) {
      Reply r;
      r.id_json = p.cmd.id_json;
      r.ok = false;
      r.error_code = "unavailable";
      r.error_message = "service is shutting down";
      p.done(serialize_reply(r), false);
    }
    m.commands.clear();
  }
  net::post(m.acceptor->get_executor(), [&m] {
    beast::error_code ec;
    m.acceptor->close(ec);
  });
  {
    std::lock_guard lock(m.pub_mu);
    for (auto& w : m.subscribers)
      if (auto s = w.lock()) s->close();
    m.subscribers.clear();
  }
  m.ioc.stop();
  for (auto& t : m.io_threads) t.join();
  m.io_threads.clear();
}

RunSummary Service::wait_for_run() {
  auto& m = *impl_;
  std::unique_lock lock(m.run_mu);
  m.run_cv.wait(lock, [&] { return m.runs_finished > 0 || m.stopping.load(); });
  return m.last_summary;
}

std::uint16_t Service::port() const { return impl_->bound_port; }

}  // namespace beltline
