// Copyright 2026 The dpstream Authors
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

#include "dpstream/service.hpp"

#include <algorithm>
#include <stdexcept>

#include <httplib.h>

#include "dpstream/error.hpp"
#include "dpstream/persist.hpp"

namespace dpstream {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Thrown by handlers to select the response status.
struct HttpError {
  int status;
  std::string code;
  std::string message;
};

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

template <class F>
void guarded(httplib::Response& res, F f) {
  try {
    reply(res, 200, f());
  } catch (const HttpError& e) {
    reply_error(res, e.status, e.code, e.message);
  } catch (const json::exception& e) {
    reply_error(res, 400, "bad-request", e.what());
  } catch (const DataError& e) {
    reply_error(res, 400, "bad-request", e.what());
  } catch (const ConfigError& e) {
    reply_error(res, 400, "bad-request", e.what());
  } catch (const std::invalid_argument& e) {
    reply_error(res, 400, "bad-request", e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, "internal", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw HttpError{400, "bad-request", e.what()};
  }
}

json record_view(const RawRecord& r) {
  json j = persist::encode(r);
  j.erase("true_label");
  return j;
}

}  // namespace

Service::Service(StreamSession session, ServiceConfig config, std::optional<RecordEmbedder> embedder,
                 const std::vector<RawRecord>& training_records)
    : session_(std::move(session)), config_(std::move(config)), embedder_(std::move(embedder)) {
  if (!(config_.query_timeout_s > 0.0)) throw ConfigError("query timeout must be positive");
  for (const auto& r : training_records) {
    if (!r.true_label) continue;
    auto& q = examples_[*r.true_label];
    q.push_back(record_view(r));
    if (q.size() > config_.examples_per_label) q.pop_front();
  }
  for (std::size_t i = 0; i < session_.processed(); ++i) records_.push_back({{"id", session_.record_ids()[i]}});
  if (session_.pending()) {
    query_deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double>(config_.query_timeout_s));
  }
  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

Service::~Service() { stop(); }

void Service::enqueue(std::vector<FeedItem> items) {
  std::lock_guard lock(mutex_);
  for (auto& it : items) feed_.push_back(std::move(it));
}

void Service::remember(std::size_t index) {
  const std::string& label = session_.labels()[index];
  auto& q = examples_[label];
  q.push_back(records_[index]);
  if (q.size() > config_.examples_per_label) q.pop_front();
}

json Service::process_locked(const std::string& id, const LatentVector& x, std::optional<std::string> truth,
                             json record) {
  if (session_.pending()) {
    throw HttpError{409, "query-pending",
                    "record " + std::to_string(session_.pending()->index) + " awaits a label"};
  }
  if (!record.contains("id")) record["id"] = id;
  // Numerical failures must not leave a half-applied update behind.
  StreamSession backup = session_;
  StreamSession::Step step;
  try {
    step = session_.process(id, x, truth);
  } catch (...) {
    session_ = std::move(backup);
    throw;
  }
  records_.push_back(std::move(record));
  class_count_history_.push_back(session_.class_count());

  json out = {{"index", step.index},
              {"record_id", step.record_id},
              {"prediction", step.prediction},
              {"posterior", persist::encode(step.posterior)},
              {"resampled", step.resampled}};
  if (step.query && session_.options().active.mode == ActiveMode::kOracle && truth) {
    session_.answer(step.index, *truth);
    out["query"] = persist::encode(*step.query);
    out["query"]["resolution"] = "answered";
    out["query"]["label"] = *truth;
    out["prediction"] = *truth;
    remember(step.index);
  } else if (step.query) {
    out["query"] = persist::encode(*step.query);
    query_deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double>(config_.query_timeout_s));
  } else {
    out["query"] = nullptr;
    remember(step.index);
  }
  return out;
}

json Service::handle_record(const json& body) {
  if (!body.is_object()) throw HttpError{400, "bad-request", "record must be a JSON object"};
  std::lock_guard lock(mutex_);
  if (body.contains("x")) {
    LatentVector x = persist::decode_vector(body.at("x"));
    const std::string id =
        body.contains("id") ? body.at("id").get<std::string>() : "r" + std::to_string(session_.processed());
    std::optional<std::string> truth;
    if (body.contains("true_label")) truth = body.at("true_label").get<std::string>();
    return process_locked(id, x, truth, {{"id", id}});
  }
  if (!embedder_) throw HttpError{400, "bad-request", "this service only accepts latent records {id, x}"};
  const RawRecord r = parse_record(body.dump());
  return process_locked(r.id, embedder_->embed(r), r.true_label, record_view(r));
}

json Service::pending_view() const {
  const auto& q = session_.pending();
  if (!q) return {{"pending", nullptr}};
  json view = persist::encode(*q);
  view["record"] = records_.at(q->index);
  std::vector<std::pair<std::string, double>> cands(q->posterior.begin(), q->posterior.end());
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  json candidates = json::array();
  for (const auto& [label, mass] : cands) {
    json ex = json::array();
    if (auto it = examples_.find(label); it != examples_.end()) {
      for (auto r = it->second.rbegin(); r != it->second.rend(); ++r) ex.push_back(*r);
    }
    candidates.push_back({{"label", label}, {"mass", persist::encode(mass)}, {"examples", ex}});
  }
  view["candidates"] = candidates;
  const double left = std::chrono::duration<double>(query_deadline_ - Clock::now()).count();
  view["expires_in_s"] = std::max(0.0, left);
  return {{"pending", view}};
}

json Service::metrics_locked() const {
  const auto f1 = session_.running_mean_f1();
  const auto n = session_.processed();
  return {{"processed", n},
          {"queries_issued", session_.queries_issued()},
          {"queries_answered", session_.queries_answered()},
          {"queries_skipped", session_.queries_skipped()},
          {"query_ratio", n ? static_cast<double>(session_.queries_issued()) / static_cast<double>(n) : 0.0},
          {"mean_f1", f1 ? json(*f1) : json(nullptr)},
          {"enp", persist::encode(session_.current_enp())},
          {"class_count", session_.class_count()},
          {"class_count_history", class_count_history_},
          {"pending", session_.pending().has_value()},
          {"queued", feed_.size()}};
}

json Service::metrics() const {
  std::lock_guard lock(mutex_);
  return metrics_locked();
}

json Service::model_summary() const {
  std::lock_guard lock(mutex_);
  const auto& o = session_.options();
  return {{"engine", to_string(o.engine)},
          {"particles", o.engine == Engine::kParticle ? o.particles : 0},
          {"enp", persist::encode(session_.current_enp())},
          {"class_count", session_.class_count()},
          {"classes", session_.class_labels()},
          {"seed", o.seed},
          {"processed", session_.processed()},
          {"mode", to_string(o.active.mode)},
          {"tau", o.active.tau}};
}

void Service::install_routes() {
  auto& s = *server_;
  s.Post("/records", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return handle_record(parse_body(req)); });
  });
  s.Get("/queries", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      std::lock_guard lock(mutex_);
      return pending_view();
    });
  });
  s.Post("/labels", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      if (!body.contains("index") || !body.contains("label")) {
        throw HttpError{400, "bad-request", "expected {\"index\", \"label\"}"};
      }
      const auto index = body.at("index").get<std::size_t>();
      const auto label = body.at("label").get<std::string>();
      std::lock_guard lock(mutex_);
      if (!session_.pending() || session_.pending()->index != index) {
        throw HttpError{409, "stale-query", "record " + std::to_string(index) + " has no pending query"};
      }
      const FeedbackOutcome out = session_.answer(index, label);
      remember(index);
      class_count_history_.back() = session_.class_count();
      return json{{"index", index},
                  {"label", label},
                  {"particles_changed", out.particles_changed},
                  {"resampled", out.resampled}};
    });
  });
  s.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return metrics(); });
  });
  s.Get("/model", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return model_summary(); });
  });
  s.Post("/snapshot", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      std::filesystem::path path = config_.snapshot_path;
      if (body.contains("path")) path = body.at("path").get<std::string>();
      if (path.empty()) throw HttpError{400, "bad-request", "no snapshot path configured"};
      std::lock_guard lock(mutex_);
      session_.log_event("snapshot", {{"path", path.string()}, {"index", session_.processed()}});
      session_.save(path);
      return json{{"path", path.string()}, {"index", session_.processed()}};
    });
  });
  if (!config_.static_dir.empty() && !s.set_mount_point("/", config_.static_dir.string())) {
    throw ConfigError("static directory not found: " + config_.static_dir.string());
  }
}

void Service::tick_loop() {
  std::unique_lock lock(mutex_);
  while (!stopping_) {
    stop_cv_.wait_for(lock, std::chrono::milliseconds(50));
    if (stopping_) break;
    const auto now = Clock::now();
    if (const auto& q = session_.pending(); q && now >= query_deadline_) {
      const std::size_t index = q->index;
      session_.skip(index);
      remember(index);
    }
    const auto interval = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(config_.feed_interval_s));
    if (!feed_.empty() && !session_.pending() && now - last_feed_ >= interval) {
      FeedItem item = std::move(feed_.front());
      feed_.pop_front();
      last_feed_ = now;
      try {
        process_locked(item.id, item.x, item.truth, std::move(item.record));
      } catch (const std::exception&) {
        // The record is dropped; state was restored by process_locked.
      } catch (const HttpError&) {
      }
    }
  }
}

int Service::start() {
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) throw ConfigError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  ticker_ = std::thread([this] { tick_loop(); });
  server_->wait_until_ready();
  return port;
}

void Service::wait() {
  std::unique_lock lock(mutex_);
  stop_cv_.wait(lock, [this] { return stopping_; });
}

void Service::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopped_) return;
    stopped_ = true;
    stopping_ = true;
  }
  stop_cv_.notify_all();
  server_->stop();
  if (listener_.joinable()) listener_.join();
  if (ticker_.joinable()) ticker_.join();
  std::lock_guard lock(mutex_);
  if (!config_.snapshot_path.empty()) {
    session_.log_event("snapshot", {{"path", config_.snapshot_path.string()}, {"index", session_.processed()}});
    session_.save(config_.snapshot_path);
  }
}

}  // namespace dpstream
