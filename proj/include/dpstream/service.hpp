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

#ifndef DPSTREAM_SERVICE_HPP
#define DPSTREAM_SERVICE_HPP

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpstream/pipeline.hpp"

namespace httplib {
class Server;
}

namespace dpstream {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  double query_timeout_s = 300.0;
  std::filesystem::path static_dir;     // served at / when set
  std::filesystem::path snapshot_path;  // POST /snapshot default and shutdown snapshot
  std::size_t examples_per_label = 3;
  double feed_interval_s = 1.0;  // pacing of queued stream records
};

/// A stream record queued for automatic processing.
struct FeedItem {
  std::string id;
  LatentVector x;
  std::optional<std::string> truth;
  nlohmann::json record;  // shown to annotators
};

/// HTTP front end over one StreamSession.
///
///   POST /records   record (RawRecord fields, or {"id", "x"}) -> prediction
///   GET  /queries   pending query with candidate classes, or {"pending": null}
///   POST /labels    {"index", "label"}; 409 when the index is not pending
///   GET  /metrics   running counters and mean-F1
///   GET  /model     class count, ENP, particles
///   POST /snapshot  {"path"?}
class Service {
 public:
  Service(StreamSession session, ServiceConfig config,
          std::optional<RecordEmbedder> embedder = std::nullopt,
          const std::vector<RawRecord>& training_records = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Records processed one by one at feed_interval_s, pausing while a query is pending.
  void enqueue(std::vector<FeedItem> items);

  /// Binds and serves in background threads; returns the bound port.
  int start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  /// Stops serving and writes the shutdown snapshot when a path is configured.
  void stop();

  nlohmann::json metrics() const;
  nlohmann::json model_summary() const;

 private:
  void install_routes();
  void tick_loop();
  void remember(std::size_t index);
  nlohmann::json handle_record(const nlohmann::json& body);
  nlohmann::json process_locked(const std::string& id, const LatentVector& x,
                                std::optional<std::string> truth, nlohmann::json record);
  nlohmann::json pending_view() const;
  nlohmann::json metrics_locked() const;

  mutable std::mutex mutex_;
  StreamSession session_;
  ServiceConfig config_;
  std::optional<RecordEmbedder> embedder_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  std::thread ticker_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  bool stopped_ = false;

  std::vector<nlohmann::json> records_;  // per stream index
  std::map<std::string, std::deque<nlohmann::json>> examples_;
  std::deque<FeedItem> feed_;
  std::chrono::steady_clock::time_point last_feed_{};
  std::chrono::steady_clock::time_point query_deadline_{};
  std::vector<std::size_t> class_count_history_;
};

}  // namespace dpstream

#endif  // DPSTREAM_SERVICE_HPP
