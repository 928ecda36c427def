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

// dpstream command-line entry point.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpstream/error.hpp"
#include "dpstream/persist.hpp"
#include "dpstream/pipeline.hpp"
#include "dpstream/service.hpp"

namespace {

using dpstream::PipelineConfig;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

// Flags shared by every subcommand. Unset flags leave the config file's value alone.
struct Flags {
  std::string config;
  std::optional<std::string> dataset, artifacts, name_ref, engine, mode, output, snapshot, resume;
  std::optional<int> t0;
  std::optional<std::size_t> h, particles, budget, runs, stop_after;
  std::optional<double> alpha, kappa, m_offset, enp_threshold, tau, separation;
  std::optional<std::uint64_t> seed;
  bool map = false;
  bool synthetic = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "JSON config file (overridden by $DPSTREAM_CONFIG)");
    app->add_option("--dataset", dataset, "JSONL records");
    app->add_option("--artifacts", artifacts, "prepared artifact directory");
    app->add_option("--name-ref", name_ref, "name reference to keep");
    app->add_option("--T0", t0, "most recent years held out as the stream");
    app->add_option("--latent-dim", h, "latent dimension h");
    app->add_option("--alpha", alpha, "DP concentration");
    app->add_option("--kappa", kappa, "NIW mean scaling");
    app->add_option("--m-offset", m_offset, "NIW degrees of freedom minus h");
    app->add_option("--engine", engine, "gibbs or pf");
    app->add_option("-M,--particles", particles, "particle count");
    app->add_option("--enp-threshold", enp_threshold, "resample when ENP <= this (default M/2)");
    app->add_option("--tau", tau, "interactiveness threshold in [0,1]");
    app->add_option("--mode", mode, "feedback mode: off, oracle, interactive");
    app->add_option("--budget", budget, "maximum number of queries");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--runs", runs, "seeded runs (seed, seed+1, ...)");
    app->add_option("--output", output, "output directory (default: artifacts)");
    app->add_option("--snapshot", snapshot, "snapshot path");
    app->add_option("--resume", resume, "continue from a snapshot");
    app->add_option("--separation", separation, "synthetic class separation in sigmas");
    app->add_flag("--map", map, "Gibbs: take the posterior argmax");
    app->add_flag("--synthetic", synthetic, "use the synthetic generator instead of artifacts");
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    std::string path = config;
    if (const char* env = std::getenv("DPSTREAM_CONFIG"); env && *env) path = env;
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw dpstream::ConfigError("cannot read config file " + path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw dpstream::ConfigError(path + ": " + e.what());
      }
      dpstream::apply_config_json(c, j);
    }
    if (dataset) c.dataset = *dataset;
    if (artifacts) c.artifacts = *artifacts;
    if (name_ref) c.name_ref = *name_ref;
    if (t0) c.test_years = *t0;
    if (h) c.h = c.synthetic_config.h = *h;
    if (alpha) c.prior.alpha = *alpha;
    if (kappa) c.prior.kappa = *kappa;
    if (m_offset) c.prior.m_offset = *m_offset;
    if (engine) c.engine = dpstream::engine_from_string(*engine);
    if (particles) c.particles = *particles;
    if (enp_threshold) c.enp_threshold = *enp_threshold;
    if (tau) c.active.tau = *tau;
    if (mode) c.active.mode = dpstream::active_mode_from_string(*mode);
    if (budget) c.active.budget = *budget;
    if (seed) c.seed = *seed;
    if (runs) c.runs = *runs;
    if (output) c.output = *output;
    if (snapshot) c.snapshot = *snapshot;
    if (resume) c.resume = *resume;
    if (stop_after) c.stop_after = *stop_after;
    if (separation) c.synthetic_config.separation = *separation;
    if (map) c.map_mode = true;
    if (synthetic) c.synthetic = true;
    c.validate();
    return c;
  }
};

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw dpstream::ConfigError("bad sweep value '" + item + "'");
    }
  }
  return out;
}

int run_prepare(const Flags& f) {
  const PipelineConfig c = f.resolve();
  const auto p = dpstream::cmd_prepare(c);
  std::cout << "train " << p.split.train.size() << " test " << p.split.test.size() << " boundary "
            << p.split.boundary_year << " features " << p.vocabulary.size() << " h " << c.h
            << " nnmf-iterations " << p.nnmf_iterations << '\n';
  if (p.split.warning) std::cerr << "warning: " << *p.split.warning << '\n';
  return 0;
}

int run_stream(const Flags& f) {
  const PipelineConfig c = f.resolve();
  const auto out = dpstream::cmd_stream(c);
  if (out.stopped_early) {
    std::cout << "stopped after " << out.processed << " records; snapshot written\n";
  } else if (out.report) {
    dpstream::print_report(std::cout, *out.report);
  } else {
    std::cout << out.processed << " records processed (no true labels, no report)\n";
  }
  return 0;
}

int run_sweep(const Flags& f, const std::string& param, const std::string& values) {
  const PipelineConfig c = f.resolve();
  const auto table = dpstream::cmd_sweep(c, param, parse_values(values));
  for (const auto& row : table.rows) {
    std::cout << param << " = " << row.value << '\n';
    dpstream::print_report(std::cout, row.report);
  }
  return 0;
}

int run_snapshot(const Flags& f, std::size_t at, const std::string& show, const std::string& replay_log) {
  PipelineConfig c = f.resolve();
  if (!show.empty()) {
    const auto s = dpstream::StreamSession::load(show);
    std::cout << "engine " << dpstream::to_string(s.options().engine) << " seed " << s.options().seed
              << " processed " << s.processed() << " classes " << s.class_count() << " enp "
              << s.current_enp() << '\n';
    return 0;
  }
  if (!replay_log.empty()) {
    std::ifstream in(replay_log);
    if (!in) throw dpstream::ConfigError("cannot read " + replay_log);
    const auto data = c.synthetic ? dpstream::generate_synthetic(c.synthetic_config, c.seed)
                                  : dpstream::load_artifacts(c.artifacts).latent;
    const auto s = dpstream::replay(in, data);
    const auto path = c.snapshot.empty() ? c.output_dir() / "replayed.json" : c.snapshot;
    s.save(path);
    std::cout << "replayed " << s.processed() << " records into " << path.string() << '\n';
    return 0;
  }
  if (at == 0) throw dpstream::ConfigError("snapshot needs --at N, --show PATH or --replay LOG");
  c.stop_after = at;
  const auto out = dpstream::cmd_stream(c);
  std::cout << "processed " << out.processed << " records"
            << (out.stopped_early ? "; snapshot written" : "; stream finished before --at") << '\n';
  return 0;
}

int run_serve(const Flags& f, dpstream::ServiceConfig sc, bool feed) {
  const PipelineConfig c = f.resolve();
  if (c.engine != dpstream::Engine::kParticle) throw dpstream::ConfigError("serve requires engine=pf");

  std::optional<dpstream::Artifacts> art;
  dpstream::LatentDataset data;
  if (c.synthetic) {
    data = dpstream::generate_synthetic(c.synthetic_config, c.seed);
  } else {
    art = dpstream::load_artifacts(c.artifacts);
    data = art->latent;
  }
  const auto out_dir = c.output_dir();
  std::filesystem::create_directories(out_dir);
  std::ofstream events(out_dir / "events.jsonl", c.resume.empty() ? std::ios::trunc : std::ios::app);
  std::optional<dpstream::EventLog> log;
  std::optional<dpstream::StreamSession> session;
  if (!c.resume.empty()) {
    session.emplace(dpstream::StreamSession::load(c.resume));
    log.emplace(&events, session->log_seq());
    session->attach_log(&*log);
  } else {
    log.emplace(&events);
    session.emplace(data, dpstream::session_options(c), &*log);
    session->log_header({{"dataset", data.name}, {"service", true}});
  }
  if (sc.snapshot_path.empty()) sc.snapshot_path = c.snapshot.empty() ? out_dir / "snapshot.json" : c.snapshot;

  std::optional<dpstream::RecordEmbedder> embedder;
  std::vector<dpstream::RawRecord> train_records;
  if (art) {
    embedder.emplace(art->vocabulary, art->basis);
    train_records = art->train_records;
  }
  const std::size_t start = session->processed();
  dpstream::Service service(std::move(*session), sc, std::move(embedder), train_records);
  if (feed) {
    std::vector<dpstream::FeedItem> items;
    for (std::size_t i = start; i < data.stream_x.size(); ++i) {
      dpstream::FeedItem it;
      it.id = data.stream_ids[i];
      it.x = data.stream_x[i];
      if (i < data.stream_labels.size()) it.truth = data.stream_labels[i];
      if (art && i < art->test_records.size()) {
        it.record = dpstream::persist::encode(art->test_records[i]);
        it.record.erase("true_label");
      } else {
        it.record = {{"id", it.id}};
      }
      items.push_back(std::move(it));
    }
    service.enqueue(std::move(items));
  }
  const int port = service.start();
  std::cout << "listening on http://" << sc.host << ':' << port << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  service.stop();
  std::cout << "snapshot written to " << sc.snapshot_path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming non-exhaustive classification with Dirichlet process mixtures"};
  app.require_subcommand(1);

  Flags flags;
  auto* prepare = app.add_subcommand("prepare", "split, featurize and embed a dataset");
  auto* stream = app.add_subcommand("stream", "run an engine over the prepared stream");
  auto* serve = app.add_subcommand("serve", "HTTP service with interactive label feedback");
  auto* sweep = app.add_subcommand("sweep", "repeat experiments over parameter values");
  auto* snapshot = app.add_subcommand("snapshot", "write, inspect or replay session snapshots");
  for (auto* sub : {prepare, stream, serve, sweep, snapshot}) flags.add_to(sub);

  stream->add_option("--stop-after", flags.stop_after, "stop and snapshot after N records");

  std::string param;
  std::string values;
  sweep->add_option("--param", param, "alpha, kappa, M, tau, h or T0")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  std::size_t at = 0;
  std::string show;
  std::string replay_log;
  snapshot->add_option("--at", at, "records to process before snapshotting");
  snapshot->add_option("--show", show, "print a summary of a snapshot");
  snapshot->add_option("--replay", replay_log, "rebuild a session from an event log");

  dpstream::ServiceConfig sc;
  bool feed = false;
  serve->add_option("--host", sc.host, "bind address");
  serve->add_option("--port", sc.port, "port (0: any free port)");
  serve->add_option("--query-timeout", sc.query_timeout_s, "seconds before a pending query falls back");
  serve->add_option("--static", sc.static_dir, "directory served at /");
  serve->add_option("--feed-interval", sc.feed_interval_s, "seconds between fed records");
  serve->add_flag("--feed", feed, "feed the prepared stream into the service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*prepare) return run_prepare(flags);
    if (*stream) return run_stream(flags);
    if (*sweep) return run_sweep(flags, param, values);
    if (*snapshot) return run_snapshot(flags, at, show, replay_log);
    if (*serve) return run_serve(flags, sc, feed);
  } catch (const dpstream::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const dpstream::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const dpstream::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
