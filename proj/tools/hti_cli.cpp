// Copyright 2026 The hti Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hti: command-line front end.
//
//   hti synth     --out catalog.json [--items N] [--seed S]
//   hti gen       --catalog C --tau 0.3 --tau 0.8 [--gallery-size K] [--episodes M] --out episodes.jsonl
//   hti run       --catalog C --episodes E --agent greedy [--noise flip_one] --out DIR
//   hti score     DIR_OR_FILES... [--csv report.csv]
//   hti export-rl DIR_OR_FILES... [--out steps.jsonl]
//   hti replay    TRANSCRIPT
//   hti serve     --catalog C --agent greedy (--stdio | --listen PORT | --connect HOST:PORT)
//
// HTI_SEED, when set, overrides --seed.

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "hti/agents.hpp"
#include "hti/catalog.hpp"
#include "hti/error.hpp"
#include "hti/harness.hpp"
#include "hti/metrics.hpp"
#include "hti/rng.hpp"
#include "hti/similarity.hpp"
#include "hti/synthetic.hpp"
#include "hti/transcript.hpp"
#include "hti/wire.hpp"

namespace {

using namespace hti;

std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("HTI_SEED");
  if (env == nullptr || *env == '\0') return flag;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') throw Error(ErrorCode::kInvalidConfig, "HTI_SEED must be an unsigned integer");
  return value;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
}

std::vector<Transcript> load_transcripts(const std::vector<std::string>& inputs) {
  std::vector<std::filesystem::path> files;
  for (const std::string& input : inputs) {
    const std::filesystem::path p(input);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        if (entry.path().extension() == ".jsonl") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<Transcript> out;
  for (const auto& f : files) out.push_back(load_transcript_file(f));
  return out;
}

/// An external session that owns its channel.
class OwnedExternal : public AgentSession {
 public:
  OwnedExternal(std::unique_ptr<wire::Channel> channel, std::chrono::milliseconds timeout)
      : channel_(std::move(channel)), session_(*channel_, timeout) {}

  std::optional<AgentAction> on_upload(const wire::UploadBatch& b) override { return session_.on_upload(b); }
  AgentAction on_turn(int budget) override { return session_.on_turn(budget); }
  void on_verdict(const Verdict& v) override { session_.on_verdict(v); }
  void on_end(Outcome o) override { session_.on_end(o); }

 private:
  std::unique_ptr<wire::Channel> channel_;
  ExternalSession session_;
};

/// An agent that never answers; stands in for a connection that failed.
class DeadSession : public AgentSession {
 public:
  explicit DeadSession(std::string why) : why_(std::move(why)) {}
  std::optional<AgentAction> on_upload(const wire::UploadBatch&) override { fail(); }
  AgentAction on_turn(int) override { fail(); }
  void on_verdict(const Verdict&) override { fail(); }

 private:
  [[noreturn]] void fail() { throw Error(ErrorCode::kAgentProtocolError, why_); }
  std::string why_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden-target identification: episode generation, simulation and scoring"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string catalog_path, out_path;

  // synth
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic catalog");
  SyntheticCatalogSpec synth_spec;
  synth->add_option("--items", synth_spec.items, "Number of items");
  synth->add_option("--binary-types", synth_spec.binary_types, "Single-value attribute types");
  synth->add_option("--multi-types", synth_spec.multi_types, "Multi-value attribute types");
  synth->add_option("--forbidden-types", synth_spec.forbidden_types, "Forbidden attribute types");
  synth->add_option("--unknown-rate", synth_spec.unknown_rate, "Fraction of labels left Unknown");
  synth->add_option("--seed", seed, "Seed");
  synth->add_option("--out", out_path, "Output file (default stdout)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate episodes from a catalog");
  std::vector<double> taus;
  std::optional<std::size_t> gallery_size;
  std::size_t max_episodes = 0, retrieval_k = 5;
  std::string stats_path;
  gen->add_option("--catalog", catalog_path, "Catalog JSON")->required();
  gen->add_option("--tau", taus, "Similarity threshold (repeatable)")->required();
  gen->add_option("--gallery-size", gallery_size, "Gallery size including the target (default: whole pool)");
  gen->add_option("--episodes", max_episodes, "Max episodes per tau (0 = every feasible target)");
  gen->add_option("--k", retrieval_k, "Per-value retrieval depth");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", out_path, "Episodes JSONL (default stdout)");
  gen->add_option("--stats", stats_path, "Write the gallery-size histogram here");

  // run
  auto* run = app.add_subcommand("run", "Run episodes with an agent");
  std::string episodes_path, agent = "greedy", noise = "none", connect, agent_cmd;
  std::optional<int> noise_turn;
  std::optional<std::uint16_t> listen_port;
  int budget = 20;
  unsigned jobs = 1;
  std::size_t batches = 1;
  double timeout_s = 120.0;
  std::string csv_path;
  run->add_option("--catalog", catalog_path, "Catalog JSON")->required();
  run->add_option("--episodes", episodes_path, "Episodes JSONL")->required();
  run->add_option("--agent", agent, "random | greedy | verifier | external");
  run->add_option("--noise", noise, "none | flip_one | perturb_unsure");
  run->add_option("--noise-turn", noise_turn, "Answer ordinal the noise targets (default: seeded)");
  run->add_option("--budget", budget, "Question turns per episode");
  run->add_option("--seed", seed, "Seed");
  run->add_option("--out", out_path, "Transcript directory");
  run->add_option("--jobs", jobs, "Parallel episodes");
  run->add_option("--batches", batches, "Upload batches per episode");
  run->add_option("--connect", connect, "External agent server host:port");
  run->add_option("--listen", listen_port, "Accept one external agent connection per episode");
  run->add_option("--agent-cmd", agent_cmd, "Spawn an external agent per episode (stdio)");
  run->add_option("--timeout", timeout_s, "Per-turn timeout for external agents, seconds");
  run->add_option("--csv", csv_path, "Also write the flat report table here");

  // score
  auto* score = app.add_subcommand("score", "Score transcripts");
  std::vector<std::string> inputs;
  score->add_option("inputs", inputs, "Transcript files or directories")->required();
  score->add_option("--csv", csv_path, "Flat table output (default: printed after the JSON)");
  score->add_option("--seed", seed, "Bootstrap seed");

  // export-rl
  auto* export_cmd = app.add_subcommand("export-rl", "Export RL steps from transcripts");
  RewardConfig rewards;
  export_cmd->add_option("inputs", inputs, "Transcript files or directories")->required();
  export_cmd->add_option("--out", out_path, "Output JSONL (default stdout)");
  export_cmd->add_option("--alpha", rewards.alpha, "Progress weight");
  export_cmd->add_option("--skip-penalty", rewards.skip_penalty, "Reward on Skip turns");
  export_cmd->add_option("--terminal", rewards.terminal, "Reward for a verified correct guess");

  // replay
  auto* replay = app.add_subcommand("replay", "Render a transcript for reading");
  std::string transcript_path;
  replay->add_option("transcript", transcript_path, "Transcript JSONL")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Act as a wire-protocol agent backed by a baseline policy");
  bool stdio = false;
  serve->add_option("--catalog", catalog_path, "Catalog JSON")->required();
  serve->add_option("--agent", agent, "random | greedy | verifier");
  serve->add_option("--seed", seed, "Seed");
  serve->add_flag("--stdio", stdio, "Serve one episode over stdin/stdout");
  serve->add_option("--listen", listen_port, "Serve episodes on this port until killed");
  serve->add_option("--connect", connect, "Dial an engine listening at host:port");

  CLI11_PARSE(app, argc, argv);

  try {
    seed = effective_seed(seed);

    if (*synth) {
      synth_spec.seed = seed;
      write_output(out_path, serialize_catalog(make_synthetic_catalog(synth_spec)));
      return 0;
    }

    if (*gen) {
      const Catalog catalog = load_catalog_file(catalog_path);
      SuiteSpec spec;
      spec.taus = taus;
      spec.base.gallery_size = gallery_size;
      spec.base.per_value_retrieval_k = retrieval_k;
      spec.max_episodes_per_tau = max_episodes;
      spec.seed = seed;
      const std::vector<Episode> episodes = generate_suite(catalog, spec);
      write_output(out_path, serialize_episodes(episodes));
      if (!stats_path.empty()) write_output(stats_path, serialize_stats(gallery_size_stats(episodes)));
      std::cerr << episodes.size() << " episodes\n";
      return 0;
    }

    if (*run) {
      const Catalog catalog = load_catalog_file(catalog_path);
      const std::vector<Episode> episodes = load_episodes_file(episodes_path);
      SuiteConfig config;
      config.agent = agent;
      config.budget = budget;
      const auto mode = noise_mode_from_string(noise);
      if (!mode) throw Error(ErrorCode::kInvalidConfig, "unknown noise mode '" + noise + "'");
      config.noise = *mode;
      config.noise_turn = noise_turn;
      config.seed = seed;
      config.batches = batches;
      config.jobs = jobs;
      config.aggregate.seed = seed;
      if (!out_path.empty()) config.out_dir = out_path;

      const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
      std::unique_ptr<wire::TcpListener> listener;
      std::mutex accept_mutex;
      const int sources = !connect.empty() + listen_port.has_value() + !agent_cmd.empty();
      if (agent == "external") {
        if (sources != 1) throw Error(ErrorCode::kInvalidConfig, "external agent needs one of --connect, --listen, --agent-cmd");
        if (listen_port) {
          listener = std::make_unique<wire::TcpListener>(*listen_port);
          std::cerr << "listening on 127.0.0.1:" << listener->port() << "\n";
        }
        config.session_factory = [&](const Episode&, std::uint64_t) -> std::unique_ptr<AgentSession> {
          try {
            std::unique_ptr<wire::Channel> channel;
            if (!connect.empty()) {
              const auto [host, port] = wire::parse_endpoint(connect);
              channel = wire::connect_tcp(host, port);
            } else if (listener) {
              const std::lock_guard<std::mutex> lock(accept_mutex);
              channel = listener->accept(timeout);
            } else {
              channel = std::make_unique<wire::SubprocessChannel>(agent_cmd);
            }
            return std::make_unique<OwnedExternal>(std::move(channel), timeout);
          } catch (const Error& e) {
            return std::make_unique<DeadSession>(e.what());
          }
        };
      } else if (sources != 0) {
        throw Error(ErrorCode::kInvalidConfig, "--connect/--listen/--agent-cmd require --agent external");
      }

      const SuiteResult result = run_suite(catalog, episodes, config);
      for (const ManifestEntry& m : result.manifest) {
        if (m.error) std::cerr << m.episode_id << ": " << *m.error << "\n";
      }
      if (!result.report) {
        std::cerr << *result.report_error << "\n";
        return 1;
      }
      std::cout << report_to_json(*result.report);
      if (!csv_path.empty()) write_output(csv_path, report_to_csv(*result.report));
      return 0;
    }

    if (*score) {
      std::vector<EpisodeScore> scores;
      for (const Transcript& t : load_transcripts(inputs)) scores.push_back(score_episode(t));
      AggregateOptions options;
      options.seed = seed;
      const AggregateReport report = aggregate(scores, options);
      std::cout << report_to_json(report);
      if (csv_path.empty()) {
        std::cout << "\n" << report_to_csv(report);
      } else {
        write_output(csv_path, report_to_csv(report));
      }
      return 0;
    }

    if (*export_cmd) {
      const std::vector<Transcript> transcripts = load_transcripts(inputs);
      write_output(out_path, serialize_rl(export_rl(transcripts, rewards)));
      return 0;
    }

    if (*replay) {
      std::cout << render_transcript(load_transcript_file(transcript_path));
      return 0;
    }

    if (*serve) {
      const Catalog catalog = load_catalog_file(catalog_path);
      const auto policy = policy_by_name(agent);
      if (!policy) throw Error(ErrorCode::kInvalidConfig, "unknown agent '" + agent + "'");
      if (stdio) {
        wire::FdChannel channel(STDIN_FILENO, STDOUT_FILENO, false);
        serve_policy(channel, catalog, *policy, seed);
      } else if (!connect.empty()) {
        const auto [host, port] = wire::parse_endpoint(connect);
        serve_policy(*wire::connect_tcp(host, port), catalog, *policy, seed);
      } else if (listen_port) {
        wire::TcpListener listener(*listen_port);
        std::cerr << "serving on 127.0.0.1:" << listener.port() << "\n";
        for (std::uint64_t episode = 0;; ++episode) {
          auto channel = listener.accept(std::chrono::milliseconds(0));
          try {
            serve_policy(*channel, catalog, *policy, derive_seed(seed, episode));
          } catch (const Error& e) {
            std::cerr << e.what() << "\n";
          }
        }
      } else {
        throw Error(ErrorCode::kInvalidConfig, "serve needs --stdio, --listen or --connect");
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "hti: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
