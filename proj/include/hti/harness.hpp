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

// Episode driver, suite runner and RL export.
//
// run_episode plays one episode: upload batches (replies to non-final batches
// are premature outputs unless they are plain acknowledgements), then up to
// `budget` question turns, each classified, answered or Skipped, and ingested
// by the verification module, then at most one guess. If the budget runs out
// the agent gets one last guess-only request. Wire failures never escape: they
// become aborted transcripts that still score (as NoGuess).

#ifndef HTI_HARNESS_HPP_
#define HTI_HARNESS_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hti/agents.hpp"
#include "hti/catalog.hpp"
#include "hti/metrics.hpp"
#include "hti/oracle.hpp"
#include "hti/similarity.hpp"
#include "hti/transcript.hpp"
#include "hti/wire.hpp"

namespace hti {

class AgentSession {
 public:
  virtual ~AgentSession() = default;
  /// Called once per batch. The reply matters only for non-final batches;
  /// nullopt counts as an acknowledgement.
  virtual std::optional<AgentAction> on_upload(const wire::UploadBatch& batch) = 0;
  virtual AgentAction on_turn(int budget_remaining) = 0;
  /// The verdict for the question returned by the latest on_turn.
  virtual void on_verdict(const Verdict& verdict) = 0;
  virtual void on_end(Outcome /*outcome*/) {}
};

/// In-process baseline: rebuilds its observation from what it was sent.
class PolicySession : public AgentSession {
 public:
  PolicySession(const Catalog& catalog, Policy policy, std::uint64_t seed)
      : catalog_(&catalog), policy_(std::move(policy)), seed_(seed) {}

  std::optional<AgentAction> on_upload(const wire::UploadBatch& batch) override;
  AgentAction on_turn(int budget_remaining) override;
  void on_verdict(const Verdict& verdict) override;

 private:
  const Catalog* catalog_;
  Policy policy_;
  std::uint64_t seed_;
  std::vector<std::string> gallery_;
  std::vector<AgentTurn> history_;
  std::optional<AgentAction> pending_;
};

/// Replays fixed replies: one per non-final batch, then one per turn. Once a
/// script runs out the session acknowledges.
class ScriptedSession : public AgentSession {
 public:
  ScriptedSession(std::vector<AgentAction> upload_replies, std::vector<AgentAction> turns)
      : upload_(std::move(upload_replies)), turns_(std::move(turns)) {}

  std::optional<AgentAction> on_upload(const wire::UploadBatch& batch) override;
  AgentAction on_turn(int budget_remaining) override;
  void on_verdict(const Verdict& verdict) override { verdicts_.push_back(verdict); }

  const std::vector<Verdict>& verdicts() const { return verdicts_; }

 private:
  std::vector<AgentAction> upload_;
  std::vector<AgentAction> turns_;
  std::size_t next_upload_ = 0;
  std::size_t next_turn_ = 0;
  std::vector<Verdict> verdicts_;
};

/// Speaks the wire protocol over a channel it does not own.
class ExternalSession : public AgentSession {
 public:
  ExternalSession(wire::Channel& channel, std::chrono::milliseconds turn_timeout)
      : channel_(&channel), timeout_(turn_timeout) {}

  std::optional<AgentAction> on_upload(const wire::UploadBatch& batch) override;
  AgentAction on_turn(int budget_remaining) override;
  void on_verdict(const Verdict& verdict) override;
  void on_end(Outcome outcome) override;

 private:
  wire::Channel* channel_;
  std::chrono::milliseconds timeout_;
};

/// Serves a policy on the agent side of a channel until episode_end. Used by
/// the CLI's agent server mode and by tests.
void serve_policy(wire::Channel& channel, const Catalog& catalog, const Policy& policy, std::uint64_t seed);

inline constexpr std::chrono::seconds kDefaultTurnTimeout{120};

struct EpisodeOptions {
  std::string agent_name = "greedy";
  /// Question turns, Skips included. Must be >= 1.
  int budget = 20;
  NoisePlan noise;
  /// Batch sizes in upload order; empty means one batch.
  std::vector<std::size_t> batch_plan;
  /// Optional opaque media reference per item id.
  std::function<std::optional<std::string>(const std::string&)> media;
};

/// Splits `n` items into `batches` contiguous, near-equal batches.
std::vector<std::size_t> even_batches(std::size_t n, std::size_t batches);

/// Throws kInvalidConfig for a bad budget or batch plan and kInvariantViolation
/// if a Skip changes the feasible set or the set grows outside supersession.
Transcript run_episode(const Catalog& catalog, const Episode& episode, AgentSession& session,
                       const EpisodeOptions& options);

struct SuiteConfig {
  std::string agent = "greedy";
  int budget = 20;
  NoiseMode noise = NoiseMode::kNone;
  std::optional<int> noise_turn;
  std::uint64_t seed = 0;
  std::size_t batches = 1;
  /// Transcripts and manifest.json are written here when set.
  std::optional<std::filesystem::path> out_dir;
  unsigned jobs = 1;
  /// Overrides the named baseline (e.g. for external agents). Called from
  /// worker threads.
  std::function<std::unique_ptr<AgentSession>(const Episode&, std::uint64_t agent_seed)> session_factory;
  AggregateOptions aggregate;
};

struct ManifestEntry {
  std::string episode_id;
  std::string file;
  std::string sha256;
  std::optional<std::string> outcome;
  std::optional<std::string> error;
};

struct SuiteResult {
  /// Parallel to the input episodes; nullopt where the episode failed.
  std::vector<std::optional<Transcript>> transcripts;
  std::vector<EpisodeScore> scores;
  std::vector<ManifestEntry> manifest;
  std::optional<AggregateReport> report;
  /// Set when aggregation failed (e.g. EmptyGroup for an empty suite).
  std::optional<std::string> report_error;
};

/// Seeds for episode `episode_id` under a suite seed.
std::uint64_t agent_seed_for(std::uint64_t suite_seed, std::string_view episode_id);
std::uint64_t noise_seed_for(std::uint64_t suite_seed, std::string_view episode_id);

SuiteResult run_suite(const Catalog& catalog, const std::vector<Episode>& episodes, const SuiteConfig& config);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

struct RewardConfig {
  double alpha = 1.0;
  double skip_penalty = -0.2;
  double terminal = 1.0;
};

struct RLStep {
  std::string episode_id;
  int step = 0;
  std::vector<std::string> gallery;
  std::vector<Constraint> constraints;
  std::size_t feasible_size = 0;
  int budget_remaining = 0;
  /// "ask_value:<id>", "ask_text:<raw>", "ack" or "guess:<index>".
  std::string action;
  /// The verdict name, or the outcome for the guess step.
  std::string observation;
  double skip_penalty = 0.0;
  double progress = 0.0;
  double terminal = 0.0;
};

/// One step per model turn (question turns, then the guess if any). The
/// constraints and feasible size describe the state before the step.
std::vector<RLStep> export_rl(std::span<const Transcript> transcripts, const RewardConfig& rewards = {});
std::string serialize_rl(std::span<const RLStep> steps);

}  // namespace hti

#endif  // HTI_HARNESS_HPP_
