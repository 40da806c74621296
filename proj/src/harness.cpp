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

#include "hti/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "hti/error.hpp"
#include "hti/rng.hpp"

namespace hti {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t micros_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

std::string action_text(const Catalog& catalog, const AgentAction& action) {
  if (const auto* a = std::get_if<AskValue>(&action)) return question_for_value(catalog, a->value_id, 1).raw_text;
  if (const auto* t = std::get_if<AskText>(&action)) return t->text;
  if (const auto* g = std::get_if<Guess>(&action)) return format_guess(g->index);
  return "";
}

std::string action_kind(const AgentAction& action) {
  if (std::holds_alternative<AskValue>(action)) return "ask_value";
  if (std::holds_alternative<AskText>(action)) return "ask_text";
  if (std::holds_alternative<Guess>(action)) return "guess";
  return "ack";
}

/// A parsed terminal, or nullopt when the action is a question. Guesses whose
/// index cannot be read or lies outside the gallery come back as index 0.
std::optional<Guess> as_guess(const AgentAction& action, std::size_t gallery_size, std::size_t feasible) {
  std::optional<Guess> g;
  if (const auto* guess = std::get_if<Guess>(&action)) {
    g = *guess;
  } else if (const auto* text = std::get_if<AskText>(&action)) {
    try {
      const TerminalParse parsed = parse_terminal(text->text, feasible);
      if (const auto* out = std::get_if<GuessOutput>(&parsed)) g = Guess{out->index, false};
      if (const auto* out = std::get_if<PrematureGuess>(&parsed)) g = Guess{out->index, false};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedIndex) throw;
      g = Guess{0, false};
    }
  }
  if (g && (g->index < 1 || static_cast<std::size_t>(g->index) > gallery_size)) g->index = 0;
  return g;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

std::string safe_name(std::string_view id) {
  std::string out;
  for (const char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

// --- sessions --------------------------------------------------------------

std::optional<AgentAction> PolicySession::on_upload(const wire::UploadBatch& batch) {
  for (const wire::UploadItem& item : batch.items) gallery_.push_back(item.id);
  return SignalEndAck{};
}

AgentAction PolicySession::on_turn(int budget_remaining) {
  AgentObservation obs{catalog_, gallery_, history_, Phase::kPlay, budget_remaining};
  const auto turn = static_cast<std::uint64_t>(history_.size()) + 1;
  pending_ = policy_(obs, derive_seed(seed_, turn));
  return *pending_;
}

void PolicySession::on_verdict(const Verdict& verdict) {
  if (!pending_) throw Error(ErrorCode::kInvariantViolation, "verdict without a pending action");
  history_.push_back({*pending_, verdict});
  pending_.reset();
}

std::optional<AgentAction> ScriptedSession::on_upload(const wire::UploadBatch& batch) {
  if (batch.is_last || next_upload_ >= upload_.size()) return std::nullopt;
  return upload_[next_upload_++];
}

AgentAction ScriptedSession::on_turn(int) {
  if (next_turn_ >= turns_.size()) return SignalEndAck{};
  return turns_[next_turn_++];
}

std::optional<AgentAction> ExternalSession::on_upload(const wire::UploadBatch& batch) {
  channel_->send_line(wire::encode(batch));
  if (batch.is_last) return std::nullopt;
  return wire::decode_action(channel_->receive_line(timeout_));
}

AgentAction ExternalSession::on_turn(int budget_remaining) {
  channel_->send_line(wire::encode(wire::TurnRequest{budget_remaining}));
  return wire::decode_action(channel_->receive_line(timeout_));
}

void ExternalSession::on_verdict(const Verdict& verdict) {
  channel_->send_line(wire::encode(wire::VerdictMessage{verdict}));
}

void ExternalSession::on_end(Outcome outcome) {
  channel_->send_line(wire::encode(wire::EpisodeEnd{std::string(to_string(outcome))}));
}

void serve_policy(wire::Channel& channel, const Catalog& catalog, const Policy& policy, std::uint64_t seed) {
  PolicySession session(catalog, policy, seed);
  constexpr std::chrono::minutes kIdle{10};
  while (true) {
    const wire::EngineMessage message = wire::decode_engine_message(channel.receive_line(kIdle));
    if (const auto* batch = std::get_if<wire::UploadBatch>(&message)) {
      session.on_upload(*batch);
      if (!batch->is_last) channel.send_line(wire::encode_action(SignalEndAck{}));
    } else if (const auto* request = std::get_if<wire::TurnRequest>(&message)) {
      channel.send_line(wire::encode_action(session.on_turn(request->budget_remaining)));
    } else if (const auto* verdict = std::get_if<wire::VerdictMessage>(&message)) {
      session.on_verdict(verdict->verdict);
    } else {
      return;
    }
  }
}

// --- episodes --------------------------------------------------------------

std::vector<std::size_t> even_batches(std::size_t n, std::size_t batches) {
  if (batches == 0 || batches > n) throw Error(ErrorCode::kInvalidConfig, "batch count must lie in [1, items]");
  std::vector<std::size_t> sizes;
  for (std::size_t b = 0; b < batches; ++b) sizes.push_back(n / batches + (b < n % batches ? 1 : 0));
  return sizes;
}

Transcript run_episode(const Catalog& catalog, const Episode& episode, AgentSession& session,
                       const EpisodeOptions& options) {
  if (options.budget < 1) throw Error(ErrorCode::kInvalidConfig, "budget must be >= 1");
  const std::size_t n = episode.gallery.size();
  std::vector<std::size_t> plan = options.batch_plan.empty() ? std::vector<std::size_t>{n} : options.batch_plan;
  std::size_t total = 0;
  for (const std::size_t size : plan) {
    if (size == 0) throw Error(ErrorCode::kInvalidConfig, "empty upload batch");
    total += size;
  }
  if (total != n) throw Error(ErrorCode::kInvalidConfig, "batch plan does not partition the gallery");

  Transcript t;
  t.episode_id = episode.episode_id;
  t.tau = episode.config.tau;
  t.seed = episode.config.seed;
  t.gallery = episode.gallery;
  t.target_position = episode.target_position;
  t.pool_size = episode.pool_size;
  t.agent = options.agent_name;
  t.budget = options.budget;
  t.noise_mode = options.noise.mode;

  Oracle oracle(catalog, episode.target_id(), options.noise);
  FeasibleSet fs(catalog, episode.gallery);
  std::vector<PriorTurn> priors;
  bool contradiction_mode = false;

  const auto record_guess = [&](const Guess& g, const std::string& raw, bool after_budget, std::int64_t us) {
    GuessRecord record;
    record.raw = raw;
    record.index = g.index;
    record.feasible_size = fs.size();
    record.feasible_members = fs.members();
    record.premature = fs.size() > 1;
    record.forced = g.forced;
    record.after_budget = after_budget;
    record.elapsed_us = us;
    t.guess = std::move(record);
  };

  try {
    std::size_t offset = 0;
    for (std::size_t b = 0; b < plan.size(); ++b) {
      wire::UploadBatch batch{static_cast<int>(b), b + 1 == plan.size(), {}};
      for (std::size_t i = offset; i < offset + plan[b]; ++i) {
        const std::string& id = episode.gallery[i];
        batch.items.push_back({id, i + 1, options.media ? options.media(id) : std::nullopt});
      }
      offset += plan[b];
      t.upload_batches.push_back(plan[b]);
      const std::optional<AgentAction> reply = session.on_upload(batch);
      if (!batch.is_last && reply && !std::holds_alternative<SignalEndAck>(*reply)) {
        t.premature_outputs.push_back(
            {static_cast<int>(b), action_text(catalog, *reply), ViolationKind::kPrematureQuestion});
      }
    }

    for (int turn = 1; turn <= options.budget && !t.guess; ++turn) {
      const auto start = Clock::now();
      const AgentAction action = session.on_turn(options.budget - turn + 1);
      const std::int64_t elapsed = micros_since(start);
      const std::string raw = action_text(catalog, action);

      Question q;
      q.turn_index = turn;
      q.raw_text = raw;
      bool bad_guess = false;
      if (const auto g = as_guess(action, n, fs.size())) {
        if (g->index >= 1) {
          record_guess(*g, raw, false, elapsed);
          break;
        }
        // Unreadable or out-of-range guesses become an unmappable turn.
        bad_guess = true;
      } else if (const auto* ask = std::get_if<AskValue>(&action)) {
        q = question_for_value(catalog, ask->value_id, turn);
      } else if (const auto* text = std::get_if<AskText>(&action)) {
        q = question_from_text(catalog, text->text, turn);
      }

      std::optional<ViolationKind> violation =
          bad_guess ? ViolationKind::kUnmappableQuestion
                    : classify_question(catalog, q, priors, Phase::kPlay, contradiction_mode);
      if (!violation && !q.resolved_value) violation = ViolationKind::kUnmappableQuestion;
      const Verdict verdict = violation ? Verdict::skip(*violation)
                                        : Verdict::make(oracle.answer(*q.resolved_value, turn), std::nullopt);

      const std::size_t before = fs.size();
      IngestResult ingested = ingest_turn(std::move(fs), q, verdict, catalog);
      fs = std::move(ingested.feasible);
      if (verdict.is_skip() && fs.size() != before) {
        throw Error(ErrorCode::kInvariantViolation, "a Skip turn changed the feasible set");
      }
      if (fs.size() > before && !ingested.superseded) {
        throw Error(ErrorCode::kInvariantViolation, "the feasible set grew without supersession");
      }

      TurnRecord record;
      record.turn_index = turn;
      record.action_kind = action_kind(action);
      record.raw = raw;
      record.value_id = q.resolved_value;
      record.referenced.assign(q.referenced_values.begin(), q.referenced_values.end());
      record.violation = violation;
      record.verdict = verdict.answer();
      record.feasible_size_after = fs.size();
      record.contradiction_mode = contradiction_mode;
      if (ingested.flag.active) record.contradiction_raised = ingested.flag.cause;
      record.superseded = ingested.superseded;
      record.elapsed_us = elapsed;
      t.turns.push_back(std::move(record));

      contradiction_mode = ingested.flag.active;
      priors.push_back({std::move(q), verdict});
      session.on_verdict(verdict);
    }

    if (!t.guess) {
      const auto start = Clock::now();
      const AgentAction action = session.on_turn(0);
      const std::int64_t elapsed = micros_since(start);
      if (const auto g = as_guess(action, n, fs.size()); g && g->index >= 1) {
        record_guess(*g, action_text(catalog, action), true, elapsed);
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAgentProtocolError && e.code() != ErrorCode::kTimeout) throw;
    t.abort_kind = e.code() == ErrorCode::kTimeout ? "timeout" : "agent_protocol_error";
    t.abort_message = e.what();
  }
  t.noise_log = oracle.applied_log();

  try {
    session.on_end(score_episode(t).outcome);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAgentProtocolError && e.code() != ErrorCode::kTimeout) throw;
  }
  return t;
}

// --- suites ----------------------------------------------------------------

std::uint64_t agent_seed_for(std::uint64_t suite_seed, std::string_view episode_id) {
  return derive_seed(suite_seed, fnv1a64(episode_id) * 2);
}

std::uint64_t noise_seed_for(std::uint64_t suite_seed, std::string_view episode_id) {
  return derive_seed(suite_seed, fnv1a64(episode_id) * 2 + 1);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 failed");
  }
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

SuiteResult run_suite(const Catalog& catalog, const std::vector<Episode>& episodes, const SuiteConfig& config) {
  if (config.budget < 1) throw Error(ErrorCode::kInvalidConfig, "budget must be >= 1");
  std::optional<Policy> policy;
  if (!config.session_factory) {
    policy = policy_by_name(config.agent);
    if (!policy) throw Error(ErrorCode::kInvalidConfig, "unknown agent '" + config.agent + "'");
  }
  if (config.out_dir) std::filesystem::create_directories(*config.out_dir);

  SuiteResult result;
  result.transcripts.resize(episodes.size());
  result.manifest.resize(episodes.size());
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t i = next++; i < episodes.size(); i = next++) {
      const Episode& episode = episodes[i];
      ManifestEntry& entry = result.manifest[i];
      entry.episode_id = episode.episode_id;
      try {
        const std::uint64_t agent_seed = agent_seed_for(config.seed, episode.episode_id);
        std::unique_ptr<AgentSession> session =
            config.session_factory ? config.session_factory(episode, agent_seed)
                                   : std::make_unique<PolicySession>(catalog, *policy, agent_seed);
        EpisodeOptions options;
        options.agent_name = config.agent;
        options.budget = config.budget;
        options.noise = {config.noise, config.noise_turn, noise_seed_for(config.seed, episode.episode_id), 3};
        options.batch_plan = even_batches(episode.gallery.size(), std::min(config.batches, episode.gallery.size()));
        Transcript transcript = run_episode(catalog, episode, *session, options);
        entry.outcome = std::string(to_string(score_episode(transcript).outcome));
        if (config.out_dir) {
          char prefix[16];
          std::snprintf(prefix, sizeof prefix, "%06zu_", i);
          entry.file = prefix + safe_name(episode.episode_id) + ".jsonl";
          const std::string text = serialize_transcript(transcript);
          entry.sha256 = sha256_hex(text);
          write_file(*config.out_dir / entry.file, text);
        }
        result.transcripts[i] = std::move(transcript);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(episodes.size())));
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j) workers.emplace_back(work);
    for (std::thread& w : workers) w.join();
  }

  for (const auto& transcript : result.transcripts) {
    if (transcript) result.scores.push_back(score_episode(*transcript));
  }
  try {
    result.report = aggregate(result.scores, config.aggregate);
  } catch (const Error& e) {
    result.report_error = e.what();
  }

  if (config.out_dir) {
    nlohmann::json files = nlohmann::json::array();
    for (const ManifestEntry& m : result.manifest) {
      nlohmann::json j = {{"episode_id", m.episode_id}};
      if (m.error) {
        j["error"] = *m.error;
      } else {
        j["file"] = m.file;
        j["sha256"] = m.sha256;
        j["outcome"] = *m.outcome;
      }
      files.push_back(std::move(j));
    }
    const nlohmann::json manifest = {{"agent", config.agent},
                                     {"budget", config.budget},
                                     {"noise", to_string(config.noise)},
                                     {"seed", config.seed},
                                     {"episodes", files}};
    write_file(*config.out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return result;
}

// --- RL export -------------------------------------------------------------

std::vector<RLStep> export_rl(std::span<const Transcript> transcripts, const RewardConfig& rewards) {
  std::vector<RLStep> steps;
  for (const Transcript& t : transcripts) {
    const double gallery_size = static_cast<double>(t.gallery.size());
    const bool verified = score_episode(t).outcome == Outcome::kVerifiedCorrect;
    std::vector<Constraint> constraints;
    std::size_t size = t.gallery.size();
    const std::size_t first = steps.size();

    for (const TurnRecord& turn : t.turns) {
      RLStep step;
      step.episode_id = t.episode_id;
      step.step = turn.turn_index;
      step.gallery = t.gallery;
      step.constraints = constraints;
      step.feasible_size = size;
      step.budget_remaining = t.budget - turn.turn_index + 1;
      step.action = turn.action_kind + ":" + (turn.value_id ? *turn.value_id : turn.raw);
      step.observation = std::string(to_string(turn.verdict));
      if (turn.verdict == Answer::kSkip) step.skip_penalty = rewards.skip_penalty;
      step.progress = rewards.alpha * (static_cast<double>(size) - static_cast<double>(turn.feasible_size_after)) /
                      gallery_size;
      steps.push_back(std::move(step));

      if (!turn.violation && turn.value_id && (turn.verdict == Answer::kYes || turn.verdict == Answer::kNo)) {
        const Constraint c{*turn.value_id, turn.verdict == Answer::kYes ? Polarity::kMustHave : Polarity::kMustLack,
                           turn.turn_index};
        const auto same = [&](const Constraint& old) { return old.value_id == c.value_id; };
        const bool conflict = std::any_of(constraints.begin(), constraints.end(),
                                          [&](const Constraint& old) { return same(old) && old.polarity != c.polarity; });
        const bool duplicate = std::any_of(constraints.begin(), constraints.end(), same);
        if (conflict) std::erase_if(constraints, same);
        if (conflict || !duplicate) constraints.push_back(c);
      }
      size = turn.feasible_size_after;
    }
    if (t.guess) {
      RLStep step;
      step.episode_id = t.episode_id;
      step.step = static_cast<int>(t.turns.size()) + 1;
      step.gallery = t.gallery;
      step.constraints = constraints;
      step.feasible_size = size;
      step.budget_remaining = t.budget - static_cast<int>(t.turns.size());
      step.action = "guess:" + std::to_string(t.guess->index);
      step.observation = std::string(to_string(score_episode(t).outcome));
      steps.push_back(std::move(step));
    }
    if (verified && steps.size() > first) steps.back().terminal = rewards.terminal;
  }
  return steps;
}

std::string serialize_rl(std::span<const RLStep> steps) {
  std::string out;
  for (const RLStep& s : steps) {
    nlohmann::json constraints = nlohmann::json::array();
    for (const Constraint& c : s.constraints) {
      constraints.push_back({{"value_id", c.value_id}, {"polarity", to_string(c.polarity)}, {"source_turn", c.source_turn}});
    }
    const nlohmann::json j = {
        {"episode_id", s.episode_id},
        {"step", s.step},
        {"state", {{"gallery", s.gallery},
                   {"constraints", constraints},
                   {"feasible_size", s.feasible_size},
                   {"budget_remaining", s.budget_remaining}}},
        {"action", s.action},
        {"observation", s.observation},
        {"reward", {{"skip_penalty", s.skip_penalty}, {"progress", s.progress}, {"terminal", s.terminal}}}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace hti
