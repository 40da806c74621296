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

#include "hti/agents.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "hti/error.hpp"
#include "hti/rng.hpp"

namespace hti {
namespace {

Question question_of(const Catalog& catalog, const AgentAction& action, int turn) {
  if (const auto* ask = std::get_if<AskValue>(&action)) return question_for_value(catalog, ask->value_id, turn);
  if (const auto* text = std::get_if<AskText>(&action)) return question_from_text(catalog, text->text, turn);
  Question q;
  q.turn_index = turn;
  return q;
}

Guess guess_position(std::size_t position, bool forced) { return Guess{static_cast<int>(position), forced}; }

/// Uniform pick from the mirror, or from the whole gallery once it is empty.
Guess forced_guess(const AgentObservation& obs, const Mirror& mirror, std::uint64_t seed) {
  Rng rng(seed);
  const auto positions = mirror.feasible.member_positions();
  if (positions.empty()) return guess_position(1 + rng.below(obs.gallery.size()), true);
  return guess_position(positions[rng.below(positions.size())], positions.size() != 1);
}

/// The guess every baseline makes before deciding on a question, if any.
std::optional<Guess> terminal_guess(const AgentObservation& obs, const Mirror& mirror, std::uint64_t seed) {
  if (obs.budget_remaining <= 0) {
    if (mirror.feasible.size() == 1) return guess_position(mirror.feasible.member_positions().front(), false);
    return forced_guess(obs, mirror, seed);
  }
  return std::nullopt;
}

std::optional<std::string> best_split(const AgentObservation& obs, const Mirror& mirror) {
  const Catalog& catalog = *obs.catalog;
  std::optional<std::string> best;
  long best_gap = 0;
  long best_unknown = 0;
  for (const std::string& id : valid_values(obs, mirror)) {
    const std::size_t v = catalog.value_index(id);
    long present = 0, absent = 0, unknown = 0;
    for (std::size_t p = 0; p < obs.gallery.size(); ++p) {
      if (!mirror.feasible.alive_at(p)) continue;
      switch (catalog.label(mirror.feasible.catalog_item(p), v)) {
        case Label::kPresent: ++present; break;
        case Label::kAbsent: ++absent; break;
        case Label::kUnknown: ++unknown; break;
      }
    }
    if (present == 0 || absent == 0) continue;
    const long gap = std::labs(present - absent);
    if (!best || gap < best_gap || (gap == best_gap && unknown < best_unknown)) {
      best = id;
      best_gap = gap;
      best_unknown = unknown;
    }
  }
  return best;
}

AgentAction greedy_step(const AgentObservation& obs, const Mirror& mirror, std::uint64_t seed) {
  if (auto g = terminal_guess(obs, mirror, seed)) return *g;
  if (mirror.feasible.size() == 1) return guess_position(mirror.feasible.member_positions().front(), false);
  if (auto v = best_split(obs, mirror)) return AskValue{*v};
  return forced_guess(obs, mirror, seed);
}

void require_play(const AgentObservation& obs) {
  if (obs.catalog == nullptr || obs.gallery.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "observation needs a catalog and a gallery");
  }
}

}  // namespace

std::string describe(const AgentAction& action) {
  if (const auto* a = std::get_if<AskValue>(&action)) return "ask_value:" + a->value_id;
  if (const auto* a = std::get_if<AskText>(&action)) return "ask_text:" + a->text;
  if (const auto* g = std::get_if<Guess>(&action)) {
    return "guess:" + std::to_string(g->index) + (g->forced ? " (forced)" : "");
  }
  return "ack";
}

Mirror replay_mirror(const AgentObservation& obs) {
  require_play(obs);
  Mirror mirror{FeasibleSet(*obs.catalog, obs.gallery), {}, false, std::nullopt};
  int turn = 0;
  for (const AgentTurn& entry : obs.history) {
    Question q = question_of(*obs.catalog, entry.action, ++turn);
    IngestResult r = ingest_turn(std::move(mirror.feasible), q, entry.verdict, *obs.catalog);
    mirror.feasible = std::move(r.feasible);
    mirror.contradiction_mode = r.flag.active;
    mirror.last_cause = r.flag.cause;
    mirror.priors.push_back({std::move(q), entry.verdict});
  }
  return mirror;
}

std::vector<std::string> valid_values(const AgentObservation& obs, const Mirror& mirror) {
  const Catalog& catalog = *obs.catalog;
  const int next_turn = static_cast<int>(obs.history.size()) + 1;
  std::vector<std::string> out;
  for (const AttributeValue& value : catalog.values()) {
    const Question q = question_for_value(catalog, value.id, next_turn);
    if (!classify_question(catalog, q, mirror.priors, Phase::kPlay, mirror.contradiction_mode)) {
      out.push_back(value.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

AgentAction random_valid_agent(const AgentObservation& obs, std::uint64_t seed) {
  const Mirror mirror = replay_mirror(obs);
  if (auto g = terminal_guess(obs, mirror, seed)) return *g;
  if (mirror.feasible.size() == 1) return guess_position(mirror.feasible.member_positions().front(), false);
  const auto candidates = valid_values(obs, mirror);
  if (candidates.empty()) return forced_guess(obs, mirror, seed);
  Rng rng(seed);
  return AskValue{candidates[rng.below(candidates.size())]};
}

AgentAction greedy_split_agent(const AgentObservation& obs, std::uint64_t seed) {
  return greedy_step(obs, replay_mirror(obs), seed);
}

AgentAction verifier_agent(const AgentObservation& obs, std::uint64_t seed) {
  const Mirror mirror = replay_mirror(obs);
  const Catalog& catalog = *obs.catalog;
  if (auto g = terminal_guess(obs, mirror, seed)) return *g;

  if (mirror.feasible.empty()) {
    // Some answer is wrong. Re-ask the oldest constraint that no second
    // answer has backed up yet; the engine is in contradiction mode, so an
    // exact re-ask is valid.
    std::map<std::string, int> support;
    for (const PriorTurn& p : mirror.priors) {
      const Answer a = p.verdict.answer();
      if (p.question.resolved_value && (a == Answer::kYes || a == Answer::kNo)) {
        ++support[*p.question.resolved_value];
      }
    }
    std::vector<Constraint> constraints = mirror.feasible.constraints();
    std::sort(constraints.begin(), constraints.end(),
              [](const Constraint& a, const Constraint& b) { return a.source_turn < b.source_turn; });
    const auto valid = valid_values(obs, mirror);
    for (const Constraint& c : constraints) {
      if (support[c.value_id] >= 2) continue;
      if (std::binary_search(valid.begin(), valid.end(), c.value_id)) return AskValue{c.value_id};
    }
    return forced_guess(obs, mirror, seed);
  }

  if (mirror.feasible.size() == 1) {
    // Count the confirmations already spent on this candidate: trailing turns
    // that were asked while the mirror held exactly one member.
    const auto& history = mirror.feasible.history();
    int spent = 0;
    for (std::size_t i = history.size(); i > 0; --i) {
      const std::size_t before = i >= 2 ? history[i - 2].size_after : mirror.feasible.initial_size();
      if (before != 1) break;
      ++spent;
    }
    const std::size_t position = mirror.feasible.member_positions().front();
    if (spent < kVerifierConfirmations) {
      const std::size_t candidate = mirror.feasible.catalog_item(position - 1);
      std::optional<std::string> best;
      std::size_t best_score = 0;
      for (const std::string& id : valid_values(obs, mirror)) {
        const std::size_t v = catalog.value_index(id);
        const Label mine = catalog.label(candidate, v);
        if (mine == Label::kUnknown) continue;
        std::size_t score = 0;
        for (std::size_t p = 0; p < obs.gallery.size(); ++p) {
          const Label other = catalog.label(mirror.feasible.catalog_item(p), v);
          score += other != Label::kUnknown && other != mine;
        }
        if (score > best_score) {
          best = id;
          best_score = score;
        }
      }
      if (best) return AskValue{*best};
    }
    return guess_position(position, false);
  }
  return greedy_step(obs, mirror, seed);
}

std::optional<Policy> policy_by_name(std::string_view name) {
  if (name == "random") return Policy(random_valid_agent);
  if (name == "greedy") return Policy(greedy_split_agent);
  if (name == "verifier") return Policy(verifier_agent);
  return std::nullopt;
}

}  // namespace hti
