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

// Baseline question-selection policies.
//
// Every policy is a pure function of (observation, seed). Agents never see the
// target or the noise plan; each call rebuilds a private mirror of the
// feasible set by replaying the dialogue history through the same ingestion
// rules the engine uses, so the mirror and its contradiction flag always
// agree with what the engine derived from the same verdicts.

#ifndef HTI_AGENTS_HPP_
#define HTI_AGENTS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hti/catalog.hpp"
#include "hti/protocol.hpp"
#include "hti/verification.hpp"

namespace hti {

struct AskValue {
  std::string value_id;
  bool operator==(const AskValue&) const = default;
};
struct AskText {
  std::string text;
  bool operator==(const AskText&) const = default;
};
struct Guess {
  int index = 1;
  /// Budget or question exhaustion made the agent guess blind.
  bool forced = false;
  bool operator==(const Guess&) const = default;
};
struct SignalEndAck {
  bool operator==(const SignalEndAck&) const = default;
};

using AgentAction = std::variant<AskValue, AskText, Guess, SignalEndAck>;

std::string describe(const AgentAction& action);

struct AgentTurn {
  AgentAction action;
  Verdict verdict;
};

struct AgentObservation {
  const Catalog* catalog = nullptr;
  std::span<const std::string> gallery;
  /// Question turns of the play phase, oldest first; turn i is index i + 1.
  std::span<const AgentTurn> history;
  Phase phase = Phase::kPlay;
  int budget_remaining = 0;
};

/// The agent-side replay of the history.
struct Mirror {
  FeasibleSet feasible;
  std::vector<PriorTurn> priors;
  /// The flag after the last turn, i.e. contradiction mode for the next one.
  bool contradiction_mode = false;
  std::optional<ContradictionCause> last_cause;
};

Mirror replay_mirror(const AgentObservation& obs);

/// Value ids whose question would be classified Valid on the next turn,
/// ascending.
std::vector<std::string> valid_values(const AgentObservation& obs, const Mirror& mirror);

AgentAction random_valid_agent(const AgentObservation& obs, std::uint64_t seed);
AgentAction greedy_split_agent(const AgentObservation& obs, std::uint64_t seed);
AgentAction verifier_agent(const AgentObservation& obs, std::uint64_t seed);

/// How many confirmation questions the verifier spends once its mirror holds
/// a single candidate.
inline constexpr int kVerifierConfirmations = 2;

using Policy = std::function<AgentAction(const AgentObservation&, std::uint64_t)>;

/// "random", "greedy" or "verifier"; nullopt otherwise.
std::optional<Policy> policy_by_name(std::string_view name);

}  // namespace hti

#endif  // HTI_AGENTS_HPP_
