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

// Shared test fixtures: the dress catalog and structured replays of the four
// published failure-case dialogues.

#ifndef HTI_TESTS_FIXTURES_HPP_
#define HTI_TESTS_FIXTURES_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hti/agents.hpp"
#include "hti/catalog.hpp"
#include "hti/metrics.hpp"
#include "hti/protocol.hpp"
#include "hti/similarity.hpp"

namespace hti::testing {

const Catalog& dress_catalog();

/// One type per value (plus an anchor value Present everywhere), with the
/// given labels; values an item does not mention are Unknown for it.
using LabelRows = std::vector<std::pair<std::string, std::map<std::string, Label>>>;
Catalog labeled_catalog(const LabelRows& rows);

Episode make_episode(std::string id, std::vector<std::string> gallery, std::size_t target_position, double tau);

struct ExpectedTurn {
  std::string text;
  Answer verdict;
  /// Set exactly when verdict is Skip.
  std::optional<ViolationKind> violation;
};

struct DialogueFixture {
  std::string name;
  Episode episode;
  std::vector<std::size_t> batch_plan;
  std::vector<AgentAction> upload_replies;
  std::vector<ExpectedTurn> turns;
  /// Guess text after the last turn, if the dialogue ends in one.
  std::optional<std::string> guess;
  int budget = 20;
  Outcome outcome = Outcome::kIncorrect;
  std::size_t premature_outputs = 0;

  /// The scripted agent's play-phase actions (turn texts, then the guess).
  std::vector<AgentAction> script() const;
};

DialogueFixture forbidden_skips();
DialogueFixture premature_upload();
DialogueFixture budget_exhausted();
DialogueFixture compound_reenumeration();

}  // namespace hti::testing

#endif  // HTI_TESTS_FIXTURES_HPP_
