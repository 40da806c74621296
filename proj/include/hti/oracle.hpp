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

#ifndef HTI_ORACLE_HPP_
#define HTI_ORACLE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hti/catalog.hpp"
#include "hti/protocol.hpp"

namespace hti {

enum class NoiseMode { kNone, kFlipOne, kPerturbUnsure };

std::string_view to_string(NoiseMode mode);
std::optional<NoiseMode> noise_mode_from_string(std::string_view text);

struct NoiseEvent {
  int turn_index = 0;
  Answer original = Answer::kYes;
  Answer emitted = Answer::kNo;

  bool operator==(const NoiseEvent&) const = default;
};

/// Which single answer of an episode is rewritten.
///
/// `affected_turn` counts answered (valid) questions, 1-based. The rewrite
/// lands on the first eligible answer at or after that ordinal: a Yes/No for
/// kFlipOne, an Unsure for kPerturbUnsure. When `affected_turn` is nullopt
/// the ordinal among eligible answers is drawn uniformly from [1, horizon]
/// using `seed`, before the episode starts.
struct NoisePlan {
  NoiseMode mode = NoiseMode::kNone;
  std::optional<int> affected_turn;
  std::uint64_t seed = 0;
  int horizon = 3;
};

/// Label-backed answering for one hidden target, with at most one rewrite.
class Oracle {
 public:
  /// Throws kUnknownItem, kInvalidConfig (affected_turn < 1, horizon < 1).
  Oracle(const Catalog& catalog, std::string_view target_id, NoisePlan plan);

  /// Present -> Yes, Absent -> No, Unknown -> Unsure, then the noise plan.
  /// Call only for questions already classified Valid. Throws kUnknownValue.
  Answer answer(std::string_view value_id, int turn_index);

  /// The noiseless answer; does not advance any state.
  Answer truthful_answer(std::string_view value_id) const;

  const std::vector<NoiseEvent>& applied_log() const { return applied_log_; }
  int valid_turn_counter() const { return valid_turn_counter_; }
  const NoisePlan& plan() const { return plan_; }
  bool noise_applied() const { return !applied_log_.empty(); }

 private:
  const Catalog* catalog_;
  std::size_t target_;
  NoisePlan plan_;
  int valid_turn_counter_ = 0;
  int eligible_seen_ = 0;
  // Eligible-answer ordinal chosen for seeded plans.
  int seeded_ordinal_ = 0;
  bool perturb_to_yes_ = false;
  std::vector<NoiseEvent> applied_log_;
};

}  // namespace hti

#endif  // HTI_ORACLE_HPP_
