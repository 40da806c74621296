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

#include "hti/oracle.hpp"

#include "hti/error.hpp"
#include "hti/rng.hpp"

namespace hti {

std::string_view to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::kNone: return "none";
    case NoiseMode::kFlipOne: return "flip_one";
    case NoiseMode::kPerturbUnsure: return "perturb_unsure";
  }
  return "none";
}

std::optional<NoiseMode> noise_mode_from_string(std::string_view text) {
  if (text == "none") return NoiseMode::kNone;
  if (text == "flip_one" || text == "flip") return NoiseMode::kFlipOne;
  if (text == "perturb_unsure" || text == "unsure") return NoiseMode::kPerturbUnsure;
  return std::nullopt;
}

Oracle::Oracle(const Catalog& catalog, std::string_view target_id, NoisePlan plan)
    : catalog_(&catalog), target_(catalog.item_index(target_id)), plan_(plan) {
  if (plan_.affected_turn && *plan_.affected_turn < 1) {
    throw Error(ErrorCode::kInvalidConfig, "affected turn must be >= 1");
  }
  if (plan_.horizon < 1) throw Error(ErrorCode::kInvalidConfig, "noise horizon must be >= 1");
  Rng rng(plan_.seed);
  seeded_ordinal_ = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(plan_.horizon)));
  perturb_to_yes_ = rng.coin();
}

Answer Oracle::truthful_answer(std::string_view value_id) const {
  switch (catalog_->label(target_, catalog_->value_index(value_id))) {
    case Label::kPresent: return Answer::kYes;
    case Label::kAbsent: return Answer::kNo;
    case Label::kUnknown: return Answer::kUnsure;
  }
  return Answer::kUnsure;
}

Answer Oracle::answer(std::string_view value_id, int turn_index) {
  const Answer base = truthful_answer(value_id);
  ++valid_turn_counter_;
  if (plan_.mode == NoiseMode::kNone || !applied_log_.empty()) return base;

  const bool eligible = plan_.mode == NoiseMode::kFlipOne
                            ? (base == Answer::kYes || base == Answer::kNo)
                            : base == Answer::kUnsure;
  if (!eligible) return base;
  ++eligible_seen_;

  const bool fire = plan_.affected_turn ? valid_turn_counter_ >= *plan_.affected_turn
                                        : eligible_seen_ == seeded_ordinal_;
  if (!fire) return base;

  Answer emitted;
  if (plan_.mode == NoiseMode::kFlipOne) {
    emitted = base == Answer::kYes ? Answer::kNo : Answer::kYes;
  } else {
    emitted = perturb_to_yes_ ? Answer::kYes : Answer::kNo;
  }
  applied_log_.push_back({turn_index, base, emitted});
  return emitted;
}

}  // namespace hti
