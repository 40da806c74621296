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

// Episode scoring and aggregate reporting. Everything here is a pure function
// of transcripts; no live engine state is consulted.

#ifndef HTI_METRICS_HPP_
#define HTI_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hti/transcript.hpp"

namespace hti {

enum class Outcome { kVerifiedCorrect, kRandomGuessCorrect, kIncorrect, kNoGuess };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> outcome_from_string(std::string_view text);

struct EpisodeScore {
  std::string episode_id;
  double tau = 0.0;
  Outcome outcome = Outcome::kNoGuess;
  /// Model turns after "End of uploading", Skips included, the guess excluded.
  int turns_total = 0;
  int skip_count = 0;
  double skip_rate = 0.0;
  int premature_output_count = 0;
  /// Upload-phase reply slots: one after every batch except the last.
  int upload_opportunities = 0;
  bool noise_requested = false;
  bool noise_applied = false;
  bool contradiction_raised = false;
  bool aborted = false;

  bool correct() const {
    return outcome == Outcome::kVerifiedCorrect || outcome == Outcome::kRandomGuessCorrect;
  }
};

/// Throws kInconsistentTranscript when turn indices are not strictly
/// increasing, feasible sizes grow outside a supersession turn, a Skip lacks
/// its violation, or the guess record disagrees with itself.
EpisodeScore score_episode(const Transcript& transcript);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of the mean of 0/1 outcomes. With R resamples and
/// a = 1 - level the bounds are the sorted resample means at indices
/// floor(a/2 * R) and ceil((1 - a/2) * R) - 1. Throws kEmptyInput, and
/// kInvalidConfig for level outside (0, 1) or resamples < 1.
Interval bootstrap_interval(std::span<const std::uint8_t> successes, double level = 0.95,
                            int resamples = 1000, std::uint64_t seed = 0);

struct Rate {
  double value = 0.0;
  Interval ci;
};

struct GroupReport {
  std::size_t episodes = 0;
  std::size_t verified_count = 0;
  std::size_t random_guess_count = 0;
  std::size_t overall_correct_count = 0;
  std::size_t incorrect_count = 0;
  std::size_t no_guess_count = 0;
  std::size_t aborted_count = 0;

  Rate verified_accuracy;
  Rate overall_accuracy;
  Rate random_guess_accuracy;

  /// Keys: verified_correct, random_guess_correct, incorrect, no_guess, all.
  /// Categories without episodes are absent.
  std::map<std::string, double> mean_turns;
  double mean_skip_rate = 0.0;
  /// Headline: fraction of episodes with at least one premature output.
  Rate premature_output_rate;
  /// Secondary: premature outputs per upload reply slot (0 without slots).
  double premature_output_per_opportunity = 0.0;

  /// Over episodes whose noise was actually applied; nullopt when none was.
  std::size_t noise_applied_count = 0;
  std::size_t noise_requested_not_applied = 0;
  std::optional<Rate> noisy_verified_accuracy;
  std::optional<Rate> noisy_overall_accuracy;
  double contradiction_rate = 0.0;
};

struct AggregateOptions {
  double level = 0.95;
  int resamples = 1000;
  std::uint64_t seed = 0;
};

struct AggregateReport {
  std::map<double, GroupReport> by_tau;
  GroupReport overall;
};

/// Throws kEmptyGroup when `scores` is empty.
AggregateReport aggregate(std::span<const EpisodeScore> scores, const AggregateOptions& options = {});

/// Structured document (JSON, trailing newline).
std::string report_to_json(const AggregateReport& report);
/// One row per group-metric: group,metric,value,ci_lo,ci_hi.
std::string report_to_csv(const AggregateReport& report);

}  // namespace hti

#endif  // HTI_METRICS_HPP_
