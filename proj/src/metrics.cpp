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

#include "hti/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hti/error.hpp"
#include "hti/rng.hpp"

namespace hti {
namespace {

using nlohmann::json;

constexpr std::pair<Outcome, std::string_view> kOutcomeNames[] = {
    {Outcome::kVerifiedCorrect, "verified_correct"},
    {Outcome::kRandomGuessCorrect, "random_guess_correct"},
    {Outcome::kIncorrect, "incorrect"},
    {Outcome::kNoGuess, "no_guess"},
};

[[noreturn]] void inconsistent(const Transcript& t, const std::string& what) {
  throw Error(ErrorCode::kInconsistentTranscript, t.episode_id + ": " + what);
}

Rate rate_of(const std::vector<std::uint8_t>& flags, const AggregateOptions& options,
             std::string_view stream) {
  Rate r;
  std::size_t hits = 0;
  for (const auto f : flags) hits += f;
  r.value = static_cast<double>(hits) / static_cast<double>(flags.size());
  r.ci = bootstrap_interval(flags, options.level, options.resamples,
                            derive_seed(options.seed, fnv1a64(stream)));
  return r;
}

GroupReport summarize(std::span<const EpisodeScore* const> scores, const AggregateOptions& options,
                      const std::string& group) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyGroup, "group '" + group + "' has no episodes");
  GroupReport g;
  g.episodes = scores.size();
  std::vector<std::uint8_t> verified, overall, random, premature, noisy_verified, noisy_overall;
  std::map<std::string, std::pair<double, std::size_t>> turns;
  double skip_sum = 0.0;
  std::size_t premature_total = 0, opportunities = 0, contradictions = 0;
  for (const EpisodeScore* s : scores) {
    switch (s->outcome) {
      case Outcome::kVerifiedCorrect: ++g.verified_count; break;
      case Outcome::kRandomGuessCorrect: ++g.random_guess_count; break;
      case Outcome::kIncorrect: ++g.incorrect_count; break;
      case Outcome::kNoGuess: ++g.no_guess_count; break;
    }
    if (s->correct()) ++g.overall_correct_count;
    if (s->aborted) ++g.aborted_count;
    verified.push_back(s->outcome == Outcome::kVerifiedCorrect);
    random.push_back(s->outcome == Outcome::kRandomGuessCorrect);
    overall.push_back(s->correct());
    premature.push_back(s->premature_output_count > 0);
    for (const std::string& key : {std::string(to_string(s->outcome)), std::string("all")}) {
      auto& [sum, n] = turns[key];
      sum += s->turns_total;
      ++n;
    }
    skip_sum += s->skip_rate;
    premature_total += static_cast<std::size_t>(s->premature_output_count);
    opportunities += static_cast<std::size_t>(s->upload_opportunities);
    contradictions += s->contradiction_raised;
    if (s->noise_applied) {
      noisy_verified.push_back(s->outcome == Outcome::kVerifiedCorrect);
      noisy_overall.push_back(s->correct());
    } else if (s->noise_requested) {
      ++g.noise_requested_not_applied;
    }
  }
  const auto n = static_cast<double>(scores.size());
  g.verified_accuracy = rate_of(verified, options, group + "/verified");
  g.overall_accuracy = rate_of(overall, options, group + "/overall");
  g.random_guess_accuracy = rate_of(random, options, group + "/random");
  g.premature_output_rate = rate_of(premature, options, group + "/premature");
  for (const auto& [key, acc] : turns) g.mean_turns[key] = acc.first / static_cast<double>(acc.second);
  g.mean_skip_rate = skip_sum / n;
  g.premature_output_per_opportunity =
      opportunities == 0 ? 0.0 : static_cast<double>(premature_total) / static_cast<double>(opportunities);
  g.noise_applied_count = noisy_verified.size();
  if (!noisy_verified.empty()) {
    g.noisy_verified_accuracy = rate_of(noisy_verified, options, group + "/noisy_verified");
    g.noisy_overall_accuracy = rate_of(noisy_overall, options, group + "/noisy_overall");
  }
  g.contradiction_rate = static_cast<double>(contradictions) / n;
  return g;
}

std::string tau_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

json rate_json(const Rate& r) { return {{"value", r.value}, {"ci_lo", r.ci.lo}, {"ci_hi", r.ci.hi}}; }

json group_json(const GroupReport& g) {
  json j = {{"episodes", g.episodes},
            {"verified_count", g.verified_count},
            {"random_guess_count", g.random_guess_count},
            {"overall_correct_count", g.overall_correct_count},
            {"incorrect_count", g.incorrect_count},
            {"no_guess_count", g.no_guess_count},
            {"aborted_count", g.aborted_count},
            {"verified_accuracy", rate_json(g.verified_accuracy)},
            {"overall_accuracy", rate_json(g.overall_accuracy)},
            {"random_guess_accuracy", rate_json(g.random_guess_accuracy)},
            {"mean_turns", g.mean_turns},
            {"mean_skip_rate", g.mean_skip_rate},
            {"premature_output_rate", rate_json(g.premature_output_rate)},
            {"premature_output_per_opportunity", g.premature_output_per_opportunity},
            {"noise_applied_count", g.noise_applied_count},
            {"noise_requested_not_applied", g.noise_requested_not_applied},
            {"contradiction_rate", g.contradiction_rate}};
  j["noisy_verified_accuracy"] = g.noisy_verified_accuracy ? rate_json(*g.noisy_verified_accuracy) : json(nullptr);
  j["noisy_overall_accuracy"] = g.noisy_overall_accuracy ? rate_json(*g.noisy_overall_accuracy) : json(nullptr);
  return j;
}

void csv_rows(std::ostringstream& out, const std::string& group, const GroupReport& g) {
  char buf[256];
  const auto row = [&](const std::string& metric, double value, const Interval* ci) {
    if (ci) {
      std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f\n", group.c_str(), metric.c_str(), value, ci->lo, ci->hi);
    } else {
      std::snprintf(buf, sizeof buf, "%s,%s,%.6f,,\n", group.c_str(), metric.c_str(), value);
    }
    out << buf;
  };
  row("episodes", static_cast<double>(g.episodes), nullptr);
  row("verified_count", static_cast<double>(g.verified_count), nullptr);
  row("random_guess_count", static_cast<double>(g.random_guess_count), nullptr);
  row("overall_correct_count", static_cast<double>(g.overall_correct_count), nullptr);
  row("incorrect_count", static_cast<double>(g.incorrect_count), nullptr);
  row("no_guess_count", static_cast<double>(g.no_guess_count), nullptr);
  row("verified_accuracy", g.verified_accuracy.value, &g.verified_accuracy.ci);
  row("overall_accuracy", g.overall_accuracy.value, &g.overall_accuracy.ci);
  row("random_guess_accuracy", g.random_guess_accuracy.value, &g.random_guess_accuracy.ci);
  for (const auto& [key, value] : g.mean_turns) row("mean_turns_" + key, value, nullptr);
  row("mean_skip_rate", g.mean_skip_rate, nullptr);
  row("premature_output_rate", g.premature_output_rate.value, &g.premature_output_rate.ci);
  row("premature_output_per_opportunity", g.premature_output_per_opportunity, nullptr);
  row("noise_applied_count", static_cast<double>(g.noise_applied_count), nullptr);
  if (g.noisy_verified_accuracy) {
    row("noisy_verified_accuracy", g.noisy_verified_accuracy->value, &g.noisy_verified_accuracy->ci);
    row("noisy_overall_accuracy", g.noisy_overall_accuracy->value, &g.noisy_overall_accuracy->ci);
  }
  row("contradiction_rate", g.contradiction_rate, nullptr);
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  for (const auto& [o, name] : kOutcomeNames) {
    if (o == outcome) return name;
  }
  return "unknown";
}

std::optional<Outcome> outcome_from_string(std::string_view text) {
  for (const auto& [o, name] : kOutcomeNames) {
    if (name == text) return o;
  }
  return std::nullopt;
}

EpisodeScore score_episode(const Transcript& t) {
  if (t.gallery.empty() || t.target_position < 1 || t.target_position > t.gallery.size()) {
    inconsistent(t, "target position outside the gallery");
  }
  EpisodeScore s;
  s.episode_id = t.episode_id;
  s.tau = t.tau;
  std::size_t previous_size = t.gallery.size();
  int previous_index = 0;
  for (const TurnRecord& turn : t.turns) {
    if (turn.turn_index <= previous_index) inconsistent(t, "turn indices are not strictly increasing");
    previous_index = turn.turn_index;
    if ((turn.verdict == Answer::kSkip) != turn.violation.has_value()) {
      inconsistent(t, "turn " + std::to_string(turn.turn_index) + " pairs verdict and violation wrongly");
    }
    if (turn.feasible_size_after > previous_size && !turn.superseded) {
      inconsistent(t, "feasible set grew on turn " + std::to_string(turn.turn_index));
    }
    previous_size = turn.feasible_size_after;
    if (turn.verdict == Answer::kSkip) ++s.skip_count;
    if (turn.contradiction_raised) s.contradiction_raised = true;
  }
  s.turns_total = static_cast<int>(t.turns.size());
  s.skip_rate = s.turns_total > 0 ? static_cast<double>(s.skip_count) / s.turns_total : 0.0;
  s.premature_output_count = static_cast<int>(t.premature_outputs.size());
  s.upload_opportunities = t.upload_batches.empty() ? 0 : static_cast<int>(t.upload_batches.size()) - 1;
  s.noise_requested = t.noise_mode != NoiseMode::kNone;
  s.noise_applied = !t.noise_log.empty();
  s.aborted = t.abort_kind.has_value();

  if (!t.guess) {
    s.outcome = Outcome::kNoGuess;
    return s;
  }
  const GuessRecord& g = *t.guess;
  if (g.feasible_members.size() != g.feasible_size) inconsistent(t, "guess feasible size disagrees with members");
  if (!t.turns.empty() && g.feasible_size != t.turns.back().feasible_size_after) {
    inconsistent(t, "guess feasible size disagrees with the last turn");
  }
  if (g.index < 1 || static_cast<std::size_t>(g.index) > t.gallery.size()) {
    s.outcome = Outcome::kIncorrect;
    return s;
  }
  const bool correct = static_cast<std::size_t>(g.index) == t.target_position;
  if (!correct) {
    s.outcome = Outcome::kIncorrect;
  } else if (g.feasible_size == 1 && g.feasible_members.front() == t.target_id()) {
    s.outcome = Outcome::kVerifiedCorrect;
  } else {
    s.outcome = Outcome::kRandomGuessCorrect;
  }
  return s;
}

Interval bootstrap_interval(std::span<const std::uint8_t> successes, double level, int resamples,
                            std::uint64_t seed) {
  if (successes.empty()) throw Error(ErrorCode::kEmptyInput, "bootstrap over an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::kInvalidConfig, "level must lie in (0, 1)");
  if (resamples < 1) throw Error(ErrorCode::kInvalidConfig, "resamples must be >= 1");
  const std::size_t n = successes.size();
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (double& m : means) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += successes[rng.below(n)] != 0;
    m = static_cast<double>(hits) / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  const double r = static_cast<double>(resamples);
  // The epsilons keep exact products such as 0.025 * 1000 from drifting.
  auto lo = static_cast<std::size_t>(std::floor(alpha / 2 * r + 1e-9));
  auto hi = static_cast<std::size_t>(std::max(1.0, std::ceil((1 - alpha / 2) * r - 1e-9))) - 1;
  lo = std::min(lo, means.size() - 1);
  hi = std::min(hi, means.size() - 1);
  return {means[lo], means[hi]};
}

AggregateReport aggregate(std::span<const EpisodeScore> scores, const AggregateOptions& options) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyGroup, "no episodes to aggregate");
  AggregateReport report;
  std::map<double, std::vector<const EpisodeScore*>> groups;
  std::vector<const EpisodeScore*> all;
  for (const EpisodeScore& s : scores) {
    groups[s.tau].push_back(&s);
    all.push_back(&s);
  }
  for (const auto& [tau, members] : groups) {
    report.by_tau.emplace(tau, summarize(members, options, "tau=" + tau_label(tau)));
  }
  report.overall = summarize(all, options, "overall");
  return report;
}

std::string report_to_json(const AggregateReport& report) {
  json groups = json::array();
  for (const auto& [tau, g] : report.by_tau) {
    json j = group_json(g);
    j["tau"] = tau;
    groups.push_back(std::move(j));
  }
  const json doc = {{"by_tau", groups}, {"overall", group_json(report.overall)}};
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const AggregateReport& report) {
  std::ostringstream out;
  out << "group,metric,value,ci_lo,ci_hi\n";
  for (const auto& [tau, g] : report.by_tau) csv_rows(out, "tau=" + tau_label(tau), g);
  csv_rows(out, "overall", report.overall);
  return out.str();
}

}  // namespace hti
