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

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Every tolerance is pinned below.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <sys/socket.h>
#include <unistd.h>

#include "fixtures.hpp"
#include "hti/error.hpp"
#include "hti/harness.hpp"
#include "hti/rng.hpp"
#include "hti/synthetic.hpp"
#include "hti/verification.hpp"
#include "hti/wire.hpp"

namespace hti {
namespace {

// Pinned limits.
constexpr double kEq1SecondsLimit = 30.0;
constexpr double kEpisodeGenSecondsLimit = 60.0;
constexpr double kVerificationSecondsLimit = 300.0;
constexpr double kGreedySecondsLimit = 300.0;
constexpr std::size_t kMinPool = 6;
constexpr std::size_t kAccountingEpisodes = 1000;
constexpr std::size_t kNoiseEpisodes = 1000;
constexpr double kNoiseMarginPoints = 10.0;
constexpr int kGreedySeedsPerN = 500;
constexpr int kBootstrapRepetitions = 200;
constexpr int kBootstrapSamples = 500;
constexpr double kBootstrapMinCoverage = 0.93;
constexpr int kFuzzMessages = 10000;
constexpr double kFuzzHangSeconds = 5.0;
constexpr std::size_t kBaselineSkipEpisodes = 10000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<std::uint32_t> bits_of(std::uint32_t mask) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t b = 0; mask >> b; ++b) {
    if ((mask >> b) & 1U) out.push_back(b);
  }
  return out;
}

// --- similarity --------------------------------------------------------------

bool eq1_universe(int values, std::size_t& pairs, bool& witness) {
  const std::uint32_t sets = 1U << values;
  std::vector<std::vector<std::uint32_t>> expanded(sets);
  for (std::uint32_t m = 0; m < sets; ++m) expanded[m] = bits_of(m);
  for (std::uint32_t a = 1; a < sets; ++a) {
    if (similarity(expanded[a], expanded[a]) != 1.0) return false;
    for (std::uint32_t b = 0; b < sets; ++b) {
      const double s = similarity(expanded[a], expanded[b]);
      if (!(s >= 0.0 && s <= 1.0)) return false;
      const bool subset = (a & ~b) == 0;
      if ((s == 1.0) != subset) return false;
      const double expect = static_cast<double>(std::popcount(a & b)) / std::popcount(a);
      if (s != expect) return false;
      if (b != 0 && s != similarity(expanded[b], expanded[a])) witness = true;
      ++pairs;
    }
  }
  // Empty references are rejected rather than scored.
  try {
    similarity(expanded[0], expanded[1]);
    return false;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyReference) return false;
  }
  return true;
}

Result criterion_eq1() {
  const auto start = Clock::now();
  std::size_t pairs = 0;
  bool witness = false;
  const bool ok6 = eq1_universe(6, pairs, witness);
  const bool ok12 = eq1_universe(12, pairs, witness);
  const double secs = seconds_since(start);
  return {ok6 && ok12 && witness && secs < kEq1SecondsLimit,
          fmt("%zu ordered pairs (6- and 12-value universes), asymmetric witness %s, %.1fs (limit %.0fs)",
              pairs, witness ? "found" : "missing", secs, kEq1SecondsLimit)};
}

// --- episodes ----------------------------------------------------------------

std::uint64_t mask_of(const Catalog& c, std::size_t item) {
  std::uint64_t m = 0;
  for (const std::uint32_t v : c.present_values(item)) m |= std::uint64_t{1} << v;
  return m;
}

// Exhaustive oracle: union over Attr(target) of the top-k sharing items.
std::set<std::string> brute_pool(const Catalog& c, const std::vector<std::uint64_t>& masks, std::size_t target,
                                 double tau, std::size_t k) {
  const std::uint64_t t = masks[target];
  std::set<std::string> pool;
  for (std::size_t v = 0; v < c.value_count(); ++v) {
    if (!((t >> v) & 1U)) continue;
    std::vector<std::pair<double, std::string>> hits;
    for (std::size_t i = 0; i < c.item_count(); ++i) {
      if (i == target || !((masks[i] >> v) & 1U)) continue;
      const double s = static_cast<double>(std::popcount(t & masks[i])) / std::popcount(t);
      if (s >= tau) hits.emplace_back(-s, c.items()[i].id);
    }
    std::sort(hits.begin(), hits.end());
    for (std::size_t h = 0; h < std::min(k, hits.size()); ++h) pool.insert(hits[h].second);
  }
  return pool;
}

Result criterion_episode_generation() {
  const auto start = Clock::now();
  const Catalog c = make_synthetic_catalog({});
  std::vector<std::uint64_t> masks;
  for (std::size_t i = 0; i < c.item_count(); ++i) masks.push_back(mask_of(c, i));
  const std::vector<double> taus = {0.3, 0.5, 0.6, 0.8};
  std::size_t episodes = 0, infeasible = 0, failures = 0;
  for (std::size_t target = 0; target < c.item_count(); ++target) {
    const std::string& tid = c.items()[target].id;
    std::map<double, std::set<std::string>> pools;
    for (const double tau : taus) {
      const std::set<std::string> oracle = brute_pool(c, masks, target, tau, 5);
      pools[tau] = oracle;
      if (build_distractor_pool(c, tid, tau, 5) != oracle) ++failures;
      for (const std::optional<std::size_t> size : {std::optional<std::size_t>{}, std::optional<std::size_t>{6}}) {
        EpisodeConfig cfg;
        cfg.tau = tau;
        cfg.gallery_size = size;
        cfg.seed = derive_seed(target, std::bit_cast<std::uint64_t>(tau));
        const auto first = generate_episode(c, tid, cfg);
        const auto second = generate_episode(c, tid, cfg);
        if (const auto* ep = std::get_if<Episode>(&first)) {
          ++episodes;
          const auto* again = std::get_if<Episode>(&second);
          if (!again || !(*again == *ep)) ++failures;
          if (oracle.size() < kMinPool || ep->pool_size != oracle.size()) ++failures;
          if (ep->target_id() != tid) ++failures;
          for (const std::string& id : ep->gallery) {
            if (id == tid) continue;
            const std::size_t d = c.item_index(id);
            const double s = static_cast<double>(std::popcount(masks[target] & masks[d])) / std::popcount(masks[target]);
            if (s < tau || !oracle.contains(id)) ++failures;
          }
        } else {
          ++infeasible;
          if (oracle.size() >= kMinPool || std::get<Infeasible>(first).pool_size != oracle.size()) ++failures;
        }
      }
    }
    if (!std::includes(pools[0.3].begin(), pools[0.3].end(), pools[0.8].begin(), pools[0.8].end())) ++failures;
  }
  const double secs = seconds_since(start);
  return {failures == 0 && episodes > 0 && infeasible > 0 && secs < kEpisodeGenSecondsLimit,
          fmt("%zu episodes, %zu infeasible (pool < %zu), %zu failures, %.1fs (limit %.0fs)", episodes, infeasible,
              kMinPool, failures, secs, kEpisodeGenSecondsLimit)};
}

// --- fixtures ----------------------------------------------------------------

Result criterion_fixtures() {
  std::string detail;
  bool pass = true;
  for (const testing::DialogueFixture& f :
       {testing::forbidden_skips(), testing::premature_upload(), testing::budget_exhausted(), testing::compound_reenumeration()}) {
    ScriptedSession session(f.upload_replies, f.script());
    EpisodeOptions options;
    options.agent_name = "scripted";
    options.budget = f.budget;
    options.batch_plan = f.batch_plan;
    const Transcript t = run_episode(testing::dress_catalog(), f.episode, session, options);
    std::size_t mismatches = t.turns.size() == f.turns.size() ? 0 : 1;
    std::size_t skips = 0;
    for (std::size_t i = 0; i < std::min(t.turns.size(), f.turns.size()); ++i) {
      if (t.turns[i].verdict != f.turns[i].verdict || t.turns[i].violation != f.turns[i].violation) ++mismatches;
      if (t.turns[i].verdict == Answer::kSkip) ++skips;
    }
    const EpisodeScore s = score_episode(t);
    if (s.outcome != f.outcome || t.premature_outputs.size() != f.premature_outputs) ++mismatches;
    pass = pass && mismatches == 0;
    detail += fmt("%s %zu/%zu skips%s; ", f.name.c_str(), skips, t.turns.size(),
                  f.premature_outputs ? fmt(" %zu premature", t.premature_outputs.size()).c_str() : "");
  }
  detail += "zero tolerance";
  return {pass, detail};
}

// --- verification ------------------------------------------------------------

Catalog verification_catalog() {
  std::vector<AttributeType> types;
  std::vector<AttributeValue> values;
  for (const char* name : {"anchor", "va", "vb", "vc"}) {
    types.push_back({std::string("t_") + name, name, false});
    values.push_back({name, std::string("t_") + name, name, {std::string("does it have ") + name}});
  }
  std::vector<Item> items;
  for (int row = 0; row < 27; ++row) {
    for (int copy = 0; copy < 4; ++copy) {
      Item item;
      item.id = fmt("r%02d_%d", row, copy);
      item.labels["anchor"] = Label::kPresent;
      int digits = row;
      for (const char* v : {"va", "vb", "vc"}) {
        item.labels[v] = static_cast<Label>(digits % 3);
        digits /= 3;
      }
      items.push_back(std::move(item));
    }
  }
  return Catalog::build("verification-grid", std::move(types), std::move(values), std::move(items), {});
}

struct BruteForce {
  const Catalog* catalog;
  std::vector<std::string> gallery;
  std::vector<int> rows;
  std::size_t checks = 0;
  std::size_t failures = 0;

  static Label digit(int row, int value) {
    for (int i = 0; i < value; ++i) row /= 3;
    return static_cast<Label>(row % 3);
  }

  void walk(const FeasibleSet& fs, unsigned alive, int depth) {
    ++checks;
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (fs.alive_at(p) != (((alive >> p) & 1U) != 0)) {
        ++failures;
        return;
      }
    }
    if (fs.size() != static_cast<std::size_t>(std::popcount(alive))) ++failures;
    if (depth == 3) return;
    for (int v = 0; v < 3; ++v) {
      for (const Polarity pol : {Polarity::kMustHave, Polarity::kMustLack}) {
        const Label drop = pol == Polarity::kMustHave ? Label::kAbsent : Label::kPresent;
        unsigned next = alive;
        for (std::size_t p = 0; p < rows.size(); ++p) {
          if (digit(rows[p], v) == drop) next &= ~(1U << p);
        }
        const Constraint c{std::string("v") + static_cast<char>('a' + v), pol, depth + 1};
        walk(apply_constraint(fs, c, *catalog), next, depth + 1);
      }
    }
  }
};

struct InvariantSweep {
  std::size_t runs = 0;
  std::size_t violations = 0;
  std::size_t baseline_runs = 0;
  std::size_t baseline_skips = 0;
};

// Re-checks Skip-neutrality and monotonicity from the transcript alone.
void audit_transcript(const Transcript& t, InvariantSweep& sweep) {
  ++sweep.runs;
  if (policy_by_name(t.agent)) {
    ++sweep.baseline_runs;
    for (const TurnRecord& r : t.turns) sweep.baseline_skips += r.verdict == Answer::kSkip;
  }
  std::size_t prev = t.gallery.size();
  for (const TurnRecord& r : t.turns) {
    if (r.verdict == Answer::kSkip && r.feasible_size_after != prev) ++sweep.violations;
    if (r.feasible_size_after > prev && !r.superseded) ++sweep.violations;
    prev = r.feasible_size_after;
  }
}

InvariantSweep g_sweep;

void audit_suite(const SuiteResult& result) {
  for (const auto& t : result.transcripts) {
    if (t) audit_transcript(*t, g_sweep);
  }
  for (const ManifestEntry& m : result.manifest) {
    if (m.error) ++g_sweep.violations;
  }
}

Result criterion_verification() {
  const auto start = Clock::now();
  const Catalog c = verification_catalog();
  BruteForce bf{&c, {}, {}, 0, 0};
  std::size_t galleries = 0;
  for (int n = 1; n <= 4; ++n) {
    const int total = static_cast<int>(std::pow(27, n));
    for (int code = 0; code < total; ++code) {
      bf.rows.assign(n, 0);
      bf.gallery.assign(n, "");
      int rest = code;
      for (int p = 0; p < n; ++p) {
        bf.rows[p] = rest % 27;
        rest /= 27;
        bf.gallery[p] = fmt("r%02d_%d", bf.rows[p], p);
      }
      FeasibleSet fs(c, bf.gallery);
      bf.walk(fs, (1U << n) - 1, 0);
      ++galleries;
    }
  }

  // Harness sweep with Unknown-rich labels and both noise modes, on top of
  // every other harness run in this binary.
  SyntheticCatalogSpec spec;
  spec.unknown_rate = 0.15;
  spec.seed = 77;
  const Catalog noisy = make_synthetic_catalog(spec);
  SuiteSpec suite;
  suite.taus = {0.3, 0.6};
  suite.base.gallery_size = 8;
  suite.max_episodes_per_tau = 60;
  suite.seed = 77;
  const std::vector<Episode> episodes = generate_suite(noisy, suite);
  for (const char* agent : {"random", "greedy", "verifier"}) {
    for (const NoiseMode mode : {NoiseMode::kNone, NoiseMode::kFlipOne, NoiseMode::kPerturbUnsure}) {
      SuiteConfig cfg;
      cfg.agent = agent;
      cfg.noise = mode;
      cfg.seed = 5;
      cfg.jobs = 4;
      audit_suite(run_suite(noisy, episodes, cfg));
    }
  }
  const double secs = seconds_since(start);
  return {bf.failures == 0 && secs < kVerificationSecondsLimit,
          fmt("%zu galleries, %zu set comparisons, %zu mismatches; %.1fs (limit %.0fs)", galleries, bf.checks,
              bf.failures, secs, kVerificationSecondsLimit)};
}

// --- suites ------------------------------------------------------------------

struct SyntheticSuite {
  std::vector<Catalog> catalogs;
  std::vector<std::vector<Episode>> episodes;
  std::size_t total = 0;
};

SyntheticSuite synthetic_suite(std::size_t want, std::uint64_t seed) {
  SyntheticSuite s;
  for (std::uint64_t k = 0; s.total < want; ++k) {
    SyntheticCatalogSpec spec;
    spec.seed = derive_seed(seed, k);
    s.catalogs.push_back(make_synthetic_catalog(spec));
    SuiteSpec suite;
    suite.taus = {0.3, 0.5, 0.6, 0.8};
    suite.seed = derive_seed(seed, k + 1000);
    std::vector<Episode> eps = generate_suite(s.catalogs.back(), suite);
    if (eps.size() > want - s.total) eps.resize(want - s.total);
    s.total += eps.size();
    s.episodes.push_back(std::move(eps));
  }
  return s;
}

std::vector<Transcript> run_synthetic(const SyntheticSuite& s, SuiteConfig cfg) {
  std::vector<Transcript> out;
  for (std::size_t i = 0; i < s.catalogs.size(); ++i) {
    cfg.seed = derive_seed(cfg.seed, i);
    const SuiteResult r = run_suite(s.catalogs[i], s.episodes[i], cfg);
    audit_suite(r);
    for (const auto& t : r.transcripts) {
      if (t) out.push_back(*t);
    }
  }
  return out;
}

Result criterion_accounting() {
  const SyntheticSuite s = synthetic_suite(kAccountingEpisodes, 2024);
  SuiteConfig cfg;
  cfg.agent = "random";
  cfg.budget = 4;  // short budget forces guesses with residual ambiguity
  cfg.seed = 9;
  cfg.jobs = 8;
  const std::vector<Transcript> transcripts = run_synthetic(s, cfg);
  std::vector<EpisodeScore> scores;
  for (const Transcript& t : transcripts) scores.push_back(score_episode(t));
  const AggregateReport report = aggregate(scores);

  // Flat recount straight from the round-tripped transcript records.
  struct Count {
    std::size_t verified = 0, random = 0, correct = 0, episodes = 0;
  };
  std::map<double, Count> recount;
  for (const Transcript& original : transcripts) {
    const Transcript t = parse_transcript(serialize_transcript(original, false));
    Count& c = recount[t.tau];
    ++c.episodes;
    if (!t.guess || t.guess->index < 1 || static_cast<std::size_t>(t.guess->index) > t.gallery.size()) continue;
    if (t.gallery[t.guess->index - 1] != t.target_id()) continue;
    ++c.correct;
    if (t.guess->feasible_members == std::vector<std::string>{t.target_id()}) {
      ++c.verified;
    } else {
      ++c.random;
    }
  }
  bool pass = transcripts.size() == kAccountingEpisodes && report.by_tau.size() == recount.size();
  std::string detail = fmt("%zu episodes;", transcripts.size());
  for (const auto& [tau, g] : report.by_tau) {
    const Count& c = recount[tau];
    const bool identity = g.verified_count + g.random_guess_count == g.overall_correct_count;
    const bool matches = g.verified_count == c.verified && g.random_guess_count == c.random &&
                         g.overall_correct_count == c.correct && g.episodes == c.episodes;
    pass = pass && identity && matches;
    detail += fmt(" tau=%.1f %zu+%zu=%zu%s;", tau, g.verified_count, g.random_guess_count, g.overall_correct_count,
                  matches ? "" : " (recount differs)");
  }
  pass = pass && report.overall.verified_count + report.overall.random_guess_count ==
                     report.overall.overall_correct_count;
  detail += " exact";
  return {pass, detail};
}

Result criterion_greedy_bound() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (const std::size_t n : {6, 8, 16, 32}) {
    const int bound = static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 2;
    int verified = 0, worst = 0;
    for (int seed = 0; seed < kGreedySeedsPerN; ++seed) {
      const Catalog c = make_discriminating_catalog(n, 4, derive_seed(n, seed));
      const Episode e = make_full_gallery_episode(c, derive_seed(n * 1000 + 1, seed));
      PolicySession session(c, *policy_by_name("greedy"), seed);
      EpisodeOptions options;
      const Transcript t = run_episode(c, e, session, options);
      audit_transcript(t, g_sweep);
      const EpisodeScore s = score_episode(t);
      // The guess itself counts as a turn here.
      const int turns = s.turns_total + (t.guess ? 1 : 0);
      worst = std::max(worst, turns);
      if (s.outcome == Outcome::kVerifiedCorrect && turns <= bound) ++verified;
    }
    pass = pass && verified == kGreedySeedsPerN;
    detail += fmt("N=%zu %d/%d within %d (worst %d); ", n, verified, kGreedySeedsPerN, bound, worst);
  }
  const double secs = seconds_since(start);
  pass = pass && secs < kGreedySecondsLimit;
  detail += fmt("%.1fs (limit %.0fs)", secs, kGreedySecondsLimit);
  return {pass, detail};
}

Result criterion_noise() {
  const SyntheticSuite s = synthetic_suite(kNoiseEpisodes, 31337);
  std::map<std::string, std::vector<Transcript>> runs;
  for (const char* agent : {"greedy", "verifier"}) {
    SuiteConfig cfg;
    cfg.agent = agent;
    cfg.noise = NoiseMode::kFlipOne;
    cfg.seed = 4242;  // same noise and agent seeds for both agents
    cfg.jobs = 8;
    runs[agent] = run_synthetic(s, cfg);
  }
  std::size_t flagged = 0, agreed = 0;
  std::map<std::string, std::size_t> verified;
  for (const auto& [agent, transcripts] : runs) {
    for (std::size_t i = 0; i < transcripts.size(); ++i) {
      const Transcript& t = transcripts[i];
      const Catalog& c = [&]() -> const Catalog& {
        std::size_t k = i;
        for (std::size_t j = 0; j < s.episodes.size(); ++j) {
          if (k < s.episodes[j].size()) return s.catalogs[j];
          k -= s.episodes[j].size();
        }
        return s.catalogs.back();
      }();
      if (score_episode(t).outcome == Outcome::kVerifiedCorrect) ++verified[agent];
      const bool raised = std::any_of(t.turns.begin(), t.turns.end(),
                                      [](const TurnRecord& r) { return r.contradiction_raised.has_value(); });
      if (!raised) continue;
      ++flagged;
      if (t.noise_log.size() != 1) continue;
      const NoiseEvent& ev = t.noise_log.front();
      const auto turn = std::find_if(t.turns.begin(), t.turns.end(),
                                     [&](const TurnRecord& r) { return r.turn_index == ev.turn_index; });
      if (turn == t.turns.end() || !turn->value_id || turn->verdict != ev.emitted) continue;
      const Label truth = c.label(t.target_id(), *turn->value_id);
      const bool excluded = (ev.emitted == Answer::kYes && truth == Label::kAbsent) ||
                            (ev.emitted == Answer::kNo && truth == Label::kPresent);
      if (excluded) ++agreed;
    }
  }
  const double n = static_cast<double>(kNoiseEpisodes);
  const double greedy = 100.0 * static_cast<double>(verified["greedy"]) / n;
  const double verifier = 100.0 * static_cast<double>(verified["verifier"]) / n;
  const bool pass = runs["greedy"].size() == kNoiseEpisodes && runs["verifier"].size() == kNoiseEpisodes &&
                    verifier - greedy >= kNoiseMarginPoints && flagged > 0 && agreed == flagged;
  return {pass, fmt("verifier %.1f%% vs greedy %.1f%% verified (margin %.1f pp, need >= %.0f); audit %zu/%zu "
                    "contradictions trace to the flipped answer",
                    verifier, greedy, verifier - greedy, kNoiseMarginPoints, agreed, flagged)};
}

Result criterion_bootstrap() {
  int covered = 0;
  for (int rep = 0; rep < kBootstrapRepetitions; ++rep) {
    Rng rng(derive_seed(0xb007, rep));
    std::vector<std::uint8_t> draws(kBootstrapSamples);
    for (auto& d : draws) d = rng.coin() ? 1 : 0;
    const Interval ci = bootstrap_interval(draws, 0.95, 1000, derive_seed(0x5eed, rep));
    if (ci.lo <= 0.5 && 0.5 <= ci.hi) ++covered;
  }
  const double coverage = static_cast<double>(covered) / kBootstrapRepetitions;
  return {coverage >= kBootstrapMinCoverage,
          fmt("%d/%d intervals contain 0.5 (%.1f%%, need >= %.0f%%)", covered, kBootstrapRepetitions,
              100 * coverage, 100 * kBootstrapMinCoverage)};
}

// --- wire fuzzing -------------------------------------------------------------

std::string mutate(const std::string& line, Rng& rng) {
  static const std::vector<std::string> kCorpus = {
      "",
      "{",
      "}",
      "[]",
      "null",
      "42",
      "\"ask_value\"",
      "{}",
      "{\"kind\":\"agent_action\"}",
      "{\"kind\":\"verdict\",\"verdict\":\"yes\"}",
      "{\"kind\":\"agent_action\",\"ask_value\":7}",
      "{\"kind\":\"agent_action\",\"guess\":\"3\"}",
      "{\"kind\":\"agent_action\",\"guess\":0}",
      "{\"kind\":\"agent_action\",\"guess\":-1}",
      "{\"kind\":\"agent_action\",\"guess\":1e300}",
      "{\"kind\":\"agent_action\",\"guess\":99999999999999999999}",
      "{\"kind\":\"agent_action\",\"guess\":2,\"ask_value\":\"v001\"}",
      "{\"kind\":\"agent_action\",\"ask_text\":null}",
      "{\"kind\":\"agent_action\",\"ack\":false}",
      "{\"kind\":\"agent_action\",\"ask_value\":\"v001\",\"extra\":1}",
      "{\"kind\":\"agent_action\",\"ask_value\":\"v001\"}{}",
      "\xff\xfe\xfd",
      "{\"kind\":\"agent_action\",\"ask_text\":\"\xc3\x28\"}",
  };
  switch (rng.below(7)) {
    case 0:
      return line.substr(0, rng.below(line.size()));
    case 1: {
      std::string out = line;
      const std::size_t flips = 1 + rng.below(4);
      for (std::size_t i = 0; i < flips; ++i) out[rng.below(out.size())] = static_cast<char>(rng.below(256));
      return out;
    }
    case 2: {
      std::string out(rng.below(64), '\0');
      for (char& ch : out) ch = static_cast<char>(rng.below(256));
      return out;
    }
    case 3:
      return kCorpus[rng.below(kCorpus.size())];
    case 4: {
      const std::size_t depth = 1 + rng.below(5000);
      return std::string(depth, '[') + std::string(rng.coin() ? depth : depth / 2, ']');
    }
    case 5:
      return line.substr(0, line.size() / 2) + "\n" + line.substr(line.size() / 2);
    default: {
      std::string out = line;
      out.insert(rng.below(out.size()), std::string(1 + rng.below(3), "\"{}[],:"[rng.below(7)]));
      return out;
    }
  }
}

Result criterion_fuzz() {
  const auto start = Clock::now();
  const Catalog c = make_discriminating_catalog(16, 4, 1);
  const Episode e = make_full_gallery_episode(c, 3);
  const std::string valid = wire::encode_action(AskValue{"v001"});
  Rng rng(0xf022);
  std::size_t crashes = 0, hangs = 0, aborted = 0, decoded = 0, unscoreable = 0;
  double slowest = 0.0;
  for (int i = 0; i < kFuzzMessages; ++i) {
    const std::string bad = mutate(valid, rng);
    const int inject_at = 1 + static_cast<int>(rng.below(3));
    const bool multi_batch = rng.below(4) == 0;
    bool decodes = true;
    try {
      wire::decode_action(bad);
    } catch (const Error&) {
      decodes = false;
    }
    int requests = 0;
    wire::LoopbackChannel channel([&](std::string_view sent) -> std::vector<std::string> {
      const wire::EngineMessage m = wire::decode_engine_message(sent);
      if (const auto* b = std::get_if<wire::UploadBatch>(&m)) {
        if (b->is_last) return {};
        return {bad};
      }
      if (!std::holds_alternative<wire::TurnRequest>(m)) return {};
      ++requests;
      if (requests == inject_at) return {bad};
      return {wire::encode_action(AskValue{fmt("v%03d", 1 + requests % 4)})};
    });
    ExternalSession session(channel, std::chrono::milliseconds(100));
    EpisodeOptions options;
    options.agent_name = "external";
    if (multi_batch) options.batch_plan = {8, 8};
    const auto t0 = Clock::now();
    try {
      const Transcript t = run_episode(c, e, session, options);
      const Transcript back = parse_transcript(serialize_transcript(t));
      const EpisodeScore s = score_episode(back);
      if (t.abort_kind) {
        ++aborted;
        if (!s.aborted) ++unscoreable;
      } else {
        ++decoded;
        if (!decodes) ++unscoreable;
      }
    } catch (...) {
      ++crashes;
    }
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    if (secs > kFuzzHangSeconds) ++hangs;
  }

  // The same bytes through a real socket, split at random points, with the
  // peer closing or going silent afterwards.
  const std::size_t socket_runs = 300;
  for (std::size_t i = 0; i < socket_runs; ++i) {
    int fds[2];
    if (socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
      ++crashes;
      break;
    }
    const std::string bad = mutate(valid, rng);
    const bool silent = i % 10 == 0;
    const std::size_t cut = bad.empty() ? 0 : rng.below(bad.size());
    std::thread peer([&, fd = fds[1]] {
      char buf[4096];
      (void)!read(fd, buf, sizeof buf);  // the turn request
      (void)!send(fd, bad.data(), cut, MSG_NOSIGNAL);
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
      (void)!send(fd, bad.data() + cut, bad.size() - cut, MSG_NOSIGNAL);
      if (!silent) (void)!send(fd, "\n", 1, MSG_NOSIGNAL);
      else std::this_thread::sleep_for(std::chrono::milliseconds(250));
      close(fd);
    });
    {
      wire::FdChannel channel(fds[0], fds[0], true);
      ExternalSession session(channel, std::chrono::milliseconds(100));
      EpisodeOptions options;
      options.agent_name = "external";
      const auto t0 = Clock::now();
      try {
        const Transcript t = run_episode(c, e, session, options);
        const EpisodeScore s = score_episode(parse_transcript(serialize_transcript(t)));
        if (t.abort_kind) {
          ++aborted;
          if (!s.aborted) ++unscoreable;
        } else {
          ++decoded;
        }
      } catch (...) {
        ++crashes;
      }
      const double secs = seconds_since(t0);
      slowest = std::max(slowest, secs);
      if (secs > kFuzzHangSeconds) ++hangs;
    }
    peer.join();
  }
  const double secs = seconds_since(start);
  return {crashes == 0 && hangs == 0 && unscoreable == 0,
          fmt("%d loopback + %zu socket messages: %zu aborted, %zu decoded as legal actions, %zu crashes, %zu hangs, "
              "%zu unscoreable; slowest episode %.3fs; %.1fs total",
              kFuzzMessages, socket_runs, aborted, decoded, crashes, hangs, unscoreable, slowest, secs)};
}

// Baselines on a catalog with forbidden types and Unknown labels, across
// every noise mode; none of them may ever be Skipped.
void baseline_skip_sweep() {
  SyntheticCatalogSpec spec;
  spec.forbidden_types = 3;
  spec.unknown_rate = 0.15;
  spec.seed = 41;
  const Catalog c = make_synthetic_catalog(spec);
  const std::vector<std::string> agents = {"random", "greedy", "verifier"};
  const std::vector<NoiseMode> modes = {NoiseMode::kNone, NoiseMode::kFlipOne, NoiseMode::kPerturbUnsure};
  Rng rng(4242);
  for (std::size_t i = 0; i < kBaselineSkipEpisodes; ++i) {
    std::vector<std::string> gallery;
    while (gallery.size() < 8) {
      const std::string& id = c.items()[rng.below(c.item_count())].id;
      if (std::find(gallery.begin(), gallery.end(), id) == gallery.end()) gallery.push_back(id);
    }
    const Episode e = testing::make_episode("b" + std::to_string(i), gallery, 1 + rng.below(8), 0.5);
    const std::string& agent = agents[i % 3];
    PolicySession session(c, *policy_by_name(agent), rng.next());
    EpisodeOptions options;
    options.agent_name = agent;
    options.noise = {modes[(i / 3) % 3], std::nullopt, rng.next(), 3};
    options.batch_plan = even_batches(8, 1 + i % 2);
    audit_transcript(run_episode(c, e, session, options), g_sweep);
  }
}

Result criterion_invariants() {
  baseline_skip_sweep();
  return {g_sweep.violations == 0 && g_sweep.runs > 0 && g_sweep.baseline_skips == 0 &&
              g_sweep.baseline_runs >= kBaselineSkipEpisodes,
          fmt("%zu harness runs, %zu Skip-neutrality/monotonicity violations; %zu baseline runs, %zu baseline Skips",
              g_sweep.runs, g_sweep.violations, g_sweep.baseline_runs, g_sweep.baseline_skips)};
}

}  // namespace
}  // namespace hti

int main() {
  using hti::Result;
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"similarity-properties", hti::criterion_eq1},
      {"episode-generation", hti::criterion_episode_generation},
      {"violation-fixtures", hti::criterion_fixtures},
      {"verification-brute-force", hti::criterion_verification},
      {"accounting-identity", hti::criterion_accounting},
      {"greedy-bound", hti::criterion_greedy_bound},
      {"noise-robustness", hti::criterion_noise},
      {"bootstrap-coverage", hti::criterion_bootstrap},
      {"wire-fuzzing", hti::criterion_fuzz},
      {"harness-invariants", hti::criterion_invariants},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
