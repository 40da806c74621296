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

// Attribute-overlap similarity, distractor retrieval and episode generation.
//
// Sim(A, B) = |Attr(A) ∩ Attr(B)| / |Attr(A)| is deliberately asymmetric: it
// asks how much of the reference item A is covered by the candidate B.

#ifndef HTI_SIMILARITY_HPP_
#define HTI_SIMILARITY_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hti/catalog.hpp"

namespace hti {

/// Sim(A, B) over ascending dense value indices. Throws kEmptyReference when A
/// is empty.
double similarity(std::span<const std::uint32_t> attrs_a, std::span<const std::uint32_t> attrs_b);
double similarity(const std::set<std::string>& attrs_a, const std::set<std::string>& attrs_b);

/// Size of the intersection of two ascending index lists.
std::size_t overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Up to `k` items B != target with `value_id` in Attr(B) and
/// Sim(target, B) >= tau, ordered by similarity descending then id ascending.
/// Throws kUnknownItem, kUnknownValue, kTargetLacksValue.
std::vector<std::string> retrieve_by_value(const Catalog& catalog, std::string_view target_id,
                                           std::string_view value_id, double tau, std::size_t k);

/// Union of retrieve_by_value over every value in Attr(target).
std::set<std::string> build_distractor_pool(const Catalog& catalog, std::string_view target_id,
                                            double tau, std::size_t k);

struct EpisodeConfig {
  double tau = 0.5;
  std::size_t per_value_retrieval_k = 5;
  /// Total gallery size including the target. nullopt takes the whole pool.
  std::optional<std::size_t> gallery_size;
  std::size_t min_pool_size = 6;
  std::uint64_t seed = 0;
};

struct Episode {
  std::string episode_id;
  std::vector<std::string> gallery;
  std::size_t target_position = 1;  // 1-indexed
  EpisodeConfig config;
  std::size_t pool_size = 0;

  const std::string& target_id() const { return gallery.at(target_position - 1); }
  bool operator==(const Episode& other) const;
};

struct Infeasible {
  std::size_t pool_size = 0;
};

/// Samples distractors uniformly without replacement from the pool (taken in
/// ascending id order) and inserts the target at a uniform position, all from
/// Rng(config.seed). Pure in (catalog, target, config).
/// Throws kUnknownItem, kGallerySizeExceedsPool, kInvalidConfig.
std::variant<Episode, Infeasible> generate_episode(const Catalog& catalog,
                                                   std::string_view target_id,
                                                   const EpisodeConfig& config);

std::string make_episode_id(std::string_view target_id, double tau, std::uint64_t seed);

struct SuiteSpec {
  std::vector<double> taus;
  EpisodeConfig base;
  /// Cap per tau; 0 keeps every feasible target.
  std::size_t max_episodes_per_tau = 0;
  std::uint64_t seed = 0;
};

/// One candidate episode per (tau, target) with seeds derived from
/// spec.seed; infeasible targets are dropped, then each tau group is
/// subsampled to the cap (seeded) keeping catalog order.
std::vector<Episode> generate_suite(const Catalog& catalog, const SuiteSpec& spec);

/// Counts keyed by (tau, gallery size).
using GallerySizeHistogram = std::map<std::pair<double, std::size_t>, std::size_t>;
GallerySizeHistogram gallery_size_stats(std::span<const Episode> episodes);

std::string serialize_episodes(std::span<const Episode> episodes);
std::vector<Episode> parse_episodes(std::string_view text);
std::vector<Episode> load_episodes_file(const std::filesystem::path& path);
std::string serialize_stats(const GallerySizeHistogram& histogram);

/// Validates the structural episode invariants (target once, distinct items,
/// position in range, every id in the catalog). Throws kInvariantViolation.
void check_episode(const Catalog& catalog, const Episode& episode);

}  // namespace hti

#endif  // HTI_SIMILARITY_HPP_
