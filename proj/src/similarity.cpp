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

#include "hti/similarity.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hti/error.hpp"
#include "hti/rng.hpp"

namespace hti {
namespace {

using nlohmann::json;

struct Scored {
  std::size_t item;
  std::size_t shared;
};

// Candidates B sharing `value` with the target, passing the tau filter, in
// retrieval order. Every candidate shares the same denominator |Attr(target)|
// so ordering by overlap count is ordering by similarity.
std::vector<Scored> ranked_candidates(const Catalog& catalog, std::size_t target, std::size_t value,
                                      double tau) {
  const auto& target_attrs = catalog.present_values(target);
  std::vector<Scored> out;
  for (std::size_t b = 0; b < catalog.item_count(); ++b) {
    if (b == target || catalog.label(b, value) != Label::kPresent) continue;
    const std::size_t shared = overlap(target_attrs, catalog.present_values(b));
    const double sim = static_cast<double>(shared) / static_cast<double>(target_attrs.size());
    if (sim >= tau) out.push_back({b, shared});
  }
  std::sort(out.begin(), out.end(), [&](const Scored& x, const Scored& y) {
    if (x.shared != y.shared) return x.shared > y.shared;
    return catalog.items()[x.item].id < catalog.items()[y.item].id;
  });
  return out;
}

std::string format_tau(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

}  // namespace

std::size_t overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::size_t shared = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  return shared;
}

double similarity(std::span<const std::uint32_t> attrs_a, std::span<const std::uint32_t> attrs_b) {
  if (attrs_a.empty()) throw Error(ErrorCode::kEmptyReference, "Sim(A, B) with empty A");
  return static_cast<double>(overlap(attrs_a, attrs_b)) / static_cast<double>(attrs_a.size());
}

double similarity(const std::set<std::string>& attrs_a, const std::set<std::string>& attrs_b) {
  if (attrs_a.empty()) throw Error(ErrorCode::kEmptyReference, "Sim(A, B) with empty A");
  std::size_t shared = 0;
  for (const std::string& v : attrs_a) shared += attrs_b.count(v);
  return static_cast<double>(shared) / static_cast<double>(attrs_a.size());
}

std::vector<std::string> retrieve_by_value(const Catalog& catalog, std::string_view target_id,
                                           std::string_view value_id, double tau, std::size_t k) {
  const std::size_t target = catalog.item_index(target_id);
  const std::size_t value = catalog.value_index(value_id);
  if (catalog.label(target, value) != Label::kPresent) {
    throw Error(ErrorCode::kTargetLacksValue,
                "target '" + std::string(target_id) + "' lacks value '" + std::string(value_id) + "'");
  }
  std::vector<std::string> out;
  for (const Scored& s : ranked_candidates(catalog, target, value, tau)) {
    if (out.size() >= k) break;
    out.push_back(catalog.items()[s.item].id);
  }
  return out;
}

std::set<std::string> build_distractor_pool(const Catalog& catalog, std::string_view target_id,
                                            double tau, std::size_t k) {
  const std::size_t target = catalog.item_index(target_id);
  std::set<std::string> pool;
  for (const std::uint32_t value : catalog.present_values(target)) {
    const auto ranked = ranked_candidates(catalog, target, value, tau);
    const std::size_t take = std::min(k, ranked.size());
    for (std::size_t i = 0; i < take; ++i) pool.insert(catalog.items()[ranked[i].item].id);
  }
  return pool;
}

bool Episode::operator==(const Episode& other) const {
  return episode_id == other.episode_id && gallery == other.gallery &&
         target_position == other.target_position && pool_size == other.pool_size &&
         config.tau == other.config.tau && config.seed == other.config.seed &&
         config.per_value_retrieval_k == other.config.per_value_retrieval_k &&
         config.gallery_size == other.config.gallery_size &&
         config.min_pool_size == other.config.min_pool_size;
}

std::string make_episode_id(std::string_view target_id, double tau, std::uint64_t seed) {
  return std::string(target_id) + "@" + format_tau(tau) + "#" + std::to_string(seed);
}

std::variant<Episode, Infeasible> generate_episode(const Catalog& catalog,
                                                   std::string_view target_id,
                                                   const EpisodeConfig& config) {
  if (config.tau < 0.0 || config.tau > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "tau must lie in [0, 1]");
  }
  if (config.per_value_retrieval_k == 0 || config.min_pool_size == 0) {
    throw Error(ErrorCode::kInvalidConfig, "retrieval k and min pool size must be positive");
  }
  if (config.gallery_size && *config.gallery_size < 2) {
    throw Error(ErrorCode::kInvalidConfig, "gallery size must be at least 2");
  }

  const std::set<std::string> pool_set =
      build_distractor_pool(catalog, target_id, config.tau, config.per_value_retrieval_k);
  if (pool_set.size() < config.min_pool_size) return Infeasible{pool_set.size()};

  const std::size_t gallery_size = config.gallery_size.value_or(pool_set.size() + 1);
  if (gallery_size - 1 > pool_set.size()) {
    throw Error(ErrorCode::kGallerySizeExceedsPool,
                "gallery of " + std::to_string(gallery_size) + " needs " +
                    std::to_string(gallery_size - 1) + " distractors, pool has " +
                    std::to_string(pool_set.size()));
  }

  std::vector<std::string> pool(pool_set.begin(), pool_set.end());
  Rng rng(config.seed);
  const std::size_t wanted = gallery_size - 1;
  // Partial Fisher-Yates: positions [0, wanted) end up a uniform sample.
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(wanted);

  Episode episode;
  episode.target_position = 1 + static_cast<std::size_t>(rng.below(gallery_size));
  episode.gallery = std::move(pool);
  episode.gallery.insert(episode.gallery.begin() + static_cast<std::ptrdiff_t>(episode.target_position - 1),
                         std::string(target_id));
  episode.config = config;
  episode.pool_size = pool_set.size();
  episode.episode_id = make_episode_id(target_id, config.tau, config.seed);
  return episode;
}

std::vector<Episode> generate_suite(const Catalog& catalog, const SuiteSpec& spec) {
  std::vector<Episode> out;
  for (const double tau : spec.taus) {
    const std::uint64_t tau_stream = derive_seed(spec.seed, std::bit_cast<std::uint64_t>(tau));
    std::vector<Episode> group;
    for (std::size_t t = 0; t < catalog.item_count(); ++t) {
      EpisodeConfig config = spec.base;
      config.tau = tau;
      config.seed = derive_seed(tau_stream, t);
      const auto& target = catalog.items()[t].id;
      if (config.gallery_size &&
          build_distractor_pool(catalog, target, tau, config.per_value_retrieval_k).size() + 1 <
              *config.gallery_size) {
        continue;
      }
      auto result = generate_episode(catalog, target, config);
      if (auto* episode = std::get_if<Episode>(&result)) group.push_back(std::move(*episode));
    }
    if (spec.max_episodes_per_tau != 0 && group.size() > spec.max_episodes_per_tau) {
      std::vector<std::size_t> order(group.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(derive_seed(tau_stream, ~std::uint64_t{0}));
      rng.shuffle(std::span<std::size_t>(order));
      order.resize(spec.max_episodes_per_tau);
      std::sort(order.begin(), order.end());
      std::vector<Episode> kept;
      kept.reserve(order.size());
      for (const std::size_t i : order) kept.push_back(std::move(group[i]));
      group = std::move(kept);
    }
    for (auto& episode : group) out.push_back(std::move(episode));
  }
  return out;
}

GallerySizeHistogram gallery_size_stats(std::span<const Episode> episodes) {
  GallerySizeHistogram histogram;
  for (const Episode& e : episodes) ++histogram[{e.config.tau, e.gallery.size()}];
  return histogram;
}

std::string serialize_episodes(std::span<const Episode> episodes) {
  json doc = json::array();
  for (const Episode& e : episodes) {
    doc.push_back({{"episode_id", e.episode_id},
                   {"tau", e.config.tau},
                   {"gallery", e.gallery},
                   {"target_position", e.target_position},
                   {"seed", e.config.seed},
                   {"pool_size", e.pool_size}});
  }
  return doc.dump(2) + "\n";
}

std::vector<Episode> parse_episodes(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedInput, "episode file must be a list");
  std::vector<Episode> out;
  for (const json& entry : doc) {
    try {
      Episode e;
      e.episode_id = entry.at("episode_id").get<std::string>();
      e.config.tau = entry.at("tau").get<double>();
      e.gallery = entry.at("gallery").get<std::vector<std::string>>();
      e.target_position = entry.at("target_position").get<std::size_t>();
      e.config.seed = entry.at("seed").get<std::uint64_t>();
      e.pool_size = entry.at("pool_size").get<std::size_t>();
      e.config.gallery_size = e.gallery.size();
      if (e.target_position < 1 || e.target_position > e.gallery.size()) {
        throw Error(ErrorCode::kMalformedInput, "episode '" + e.episode_id + "': target_position out of range");
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kMalformedInput, ex.what());
    }
  }
  return out;
}

std::vector<Episode> load_episodes_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open episodes '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_episodes(buffer.str());
}

std::string serialize_stats(const GallerySizeHistogram& histogram) {
  json doc = json::array();
  for (const auto& [key, count] : histogram) {
    doc.push_back({{"tau", key.first}, {"gallery_size", key.second}, {"count", count}});
  }
  return doc.dump(2) + "\n";
}

void check_episode(const Catalog& catalog, const Episode& episode) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvariantViolation, "episode '" + episode.episode_id + "': " + why);
  };
  if (episode.gallery.empty()) fail("empty gallery");
  if (episode.target_position < 1 || episode.target_position > episode.gallery.size()) {
    fail("target position out of range");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& id : episode.gallery) {
    if (!catalog.find_item(id)) fail("unknown item '" + id + "'");
    if (!seen.insert(id).second) fail("duplicate gallery item '" + id + "'");
  }
}

}  // namespace hti
