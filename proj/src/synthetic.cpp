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

#include "hti/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <numeric>

#include "hti/error.hpp"
#include "hti/rng.hpp"

namespace hti {
namespace {

std::string numbered(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, n);
  return buf;
}

AttributeValue make_value(const std::string& id, const std::string& type_id,
                          const std::string& name) {
  return AttributeValue{id, type_id, name,
                        {"Does the dress have " + name + "?",
                         "Is the dress featured with " + name + "?"}};
}

}  // namespace

Catalog make_synthetic_catalog(const SyntheticCatalogSpec& spec) {
  if (spec.items == 0 || spec.clusters == 0 || spec.values_per_multi < 2) {
    throw Error(ErrorCode::kInvalidConfig, "synthetic catalog needs items, clusters and >= 2 values per multi type");
  }
  std::vector<AttributeType> types;
  std::vector<AttributeValue> values;
  // Each entry: the dense value indices of one type, and whether it is binary.
  std::vector<std::pair<std::vector<std::size_t>, bool>> groups;

  for (std::size_t t = 0; t < spec.binary_types; ++t) {
    const std::string type_id = numbered("bt", t);
    types.push_back({type_id, "binary trait " + std::to_string(t), false});
    groups.push_back({{values.size()}, true});
    values.push_back(make_value(numbered("v", values.size()), type_id, "trait " + numbered("b", t)));
  }
  for (std::size_t t = 0; t < spec.multi_types + spec.forbidden_types; ++t) {
    const bool forbidden = t >= spec.multi_types;
    const std::string type_id = forbidden ? numbered("ft", t - spec.multi_types) : numbered("mt", t);
    types.push_back({type_id, (forbidden ? "forbidden style " : "style ") + std::to_string(t), forbidden});
    const std::size_t width = forbidden ? 2 : spec.values_per_multi;
    std::vector<std::size_t> group;
    for (std::size_t k = 0; k < width; ++k) {
      group.push_back(values.size());
      values.push_back(make_value(numbered("v", values.size()), type_id,
                                  type_id + " variant " + std::string(1, static_cast<char>('a' + k))));
    }
    groups.push_back({std::move(group), false});
  }

  Rng rng(spec.seed);
  // prototype[c][g] = chosen variant (multi) or 1/0 (binary).
  std::vector<std::vector<std::size_t>> prototypes(spec.clusters);
  const auto draw = [&](const std::pair<std::vector<std::size_t>, bool>& g) -> std::size_t {
    if (g.second) return rng.unit() < spec.binary_present_rate ? 1 : 0;
    return static_cast<std::size_t>(rng.below(g.first.size()));
  };
  for (auto& proto : prototypes) {
    for (const auto& g : groups) proto.push_back(draw(g));
  }

  std::vector<Item> items;
  for (std::size_t i = 0; i < spec.items; ++i) {
    const auto& proto = prototypes[rng.below(spec.clusters)];
    Item item{numbered("d", i), {}};
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::size_t choice = rng.unit() < spec.mutation_rate ? draw(groups[g]) : proto[g];
      const auto& [members, binary] = groups[g];
      for (std::size_t k = 0; k < members.size(); ++k) {
        const bool present = binary ? choice == 1 : choice == k;
        Label label = present ? Label::kPresent : Label::kAbsent;
        if (spec.unknown_rate > 0.0 && rng.unit() < spec.unknown_rate) label = Label::kUnknown;
        item.labels.emplace(values[members[k]].id, label);
      }
    }
    const bool any_present = std::any_of(item.labels.begin(), item.labels.end(),
                                         [](const auto& kv) { return kv.second == Label::kPresent; });
    if (!any_present && !values.empty()) item.labels[values[groups.back().first.front()].id] = Label::kPresent;
    items.push_back(std::move(item));
  }
  return Catalog::build("synthetic-" + std::to_string(spec.seed), std::move(types), std::move(values),
                        std::move(items), {});
}

Catalog make_discriminating_catalog(std::size_t items, std::size_t extra_values, std::uint64_t seed) {
  if (items < 2) throw Error(ErrorCode::kInvalidConfig, "need at least two items");
  const std::size_t bits = static_cast<std::size_t>(std::bit_width(items - 1));
  std::vector<AttributeType> types;
  std::vector<AttributeValue> values;
  const auto add_value = [&](const std::string& name) {
    const std::string type_id = numbered("t", types.size());
    types.push_back({type_id, name, false});
    values.push_back(make_value(numbered("v", values.size()), type_id, name));
  };
  add_value("anchor detail");
  for (std::size_t b = 0; b < bits; ++b) add_value("code detail " + numbered("c", b));
  for (std::size_t e = 0; e < extra_values; ++e) add_value("extra detail " + numbered("e", e));

  Rng rng(seed);
  std::vector<Item> out(items);
  for (std::size_t i = 0; i < items; ++i) {
    out[i].id = numbered("g", i);
    out[i].labels.emplace(values[0].id, Label::kPresent);
    for (std::size_t b = 0; b < bits; ++b) {
      out[i].labels.emplace(values[1 + b].id, ((i >> b) & 1U) ? Label::kPresent : Label::kAbsent);
    }
  }
  for (std::size_t e = 0; e < extra_values; ++e) {
    std::vector<std::size_t> order(items);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t r = 0; r < items; ++r) {
      out[order[r]].labels.emplace(values[1 + bits + e].id, r < items / 2 ? Label::kPresent : Label::kAbsent);
    }
  }
  return Catalog::build("discriminating-" + std::to_string(items), std::move(types), std::move(values),
                        std::move(out), {});
}

Episode make_full_gallery_episode(const Catalog& catalog, std::uint64_t seed, double tau) {
  Rng rng(seed);
  Episode e;
  for (const Item& item : catalog.items()) e.gallery.push_back(item.id);
  rng.shuffle(std::span<std::string>(e.gallery));
  e.target_position = 1 + static_cast<std::size_t>(rng.below(e.gallery.size()));
  e.config.tau = tau;
  e.config.seed = seed;
  e.config.gallery_size = e.gallery.size();
  e.pool_size = e.gallery.size() - 1;
  e.episode_id = make_episode_id(e.target_id(), tau, seed);
  return e;
}

}  // namespace hti
