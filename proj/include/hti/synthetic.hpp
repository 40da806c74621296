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

// Seeded synthetic catalogs for tests, benchmarks and the `synth` CLI.

#ifndef HTI_SYNTHETIC_HPP_
#define HTI_SYNTHETIC_HPP_

#include <cstdint>

#include "hti/catalog.hpp"
#include "hti/similarity.hpp"

namespace hti {

struct SyntheticCatalogSpec {
  std::size_t items = 200;
  /// Single-value types ("has a side slit"): each item Present or Absent.
  std::size_t binary_types = 16;
  /// Multi-value types ("neckline"): each item has exactly one value Present.
  std::size_t multi_types = 8;
  std::size_t values_per_multi = 3;
  /// Extra forbidden types, two values each, labeled like multi types.
  std::size_t forbidden_types = 0;
  /// Items are mutations of this many prototypes, so near neighbours exist at
  /// high similarity thresholds.
  std::size_t clusters = 12;
  double mutation_rate = 0.08;
  double binary_present_rate = 0.4;
  /// Fraction of definite labels replaced by Unknown.
  double unknown_rate = 0.0;
  std::uint64_t seed = 1;
};

/// Values are numbered in type order: binary types first, then multi types,
/// then forbidden types. The default spec yields 200 items and 40 values.
Catalog make_synthetic_catalog(const SyntheticCatalogSpec& spec);

/// A fully-labeled catalog of `items` members whose label rows are pairwise
/// distinct: ceil(log2 items) "bit" values encode each member's index, plus
/// `extra_values` balanced random values and one anchor value Present
/// everywhere. Every value is its own type.
Catalog make_discriminating_catalog(std::size_t items, std::size_t extra_values, std::uint64_t seed);

/// An episode whose gallery is every item of `catalog` in a seeded order,
/// with a seeded target.
Episode make_full_gallery_episode(const Catalog& catalog, std::uint64_t seed, double tau = 1.0);

}  // namespace hti

#endif  // HTI_SYNTHETIC_HPP_
