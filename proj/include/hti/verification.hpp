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

// Feasible-candidate tracking: constraints from valid answers, elimination
// over the gallery, and contradiction detection.

#ifndef HTI_VERIFICATION_HPP_
#define HTI_VERIFICATION_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hti/catalog.hpp"
#include "hti/protocol.hpp"

namespace hti {

enum class Polarity { kMustHave, kMustLack };

std::string_view to_string(Polarity polarity);

struct Constraint {
  std::string value_id;
  Polarity polarity = Polarity::kMustHave;
  int source_turn = 0;

  bool operator==(const Constraint&) const = default;
};

enum class ContradictionCause { kEmptySet, kDirectConflict };

std::string_view to_string(ContradictionCause cause);
std::optional<ContradictionCause> contradiction_cause_from_string(std::string_view text);

struct ContradictionFlag {
  bool active = false;
  std::optional<ContradictionCause> cause;
  int turn_raised = 0;
};

struct SizeEntry {
  int turn_index = 0;
  std::size_t size_after = 0;
  /// True for Yes/No turns, the only ones that can eliminate.
  bool informative = false;
};

/// Gallery members consistent with every active constraint.
///
/// Unknown labels survive both polarities. Sizes are non-increasing except
/// when a re-verification answer supersedes an older, opposite constraint on
/// the same value; that turn rebuilds membership from the whole gallery.
class FeasibleSet {
 public:
  /// Throws kUnknownItem.
  FeasibleSet(const Catalog& catalog, std::span<const std::string> gallery);

  std::size_t size() const { return alive_count_; }
  std::size_t initial_size() const { return shared_->items.size(); }
  bool empty() const { return alive_count_ == 0; }

  /// Member ids in gallery order.
  std::vector<std::string> members() const;
  /// 1-based gallery positions of the members.
  std::vector<std::size_t> member_positions() const;
  bool contains(std::string_view item_id) const;
  bool alive_at(std::size_t position0) const { return alive_[position0] != 0; }

  const std::vector<std::string>& gallery() const { return shared_->ids; }
  /// Dense catalog index of the item at a 0-based gallery position.
  std::size_t catalog_item(std::size_t position0) const { return shared_->items[position0]; }

  const std::vector<SizeEntry>& history() const { return history_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

 private:
  struct Shared {
    std::vector<std::string> ids;
    std::vector<std::size_t> items;
  };

  friend FeasibleSet apply_constraint(FeasibleSet fs, const Constraint& c, const Catalog& catalog);
  friend struct IngestAccess;

  void filter(const Constraint& c, const Catalog& catalog);
  void rebuild(const Catalog& catalog);

  std::shared_ptr<const Shared> shared_;
  std::vector<std::uint8_t> alive_;
  std::size_t alive_count_ = 0;
  std::vector<SizeEntry> history_;
  std::vector<Constraint> constraints_;
};

/// Keeps members labeled Present or Unknown (MustHave) / Absent or Unknown
/// (MustLack) for the constraint's value, records the constraint and appends
/// a history entry. Pure filter: no conflict handling.
FeasibleSet apply_constraint(FeasibleSet fs, const Constraint& c, const Catalog& catalog);

struct IngestResult {
  FeasibleSet feasible;
  ContradictionFlag flag;
  /// An older opposite constraint on the same value was replaced.
  bool superseded = false;
};

/// Skip and Unsure leave membership unchanged (a same-size history entry is
/// still recorded). Yes adds MustHave, No adds MustLack on the resolved
/// value. A Yes/No that contradicts an earlier constraint on the same value
/// raises DirectConflict and supersedes it; otherwise an empty result raises
/// EmptySet. The flag is also active whenever the set is empty after the turn.
IngestResult ingest_turn(FeasibleSet fs, const Question& question, const Verdict& verdict,
                         const Catalog& catalog);

/// The single member, when exactly one remains.
std::optional<std::string> is_uniquely_identified(const FeasibleSet& fs);

struct TraceEntry {
  int turn_index = 0;
  std::size_t size_after = 0;
  /// Negative only on supersession turns.
  long eliminated_count = 0;
  bool stall = false;

  bool operator==(const TraceEntry&) const = default;
};

/// Per-turn deltas from the history; a stall is an informative turn that
/// eliminated nothing.
std::vector<TraceEntry> elimination_trace(const FeasibleSet& fs);
std::vector<TraceEntry> elimination_trace(std::size_t initial_size, std::span<const SizeEntry> history);

}  // namespace hti

#endif  // HTI_VERIFICATION_HPP_
