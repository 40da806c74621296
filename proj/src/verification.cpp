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

#include "hti/verification.hpp"

#include <algorithm>

#include "hti/error.hpp"

namespace hti {

struct IngestAccess {
  static void record(FeasibleSet& fs, int turn, bool informative) {
    fs.history_.push_back({turn, fs.alive_count_, informative});
  }
  static std::vector<Constraint>& constraints(FeasibleSet& fs) { return fs.constraints_; }
  static void rebuild(FeasibleSet& fs, const Catalog& catalog) { fs.rebuild(catalog); }
  static void filter(FeasibleSet& fs, const Constraint& c, const Catalog& catalog) {
    fs.filter(c, catalog);
  }
};

namespace {

bool survives(Label label, Polarity polarity) {
  if (label == Label::kUnknown) return true;
  return polarity == Polarity::kMustHave ? label == Label::kPresent : label == Label::kAbsent;
}

}  // namespace

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::kMustHave ? "must_have" : "must_lack";
}

std::string_view to_string(ContradictionCause cause) {
  return cause == ContradictionCause::kEmptySet ? "empty_set" : "direct_conflict";
}

std::optional<ContradictionCause> contradiction_cause_from_string(std::string_view text) {
  if (text == "empty_set") return ContradictionCause::kEmptySet;
  if (text == "direct_conflict") return ContradictionCause::kDirectConflict;
  return std::nullopt;
}

FeasibleSet::FeasibleSet(const Catalog& catalog, std::span<const std::string> gallery) {
  auto shared = std::make_shared<Shared>();
  shared->ids.assign(gallery.begin(), gallery.end());
  shared->items.reserve(gallery.size());
  for (const std::string& id : gallery) shared->items.push_back(catalog.item_index(id));
  shared_ = std::move(shared);
  alive_.assign(gallery.size(), 1);
  alive_count_ = gallery.size();
}

std::vector<std::string> FeasibleSet::members() const {
  std::vector<std::string> out;
  out.reserve(alive_count_);
  for (std::size_t p = 0; p < alive_.size(); ++p) {
    if (alive_[p]) out.push_back(shared_->ids[p]);
  }
  return out;
}

std::vector<std::size_t> FeasibleSet::member_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < alive_.size(); ++p) {
    if (alive_[p]) out.push_back(p + 1);
  }
  return out;
}

bool FeasibleSet::contains(std::string_view item_id) const {
  for (std::size_t p = 0; p < alive_.size(); ++p) {
    if (alive_[p] && shared_->ids[p] == item_id) return true;
  }
  return false;
}

void FeasibleSet::filter(const Constraint& c, const Catalog& catalog) {
  const std::size_t value = catalog.value_index(c.value_id);
  for (std::size_t p = 0; p < alive_.size(); ++p) {
    if (alive_[p] && !survives(catalog.label(shared_->items[p], value), c.polarity)) {
      alive_[p] = 0;
      --alive_count_;
    }
  }
}

void FeasibleSet::rebuild(const Catalog& catalog) {
  std::fill(alive_.begin(), alive_.end(), std::uint8_t{1});
  alive_count_ = alive_.size();
  for (const Constraint& c : constraints_) filter(c, catalog);
}

FeasibleSet apply_constraint(FeasibleSet fs, const Constraint& c, const Catalog& catalog) {
  fs.filter(c, catalog);
  fs.constraints_.push_back(c);
  fs.history_.push_back({c.source_turn, fs.alive_count_, true});
  return fs;
}

IngestResult ingest_turn(FeasibleSet fs, const Question& question, const Verdict& verdict,
                         const Catalog& catalog) {
  IngestResult result{std::move(fs), {}, false};
  FeasibleSet& set = result.feasible;
  const int turn = question.turn_index;
  const Answer answer = verdict.answer();
  const bool informative = (answer == Answer::kYes || answer == Answer::kNo) &&
                           question.resolved_value &&
                           catalog.find_value(*question.resolved_value).has_value();

  if (informative) {
    const Constraint c{*question.resolved_value,
                       answer == Answer::kYes ? Polarity::kMustHave : Polarity::kMustLack, turn};
    auto& constraints = IngestAccess::constraints(set);
    const auto same_value = [&](const Constraint& old) { return old.value_id == c.value_id; };
    const bool conflict = std::any_of(constraints.begin(), constraints.end(), [&](const Constraint& old) {
      return same_value(old) && old.polarity != c.polarity;
    });
    const bool duplicate = std::any_of(constraints.begin(), constraints.end(), [&](const Constraint& old) {
      return same_value(old) && old.polarity == c.polarity;
    });
    if (conflict) {
      std::erase_if(constraints, same_value);
      constraints.push_back(c);
      IngestAccess::rebuild(set, catalog);
      result.superseded = true;
      result.flag = {true, ContradictionCause::kDirectConflict, turn};
    } else if (!duplicate) {
      IngestAccess::filter(set, c, catalog);
      constraints.push_back(c);
    }
  }
  IngestAccess::record(set, turn, informative);
  if (!result.flag.active && set.empty()) {
    result.flag = {true, ContradictionCause::kEmptySet, turn};
  }
  return result;
}

std::optional<std::string> is_uniquely_identified(const FeasibleSet& fs) {
  if (fs.size() != 1) return std::nullopt;
  return fs.members().front();
}

std::vector<TraceEntry> elimination_trace(std::size_t initial_size, std::span<const SizeEntry> history) {
  std::vector<TraceEntry> out;
  out.reserve(history.size());
  std::size_t previous = initial_size;
  for (const SizeEntry& entry : history) {
    const long eliminated = static_cast<long>(previous) - static_cast<long>(entry.size_after);
    out.push_back({entry.turn_index, entry.size_after, eliminated, entry.informative && eliminated == 0});
    previous = entry.size_after;
  }
  return out;
}

std::vector<TraceEntry> elimination_trace(const FeasibleSet& fs) {
  return elimination_trace(fs.initial_size(), fs.history());
}

}  // namespace hti
