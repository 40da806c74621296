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

// Turn representation, the deterministic violation detector, and the terminal
// guess grammar.

#ifndef HTI_PROTOCOL_HPP_
#define HTI_PROTOCOL_HPP_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hti/catalog.hpp"

namespace hti {

enum class ViolationKind {
  kForbiddenAttribute,
  kEnumerationAcrossTurns,
  kIndexReference,
  kMultipleQuestions,
  kUnmappableQuestion,
  kPrematureQuestion,
  kPrematureGuess,
  kCompoundReEnumeration,
};

/// Stable snake_case names used in transcripts and on the wire.
std::string_view to_string(ViolationKind kind);
std::optional<ViolationKind> violation_from_string(std::string_view text);

enum class Answer { kYes, kNo, kUnsure, kSkip };

std::string_view to_string(Answer answer);
std::optional<Answer> answer_from_string(std::string_view text);

/// Oracle response. Skip always carries the violation that caused it; the
/// other answers never do.
class Verdict {
 public:
  static Verdict yes() { return Verdict(Answer::kYes, std::nullopt); }
  static Verdict no() { return Verdict(Answer::kNo, std::nullopt); }
  static Verdict unsure() { return Verdict(Answer::kUnsure, std::nullopt); }
  static Verdict skip(ViolationKind why) { return Verdict(Answer::kSkip, why); }
  /// Throws kInvalidConfig when `answer`/`violation` break the pairing rule.
  static Verdict make(Answer answer, std::optional<ViolationKind> violation);

  Answer answer() const { return answer_; }
  const std::optional<ViolationKind>& violation() const { return violation_; }
  bool is_skip() const { return answer_ == Answer::kSkip; }

  bool operator==(const Verdict&) const = default;

 private:
  Verdict(Answer answer, std::optional<ViolationKind> violation)
      : answer_(answer), violation_(violation) {}

  Answer answer_;
  std::optional<ViolationKind> violation_;
};

struct Question {
  std::string raw_text;
  std::optional<std::string> resolved_value;
  /// Every value the text mentions; more than one for compound questions.
  std::set<std::string> referenced_values;
  int turn_index = 1;
};

/// Builds a Question from free text. Exact resolution is tried first; if that
/// fails the text is split on commas and the conjunctions "and", "with",
/// "or", "plus" and every fragment is resolved, either alone or prefixed by
/// the leading words of the first fragment ("...have a V-neckline and a slit"
/// -> "...have a slit"). A compound is referenced only when every fragment
/// resolves; otherwise the question is unresolvable.
Question question_from_text(const Catalog& catalog, std::string_view text, int turn_index);

/// Structured question for one value id (raw text = its first template).
Question question_for_value(const Catalog& catalog, std::string_view value_id, int turn_index);

struct PriorTurn {
  Question question;
  Verdict verdict;
};

enum class Phase { kUpload, kPlay };

/// Ordinal/cardinal references to gallery positions ("image #3", "the first
/// one", "is it number 2", "one by one"). Matched on the lowercased raw text.
bool mentions_gallery_index(std::string_view raw_text);

/// nullopt means Valid. Checks run in this order and the first hit wins:
/// PrematureQuestion, IndexReference, UnmappableQuestion, MultipleQuestions,
/// ForbiddenAttribute, EnumerationAcrossTurns, CompoundReEnumeration.
///
/// Only non-Skip turns of `history` seed the asked-value registry. A single
/// question is an enumeration when its type was asked before with another
/// value, or when the very same value is re-asked outside contradiction mode.
/// A compound whose values were all previously answered Yes is a
/// re-enumeration of confirmed facts.
std::optional<ViolationKind> classify_question(const Catalog& catalog, const Question& question,
                                               std::span<const PriorTurn> history, Phase phase,
                                               bool contradiction_mode);

struct GuessOutput {
  int index = 1;
};
/// A well-formed guess made while more than one candidate is still feasible.
struct PrematureGuess {
  int index = 1;
};
struct NotAGuess {};

using TerminalParse = std::variant<GuessOutput, PrematureGuess, NotAGuess>;

inline constexpr std::string_view kGuessPrefix = "My guess of your favorite dress: #";

/// Grammar: optional whitespace, the exact prefix, decimal index >= 1, an
/// optional '.', optional whitespace. Throws kMalformedIndex when the prefix
/// matches but the index does not parse.
TerminalParse parse_terminal(std::string_view text, std::size_t feasible_size);

std::string format_guess(int index);

}  // namespace hti

#endif  // HTI_PROTOCOL_HPP_
