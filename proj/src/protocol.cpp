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

#include "hti/protocol.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <regex>

#include "hti/error.hpp"
#include "hti/text.hpp"

namespace hti {
namespace {

constexpr std::array<std::pair<ViolationKind, std::string_view>, 8> kViolationNames = {{
    {ViolationKind::kForbiddenAttribute, "forbidden_attribute"},
    {ViolationKind::kEnumerationAcrossTurns, "enumeration_across_turns"},
    {ViolationKind::kIndexReference, "index_reference"},
    {ViolationKind::kMultipleQuestions, "multiple_questions"},
    {ViolationKind::kUnmappableQuestion, "unmappable_question"},
    {ViolationKind::kPrematureQuestion, "premature_question"},
    {ViolationKind::kPrematureGuess, "premature_guess"},
    {ViolationKind::kCompoundReEnumeration, "compound_re_enumeration"},
}};

bool is_conjunction(const std::string& word) {
  return word == "and" || word == "with" || word == "or" || word == "plus";
}

std::vector<std::vector<std::string>> split_fragments(std::string_view text) {
  std::vector<std::vector<std::string>> fragments;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
    std::vector<std::string> current;
    for (std::string& word : split_words(normalize_text(text.substr(start, stop - start)))) {
      if (is_conjunction(word)) {
        if (!current.empty()) fragments.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(std::move(word));
      }
    }
    if (!current.empty()) fragments.push_back(std::move(current));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fragments;
}

// Resolves a trailing fragment of a compound, borrowing the question stem
// from the first fragment when the fragment alone is not a known phrase.
std::optional<std::size_t> resolve_fragment(const Catalog& catalog, const std::vector<std::string>& lead,
                                            const std::vector<std::string>& fragment) {
  const std::string alone = join_words(fragment, 0, fragment.size());
  if (const auto v = catalog.resolve_normalized(alone)) return v;
  for (std::size_t keep = lead.size(); keep-- > 1;) {
    std::string candidate = join_words(lead, 0, keep);
    candidate.push_back(' ');
    candidate += alone;
    if (const auto v = catalog.resolve_normalized(candidate)) return v;
  }
  return std::nullopt;
}

const std::regex& index_pattern() {
  static const std::regex pattern(
      R"((#\s*\d+))"
      R"(|(\b(image|picture|photo|pic|dress|option|number|no|item|candidate|index|position|slot)\s*#?\s*\d+\b))"
      R"(|(\b(first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth|last|\d+(st|nd|rd|th))\s+(image|picture|photo|pic|one|dress|option|item|candidate)\b))"
      R"(|(\b(index|indices|indexes|position)\b))"
      R"(|(\bone[\s-]+by[\s-]+one\b))",
      std::regex::ECMAScript | std::regex::optimize);
  return pattern;
}

}  // namespace

std::string_view to_string(ViolationKind kind) {
  for (const auto& [k, name] : kViolationNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ViolationKind> violation_from_string(std::string_view text) {
  for (const auto& [k, name] : kViolationNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Answer answer) {
  switch (answer) {
    case Answer::kYes: return "yes";
    case Answer::kNo: return "no";
    case Answer::kUnsure: return "unsure";
    case Answer::kSkip: return "skip";
  }
  return "skip";
}

std::optional<Answer> answer_from_string(std::string_view text) {
  if (text == "yes") return Answer::kYes;
  if (text == "no") return Answer::kNo;
  if (text == "unsure") return Answer::kUnsure;
  if (text == "skip") return Answer::kSkip;
  return std::nullopt;
}

Verdict Verdict::make(Answer answer, std::optional<ViolationKind> violation) {
  if ((answer == Answer::kSkip) != violation.has_value()) {
    throw Error(ErrorCode::kInvalidConfig, "Skip must carry a violation and only Skip may");
  }
  return Verdict(answer, violation);
}

Question question_from_text(const Catalog& catalog, std::string_view text, int turn_index) {
  Question q;
  q.raw_text = std::string(text);
  q.turn_index = turn_index;
  if (const auto v = catalog.resolve_normalized(normalize_text(text))) {
    q.resolved_value = catalog.values()[*v].id;
    q.referenced_values.insert(*q.resolved_value);
    return q;
  }

  const auto fragments = split_fragments(text);
  if (fragments.size() < 2) return q;
  const auto first = catalog.resolve_normalized(join_words(fragments[0], 0, fragments[0].size()));
  if (!first) return q;
  std::set<std::string> referenced{catalog.values()[*first].id};
  for (std::size_t f = 1; f < fragments.size(); ++f) {
    const auto v = resolve_fragment(catalog, fragments[0], fragments[f]);
    if (!v) return q;
    referenced.insert(catalog.values()[*v].id);
  }
  q.resolved_value = catalog.values()[*first].id;
  q.referenced_values = std::move(referenced);
  return q;
}

Question question_for_value(const Catalog& catalog, std::string_view value_id, int turn_index) {
  Question q;
  q.turn_index = turn_index;
  if (const auto v = catalog.find_value(value_id)) {
    q.raw_text = catalog.values()[*v].question_templates.front();
    q.resolved_value = std::string(value_id);
    q.referenced_values.insert(std::string(value_id));
  } else {
    q.raw_text = std::string(value_id);
  }
  return q;
}

bool mentions_gallery_index(std::string_view raw_text) {
  std::string lowered(raw_text);
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return std::regex_search(lowered, index_pattern());
}

std::optional<ViolationKind> classify_question(const Catalog& catalog, const Question& question,
                                               std::span<const PriorTurn> history, Phase phase,
                                               bool contradiction_mode) {
  if (phase == Phase::kUpload) return ViolationKind::kPrematureQuestion;
  if (mentions_gallery_index(question.raw_text)) return ViolationKind::kIndexReference;

  std::vector<std::size_t> referenced;
  for (const std::string& id : question.referenced_values) {
    const auto v = catalog.find_value(id);
    if (!v) return ViolationKind::kUnmappableQuestion;
    referenced.push_back(*v);
  }
  if (referenced.empty()) return ViolationKind::kUnmappableQuestion;

  std::set<std::size_t> confirmed;
  std::map<std::size_t, std::set<std::size_t>> asked_by_type;
  for (const PriorTurn& turn : history) {
    if (turn.verdict.is_skip()) continue;
    for (const std::string& id : turn.question.referenced_values) {
      const auto v = catalog.find_value(id);
      if (!v) continue;
      asked_by_type[catalog.type_of(*v)].insert(*v);
      if (turn.verdict.answer() == Answer::kYes) confirmed.insert(*v);
    }
  }
  const bool all_confirmed = std::all_of(referenced.begin(), referenced.end(),
                                         [&](std::size_t v) { return confirmed.count(v) != 0; });
  const bool compound = referenced.size() > 1;

  if (compound && !all_confirmed) return ViolationKind::kMultipleQuestions;
  for (const std::size_t v : referenced) {
    if (catalog.is_forbidden(v)) return ViolationKind::kForbiddenAttribute;
  }
  for (const std::size_t v : referenced) {
    const auto asked = asked_by_type.find(catalog.type_of(v));
    if (asked == asked_by_type.end()) continue;
    const bool other_value = std::any_of(asked->second.begin(), asked->second.end(),
                                         [&](std::size_t u) { return u != v; });
    if (other_value) return ViolationKind::kEnumerationAcrossTurns;
    if (!compound && !contradiction_mode && asked->second.count(v) != 0) {
      return ViolationKind::kEnumerationAcrossTurns;
    }
  }
  if (compound && all_confirmed) return ViolationKind::kCompoundReEnumeration;
  return std::nullopt;
}

TerminalParse parse_terminal(std::string_view text, std::size_t feasible_size) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  if (text.substr(0, kGuessPrefix.size()) != kGuessPrefix) return NotAGuess{};
  std::string_view number = text.substr(kGuessPrefix.size());
  if (!number.empty() && number.back() == '.') number.remove_suffix(1);
  int index = 0;
  const auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), index);
  if (number.empty() || ec != std::errc() || end != number.data() + number.size() || index < 1 ||
      !std::all_of(number.begin(), number.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kMalformedIndex, "cannot read index from '" + std::string(text) + "'");
  }
  if (feasible_size > 1) return PrematureGuess{index};
  return GuessOutput{index};
}

std::string format_guess(int index) {
  return std::string(kGuessPrefix) + std::to_string(index) + ".";
}

}  // namespace hti
