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

#ifndef HTI_TEXT_HPP_
#define HTI_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace hti {

/// Canonical form used for every question-text comparison: ASCII lowercase,
/// punctuation removed (not replaced), whitespace runs collapsed to one space,
/// leading/trailing whitespace trimmed. Non-ASCII bytes pass through.
///
///   "Does the dress have a Wrap-Style front?" -> "does the dress have a wrapstyle front"
std::string normalize_text(std::string_view text);

/// Splits normalized text on single spaces.
std::vector<std::string> split_words(std::string_view normalized);

std::string join_words(const std::vector<std::string>& words, std::size_t begin,
                       std::size_t end);

}  // namespace hti

#endif  // HTI_TEXT_HPP_
