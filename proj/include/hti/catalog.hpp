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

#ifndef HTI_CATALOG_HPP_
#define HTI_CATALOG_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hti {

/// Ternary item-value label. Pairs absent from the file default to kUnknown.
enum class Label : std::uint8_t { kUnknown = 0, kPresent = 1, kAbsent = 2 };

std::string_view to_string(Label label);
std::optional<Label> label_from_string(std::string_view text);

struct AttributeType {
  std::string id;
  std::string display_name;
  bool forbidden = false;

  bool operator==(const AttributeType&) const = default;
};

struct AttributeValue {
  std::string id;
  std::string type_id;
  std::string canonical_name;
  std::vector<std::string> question_templates;

  bool operator==(const AttributeValue&) const = default;
};

struct Item {
  std::string id;
  /// Labels exactly as declared in the source; undeclared pairs are Unknown.
  std::map<std::string, Label> labels;

  bool operator==(const Item&) const = default;
};

/// The topics questions may never touch. Catalogs model each as a type with
/// `forbidden = true`; the list is exposed for fixture builders and docs.
std::span<const std::string_view> prohibited_topics();

/// Immutable, validated attribute taxonomy plus per-item labels.
///
/// Values and items are addressed either by string id or by dense index (the
/// position in file order). Dense indices are what the hot paths use; string
/// ids are what crosses module and file boundaries.
class Catalog {
 public:
  /// Validates and indexes the parts. Throws Error with kDuplicateId,
  /// kDanglingReference, kEmptyTemplates or kNoPresentLabel.
  static Catalog build(std::string version, std::vector<AttributeType> types,
                       std::vector<AttributeValue> values, std::vector<Item> items,
                       std::map<std::string, std::string> synonyms);

  const std::string& version() const { return version_; }
  const std::vector<AttributeType>& types() const { return types_; }
  const std::vector<AttributeValue>& values() const { return values_; }
  const std::vector<Item>& items() const { return items_; }
  const std::map<std::string, std::string>& synonyms() const { return synonyms_; }

  std::size_t value_count() const { return values_.size(); }
  std::size_t item_count() const { return items_.size(); }

  std::optional<std::size_t> find_value(std::string_view value_id) const;
  std::optional<std::size_t> find_item(std::string_view item_id) const;
  std::optional<std::size_t> find_type(std::string_view type_id) const;

  /// Throwing lookups (kUnknownValue / kUnknownItem).
  std::size_t value_index(std::string_view value_id) const;
  std::size_t item_index(std::string_view item_id) const;

  Label label(std::size_t item, std::size_t value) const {
    return labels_[item * values_.size() + value];
  }
  Label label(std::string_view item_id, std::string_view value_id) const;

  std::size_t type_of(std::size_t value) const { return value_type_[value]; }
  bool is_forbidden(std::size_t value) const { return types_[value_type_[value]].forbidden; }

  /// Attr(item): ascending dense indices of the values labeled Present.
  const std::vector<std::uint32_t>& present_values(std::size_t item) const {
    return present_[item];
  }

  /// Attr(item) by id. Throws kUnknownItem.
  std::set<std::string> attrs_of(std::string_view item_id) const;

  /// Exact match of normalize_text(text) against every question template and
  /// synonym key. Returns the value id, or nullopt for Unresolvable.
  std::optional<std::string> resolve_question_text(std::string_view text) const;
  std::optional<std::size_t> resolve_normalized(std::string_view normalized) const;

  bool operator==(const Catalog& other) const;

 private:
  Catalog() = default;

  std::string version_;
  std::vector<AttributeType> types_;
  std::vector<AttributeValue> values_;
  std::vector<Item> items_;
  std::map<std::string, std::string> synonyms_;

  std::unordered_map<std::string, std::size_t> type_lookup_;
  std::unordered_map<std::string, std::size_t> value_lookup_;
  std::unordered_map<std::string, std::size_t> item_lookup_;
  std::unordered_map<std::string, std::size_t> phrase_lookup_;
  std::vector<std::size_t> value_type_;
  std::vector<Label> labels_;
  std::vector<std::vector<std::uint32_t>> present_;
};

/// Parses the JSON catalog document. Throws kMalformedInput on parse or shape
/// errors, plus everything Catalog::build throws.
Catalog load_catalog(std::istream& source);
Catalog load_catalog_file(const std::filesystem::path& path);

/// Deterministic JSON rendering (2-space indent, keys sorted, trailing
/// newline). load_catalog(serialize_catalog(c)) == c.
std::string serialize_catalog(const Catalog& catalog);

}  // namespace hti

#endif  // HTI_CATALOG_HPP_
