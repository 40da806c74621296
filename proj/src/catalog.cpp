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

#include "hti/catalog.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hti/error.hpp"
#include "hti/text.hpp"

namespace hti {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 12> kProhibitedTopics = {
    "sleeve length", "garment length", "color",  "prints/pattern",
    "age group",     "size",           "shoes",  "necklace",
    "hat",           "bag",            "background", "human model",
};

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key)) {
    throw Error(ErrorCode::kMalformedInput, where + ": missing field '" + key + "'");
  }
  return object.at(key);
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& field = require(object, key, where);
  if (!field.is_string()) {
    throw Error(ErrorCode::kMalformedInput, where + ": field '" + key + "' must be a string");
  }
  return field.get<std::string>();
}

const json& require_array(const json& object, const char* key, const std::string& where) {
  const json& field = require(object, key, where);
  if (!field.is_array()) {
    throw Error(ErrorCode::kMalformedInput, where + ": field '" + key + "' must be a list");
  }
  return field;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kPresent: return "present";
    case Label::kAbsent: return "absent";
    case Label::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<Label> label_from_string(std::string_view text) {
  if (text == "present") return Label::kPresent;
  if (text == "absent") return Label::kAbsent;
  if (text == "unknown") return Label::kUnknown;
  return std::nullopt;
}

std::span<const std::string_view> prohibited_topics() { return kProhibitedTopics; }

Catalog Catalog::build(std::string version, std::vector<AttributeType> types,
                       std::vector<AttributeValue> values, std::vector<Item> items,
                       std::map<std::string, std::string> synonyms) {
  Catalog c;
  c.version_ = std::move(version);
  c.types_ = std::move(types);
  c.values_ = std::move(values);
  c.items_ = std::move(items);
  c.synonyms_ = std::move(synonyms);

  for (std::size_t i = 0; i < c.types_.size(); ++i) {
    if (!c.type_lookup_.emplace(c.types_[i].id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "attribute type '" + c.types_[i].id + "'");
    }
  }

  c.value_type_.reserve(c.values_.size());
  for (std::size_t v = 0; v < c.values_.size(); ++v) {
    const AttributeValue& value = c.values_[v];
    if (!c.value_lookup_.emplace(value.id, v).second) {
      throw Error(ErrorCode::kDuplicateId, "attribute value '" + value.id + "'");
    }
    const auto type = c.type_lookup_.find(value.type_id);
    if (type == c.type_lookup_.end()) {
      throw Error(ErrorCode::kDanglingReference,
                  "value '" + value.id + "' references unknown type '" + value.type_id + "'");
    }
    c.value_type_.push_back(type->second);
    if (value.question_templates.empty()) {
      throw Error(ErrorCode::kEmptyTemplates, "value '" + value.id + "' has no templates");
    }
    for (const std::string& question : value.question_templates) {
      const std::string key = normalize_text(question);
      if (key.empty()) {
        throw Error(ErrorCode::kEmptyTemplates,
                    "value '" + value.id + "' has a template that normalizes to nothing");
      }
      if (!c.phrase_lookup_.emplace(key, v).second) {
        throw Error(ErrorCode::kDuplicateId, "question template '" + question +
                                                 "' is not distinct after normalization");
      }
    }
  }

  for (const auto& [surface, value_id] : c.synonyms_) {
    const auto value = c.value_lookup_.find(value_id);
    if (value == c.value_lookup_.end()) {
      throw Error(ErrorCode::kDanglingReference,
                  "synonym '" + surface + "' references unknown value '" + value_id + "'");
    }
    const std::string key = normalize_text(surface);
    if (key.empty()) {
      throw Error(ErrorCode::kMalformedInput, "synonym '" + surface + "' normalizes to nothing");
    }
    const auto [slot, inserted] = c.phrase_lookup_.emplace(key, value->second);
    if (!inserted && slot->second != value->second) {
      throw Error(ErrorCode::kDuplicateId,
                  "synonym '" + surface + "' collides with a phrase of another value");
    }
  }

  const std::size_t width = c.values_.size();
  c.labels_.assign(c.items_.size() * width, Label::kUnknown);
  c.present_.resize(c.items_.size());
  for (std::size_t i = 0; i < c.items_.size(); ++i) {
    const Item& item = c.items_[i];
    if (!c.item_lookup_.emplace(item.id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "item '" + item.id + "'");
    }
    for (const auto& [value_id, label] : item.labels) {
      const auto value = c.value_lookup_.find(value_id);
      if (value == c.value_lookup_.end()) {
        throw Error(ErrorCode::kDanglingReference,
                    "item '" + item.id + "' labels unknown value '" + value_id + "'");
      }
      c.labels_[i * width + value->second] = label;
      if (label == Label::kPresent) {
        c.present_[i].push_back(static_cast<std::uint32_t>(value->second));
      }
    }
    if (c.present_[i].empty()) {
      throw Error(ErrorCode::kNoPresentLabel, "item '" + item.id + "' has no present label");
    }
    std::sort(c.present_[i].begin(), c.present_[i].end());
  }
  return c;
}

std::optional<std::size_t> Catalog::find_value(std::string_view value_id) const {
  const auto it = value_lookup_.find(std::string(value_id));
  if (it == value_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Catalog::find_item(std::string_view item_id) const {
  const auto it = item_lookup_.find(std::string(item_id));
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Catalog::find_type(std::string_view type_id) const {
  const auto it = type_lookup_.find(std::string(type_id));
  if (it == type_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Catalog::value_index(std::string_view value_id) const {
  if (const auto v = find_value(value_id)) return *v;
  throw Error(ErrorCode::kUnknownValue, "value '" + std::string(value_id) + "'");
}

std::size_t Catalog::item_index(std::string_view item_id) const {
  if (const auto i = find_item(item_id)) return *i;
  throw Error(ErrorCode::kUnknownItem, "item '" + std::string(item_id) + "'");
}

Label Catalog::label(std::string_view item_id, std::string_view value_id) const {
  return label(item_index(item_id), value_index(value_id));
}

std::set<std::string> Catalog::attrs_of(std::string_view item_id) const {
  std::set<std::string> attrs;
  for (const std::uint32_t v : present_[item_index(item_id)]) attrs.insert(values_[v].id);
  return attrs;
}

std::optional<std::string> Catalog::resolve_question_text(std::string_view text) const {
  if (const auto v = resolve_normalized(normalize_text(text))) return values_[*v].id;
  return std::nullopt;
}

std::optional<std::size_t> Catalog::resolve_normalized(std::string_view normalized) const {
  const auto it = phrase_lookup_.find(std::string(normalized));
  if (it == phrase_lookup_.end()) return std::nullopt;
  return it->second;
}

bool Catalog::operator==(const Catalog& other) const {
  return version_ == other.version_ && types_ == other.types_ && values_ == other.values_ &&
         items_ == other.items_ && synonyms_ == other.synonyms_;
}

Catalog load_catalog(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedInput, "catalog must be an object");

  std::string version = require_string(doc, "version", "catalog");

  std::vector<AttributeType> types;
  for (const json& entry : require_array(doc, "attribute_types", "catalog")) {
    AttributeType type;
    type.id = require_string(entry, "id", "attribute_types[]");
    type.display_name = require_string(entry, "display_name", "attribute_types[]");
    const json& forbidden = require(entry, "forbidden", "attribute_types[]");
    if (!forbidden.is_boolean()) {
      throw Error(ErrorCode::kMalformedInput, "attribute_types[].forbidden must be a boolean");
    }
    type.forbidden = forbidden.get<bool>();
    types.push_back(std::move(type));
  }

  std::vector<AttributeValue> values;
  for (const json& entry : require_array(doc, "attribute_values", "catalog")) {
    AttributeValue value;
    value.id = require_string(entry, "id", "attribute_values[]");
    value.type_id = require_string(entry, "type_id", "attribute_values[]");
    value.canonical_name = require_string(entry, "canonical_name", "attribute_values[]");
    for (const json& question : require_array(entry, "question_templates", "attribute_values[]")) {
      if (!question.is_string()) {
        throw Error(ErrorCode::kMalformedInput, "question_templates entries must be strings");
      }
      value.question_templates.push_back(question.get<std::string>());
    }
    values.push_back(std::move(value));
  }

  std::vector<Item> items;
  for (const json& entry : require_array(doc, "items", "catalog")) {
    Item item;
    item.id = require_string(entry, "id", "items[]");
    const json& labels = require(entry, "labels", "items[]");
    if (!labels.is_object()) throw Error(ErrorCode::kMalformedInput, "items[].labels must be a map");
    for (const auto& [value_id, text] : labels.items()) {
      const auto label = text.is_string() ? label_from_string(text.get<std::string>()) : std::nullopt;
      if (!label) {
        throw Error(ErrorCode::kMalformedInput,
                    "item '" + item.id + "' label for '" + value_id + "' must be present|absent|unknown");
      }
      item.labels.emplace(value_id, *label);
    }
    items.push_back(std::move(item));
  }

  std::map<std::string, std::string> synonyms;
  const json& synonym_doc = require(doc, "synonyms", "catalog");
  if (!synonym_doc.is_object()) throw Error(ErrorCode::kMalformedInput, "synonyms must be a map");
  for (const auto& [surface, value_id] : synonym_doc.items()) {
    if (!value_id.is_string()) throw Error(ErrorCode::kMalformedInput, "synonym targets must be strings");
    synonyms.emplace(surface, value_id.get<std::string>());
  }

  return Catalog::build(std::move(version), std::move(types), std::move(values), std::move(items),
                        std::move(synonyms));
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open catalog '" + path.string() + "'");
  return load_catalog(in);
}

std::string serialize_catalog(const Catalog& catalog) {
  json doc = json::object();
  doc["version"] = catalog.version();
  json types = json::array();
  for (const AttributeType& type : catalog.types()) {
    types.push_back({{"id", type.id}, {"display_name", type.display_name}, {"forbidden", type.forbidden}});
  }
  doc["attribute_types"] = std::move(types);
  json values = json::array();
  for (const AttributeValue& value : catalog.values()) {
    values.push_back({{"id", value.id},
                      {"type_id", value.type_id},
                      {"canonical_name", value.canonical_name},
                      {"question_templates", value.question_templates}});
  }
  doc["attribute_values"] = std::move(values);
  json items = json::array();
  for (const Item& item : catalog.items()) {
    json labels = json::object();
    for (const auto& [value_id, label] : item.labels) labels[value_id] = to_string(label);
    items.push_back({{"id", item.id}, {"labels", std::move(labels)}});
  }
  doc["items"] = std::move(items);
  doc["synonyms"] = catalog.synonyms();
  return doc.dump(2) + "\n";
}

}  // namespace hti
