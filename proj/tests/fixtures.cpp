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

#include "fixtures.hpp"

#include <fstream>
#include <set>

namespace hti::testing {
namespace {

constexpr auto kForbidden = ViolationKind::kForbiddenAttribute;
constexpr auto kEnumeration = ViolationKind::kEnumerationAcrossTurns;
constexpr auto kReEnumeration = ViolationKind::kCompoundReEnumeration;

ExpectedTurn valid(std::string text, Answer a) { return {std::move(text), a, std::nullopt}; }
ExpectedTurn skip(std::string text, ViolationKind why) { return {std::move(text), Answer::kSkip, why}; }

}  // namespace

const Catalog& dress_catalog() {
  static const Catalog catalog = load_catalog_file(std::string(HTI_FIXTURE_DIR) + "/dress_catalog.json");
  return catalog;
}

Catalog labeled_catalog(const LabelRows& rows) {
  std::vector<AttributeType> types = {{"t_anchor", "anchor", false}};
  std::vector<AttributeValue> values = {{"anchor", "t_anchor", "anchor", {"anchor?"}}};
  std::set<std::string> seen;
  std::vector<Item> items;
  for (const auto& [id, labels] : rows) {
    Item item{id, labels};
    item.labels["anchor"] = Label::kPresent;
    for (const auto& [v, label] : labels) {
      if (seen.insert(v).second) {
        types.push_back({"t_" + v, v, false});
        values.push_back({v, "t_" + v, v, {"has " + v + "?"}});
      }
    }
    items.push_back(std::move(item));
  }
  return Catalog::build("labeled", types, values, items, {});
}

Episode make_episode(std::string id, std::vector<std::string> gallery, std::size_t target_position, double tau) {
  Episode e;
  e.episode_id = std::move(id);
  e.gallery = std::move(gallery);
  e.target_position = target_position;
  e.config.tau = tau;
  e.pool_size = e.gallery.size() - 1;
  return e;
}

std::vector<AgentAction> DialogueFixture::script() const {
  std::vector<AgentAction> out;
  for (const ExpectedTurn& t : turns) out.push_back(AskText{t.text});
  if (guess) out.push_back(AskText{*guess});
  return out;
}

DialogueFixture forbidden_skips() {
  DialogueFixture f;
  f.name = "forbidden_skips";
  f.episode = make_episode("forbidden_skips", {"sk_b", "sk_a", "sk_c", "sk_t", "sk_d", "sk_e"}, 4, 0.8);
  f.turns = {
      valid("Does the dress have a tiered skirt?", Answer::kYes),
      valid("Is the dress made of a shiny or satin-like fabric?", Answer::kYes),
      skip("Does the dress have long sleeves?", kForbidden),
      skip("Is the dress sleeveless?", kForbidden),
      valid("Does the dress have a wrap-style front?", Answer::kYes),
      skip("Is the dress floor-length?", kForbidden),
      valid("Does the dress have a high-low hemline?", Answer::kNo),
      skip("Is the dress in a solid color?", kForbidden),
      valid("Does the dress have a ruffled hem?", Answer::kYes),
  };
  f.guess = "My guess of your favorite dress: #2.";
  f.outcome = Outcome::kIncorrect;
  return f;
}

DialogueFixture premature_upload() {
  DialogueFixture f;
  f.name = "premature_upload";
  std::vector<std::string> gallery;
  for (int i = 1; i <= 35; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "up_%02d", i);
    gallery.push_back(id);
  }
  f.episode = make_episode("premature_upload", gallery, 23, 0.3);
  f.batch_plan = {5, 5, 5, 5, 5, 5, 5};
  f.upload_replies = {
      AskText{"End of uploading"},
      AskText{"End of uploading"},
      AskText{"Does the dress have a ruffled hem?"},
      AskText{"Does the dress have a lace overlay?"},
      AskText{"Does the dress have a high neckline?"},
      AskText{"Does the dress have a V-neckline?"},
  };
  f.premature_outputs = 6;
  f.turns = {valid("Does the dress have a front tie detail?", Answer::kYes)};
  f.guess = "My guess of your favorite dress: #1.";
  f.outcome = Outcome::kIncorrect;
  return f;
}

DialogueFixture budget_exhausted() {
  DialogueFixture f;
  f.name = "budget_exhausted";
  f.episode = make_episode("budget_exhausted", {"bx_b", "bx_c", "bx_t", "bx_d", "bx_a", "bx_e", "bx_f"}, 3, 0.6);
  f.turns = {
      valid("Does your favorite dress feature a V-neckline?", Answer::kNo),
      skip("Does your favorite dress have an off-the-shoulder neckline?", kEnumeration),
      skip("Does your favorite dress have a square neckline?", kEnumeration),
      skip("Does your favorite dress have a sweetheart neckline?", kEnumeration),
      valid("Does your favorite dress have a wrap-style bodice?", Answer::kNo),
      valid("Does your favorite dress have a tiered skirt?", Answer::kNo),
      valid("Does your favorite dress have a smocked bodice?", Answer::kYes),
      valid("Does your favorite dress have flutter sleeves?", Answer::kNo),
      skip("Does your favorite dress have long sleeves?", kForbidden),
      valid("Does your favorite dress have a side slit?", Answer::kYes),
      skip("Does your favorite dress have a floral print?", kForbidden),
      skip("Does your favorite dress have a leaf print?", kForbidden),
      valid("Does your favorite dress have a high-low hemline?", Answer::kNo),
      valid("Does your favorite dress have a straight hemline?", Answer::kNo),
      valid("Does your favorite dress have a ruffled hemline?", Answer::kNo),
      skip("Does your favorite dress have a flared skirt?", kEnumeration),
      valid("Does your favorite dress have a fitted waist?", Answer::kYes),
      skip("Does your favorite dress have a midi length?", kForbidden),
      skip("Does your favorite dress have a maxi length?", kForbidden),
      skip("Does your favorite dress have a solid color?", kForbidden),
  };
  f.outcome = Outcome::kNoGuess;
  return f;
}

DialogueFixture compound_reenumeration() {
  DialogueFixture f;
  f.name = "compound_reenumeration";
  f.episode = make_episode("compound_reenumeration",
                           {"cr_c", "cr_d", "cr_a", "cr_e", "cr_f", "cr_g", "cr_t", "cr_h", "cr_i",
                            "cr_j", "cr_b", "cr_k", "cr_l", "cr_m"},
                           7, 0.5);
  f.turns = {
      valid("Is your favorite dress made of velvet fabric?", Answer::kNo),
      valid("Is your favorite dress a wrap-style dress?", Answer::kYes),
      skip("Does your favorite dress have a floral print?", kForbidden),
      valid("Does your favorite dress have a V-neckline?", Answer::kYes),
      valid("Does your favorite dress have a tiered skirt?", Answer::kNo),
      valid("Does your favorite dress have a slit?", Answer::kYes),
      valid("Does your favorite dress have a belt or tie at the waist?", Answer::kNo),
      valid("Does your favorite dress have a ruched detail?", Answer::kYes),
      skip("Does your favorite dress have a strapless neckline?", kEnumeration),
      skip("Does your favorite dress have a sweetheart neckline?", kEnumeration),
      valid("Does your favorite dress have a high-low hemline?", Answer::kYes),
      skip("Does your favorite dress have a wrap-style bodice with a V-neckline, a ruched detail, and a high-low "
           "hemline?",
           kReEnumeration),
      skip("Does your favorite dress have a wrap-style bodice with a V-neckline and a high-low hemline?",
           kReEnumeration),
      skip("Does your favorite dress have a V-neckline and a high-low hemline?", kReEnumeration),
      skip("Does your favorite dress have a V-neckline and a slit?", kReEnumeration),
      skip("Does your favorite dress have a V-neckline and ruched detailing?", kReEnumeration),
      skip("Does your favorite dress have a wrap-style bodice and a high-low hemline?", kReEnumeration),
      skip("Does your favorite dress have a wrap-style bodice and a slit?", kReEnumeration),
      skip("Does your favorite dress have a V-neckline and a wrap-style bodice?", kReEnumeration),
      skip("Does your favorite dress have a V-neckline and a ruched detail?", kReEnumeration),
  };
  f.outcome = Outcome::kNoGuess;
  return f;
}

}  // namespace hti::testing
