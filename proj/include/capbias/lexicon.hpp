// Licensed under the Apache License, Version 2.0 (the 'License');
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an 'AS IS' BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Copyright 2026 The capbias Authors.
// Gender lexicon: token classes and the neutral replacement map.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "capbias/corpus.hpp"
#include "capbias/error.hpp"
#include "capbias/hash.hpp"
#include "json.hpp"

namespace capbias {

enum class GenderClass {
  MaleSingular,
  FemaleSingular,
  NeutralSingularPerson,
  MalePlural,
  FemalePlural,
  NeutralPlural,
  MalePronoun,
  FemalePronoun,
  NeutralPronoun,
  NonPerson,
};

inline constexpr std::size_t kListedClasses = 9;  // all but NonPerson

inline constexpr std::string_view to_string(GenderClass c) {
  switch (c) {
    case GenderClass::MaleSingular: return "MaleSingular";
    case GenderClass::FemaleSingular: return "FemaleSingular";
    case GenderClass::NeutralSingularPerson: return "NeutralSingularPerson";
    case GenderClass::MalePlural: return "MalePlural";
    case GenderClass::FemalePlural: return "FemalePlural";
    case GenderClass::NeutralPlural: return "NeutralPlural";
    case GenderClass::MalePronoun: return "MalePronoun";
    case GenderClass::FemalePronoun: return "FemalePronoun";
    case GenderClass::NeutralPronoun: return "NeutralPronoun";
    case GenderClass::NonPerson: return "NonPerson";
  }
  return "?";
}

inline constexpr bool is_male(GenderClass c) {
  return c == GenderClass::MaleSingular || c == GenderClass::MalePlural ||
         c == GenderClass::MalePronoun;
}
inline constexpr bool is_female(GenderClass c) {
  return c == GenderClass::FemaleSingular || c == GenderClass::FemalePlural ||
         c == GenderClass::FemalePronoun;
}
inline constexpr bool is_gendered(GenderClass c) {
  return is_male(c) || is_female(c);
}
inline constexpr bool is_singular_person(GenderClass c) {
  return c == GenderClass::MaleSingular || c == GenderClass::FemaleSingular ||
         c == GenderClass::NeutralSingularPerson;
}
inline constexpr bool is_plural_person(GenderClass c) {
  return c == GenderClass::MalePlural || c == GenderClass::FemalePlural ||
         c == GenderClass::NeutralPlural;
}
// Subject words; pronouns are not person words.
inline constexpr bool is_person_word(GenderClass c) {
  return is_singular_person(c) || is_plural_person(c);
}
inline constexpr bool is_pronoun(GenderClass c) {
  return c == GenderClass::MalePronoun || c == GenderClass::FemalePronoun ||
         c == GenderClass::NeutralPronoun;
}

// Neutral class a gendered class is rewritten into.
inline constexpr GenderClass neutral_counterpart(GenderClass c) {
  if (is_singular_person(c)) return GenderClass::NeutralSingularPerson;
  if (is_plural_person(c)) return GenderClass::NeutralPlural;
  if (is_pronoun(c)) return GenderClass::NeutralPronoun;
  return GenderClass::NonPerson;
}

// Words the reinjector writes back into neutral captions.
struct CanonicalWords {
  std::string man = "man", woman = "woman";
  std::string boy = "boy", girl = "girl", child = "child";
  std::string men = "men", women = "women";
  std::string boys = "boys", girls = "girls", children = "children";
  // Neutral words the reinjector looks for.
  std::string person = "person", youngster = "youngster";
  std::string people = "people", youngsters = "youngsters";
};

class Lexicon {
 public:
  static constexpr std::string_view kDefaultVersion = "capbias-default-1";

  static inline const std::array<std::string_view, kListedClasses> kKeys = {
      "male_singular",  "female_singular",  "neutral_singular",
      "male_plural",    "female_plural",    "neutral_plural",
      "male_pronouns",  "female_pronouns",  "neutral_pronouns"};

  // The pinned default lexicon.
  static Lexicon builtin() {
    Lexicon lex;
    lex.lists_ = {{
        {"man", "boy", "guy", "gentleman", "male", "groom", "father",
         "husband", "son", "brother"},
        {"woman", "girl", "gal", "lady", "female", "bride", "mother", "wife",
         "daughter", "sister"},
        {"person", "youngster", "child", "kid", "player", "rider", "skier",
         "snowboarder", "surfer", "skateboarder"},
        {"men", "boys", "guys", "gentlemen", "males", "grooms", "fathers",
         "husbands", "sons", "brothers"},
        {"women", "girls", "gals", "ladies", "females", "brides", "mothers",
         "wives", "daughters", "sisters"},
        {"people", "youngsters", "children", "kids", "players", "riders",
         "skiers", "snowboarders", "surfers", "skateboarders", "persons"},
        {"he", "him", "his", "himself"},
        {"she", "her", "hers", "herself"},
        {"it", "its", "itself", "they", "them", "their"},
    }};
    lex.replacements_ = {
        {"man", "person"},       {"gentleman", "person"},
        {"male", "person"},      {"groom", "person"},
        {"father", "person"},    {"husband", "person"},
        {"brother", "person"},   {"boy", "youngster"},
        {"guy", "youngster"},    {"son", "youngster"},
        {"woman", "person"},     {"lady", "person"},
        {"female", "person"},    {"bride", "person"},
        {"mother", "person"},    {"wife", "person"},
        {"sister", "person"},    {"girl", "youngster"},
        {"gal", "youngster"},    {"daughter", "youngster"},
        {"men", "people"},       {"gentlemen", "people"},
        {"males", "people"},     {"grooms", "people"},
        {"fathers", "people"},   {"husbands", "people"},
        {"brothers", "people"},  {"boys", "youngsters"},
        {"guys", "youngsters"},  {"sons", "youngsters"},
        {"women", "people"},     {"ladies", "people"},
        {"females", "people"},   {"brides", "people"},
        {"mothers", "people"},   {"wives", "people"},
        {"sisters", "people"},   {"girls", "youngsters"},
        {"gals", "youngsters"},  {"daughters", "youngsters"},
        {"he", "it"},            {"him", "it"},
        {"his", "its"},          {"himself", "itself"},
        {"she", "it"},           {"her", "its"},
        {"hers", "its"},         {"herself", "itself"},
    };
    lex.object_forms_ = {{"her", "it"}};
    lex.version_ = kDefaultVersion;
    lex.validate();
    return lex;
  }

  // Parses a JSON config. Keys present replace the corresponding default
  // list; "replacements" entries override default replacements.
  static Lexicon from_json(const JsonSource& src) {
    nlohmann::json doc = detail::parse_json(src);
    Lexicon lex = builtin();
    lex.version_ = "custom-" + sha256_hex(src.text).substr(0, 12);
    std::unordered_set<std::string> explicit_sources;
    detail::with_schema(src.name, [&] {
      if (!doc.is_object())
        throw ValidationError(src.name + ": lexicon config must be an object");
      for (const auto& [key, value] : doc.items()) {
        if (key == "replacements") {
          for (const auto& [from, to] : value.items()) {
            lex.replacements_[from] = to.get<std::string>();
            explicit_sources.insert(from);
          }
        } else if (key == "object_forms") {
          lex.object_forms_.clear();
          for (const auto& [from, to] : value.items())
            lex.object_forms_[from] = to.get<std::string>();
        } else if (key == "version") {
          lex.version_ = value.get<std::string>();
        } else {
          std::size_t i = 0;
          while (i < kKeys.size() && kKeys[i] != key) ++i;
          if (i == kKeys.size())
            throw ValidationError(src.name + ": unknown lexicon key '" + key +
                                  "'");
          lex.lists_[i] = value.get<std::vector<std::string>>();
        }
      }
      return 0;
    });
    // Default replacements of words a config list dropped go with them.
    std::unordered_set<std::string> listed;
    for (const auto& l : lex.lists_) listed.insert(l.begin(), l.end());
    std::erase_if(lex.replacements_, [&](const auto& kv) {
      return !listed.count(kv.first) && !explicit_sources.count(kv.first);
    });
    std::erase_if(lex.object_forms_,
                  [&](const auto& kv) { return !listed.count(kv.first); });
    lex.validate();
    return lex;
  }

  GenderClass classify(std::string_view token) const {
    auto it = class_of_.find(std::string(token));
    return it == class_of_.end() ? GenderClass::NonPerson : it->second;
  }

  // Neutral replacement of a gendered token, ignoring context.
  const std::string& replacement(std::string_view token) const {
    auto it = replacements_.find(std::string(token));
    if (it == replacements_.end())
      throw ContractError("'" + std::string(token) + "' is not a gendered word");
    return it->second;
  }

  // Neutral replacement of tokens[i]. Ambiguous pronouns ("her") take their
  // object form when followed by nothing or by a function word, and their
  // possessive form otherwise.
  const std::string& replacement_at(const std::vector<std::string>& tokens,
                                    std::size_t i) const {
    const std::string& tok = tokens.at(i);
    auto obj = object_forms_.find(tok);
    if (obj != object_forms_.end()) {
      if (i + 1 == tokens.size() || function_words().count(tokens[i + 1]))
        return obj->second;
    }
    return replacement(tok);
  }

  const std::vector<std::string>& words(GenderClass c) const {
    if (c == GenderClass::NonPerson)
      throw ContractError("NonPerson has no word list");
    return lists_[static_cast<std::size_t>(c)];
  }

  const std::map<std::string, std::string>& replacements() const {
    return replacements_;
  }
  const std::map<std::string, std::string>& object_forms() const {
    return object_forms_;
  }
  const CanonicalWords& canonical() const { return canonical_; }
  const std::string& version() const { return version_; }

  // Empty when the canonical reinjection words round-trip through this
  // lexicon; otherwise the reason they do not.
  const std::string& injection_problem() const { return injection_problem_; }

  // Function words after which an ambiguous pronoun is read as an object.
  static const std::unordered_set<std::string>& function_words() {
    static const std::unordered_set<std::string> kWords = {
        "a",      "an",    "the",   "and",    "or",     "but",   "to",
        "in",     "on",    "at",    "with",   "by",     "for",   "from",
        "of",     "off",   "up",    "down",   "into",   "onto",  "over",
        "under",  "while", "as",    "is",     "are",    "was",   "were",
        "be",     "near",  "next",  "behind", "around", "through",
        "across", "out",   "away",  "back",   "so",     "then",  "this",
        "that",   "there", "here",  "who",    "which",  "where", "when"};
    return kWords;
  }

 private:
  void validate() {
    class_of_.clear();
    for (std::size_t i = 0; i < kListedClasses; ++i) {
      for (const auto& w : lists_[i]) {
        auto [it, fresh] = class_of_.emplace(w, static_cast<GenderClass>(i));
        if (!fresh) {
          if (it->second == static_cast<GenderClass>(i))
            throw ValidationError("word '" + w + "' listed twice in " +
                                  std::string(kKeys[i]));
          throw ValidationError(
              "word '" + w + "' listed in both " +
              std::string(kKeys[static_cast<std::size_t>(it->second)]) +
              " and " + std::string(kKeys[i]));
        }
      }
    }
    for (const auto& [word, cls] : class_of_) {
      if (!is_gendered(cls)) continue;
      auto it = replacements_.find(word);
      if (it == replacements_.end())
        throw ValidationError("gendered word '" + word +
                              "' has no neutral replacement");
      check_target(word, cls, it->second);
    }
    for (const auto& [from, to] : replacements_)
      if (!is_gendered(classify(from)))
        throw ValidationError("replacement source '" + from +
                              "' is not a gendered word");
    for (const auto& [from, to] : object_forms_) {
      if (!is_gendered(classify(from)))
        throw ValidationError("object form source '" + from +
                              "' is not a gendered word");
      check_target(from, classify(from), to);
    }

    injection_problem_.clear();
    const CanonicalWords& cw = canonical_;
    const std::pair<const std::string*, const std::string*> back[] = {
        {&cw.man, &cw.person},        {&cw.woman, &cw.person},
        {&cw.boy, &cw.youngster},     {&cw.girl, &cw.youngster},
        {&cw.men, &cw.people},        {&cw.women, &cw.people},
        {&cw.boys, &cw.youngsters},   {&cw.girls, &cw.youngsters}};
    for (const auto& [g, n] : back) {
      auto it = replacements_.find(*g);
      if (it == replacements_.end() || it->second != *n) {
        injection_problem_ = "lexicon does not map '" + *g + "' to '" + *n + "'";
        break;
      }
    }
  }

  void check_target(const std::string& word, GenderClass cls,
                    const std::string& target) const {
    if (classify(target) != neutral_counterpart(cls))
      throw ValidationError(
          "replacement '" + word + "' -> '" + target + "' must target a " +
          std::string(to_string(neutral_counterpart(cls))) + " word");
  }

  std::array<std::vector<std::string>, kListedClasses> lists_;
  std::unordered_map<std::string, GenderClass> class_of_;
  std::map<std::string, std::string> replacements_;
  std::map<std::string, std::string> object_forms_;
  CanonicalWords canonical_;
  std::string version_;
  std::string injection_problem_;
};

// Loads a lexicon config, or the built-in default when no path is given.
inline Lexicon load_lexicon(const std::optional<std::string>& path) {
  if (!path) return Lexicon::builtin();
  return Lexicon::from_json({*path, read_file(*path)});
}

}  // namespace capbias
