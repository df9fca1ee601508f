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

#include "capbias/lexicon.hpp"

#include <gtest/gtest.h>

namespace capbias {
namespace {

using GC = GenderClass;

Lexicon from(const std::string& text) { return Lexicon::from_json({"lex", text}); }

TEST(Lexicon, DefaultClasses) {
  const Lexicon lex = Lexicon::builtin();
  EXPECT_EQ(lex.classify("man"), GC::MaleSingular);
  EXPECT_EQ(lex.classify("lady"), GC::FemaleSingular);
  EXPECT_EQ(lex.classify("women"), GC::FemalePlural);
  EXPECT_EQ(lex.classify("boys"), GC::MalePlural);
  EXPECT_EQ(lex.classify("himself"), GC::MalePronoun);
  EXPECT_EQ(lex.classify("hers"), GC::FemalePronoun);
  EXPECT_EQ(lex.classify("its"), GC::NeutralPronoun);
  EXPECT_EQ(lex.classify("skier"), GC::NeutralSingularPerson);
  EXPECT_EQ(lex.classify("people"), GC::NeutralPlural);
  EXPECT_EQ(lex.classify("bicycle"), GC::NonPerson);
  EXPECT_EQ(lex.classify(""), GC::NonPerson);
  EXPECT_EQ(lex.version(), "capbias-default-1");
}

TEST(Lexicon, DefaultListsHoldTheRequiredWords) {
  const Lexicon lex = Lexicon::builtin();
  for (const char* w : {"man", "boy", "guy", "gentleman", "male", "groom",
                        "father", "husband", "son", "brother"})
    EXPECT_EQ(lex.classify(w), GC::MaleSingular) << w;
  for (const char* w : {"woman", "girl", "gal", "lady", "female", "bride",
                        "mother", "wife", "daughter", "sister"})
    EXPECT_EQ(lex.classify(w), GC::FemaleSingular) << w;
  for (const char* w : {"person", "youngster", "child", "kid", "player", "rider",
                        "skier", "snowboarder", "surfer", "skateboarder"})
    EXPECT_EQ(lex.classify(w), GC::NeutralSingularPerson) << w;
  for (const char* w : {"he", "him", "his", "himself"})
    EXPECT_EQ(lex.classify(w), GC::MalePronoun) << w;
  for (const char* w : {"she", "her", "hers", "herself"})
    EXPECT_EQ(lex.classify(w), GC::FemalePronoun) << w;
  for (const char* w : {"it", "its", "itself", "they", "them", "their"})
    EXPECT_EQ(lex.classify(w), GC::NeutralPronoun) << w;
}

TEST(Lexicon, Replacements) {
  const Lexicon lex = Lexicon::builtin();
  EXPECT_EQ(lex.replacement("lady"), "person");
  EXPECT_EQ(lex.replacement("man"), "person");
  EXPECT_EQ(lex.replacement("gal"), "youngster");
  EXPECT_EQ(lex.replacement("boy"), "youngster");
  EXPECT_EQ(lex.replacement("women"), "people");
  EXPECT_EQ(lex.replacement("girls"), "youngsters");
  EXPECT_EQ(lex.replacement("her"), "its");
  EXPECT_EQ(lex.replacement("himself"), "itself");
  EXPECT_EQ(lex.replacement("he"), "it");
  EXPECT_THROW(lex.replacement("dog"), ContractError);
  EXPECT_THROW(lex.replacement("person"), ContractError);
}

TEST(Lexicon, HerTakesObjectFormBeforeFunctionWordsAndAtTheEnd) {
  const Lexicon lex = Lexicon::builtin();
  using V = std::vector<std::string>;
  EXPECT_EQ(lex.replacement_at(V{"holding", "her", "phone"}, 1), "its");
  EXPECT_EQ(lex.replacement_at(V{"looking", "at", "her"}, 2), "it");
  EXPECT_EQ(lex.replacement_at(V{"giving", "her", "a", "hug"}, 1), "it");
  EXPECT_EQ(lex.replacement_at(V{"behind", "her", "on", "a", "bench"}, 1),
            "it");
  EXPECT_EQ(lex.replacement_at(V{"his", "dog"}, 0), "its");
}

TEST(LexiconProperty, EveryGenderedWordMapsIntoItsNeutralClass) {
  const Lexicon lex = Lexicon::builtin();
  std::size_t checked = 0;
  for (std::size_t i = 0; i < kListedClasses; ++i) {
    const auto cls = static_cast<GC>(i);
    for (const auto& w : lex.words(cls)) {
      EXPECT_EQ(lex.classify(w), cls) << w;
      if (!is_gendered(cls)) continue;
      EXPECT_EQ(lex.classify(lex.replacement(w)), neutral_counterpart(cls)) << w;
      ++checked;
    }
  }
  for (const auto& [w, form] : lex.object_forms())
    EXPECT_EQ(lex.classify(form), GC::NeutralPronoun);
  EXPECT_EQ(checked, 48u);
}

TEST(LexiconProperty, ListsPartitionTheirUnion) {
  const Lexicon lex = Lexicon::builtin();
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < kListedClasses; ++i)
    for (const auto& w : lex.words(static_cast<GC>(i))) ++seen[w];
  for (const auto& [w, n] : seen) EXPECT_EQ(n, 1) << w;
}

TEST(Lexicon, ConfigExtendsAList) {
  const Lexicon lex = from(R"({
    "male_singular": ["man", "boy", "guy", "gentleman", "male", "groom",
                      "father", "husband", "son", "brother", "dude"],
    "replacements": {"dude": "person"},
    "version": "test-1"})");
  EXPECT_EQ(lex.classify("dude"), GC::MaleSingular);
  EXPECT_EQ(lex.replacement("dude"), "person");
  EXPECT_EQ(lex.classify("woman"), GC::FemaleSingular);
  EXPECT_EQ(lex.version(), "test-1");
  EXPECT_TRUE(lex.injection_problem().empty());
}

TEST(Lexicon, ConfigVersionDefaultsToContentHash) {
  const Lexicon a = from(R"({"neutral_plural": ["people", "youngsters"]})");
  const Lexicon b = from(R"({"neutral_plural": ["people", "youngsters"] })");
  EXPECT_EQ(a.version().rfind("custom-", 0), 0u);
  EXPECT_NE(a.version(), b.version());
}

TEST(Lexicon, ReplacingAListDropsItsDefaultReplacements) {
  const Lexicon lex = from(R"({"male_singular": ["dude"],
                               "replacements": {"dude": "person"}})");
  EXPECT_EQ(lex.classify("man"), GC::NonPerson);
  EXPECT_EQ(lex.replacements().count("man"), 0u);
  EXPECT_FALSE(lex.injection_problem().empty());
}

TEST(Lexicon, OverlappingListsNameTheWord) {
  try {
    from(R"({"neutral_singular": ["person", "youngster", "man"]})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'man'"), std::string::npos);
  }
}

TEST(Lexicon, UnmappedGenderedWord) {
  try {
    from(R"({"female_singular": ["woman", "dudette"],
             "replacements": {}})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("dudette"), std::string::npos);
  }
}

TEST(Lexicon, ReplacementMustTargetTheMatchingNeutralClass) {
  EXPECT_THROW(from(R"({"replacements": {"man": "people"}})"), ValidationError);
  EXPECT_THROW(from(R"({"replacements": {"man": "robot"}})"), ValidationError);
  EXPECT_THROW(from(R"({"replacements": {"robot": "person"}})"),
               ValidationError);
}

TEST(Lexicon, UnknownKeysAndBadJson) {
  EXPECT_THROW(from(R"({"male_words": []})"), ValidationError);
  EXPECT_THROW(from(R"({"male_singular": [)"), ParseError);
  EXPECT_THROW(from(R"({"male_singular": "man"})"), ValidationError);
}

TEST(Lexicon, LoadWithoutPathIsBuiltin) {
  EXPECT_EQ(load_lexicon(std::nullopt).version(), Lexicon::kDefaultVersion);
}

}  // namespace
}  // namespace capbias
