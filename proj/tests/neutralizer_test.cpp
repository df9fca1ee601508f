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

#include "capbias/neutralizer.hpp"

#include <gtest/gtest.h>

#include <random>

namespace capbias {
namespace {

using V = std::vector<std::string>;

const Lexicon& lex() {
  static const Lexicon l = Lexicon::builtin();
  return l;
}

V neutral(const std::string& s) { return neutralize_tokens(lex(), tokenize(s)).tokens; }

TEST(Neutralizer, SingleSubject) {
  EXPECT_EQ(join_tokens(neutral("a man riding a bike with a dog on the back")),
            "a person riding a bike with a dog on the back");
}

TEST(Neutralizer, NoGenderedTokens) {
  auto n = neutralize_tokens(lex(), tokenize("a plate of food on a table"), 5);
  EXPECT_EQ(join_tokens(n.tokens), "a plate of food on a table");
  EXPECT_TRUE(n.record.edits.empty());
  EXPECT_EQ(n.record.caption_id, 5);
}

TEST(Neutralizer, PluralsAndAges) {
  auto n = neutralize_tokens(lex(), tokenize("two men and a girl"));
  EXPECT_EQ(join_tokens(n.tokens), "two people and a youngster");
  ASSERT_EQ(n.record.edits.size(), 2u);
  EXPECT_EQ(n.record.edits[0].index, 1u);
  EXPECT_EQ(n.record.edits[0].original, "men");
  EXPECT_EQ(n.record.edits[0].replacement, "people");
  EXPECT_EQ(n.record.edits[0].original_class, GenderClass::MalePlural);
  EXPECT_EQ(n.record.edits[1].index, 4u);
  EXPECT_EQ(n.record.edits[1].original_class, GenderClass::FemaleSingular);
}

TEST(Neutralizer, Pronouns) {
  EXPECT_EQ(join_tokens(neutral("a woman holding her phone to herself")),
            "a person holding its phone to itself");
  EXPECT_EQ(join_tokens(neutral("a man hugging her")), "a person hugging it");
  EXPECT_EQ(join_tokens(neutral("he rides his horse")), "it rides its horse");
}

TEST(Neutralizer, CaptionRecordOverload) {
  CaptionRecord c{42, 1, "The Lady's hat", tokenize("The Lady's hat")};
  auto n = neutralize_caption(lex(), c);
  EXPECT_EQ(n.record.caption_id, 42);
  // "lady's" is one token and is not a lexicon word.
  EXPECT_TRUE(n.record.edits.empty());
}

TEST(Neutralizer, ApplyEditsRejectsMismatch) {
  RewriteRecord r{1, {{0, "man", "person", GenderClass::MaleSingular}}};
  EXPECT_THROW(apply_edits(V{"woman"}, r), ContractError);
  EXPECT_THROW(apply_edits(V{}, r), ContractError);
}

// Random captions drawn from every lexicon word plus filler.
V random_caption(std::mt19937& rng) {
  static const V filler = {"a", "the", "on", "with", "riding", "dog",
                           "and", "of", "at", "phone", "her", "two"};
  V vocab = filler;
  for (std::size_t i = 0; i < kListedClasses; ++i)
    for (const auto& w : lex().words(static_cast<GenderClass>(i)))
      vocab.push_back(w);
  V out(rng() % 12);
  for (auto& t : out) t = vocab[rng() % vocab.size()];
  return out;
}

TEST(NeutralizerProperty, InvariantsOnRandomCaptions) {
  std::mt19937 rng(99);
  for (int iter = 0; iter < 2000; ++iter) {
    const V in = random_caption(rng);
    const NeutralCaption n = neutralize_tokens(lex(), in);
    ASSERT_EQ(n.tokens.size(), in.size());
    EXPECT_EQ(neutralize_tokens(lex(), n.tokens).tokens, n.tokens);
    EXPECT_EQ(apply_edits(in, n.record), n.tokens);
    std::size_t prev = 0;
    for (std::size_t k = 0; k < n.record.edits.size(); ++k) {
      if (k) {
        EXPECT_GT(n.record.edits[k].index, prev);
      }
      prev = n.record.edits[k].index;
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
      EXPECT_FALSE(is_gendered(lex().classify(n.tokens[i])));
      if (!is_gendered(lex().classify(in[i]))) {
        EXPECT_EQ(n.tokens[i], in[i]);
      }
    }
  }
}

TEST(NeutralizeCorpus, FixtureCounts) {
  const std::string d = CAPBIAS_TEST_DATA;
  Corpus c = load_corpus(d + "/captions.json", std::nullopt, d + "/split.json");
  NeutralizedCorpus nc = neutralize_corpus(lex(), c, std::nullopt);
  EXPECT_EQ(nc.captions.size(), 10u);
  // man, man, his, woman, her, men, girl
  EXPECT_EQ(nc.total_edits, 7u);
  EXPECT_EQ(nc.edits_by_class.at(GenderClass::MaleSingular), 2u);
  EXPECT_EQ(nc.edits_by_class.at(GenderClass::MalePronoun), 1u);
  EXPECT_EQ(nc.edits_by_class.at(GenderClass::FemaleSingular), 2u);
  EXPECT_EQ(nc.edits_by_class.at(GenderClass::FemalePronoun), 1u);
  EXPECT_EQ(nc.edits_by_class.at(GenderClass::MalePlural), 1u);
  EXPECT_EQ(nc.records.size(), 4u);

  NeutralizedCorpus test_only = neutralize_corpus(lex(), c, Split::test);
  EXPECT_EQ(test_only.captions.size(), 5u);
  EXPECT_EQ(test_only.total_edits, 2u);
}

TEST(NeutralizeCorpus, ThreeCaptionsFourEdits) {
  nlohmann::json caps = {
      {"images", {{{"id", 1}, {"file_name", "a"}}}},
      {"annotations",
       {{{"id", 1}, {"image_id", 1}, {"caption", "A man and his son."}},
        {{"id", 2}, {"image_id", 1}, {"caption", "A dog on a couch."}},
        {{"id", 3}, {"image_id", 1}, {"caption", "Two women talking."}}}}};
  Corpus c = Corpus::from_sources({{"c", caps.dump()}}, {},
                                  {"s", R"({"train": [1]})"}, "s");
  NeutralizedCorpus nc = neutralize_corpus(lex(), c, std::nullopt, 3);
  EXPECT_EQ(nc.total_edits, 4u);
  EXPECT_EQ(nc.captions[0].text, "a person and its youngster");
  EXPECT_EQ(nc.captions[1].text, "A dog on a couch.");
  EXPECT_EQ(nc.captions[2].text, "two people talking");
  auto j = to_coco_json(nc);
  EXPECT_EQ(j["annotations"].size(), 3u);
  EXPECT_EQ(j["images"][0]["id"], 1);
  EXPECT_EQ(edit_report_tsv(nc),
            "caption_id\tindex\toriginal\treplacement\tclass\n"
            "1\t1\tman\tperson\tMaleSingular\n"
            "1\t3\this\tits\tMalePronoun\n"
            "1\t4\tson\tyoungster\tMaleSingular\n"
            "3\t1\twomen\tpeople\tFemalePlural\n");
}

TEST(NeutralizeCorpus, UneditedCaptionsKeepTheirBytes) {
  nlohmann::json caps = {
      {"images", {{{"id", 1}, {"file_name", "a"}}}},
      {"annotations",
       {{{"id", 1}, {"image_id", 1}, {"caption", "A Plate,  of food!"}},
        {{"id", 2}, {"image_id", 1}, {"caption", "The table's legs."}}}}};
  Corpus c = Corpus::from_sources({{"c", caps.dump()}}, {},
                                  {"s", R"({"train": [1]})"}, "s");
  NeutralizedCorpus nc = neutralize_corpus(lex(), c, std::nullopt);
  EXPECT_EQ(nc.total_edits, 0u);
  EXPECT_EQ(nc.captions[0].text, "A Plate,  of food!");
  EXPECT_EQ(nc.captions[1].text, "The table's legs.");
}

TEST(NeutralizeCorpus, ThreadCountDoesNotChangeOutput) {
  const std::string d = CAPBIAS_TEST_DATA;
  Corpus c = load_corpus(d + "/captions.json", std::nullopt, d + "/split.json");
  const auto a = to_coco_json(neutralize_corpus(lex(), c, std::nullopt, 1)).dump();
  for (unsigned t : {2u, 3u, 8u})
    EXPECT_EQ(to_coco_json(neutralize_corpus(lex(), c, std::nullopt, t)).dump(), a);
}

}  // namespace
}  // namespace capbias
