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

#include "capbias/biasstats.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

namespace capbias {
namespace {

using testing::ImageSpec;
using testing::make_corpus;
using V = std::vector<std::string>;

const Lexicon& lex() {
  static const Lexicon l = Lexicon::builtin();
  return l;
}

std::optional<Gender> sig(const std::string& s) {
  return single_person_gender_signature(lex(), tokenize(s));
}

TEST(Signature, Examples) {
  EXPECT_EQ(sig("a man rides a horse"), Gender::male);
  EXPECT_EQ(sig("A lady with her umbrella"), Gender::female);
  EXPECT_EQ(sig("a skier on a slope"), Gender::neutral);
  EXPECT_EQ(sig("a man and a woman walk"), std::nullopt);
  EXPECT_EQ(sig("people on a beach"), std::nullopt);
  EXPECT_EQ(sig("a man with two boys"), std::nullopt);
  EXPECT_EQ(sig("a dog on a beach"), std::nullopt);
  EXPECT_EQ(person_signature(lex(), tokenize("two women on a bench"),
                             Number::plural),
            Gender::female);
  EXPECT_EQ(person_signature(lex(), tokenize("a woman on a bench"),
                             Number::plural),
            std::nullopt);
}

TEST(BiasProfile, HandCountedFixture) {
  Corpus c = make_corpus({{1, Split::train,
                           {"a man riding a bike", "a man riding a bike",
                            "a man riding a bike bike bike",
                            "a woman riding a bike"}},
                          {2, Split::train, {"a bike near a tree"}},
                          {3, Split::test, {"a woman with a bike"}}});
  BiasProfile p = build_bias_profile(lex(), c, Split::train);
  EXPECT_DOUBLE_EQ(*p.bias_male("bike"), 0.75);
  EXPECT_EQ(p.words.at("bike").male, 3u);
  EXPECT_EQ(p.words.at("bike").female, 1u);
  EXPECT_DOUBLE_EQ(*p.bias_male("riding"), 0.75);
  EXPECT_FALSE(p.words.count("a"));
  EXPECT_FALSE(p.words.count("man"));
  EXPECT_FALSE(p.words.count("tree"));
  EXPECT_FALSE(p.bias_male("tree").has_value());
  EXPECT_EQ(p.male_captions, 3u);
  EXPECT_EQ(p.female_captions, 1u);
  EXPECT_EQ(p.split, Split::train);
  EXPECT_EQ(p.lexicon_version, lex().version());
}

TEST(BiasProfile, SymmetryBoundaryAndBothGenders) {
  Corpus c = make_corpus({{1, Split::train,
                           {"a man with a kite", "a woman with a kite",
                            "two men with a hammer", "a man and a woman dancing"}}});
  BiasProfile p = build_bias_profile(lex(), c, Split::train);
  EXPECT_DOUBLE_EQ(*p.bias_male("kite"), 0.5);
  EXPECT_DOUBLE_EQ(*p.bias_male("hammer"), 1.0);
  EXPECT_EQ(p.words.at("dancing").male, 1u);
  EXPECT_EQ(p.words.at("dancing").female, 1u);
}

TEST(BiasProfile, EmptySplitIsAnError) {
  Corpus c = make_corpus({{1, Split::train, {"a man"}}});
  EXPECT_THROW(build_bias_profile(lex(), c, Split::val), InputError);
}

TEST(BiasProfile, StoplistHasFiftyWords) {
  EXPECT_EQ(bias_stoplist().size(), 50u);
}

// Random captions over a small vocabulary.
Corpus random_corpus(std::mt19937& rng, std::size_t images) {
  static const V vocab = {"man",  "woman", "person", "men",   "women", "people",
                          "boy",  "girl",  "kite",   "bike",  "a",     "and",
                          "on",   "the",   "hat",    "skier", "two",   "his",
                          "her",  "table", "dog",    "with"};
  std::vector<ImageSpec> specs;
  for (std::size_t i = 0; i < images; ++i) {
    ImageSpec s{static_cast<std::int64_t>(i + 1), Split::train, {}, {}};
    const std::size_t nc = 1 + rng() % 6;
    for (std::size_t k = 0; k < nc; ++k) {
      std::string cap;
      const std::size_t len = 1 + rng() % 7;
      for (std::size_t t = 0; t < len; ++t) cap += vocab[rng() % vocab.size()] + " ";
      s.captions.push_back(cap);
    }
    specs.push_back(std::move(s));
  }
  return make_corpus(specs);
}

TEST(BiasProfileProperty, ComplementAndThreadIndependence) {
  std::mt19937 rng(5);
  for (int iter = 0; iter < 20; ++iter) {
    Corpus c = random_corpus(rng, 40);
    BiasProfile p = build_bias_profile(lex(), c, Split::train, 1);
    for (const auto& [w, wc] : p.words) {
      ASSERT_GT(wc.total(), 0u);
      EXPECT_DOUBLE_EQ(*wc.bias_male() + *wc.bias_female(), 1.0);
      EXPECT_GE(*wc.bias_male(), 0.0);
      EXPECT_LE(*wc.bias_male(), 1.0);
    }
    for (unsigned t : {2u, 7u}) {
      BiasProfile q = build_bias_profile(lex(), c, Split::train, t);
      ASSERT_EQ(q.words.size(), p.words.size());
      for (const auto& [w, wc] : p.words) {
        EXPECT_EQ(q.words.at(w).male, wc.male);
        EXPECT_EQ(q.words.at(w).female, wc.female);
      }
    }
  }
}

TEST(Census, FixtureCells) {
  Corpus c = make_corpus(
      {{1, Split::train,
        {"a man on a bike", "a man riding", "a woman on a bike",
         "a person riding", "a rider on a bike"}},
       {2, Split::train, testing::repeat("a man with a hat", 5)},
       {3, Split::train,
        {"a man", "a woman", "a man", "a man", "a dog"}},  // unsigned caption
       {4, Split::train, {"a girl", "a boy", "a boy", "a boy", "a boy"}},
       {5, Split::train, {"a girl", "a boy", "a boy"}},
       {6, Split::test, {"a girl", "a boy", "a boy", "a boy", "a boy"}}});
  ConflictCensus cc = conflict_census(lex(), c, Split::train);
  EXPECT_EQ(cc.at(2, 1, 2), 1u);
  EXPECT_EQ(cc.at(4, 1, 0), 1u);
  EXPECT_EQ(cc.at(2, 1, 0), 1u);
  EXPECT_EQ(cc.at(5, 0, 0), 0u);
  EXPECT_EQ(cc.cells.size(), 3u);
  EXPECT_EQ(cc.single_person_images, 4u);
  EXPECT_EQ(cc.conflict_images, 3u);
  EXPECT_EQ(cc.nonstandard_conflict_images, 1u);
}

TEST(CensusProperty, CellsAreDisjointConflictsAndShardIndependent) {
  std::mt19937 rng(17);
  for (int iter = 0; iter < 20; ++iter) {
    Corpus c = random_corpus(rng, 60);
    ConflictCensus a = conflict_census(lex(), c, Split::train, 1);
    std::uint64_t sum = 0;
    for (const auto& [k, v] : a.cells) {
      EXPECT_GE(k.male, 1u);
      EXPECT_GE(k.female, 1u);
      sum += v;
    }
    EXPECT_EQ(sum, a.conflict_images);
    ConflictCensus b = conflict_census(lex(), c, Split::train, 5);
    EXPECT_EQ(a.cells, b.cells);
    EXPECT_EQ(a.single_person_images, b.single_person_images);
  }
}

TEST(Usage, FixtureBins) {
  Corpus c = make_corpus(
      {{1, Split::train,
        {"a man", "a man", "a man", "a man", "a person"}},
       {2, Split::train, testing::repeat("a person", 5)},
       {3, Split::train, testing::repeat("a woman", 5)},
       {4, Split::train, {"a woman", "a man", "a man", "a man", "a man"}},
       {5, Split::train,
        {"two men", "two men", "people", "people", "people"}}});
  UsageHistogram h = usage_histogram(lex(), c, Split::train, Number::singular);
  EXPECT_EQ(UsageHistogram::bin(h.male, 4), 1u);
  EXPECT_EQ(UsageHistogram::bin(h.female, 5), 1u);
  EXPECT_EQ(h.male_images, 1u);
  EXPECT_EQ(h.female_images, 1u);
  EXPECT_EQ(h.male.size(), 1u);

  UsageHistogram p = usage_histogram(lex(), c, Split::train, Number::plural);
  EXPECT_EQ(UsageHistogram::bin(p.male, 2), 1u);
  EXPECT_EQ(p.male_images, 1u);
  EXPECT_EQ(p.female_images, 0u);

  Contingency2x2 t = usage_contingency(h);
  EXPECT_EQ(t.cells[0][0], 0);
  EXPECT_EQ(t.cells[0][1], 1);
  EXPECT_EQ(t.cells[1][0], 1);
  EXPECT_EQ(t.cells[1][1], 0);
}

TEST(UsageProperty, BinsSumToSingleGenderImages) {
  std::mt19937 rng(23);
  for (int iter = 0; iter < 20; ++iter) {
    Corpus c = random_corpus(rng, 80);
    for (Number n : {Number::singular, Number::plural}) {
      UsageHistogram h = usage_histogram(lex(), c, Split::train, n, 3);
      std::uint64_t m = 0, f = 0;
      for (const auto& [x, v] : h.male) {
        EXPECT_GE(x, 1u);
        m += v;
      }
      for (const auto& [x, v] : h.female) f += v;
      EXPECT_EQ(m, h.male_images);
      EXPECT_EQ(f, h.female_images);
      // Brute-force recount.
      std::uint64_t bm = 0, bf = 0;
      for (const auto& img : c.images()) {
        std::size_t mm = 0, ff = 0;
        bool ok = !c.captions_of(img.image_id).empty();
        for (const auto& cap : c.captions_of(img.image_id)) {
          auto s = person_signature(lex(), cap.tokens, n);
          if (!s) ok = false;
          else if (*s == Gender::male) ++mm;
          else if (*s == Gender::female) ++ff;
        }
        if (!ok) continue;
        bm += mm > 0 && ff == 0;
        bf += ff > 0 && mm == 0;
      }
      EXPECT_EQ(bm, h.male_images);
      EXPECT_EQ(bf, h.female_images);
    }
  }
}

// Oracle: direct sum of (O - E)^2 / E.
double brute_chi2(const Contingency2x2& t) {
  const auto& c = t.cells;
  double n = 0, row[2] = {0, 0}, col[2] = {0, 0};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      n += c[i][j];
      row[i] += c[i][j];
      col[j] += c[i][j];
    }
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double e = row[i] * col[j] / n;
      s += (c[i][j] - e) * (c[i][j] - e) / e;
    }
  return s;
}

Contingency2x2 table(double a, double b, double c, double d) {
  Contingency2x2 t;
  t.cells = {{{a, b}, {c, d}}};
  return t;
}

TEST(ChiSquared, Examples) {
  auto indep = chi_squared_1dof(table(10, 20, 30, 60));
  EXPECT_NEAR(indep.statistic, 0.0, 1e-12);
  EXPECT_NEAR(indep.p_value, 1.0, 1e-12);
  // Frozen from scipy.stats.chi2_contingency(correction=False).
  auto r = chi_squared_1dof(table(10, 20, 30, 40));
  EXPECT_NEAR(r.statistic, 0.7936507936507936, 1e-12);
  EXPECT_NEAR(r.p_value, 0.37299848361348686, 1e-9);
  EXPECT_NEAR(r.statistic, brute_chi2(table(10, 20, 30, 40)), 1e-12);
}

TEST(ChiSquared, TabulatedUpperTail) {
  // chi2(1) survival function at the 5% and 1% critical values.
  EXPECT_NEAR(chi_squared_upper_tail(3.84), 0.05004352124870519, 1e-12);
  EXPECT_NEAR(chi_squared_upper_tail(6.63), 0.010027526446317957, 1e-12);
}

TEST(ChiSquared, DegenerateAndInvalidTables) {
  EXPECT_THROW(chi_squared_1dof(table(0, 0, 3, 4)), DegenerateTableError);
  EXPECT_THROW(chi_squared_1dof(table(1, 0, 3, 0)), DegenerateTableError);
  EXPECT_THROW(chi_squared_1dof(table(-1, 2, 3, 4)), InputError);
}

TEST(ChiSquaredProperty, SymmetriesScalingAndBruteForce) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> cell(0, 500);
  for (int iter = 0; iter < 500; ++iter) {
    const double a = cell(rng) + 1, b = cell(rng) + 1, c = cell(rng) + 1,
                 d = cell(rng) + 1;
    const double s = chi_squared_1dof(table(a, b, c, d)).statistic;
    EXPECT_NEAR(s, brute_chi2(table(a, b, c, d)), 1e-9 * std::max(1.0, s));
    EXPECT_NEAR(chi_squared_1dof(table(c, d, a, b)).statistic, s, 1e-9 * std::max(1.0, s));
    EXPECT_NEAR(chi_squared_1dof(table(b, a, d, c)).statistic, s, 1e-9 * std::max(1.0, s));
    EXPECT_NEAR(chi_squared_1dof(table(a, c, b, d)).statistic, s, 1e-9 * std::max(1.0, s));
    const double k = 1 + rng() % 9;
    EXPECT_NEAR(chi_squared_1dof(table(k * a, k * b, k * c, k * d)).statistic,
                k * s, 1e-9 * std::max(1.0, k * s));
    EXPECT_GE(s, 0);
  }
}

TEST(Phrases, Examples) {
  PhraseStats s;
  add_phrase_stats(lex(), tokenize("a man and a woman on skis"), s);
  EXPECT_EQ(s, (PhraseStats{1, 1, 0}));
  add_phrase_stats(lex(), tokenize("a man rides while a woman watches"), s);
  EXPECT_EQ(s, (PhraseStats{2, 1, 0}));
  add_phrase_stats(lex(), tokenize("a lady and gentleman posing"), s);
  EXPECT_EQ(s, (PhraseStats{3, 1, 1}));
  add_phrase_stats(lex(), tokenize("a girl and an old man"), s);
  EXPECT_EQ(s, (PhraseStats{4, 1, 1}));  // adjective breaks the pattern
  add_phrase_stats(lex(), tokenize("a boy and a girl and a man"), s);
  EXPECT_EQ(s, (PhraseStats{5, 2, 2}));
  add_phrase_stats(lex(), tokenize("men and women"), s);
  EXPECT_EQ(s, (PhraseStats{5, 2, 2}));  // plural words do not count
  add_phrase_stats(lex(), tokenize("a man and a dog"), s);
  EXPECT_EQ(s, (PhraseStats{5, 2, 2}));
}

TEST(Phrases, CorpusAndTokenStreamsAgree) {
  std::mt19937 rng(3);
  Corpus c = random_corpus(rng, 200);
  std::vector<V> toks;
  for (const auto& cap : c.captions()) toks.push_back(cap.tokens);
  PhraseStats a = two_person_phrase_stats(lex(), c, Split::train, 4);
  PhraseStats b = two_person_phrase_stats(lex(), toks, 1);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.both_genders, 0u);
}

TEST(Amplification, Ratios) {
  EXPECT_NEAR(amplification_ratio(0.50, 0.93), 1.86, 1e-12);
  EXPECT_DOUBLE_EQ(amplification_ratio(PhraseStats{10, 5, 0}, PhraseStats{4, 2, 1}),
                   1.0);
  // train share 1/4, prediction share 1/2.
  EXPECT_DOUBLE_EQ(amplification_ratio(PhraseStats{4, 1, 0}, PhraseStats{2, 1, 0}),
                   2.0);
  EXPECT_THROW(amplification_ratio(PhraseStats{0, 0, 0}, PhraseStats{2, 1, 0}),
               InputError);
  EXPECT_THROW(amplification_ratio(PhraseStats{3, 1, 0}, PhraseStats{0, 0, 0}),
               InputError);
  EXPECT_THROW(amplification_ratio(PhraseStats{3, 0, 0}, PhraseStats{1, 1, 0}),
               InputError);
}

}  // namespace
}  // namespace capbias
