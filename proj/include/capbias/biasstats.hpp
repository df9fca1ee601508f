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
// Corpus bias measurements: word/gender co-occurrence bias, the conflicting
// annotation census, gendered-vs-neutral usage histograms with a 2x2
// chi-squared test, and two-person phrase statistics.

#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "capbias/corpus.hpp"
#include "capbias/error.hpp"
#include "capbias/lexicon.hpp"
#include "capbias/parallel.hpp"

namespace capbias {

enum class Gender { male, female, neutral };
enum class Number { singular, plural };

inline constexpr std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::neutral: return "neutral";
  }
  return "?";
}

inline constexpr std::string_view to_string(Number n) {
  return n == Number::singular ? "singular" : "plural";
}

// Articles, prepositions and conjunctions excluded from bias profiles.
inline const std::unordered_set<std::string>& bias_stoplist() {
  static const std::unordered_set<std::string> kWords = {
      "a",       "an",      "the",    "of",      "in",      "on",
      "at",      "to",      "with",   "by",      "for",     "from",
      "into",    "onto",    "over",   "under",   "near",    "next",
      "behind",  "beside",  "between", "through", "across",  "around",
      "along",   "up",      "down",   "off",     "out",     "about",
      "above",   "below",   "inside", "outside", "toward",  "towards",
      "against", "during",  "atop",   "beneath", "and",     "or",
      "but",     "while",   "as",     "so",      "yet",     "than",
      "because", "if"};
  return kWords;
}

// Gender of a caption that names exactly one person with one word of the
// requested number and no other person words.
inline std::optional<Gender> person_signature(
    const Lexicon& lex, const std::vector<std::string>& tokens, Number number) {
  std::optional<GenderClass> found;
  for (const auto& t : tokens) {
    const GenderClass c = lex.classify(t);
    if (!is_person_word(c)) continue;
    if (found) return std::nullopt;
    found = c;
  }
  if (!found) return std::nullopt;
  const bool want_singular = number == Number::singular;
  if (is_singular_person(*found) != want_singular) return std::nullopt;
  if (is_male(*found)) return Gender::male;
  if (is_female(*found)) return Gender::female;
  return Gender::neutral;
}

inline std::optional<Gender> single_person_gender_signature(
    const Lexicon& lex, const std::vector<std::string>& tokens) {
  return person_signature(lex, tokens, Number::singular);
}

// ---------------------------------------------------------------------------
// Bias profile

struct WordCounts {
  std::uint64_t male = 0;
  std::uint64_t female = 0;

  std::uint64_t total() const { return male + female; }
  std::optional<double> bias_male() const {
    if (total() == 0) return std::nullopt;
    return static_cast<double>(male) / static_cast<double>(total());
  }
  std::optional<double> bias_female() const {
    if (total() == 0) return std::nullopt;
    return static_cast<double>(female) / static_cast<double>(total());
  }
};

struct BiasProfile {
  std::map<std::string, WordCounts> words;
  Split split = Split::train;
  std::string corpus_hash;
  std::string split_id;
  std::string lexicon_version;
  std::uint64_t male_captions = 0;
  std::uint64_t female_captions = 0;

  std::optional<double> bias_male(const std::string& word) const {
    auto it = words.find(word);
    return it == words.end() ? std::nullopt : it->second.bias_male();
  }
};

// Caption-level co-occurrence of context words with male and female subject
// words (singular or plural). A caption naming both genders counts for both.
inline BiasProfile build_bias_profile(const Lexicon& lex, const Corpus& corpus,
                                      Split split, unsigned threads = 1) {
  const auto images = corpus.images_in(split);
  if (images.empty())
    throw InputError("split '" + std::string(to_string(split)) +
                     "' has no images");
  struct Shard {
    std::map<std::string, WordCounts> words;
    std::uint64_t male = 0, female = 0;
  };
  auto shards =
      parallel_shards(images.size(), threads, [&](std::size_t b, std::size_t e) {
        Shard s;
        std::set<std::string> context;
        for (std::size_t i = b; i < e; ++i) {
          for (const auto& cap : corpus.captions_of(images[i]->image_id)) {
            bool male = false, female = false;
            context.clear();
            for (const auto& t : cap.tokens) {
              const GenderClass c = lex.classify(t);
              if (c == GenderClass::MaleSingular || c == GenderClass::MalePlural)
                male = true;
              else if (c == GenderClass::FemaleSingular ||
                       c == GenderClass::FemalePlural)
                female = true;
              else if (c == GenderClass::NonPerson && !bias_stoplist().count(t))
                context.insert(t);
            }
            if (!male && !female) continue;
            s.male += male;
            s.female += female;
            for (const auto& w : context) {
              auto& wc = s.words[w];
              wc.male += male;
              wc.female += female;
            }
          }
        }
        return s;
      });
  BiasProfile p;
  p.split = split;
  p.corpus_hash = corpus.hash();
  p.split_id = corpus.split_id();
  p.lexicon_version = lex.version();
  for (const auto& s : shards) {
    p.male_captions += s.male;
    p.female_captions += s.female;
    for (const auto& [w, c] : s.words) {
      auto& wc = p.words[w];
      wc.male += c.male;
      wc.female += c.female;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Signature tallies per image

struct GenderTriple {
  std::size_t male = 0, female = 0, neutral = 0;
  auto operator<=>(const GenderTriple&) const = default;
  std::size_t total() const { return male + female + neutral; }
};

// Tally of caption signatures for one image; empty unless the image has at
// least one caption and every caption carries a signature of `number`.
inline std::optional<GenderTriple> signature_tally(
    const Lexicon& lex, std::span<const CaptionRecord> captions,
    Number number) {
  if (captions.empty()) return std::nullopt;
  GenderTriple t;
  for (const auto& cap : captions) {
    auto sig = person_signature(lex, cap.tokens, number);
    if (!sig) return std::nullopt;
    switch (*sig) {
      case Gender::male: ++t.male; break;
      case Gender::female: ++t.female; break;
      case Gender::neutral: ++t.neutral; break;
    }
  }
  return t;
}

namespace detail {

// Runs tally_fn over every image of a split in parallel and folds the
// per-image tallies with `add`, in image order.
template <typename Acc, typename PerImage>
Acc fold_images(const Corpus& corpus, Split split, unsigned threads,
                PerImage per_image) {
  const auto images = corpus.images_in(split);
  auto shards =
      parallel_shards(images.size(), threads, [&](std::size_t b, std::size_t e) {
        Acc acc;
        for (std::size_t i = b; i < e; ++i) per_image(acc, *images[i]);
        return acc;
      });
  Acc total;
  for (const auto& s : shards) total.merge(s);
  return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Conflict census

struct ConflictCensus {
  static constexpr std::size_t kStandardCaptions = 5;

  // (male, female, neutral) -> images; populated only for male, female >= 1.
  std::map<GenderTriple, std::uint64_t> cells;
  std::uint64_t single_person_images = 0;  // every caption signed
  std::uint64_t conflict_images = 0;
  std::uint64_t nonstandard_conflict_images = 0;  // caption count != 5

  void merge(const ConflictCensus& o) {
    for (const auto& [k, v] : o.cells) cells[k] += v;
    single_person_images += o.single_person_images;
    conflict_images += o.conflict_images;
    nonstandard_conflict_images += o.nonstandard_conflict_images;
  }

  std::uint64_t at(std::size_t m, std::size_t f, std::size_t n) const {
    auto it = cells.find({m, f, n});
    return it == cells.end() ? 0 : it->second;
  }
};

inline ConflictCensus conflict_census(const Lexicon& lex, const Corpus& corpus,
                                      Split split, unsigned threads = 1) {
  return detail::fold_images<ConflictCensus>(
      corpus, split, threads, [&](ConflictCensus& acc, const ImageRecord& img) {
        auto t = signature_tally(lex, corpus.captions_of(img.image_id),
                                 Number::singular);
        if (!t) return;
        ++acc.single_person_images;
        if (t->male == 0 || t->female == 0) return;
        ++acc.cells[*t];
        ++acc.conflict_images;
        if (t->total() != ConflictCensus::kStandardCaptions)
          ++acc.nonstandard_conflict_images;
      });
}

// ---------------------------------------------------------------------------
// Gendered vs neutral usage

// Images with x gendered and the rest neutral signatures, per gender.
// Images mixing both genders and images with no gendered caption are left out.
struct UsageHistogram {
  std::map<std::size_t, std::uint64_t> male;
  std::map<std::size_t, std::uint64_t> female;
  std::uint64_t male_images = 0;
  std::uint64_t female_images = 0;

  void merge(const UsageHistogram& o) {
    for (const auto& [k, v] : o.male) male[k] += v;
    for (const auto& [k, v] : o.female) female[k] += v;
    male_images += o.male_images;
    female_images += o.female_images;
  }

  static std::uint64_t bin(const std::map<std::size_t, std::uint64_t>& h,
                           std::size_t x) {
    auto it = h.find(x);
    return it == h.end() ? 0 : it->second;
  }
};

inline UsageHistogram usage_histogram(const Lexicon& lex, const Corpus& corpus,
                                      Split split, Number number,
                                      unsigned threads = 1) {
  return detail::fold_images<UsageHistogram>(
      corpus, split, threads, [&](UsageHistogram& acc, const ImageRecord& img) {
        auto t = signature_tally(lex, corpus.captions_of(img.image_id), number);
        if (!t) return;
        if (t->male > 0 && t->female == 0) {
          ++acc.male[t->male];
          ++acc.male_images;
        } else if (t->female > 0 && t->male == 0) {
          ++acc.female[t->female];
          ++acc.female_images;
        }
      });
}

// ---------------------------------------------------------------------------
// 2x2 chi-squared

struct Contingency2x2 {
  // cells[row][col]
  std::array<std::array<double, 2>, 2> cells{};
  std::array<std::string, 2> row_labels{"row0", "row1"};
  std::array<std::string, 2> col_labels{"col0", "col1"};
};

struct ChiSquared {
  double statistic = 0;
  double p_value = 1;
};

// Upper tail of chi-square with one degree of freedom.
inline double chi_squared_upper_tail(double x) {
  return std::erfc(std::sqrt(x / 2));
}

// Pearson statistic without continuity correction.
inline ChiSquared chi_squared_1dof(const Contingency2x2& t) {
  const auto& c = t.cells;
  for (const auto& row : c)
    for (double v : row)
      if (!(v >= 0) || !std::isfinite(v))
        throw InputError("contingency cells must be finite and non-negative");
  const double r0 = c[0][0] + c[0][1], r1 = c[1][0] + c[1][1];
  const double c0 = c[0][0] + c[1][0], c1 = c[0][1] + c[1][1];
  if (r0 == 0 || r1 == 0 || c0 == 0 || c1 == 0)
    throw DegenerateTableError("contingency table has a zero marginal");
  const double n = r0 + r1;
  const double det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
  // Closed form of sum (O - E)^2 / E for a 2x2 table.
  const double stat = n * det * det / (r0 * r1 * c0 * c1);
  return {stat, chi_squared_upper_tail(stat)};
}

// Rows male/female; columns "all captions gendered" vs "one neutral caption"
// for images with `captions` captions.
inline Contingency2x2 usage_contingency(const UsageHistogram& h,
                                        std::size_t captions = 5) {
  Contingency2x2 t;
  t.row_labels = {"male", "female"};
  t.col_labels = {std::to_string(captions) + "_gendered",
                  std::to_string(captions - 1) + "_gendered_1_neutral"};
  t.cells[0] = {static_cast<double>(UsageHistogram::bin(h.male, captions)),
                static_cast<double>(UsageHistogram::bin(h.male, captions - 1))};
  t.cells[1] = {
      static_cast<double>(UsageHistogram::bin(h.female, captions)),
      static_cast<double>(UsageHistogram::bin(h.female, captions - 1))};
  return t;
}

// ---------------------------------------------------------------------------
// Two-person phrases

struct PhraseStats {
  std::uint64_t both_genders = 0;
  std::uint64_t male_first_phrase = 0;
  std::uint64_t female_first_phrase = 0;

  void merge(const PhraseStats& o) {
    both_genders += o.both_genders;
    male_first_phrase += o.male_first_phrase;
    female_first_phrase += o.female_first_phrase;
  }

  bool operator==(const PhraseStats&) const = default;
};

// "<first> and (a|an)? <second>" anywhere in the caption.
inline bool has_coordination(const Lexicon& lex,
                             const std::vector<std::string>& tokens,
                             GenderClass first, GenderClass second) {
  for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
    if (lex.classify(tokens[i]) != first || tokens[i + 1] != "and") continue;
    std::size_t j = i + 2;
    if (tokens[j] == "a" || tokens[j] == "an") ++j;
    if (j < tokens.size() && lex.classify(tokens[j]) == second) return true;
  }
  return false;
}

inline void add_phrase_stats(const Lexicon& lex,
                             const std::vector<std::string>& tokens,
                             PhraseStats& acc) {
  bool male = false, female = false;
  for (const auto& t : tokens) {
    const GenderClass c = lex.classify(t);
    male |= c == GenderClass::MaleSingular;
    female |= c == GenderClass::FemaleSingular;
  }
  if (!male || !female) return;
  ++acc.both_genders;
  acc.male_first_phrase += has_coordination(
      lex, tokens, GenderClass::MaleSingular, GenderClass::FemaleSingular);
  acc.female_first_phrase += has_coordination(
      lex, tokens, GenderClass::FemaleSingular, GenderClass::MaleSingular);
}

inline PhraseStats two_person_phrase_stats(
    const Lexicon& lex, std::span<const std::vector<std::string>> captions,
    unsigned threads = 1) {
  auto shards = parallel_shards(
      captions.size(), threads, [&](std::size_t b, std::size_t e) {
        PhraseStats s;
        for (std::size_t i = b; i < e; ++i) add_phrase_stats(lex, captions[i], s);
        return s;
      });
  PhraseStats total;
  for (const auto& s : shards) total.merge(s);
  return total;
}

inline PhraseStats two_person_phrase_stats(const Lexicon& lex,
                                           const Corpus& corpus, Split split,
                                           unsigned threads = 1) {
  return detail::fold_images<PhraseStats>(
      corpus, split, threads, [&](PhraseStats& acc, const ImageRecord& img) {
        for (const auto& cap : corpus.captions_of(img.image_id))
          add_phrase_stats(lex, cap.tokens, acc);
      });
}

// Share of male-first coordinations among two-gender captions in the
// predictions, relative to the same share in training captions.
inline double amplification_ratio(const PhraseStats& train,
                                   const PhraseStats& predictions) {
  if (train.both_genders == 0 || predictions.both_genders == 0)
    throw InputError("amplification needs captions naming both genders");
  if (train.male_first_phrase == 0)
    throw InputError("training phrase share is zero");
  const double train_share = static_cast<double>(train.male_first_phrase) /
                             static_cast<double>(train.both_genders);
  const double pred_share = static_cast<double>(predictions.male_first_phrase) /
                            static_cast<double>(predictions.both_genders);
  return pred_share / train_share;
}

inline double amplification_ratio(double train_share, double prediction_share) {
  if (!(train_share > 0))
    throw InputError("training phrase share must be positive");
  return prediction_share / train_share;
}

}  // namespace capbias
