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
// Dataset construction: the three-class gender crop set and the
// anti-stereotypical ("unusual") evaluation set.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "capbias/biasstats.hpp"
#include "capbias/corpus.hpp"
#include "capbias/error.hpp"
#include "capbias/lexicon.hpp"
#include "capbias/parallel.hpp"
#include "json.hpp"

namespace capbias {

enum class CropLabel { male, female, person };

inline constexpr std::string_view to_string(CropLabel l) {
  switch (l) {
    case CropLabel::male: return "male";
    case CropLabel::female: return "female";
    case CropLabel::person: return "person";
  }
  return "?";
}

inline std::optional<CropLabel> parse_crop_label(std::string_view s) {
  if (s == "male") return CropLabel::male;
  if (s == "female") return CropLabel::female;
  if (s == "person") return CropLabel::person;
  return std::nullopt;
}

// Label rule over an image's caption signatures:
//   male   : >= 3 male, 0 female (neutral allowed)
//   female : >= 3 female, 0 male
//   person : >= 4 neutral, 0 gendered
inline std::optional<CropLabel> crop_label(const GenderTriple& t) {
  if (t.male >= 3 && t.female == 0) return CropLabel::male;
  if (t.female >= 3 && t.male == 0) return CropLabel::female;
  if (t.neutral >= 4 && t.male == 0 && t.female == 0) return CropLabel::person;
  return std::nullopt;
}

struct GenderCropSpec {
  std::int64_t image_id = 0;
  std::string file_name;
  CropLabel label = CropLabel::person;
  std::int64_t instance_id = 0;
  BBox bbox;
  double area = 0;
  nlohmann::json segmentation;
  Split split = Split::train;
};

inline nlohmann::json to_json(const GenderCropSpec& c) {
  return {{"image_id", c.image_id},
          {"file_name", c.file_name},
          {"label", to_string(c.label)},
          {"instance_id", c.instance_id},
          {"bbox", {c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h}},
          {"area", c.area},
          {"segmentation", c.segmentation},
          {"split", to_string(c.split)}};
}

struct ClassificationSet {
  std::vector<GenderCropSpec> crops;  // ascending image_id
  std::uint64_t male = 0, female = 0, person = 0;
  std::uint64_t labelled_without_person_box = 0;
  std::uint64_t single_person_images = 0;
};

inline ClassificationSet build_gender_classification_set(
    const Lexicon& lex, const Corpus& corpus, Split split,
    unsigned threads = 1) {
  if (!corpus.has_instances())
    throw ConfigError("classification set needs person instances loaded");
  const auto images = corpus.images_in(split);
  auto shards =
      parallel_shards(images.size(), threads, [&](std::size_t b, std::size_t e) {
        ClassificationSet s;
        for (std::size_t i = b; i < e; ++i) {
          const ImageRecord& img = *images[i];
          auto t = signature_tally(lex, corpus.captions_of(img.image_id),
                                   Number::singular);
          if (!t) continue;
          ++s.single_person_images;
          auto label = crop_label(*t);
          if (!label) continue;
          auto boxes = corpus.largest_person_boxes(img.image_id, 1);
          if (boxes.empty()) {
            ++s.labelled_without_person_box;
            continue;
          }
          const PersonInstance& p = boxes.front();
          s.crops.push_back({img.image_id, img.file_name, *label,
                             p.instance_id, p.bbox, p.area, p.segmentation,
                             img.split});
        }
        return s;
      });
  ClassificationSet out;
  for (auto& s : shards) {
    out.single_person_images += s.single_person_images;
    out.labelled_without_person_box += s.labelled_without_person_box;
    for (auto& c : s.crops) {
      switch (c.label) {
        case CropLabel::male: ++out.male; break;
        case CropLabel::female: ++out.female; break;
        case CropLabel::person: ++out.person; break;
      }
      out.crops.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unusual set

struct BiasedWordSets {
  std::vector<std::string> male_biased;    // descending bias_male
  std::vector<std::string> female_biased;  // descending bias_female
};

// Top-k words by bias toward each gender among words seen with a gendered
// subject at least `min_count` times. Only words strictly biased (> 0.5)
// qualify. Ties break by larger count, then alphabetically.
inline BiasedWordSets select_biased_words(const BiasProfile& profile,
                                          std::size_t top_k,
                                          std::uint64_t min_count) {
  if (top_k == 0) throw InputError("top_k must be at least 1");
  using Entry = std::tuple<double, std::uint64_t, std::string>;
  std::vector<Entry> male, female;
  for (const auto& [w, c] : profile.words) {
    if (c.total() < min_count || c.total() == 0) continue;
    const double bm = *c.bias_male();
    const double bf = *c.bias_female();
    if (bm > 0.5) male.emplace_back(bm, c.total(), w);
    if (bf > 0.5) female.emplace_back(bf, c.total(), w);
  }
  auto order = [](const Entry& a, const Entry& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  };
  auto take = [&](std::vector<Entry>& v) {
    std::sort(v.begin(), v.end(), order);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size() && i < top_k; ++i)
      out.push_back(std::get<2>(v[i]));
    return out;
  };
  return {take(male), take(female)};
}

struct UnusualInstance {
  std::int64_t image_id = 0;
  Gender gender = Gender::male;
  std::vector<std::string> trigger_words;
  std::int64_t caption_id = 0;
};

inline nlohmann::json to_json(const UnusualInstance& u) {
  return {{"image_id", u.image_id},
          {"gender", to_string(u.gender)},
          {"trigger_words", u.trigger_words},
          {"caption_id", u.caption_id}};
}

struct UnusualSet {
  std::vector<UnusualInstance> instances;  // ascending image_id
  BiasedWordSets words;
  std::uint64_t male = 0, female = 0;
};

// Gender of a caption whose gendered subject words all agree and include a
// singular word; empty otherwise.
inline std::optional<Gender> single_gender_subject(
    const Lexicon& lex, const std::vector<std::string>& tokens) {
  bool male = false, female = false, singular = false;
  for (const auto& t : tokens) {
    const GenderClass c = lex.classify(t);
    if (!is_person_word(c) || !is_gendered(c)) continue;
    male |= is_male(c);
    female |= is_female(c);
    singular |= is_singular_person(c);
  }
  if (male == female || !singular) return std::nullopt;
  return male ? Gender::male : Gender::female;
}

// Evaluation images whose ground-truth caption pairs one gender with context
// words biased toward the other gender in the profile's split. One instance
// per image, taken from its first qualifying caption.
inline UnusualSet build_unusual_set(const Lexicon& lex, const Corpus& corpus,
                                    const BiasProfile& profile,
                                    Split eval_split, std::size_t top_k,
                                    std::uint64_t min_count) {
  if (eval_split == profile.split || eval_split == Split::train)
    throw ContaminationError(
        "evaluation split '" + std::string(to_string(eval_split)) +
        "' overlaps the bias profile's training split '" +
        std::string(to_string(profile.split)) + "'");
  UnusualSet out;
  out.words = select_biased_words(profile, top_k, min_count);
  const std::unordered_set<std::string> male_set(out.words.male_biased.begin(),
                                                 out.words.male_biased.end());
  const std::unordered_set<std::string> female_set(
      out.words.female_biased.begin(), out.words.female_biased.end());

  for (const auto* img : corpus.images_in(eval_split)) {
    for (const auto& cap : corpus.captions_of(img->image_id)) {
      auto g = single_gender_subject(lex, cap.tokens);
      if (!g) continue;
      const auto& opposite = *g == Gender::male ? female_set : male_set;
      std::vector<std::string> triggers;
      for (const auto& t : cap.tokens)
        if (opposite.count(t) &&
            std::find(triggers.begin(), triggers.end(), t) == triggers.end())
          triggers.push_back(t);
      if (triggers.empty()) continue;
      out.instances.push_back(
          {img->image_id, *g, std::move(triggers), cap.caption_id});
      (*g == Gender::male ? out.male : out.female) += 1;
      break;
    }
  }
  return out;
}

}  // namespace capbias
