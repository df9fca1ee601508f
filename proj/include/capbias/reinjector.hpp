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
// Puts classifier gender labels back into gender-neutral captions.
//
// Rules, in precedence order:
//   pair     "two people" / "two youngsters" -> "a <L1> and a <L2>" from the
//            two largest labels (male first), or "two men" etc. when both
//            labels agree.
//   group    any other "people" / "youngsters" -> plural gendered word when
//            the (up to six) largest labels agree, else unchanged.
//   singular exactly one singular person word, and it is "person" or
//            "youngster" -> gendered word from the largest label.
// A "person" label leaves the neutral word in place.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capbias/corpus.hpp"
#include "capbias/datasetgen.hpp"
#include "capbias/error.hpp"
#include "capbias/lexicon.hpp"
#include "capbias/tokenize.hpp"
#include "json.hpp"

namespace capbias {

struct PersonLabel {
  std::int64_t image_id = 0;
  BBox bbox;
  double area = 0;
  CropLabel label = CropLabel::person;
};

enum class InjectionRule { none, singular, pair, group };

inline constexpr std::string_view to_string(InjectionRule r) {
  switch (r) {
    case InjectionRule::none: return "none";
    case InjectionRule::singular: return "singular";
    case InjectionRule::pair: return "pair";
    case InjectionRule::group: return "group";
  }
  return "?";
}

struct InjectionReport {
  std::int64_t caption_id = 0;
  InjectionRule rule = InjectionRule::none;
  std::size_t substitutions = 0;
};

struct InjectOptions {
  // Render "child"/"children" for young subjects whose gender is not
  // settled, instead of keeping "youngster"/"youngsters". Off by default:
  // with it on, neutralizing an injected caption no longer restores it.
  bool child_words = false;
  std::size_t max_group_labels = 6;
};

struct InjectedCaption {
  std::vector<std::string> tokens;
  InjectionReport report;
};

namespace detail {

inline int label_rank(CropLabel l) {
  switch (l) {
    case CropLabel::male: return 0;
    case CropLabel::female: return 1;
    case CropLabel::person: return 2;
  }
  return 3;
}

inline const std::string& singular_word(const CanonicalWords& cw,
                                        const InjectOptions& opt, bool young,
                                        CropLabel l) {
  switch (l) {
    case CropLabel::male: return young ? cw.boy : cw.man;
    case CropLabel::female: return young ? cw.girl : cw.woman;
    case CropLabel::person: break;
  }
  if (young) return opt.child_words ? cw.child : cw.youngster;
  return cw.person;
}

inline const std::string& plural_word(const CanonicalWords& cw,
                                      const InjectOptions& opt, bool young,
                                      std::optional<CropLabel> uniform) {
  if (uniform == CropLabel::male) return young ? cw.boys : cw.men;
  if (uniform == CropLabel::female) return young ? cw.girls : cw.women;
  if (young) return opt.child_words ? cw.children : cw.youngsters;
  return cw.people;
}

}  // namespace detail

// `labels` must be sorted by descending area.
inline InjectedCaption inject_gender(const Lexicon& lex,
                                     const std::vector<std::string>& tokens,
                                     std::span<const PersonLabel> labels,
                                     const InjectOptions& opt = {}) {
  if (!lex.injection_problem().empty())
    throw ContractError(lex.injection_problem());
  for (const auto& t : tokens)
    if (is_gendered(lex.classify(t)))
      throw ContractError("caption holds gendered word '" + t +
                          "'; neutralize it first");
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i].area > labels[i - 1].area)
      throw ContractError("labels must be sorted by descending area");

  const CanonicalWords& cw = lex.canonical();
  InjectedCaption out{tokens, {}};
  if (labels.empty()) return out;

  auto is_plural_subject = [&](const std::string& t) {
    return t == cw.people || t == cw.youngsters;
  };

  // Pair rule.
  bool has_pair = false;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
    has_pair |= tokens[i] == "two" && is_plural_subject(tokens[i + 1]);
  if (has_pair) {
    if (labels.size() < 2) return out;
    CropLabel a = labels[0].label, b = labels[1].label;
    if (detail::label_rank(b) < detail::label_rank(a)) std::swap(a, b);
    std::vector<std::string> rewritten;
    std::size_t subs = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i + 1 < tokens.size() && tokens[i] == "two" &&
          is_plural_subject(tokens[i + 1])) {
        const bool young = tokens[i + 1] == cw.youngsters;
        if (a == b) {
          rewritten.push_back("two");
          rewritten.push_back(detail::plural_word(cw, opt, young, a));
        } else {
          rewritten.insert(rewritten.end(),
                           {"a", detail::singular_word(cw, opt, young, a),
                            "and", "a",
                            detail::singular_word(cw, opt, young, b)});
        }
        if (rewritten.back() != tokens[i + 1] || a != b) ++subs;
        ++i;
      } else {
        rewritten.push_back(tokens[i]);
      }
    }
    out.tokens = std::move(rewritten);
    out.report.rule = InjectionRule::pair;
    out.report.substitutions = subs;
    return out;
  }

  // Group rule.
  if (std::any_of(tokens.begin(), tokens.end(), is_plural_subject)) {
    std::optional<CropLabel> uniform = labels[0].label;
    const std::size_t n = std::min(labels.size(), opt.max_group_labels);
    for (std::size_t i = 1; i < n; ++i)
      if (labels[i].label != uniform) uniform.reset();
    for (auto& t : out.tokens) {
      if (!is_plural_subject(t)) continue;
      const std::string& w =
          detail::plural_word(cw, opt, t == cw.youngsters, uniform);
      if (w != t) {
        t = w;
        ++out.report.substitutions;
      }
    }
    out.report.rule = InjectionRule::group;
    return out;
  }

  // Singular rule.
  std::size_t singular_at = tokens.size(), singular_count = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (lex.classify(tokens[i]) == GenderClass::NeutralSingularPerson) {
      ++singular_count;
      singular_at = i;
    }
  if (singular_count != 1) return out;
  const std::string& subject = tokens[singular_at];
  if (subject != cw.person && subject != cw.youngster) return out;
  const std::string& w = detail::singular_word(
      cw, opt, subject == cw.youngster, labels[0].label);
  out.report.rule = InjectionRule::singular;
  if (w != subject) {
    out.tokens[singular_at] = w;
    out.report.substitutions = 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// File-level injection

struct Prediction {
  std::int64_t image_id = 0;
  std::string caption;
};

namespace detail {

// Calls fn(json, line_start_offset) for every non-blank line.
template <typename Fn>
void for_each_json_line(const JsonSource& src, Fn fn) {
  std::size_t pos = 0;
  while (pos < src.text.size()) {
    std::size_t end = src.text.find('\n', pos);
    if (end == std::string::npos) end = src.text.size();
    std::string_view line(src.text.data() + pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(src.name, pos + (e.byte ? e.byte - 1 : 0), e.what());
      }
      with_schema(src.name, [&] {
        fn(j, pos);
        return 0;
      });
    }
    pos = end + 1;
  }
}

}  // namespace detail

// JSON lines {image_id, caption}; duplicate image ids are rejected.
inline std::vector<Prediction> parse_predictions(const JsonSource& src) {
  std::vector<Prediction> out;
  detail::for_each_json_line(src, [&](const nlohmann::json& j, std::size_t) {
    out.push_back(
        {j.at("image_id").get<std::int64_t>(), j.at("caption").get<std::string>()});
  });
  std::vector<std::int64_t> ids;
  for (const auto& p : out) ids.push_back(p.image_id);
  std::sort(ids.begin(), ids.end());
  std::vector<std::int64_t> dup;
  for (std::size_t i = 1; i < ids.size(); ++i)
    if (ids[i] == ids[i - 1]) dup.push_back(ids[i]);
  if (!dup.empty())
    throw IntegrityError(src.name + ": duplicate image ids in predictions",
                         detail::sorted_unique(dup));
  std::stable_sort(out.begin(), out.end(),
                   [](const Prediction& a, const Prediction& b) {
                     return a.image_id < b.image_id;
                   });
  return out;
}

inline nlohmann::json to_json(const Prediction& p) {
  return {{"image_id", p.image_id}, {"caption", p.caption}};
}

// JSON lines {image_id, instances: [{bbox, area, label}]}. Labels of each
// image come back sorted by descending area, file order among equal areas.
inline std::map<std::int64_t, std::vector<PersonLabel>> parse_labels(
    const JsonSource& src) {
  std::map<std::int64_t, std::vector<PersonLabel>> out;
  std::vector<std::int64_t> dup;
  detail::for_each_json_line(src, [&](const nlohmann::json& j, std::size_t) {
    const auto id = j.at("image_id").get<std::int64_t>();
    if (out.count(id)) {
      dup.push_back(id);
      return;
    }
    auto& labels = out[id];
    for (const auto& inst : j.at("instances")) {
      PersonLabel l;
      l.image_id = id;
      const auto& b = inst.at("bbox");
      l.bbox = {b.at(0).get<double>(), b.at(1).get<double>(),
                b.at(2).get<double>(), b.at(3).get<double>()};
      l.area = inst.at("area").get<double>();
      const auto name = inst.at("label").get<std::string>();
      auto lab = parse_crop_label(name);
      if (!lab)
        throw ValidationError(src.name + ": unknown label '" + name +
                              "' for image " + std::to_string(id));
      if (!(l.area > 0))
        throw ValidationError(src.name + ": non-positive area for image " +
                              std::to_string(id));
      l.label = *lab;
      labels.push_back(l);
    }
    std::stable_sort(labels.begin(), labels.end(),
                     [](const PersonLabel& a, const PersonLabel& b) {
                       return a.area > b.area;
                     });
  });
  if (!dup.empty())
    throw IntegrityError(src.name + ": duplicate image ids in labels",
                         detail::sorted_unique(dup));
  return out;
}

struct InjectionResult {
  std::vector<Prediction> captions;  // ascending image_id
  std::vector<InjectionReport> reports;
  std::map<InjectionRule, std::uint64_t> rule_counts;
  std::uint64_t substitutions = 0;
  std::uint64_t images_without_labels = 0;
};

// Captions left untouched keep their original text; rewritten captions are
// the single-space join of their tokens.
inline InjectionResult inject_corpus(
    const Lexicon& lex, const std::vector<Prediction>& predictions,
    const std::map<std::int64_t, std::vector<PersonLabel>>& labels,
    const InjectOptions& opt = {}) {
  InjectionResult out;
  for (auto r : {InjectionRule::none, InjectionRule::singular,
                 InjectionRule::pair, InjectionRule::group})
    out.rule_counts[r] = 0;
  for (const auto& p : predictions) {
    auto it = labels.find(p.image_id);
    std::span<const PersonLabel> image_labels;
    if (it == labels.end())
      ++out.images_without_labels;
    else
      image_labels = it->second;
    InjectedCaption ic;
    try {
      ic = inject_gender(lex, tokenize(p.caption), image_labels, opt);
    } catch (const ContractError& e) {
      throw ValidationError("image " + std::to_string(p.image_id) + ": " +
                            e.what());
    }
    ic.report.caption_id = p.image_id;
    const bool changed = ic.report.substitutions > 0;
    out.captions.push_back(
        {p.image_id, changed ? join_tokens(ic.tokens) : p.caption});
    ++out.rule_counts[ic.report.rule];
    out.substitutions += ic.report.substitutions;
    out.reports.push_back(ic.report);
  }
  return out;
}

}  // namespace capbias
