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
// COCO caption/instance ingestion into an immutable, indexed corpus.
//
// Records are stored contiguously, sorted by (image_id, record id), so the
// per-image views are spans into the record arrays. Only images listed in
// the split file are kept.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "capbias/error.hpp"
#include "capbias/hash.hpp"
#include "capbias/tokenize.hpp"
#include "json.hpp"

namespace capbias {

enum class Split { train, val, test };

inline constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  return std::nullopt;
}

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;
  bool operator==(const BBox&) const = default;
};

struct ImageRecord {
  std::int64_t image_id = 0;
  std::string file_name;
  Split split = Split::train;
};

struct CaptionRecord {
  std::int64_t caption_id = 0;
  std::int64_t image_id = 0;
  std::string text;
  std::vector<std::string> tokens;
};

struct PersonInstance {
  std::int64_t instance_id = 0;
  std::int64_t image_id = 0;
  BBox bbox;
  double area = 0;
  nlohmann::json segmentation;  // pass-through
  bool iscrowd = false;
};

// Counters for records dropped during load.
struct LoadStats {
  std::size_t images_not_in_split = 0;
  std::size_t captions_of_dropped_images = 0;
  std::size_t split_ids_without_image = 0;
  std::size_t non_person_instances = 0;
  std::size_t instances_of_dropped_images = 0;
  std::size_t degenerate_instances = 0;
};

// One named input document (a path or a test label, plus its bytes).
struct JsonSource {
  std::string name;
  std::string text;
};

namespace detail {

inline nlohmann::json parse_json(const JsonSource& src) {
  try {
    return nlohmann::json::parse(src.text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(src.name, e.byte, e.what());
  }
}

template <typename Fn>
auto with_schema(const std::string& source, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": schema error: " + e.what());
  }
}

inline std::vector<std::int64_t> sorted_unique(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

class Corpus {
 public:
  Corpus() = default;

  // Builds a corpus from in-memory documents. `split_id` names the split
  // definition in reports.
  static Corpus from_sources(const std::vector<JsonSource>& captions,
                             const std::vector<JsonSource>& instances,
                             const JsonSource& split,
                             std::string split_id) {
    Corpus c;
    c.split_id_ = std::move(split_id);
    c.has_instances_ = !instances.empty();

    Sha256 digest;
    auto feed = [&](std::string_view tag, const JsonSource& s) {
      digest.update(tag).update(std::to_string(s.text.size())).update(":");
      digest.update(s.text);
    };
    for (const auto& s : captions) feed("captions", s);
    for (const auto& s : instances) feed("instances", s);
    feed("split", split);
    c.hash_ = digest.hex();

    std::unordered_map<std::int64_t, Split> split_of = parse_split_file(split);

    // Images.
    std::unordered_map<std::int64_t, bool> known;  // id -> kept
    std::vector<std::int64_t> duplicate_images;
    for (const auto& src : captions) {
      nlohmann::json doc = detail::parse_json(src);
      detail::with_schema(src.name, [&] {
        for (const auto& img : doc.at("images")) {
          const auto id = img.at("id").get<std::int64_t>();
          auto it = split_of.find(id);
          if (known.count(id)) {
            duplicate_images.push_back(id);
            continue;
          }
          known[id] = it != split_of.end();
          if (it == split_of.end()) {
            ++c.stats_.images_not_in_split;
            continue;
          }
          c.images_.push_back({id, img.value("file_name", std::string{}),
                               it->second});
        }
        return 0;
      });
    }
    if (!duplicate_images.empty())
      throw IntegrityError("duplicate image ids",
                           detail::sorted_unique(duplicate_images));
    for (const auto& [id, s] : split_of)
      if (!known.count(id)) ++c.stats_.split_ids_without_image;

    // Captions.
    std::vector<std::int64_t> orphan_captions, duplicate_captions;
    for (const auto& src : captions) {
      nlohmann::json doc = detail::parse_json(src);
      detail::with_schema(src.name, [&] {
        for (const auto& ann : doc.at("annotations")) {
          CaptionRecord rec;
          rec.caption_id = ann.at("id").get<std::int64_t>();
          rec.image_id = ann.at("image_id").get<std::int64_t>();
          auto it = known.find(rec.image_id);
          if (it == known.end()) {
            orphan_captions.push_back(rec.caption_id);
            continue;
          }
          if (!it->second) {
            ++c.stats_.captions_of_dropped_images;
            continue;
          }
          rec.text = ann.at("caption").get<std::string>();
          rec.tokens = tokenize(rec.text);
          c.captions_.push_back(std::move(rec));
        }
        return 0;
      });
    }
    if (!orphan_captions.empty())
      throw IntegrityError("captions reference unknown images",
                           detail::sorted_unique(orphan_captions));

    // Person instances.
    for (const auto& src : instances) {
      nlohmann::json doc = detail::parse_json(src);
      detail::with_schema(src.name, [&] {
        std::int64_t person_category = 1;
        if (doc.contains("categories"))
          for (const auto& cat : doc.at("categories"))
            if (cat.value("name", std::string{}) == "person")
              person_category = cat.at("id").get<std::int64_t>();
        for (const auto& ann : doc.at("annotations")) {
          if (ann.at("category_id").get<std::int64_t>() != person_category) {
            ++c.stats_.non_person_instances;
            continue;
          }
          PersonInstance p;
          p.instance_id = ann.at("id").get<std::int64_t>();
          p.image_id = ann.at("image_id").get<std::int64_t>();
          auto it = known.find(p.image_id);
          if (it == known.end() || !it->second) {
            ++c.stats_.instances_of_dropped_images;
            continue;
          }
          const auto& b = ann.at("bbox");
          p.bbox = {b.at(0).get<double>(), b.at(1).get<double>(),
                    b.at(2).get<double>(), b.at(3).get<double>()};
          p.area = ann.at("area").get<double>();
          p.segmentation = ann.value("segmentation", nlohmann::json());
          p.iscrowd = ann.value("iscrowd", 0) != 0;
          if (!(p.bbox.w > 0 && p.bbox.h > 0 && p.area > 0)) {
            ++c.stats_.degenerate_instances;
            continue;
          }
          c.instances_.push_back(std::move(p));
        }
        return 0;
      });
    }

    c.build_indices();
    return c;
  }

  const std::vector<ImageRecord>& images() const { return images_; }
  std::span<const CaptionRecord> captions() const { return captions_; }
  std::span<const PersonInstance> instances() const { return instances_; }
  bool has_instances() const { return has_instances_; }
  const LoadStats& load_stats() const { return stats_; }
  const std::string& hash() const { return hash_; }
  const std::string& split_id() const { return split_id_; }

  bool contains(std::int64_t image_id) const {
    return index_.count(image_id) != 0;
  }

  const ImageRecord& image(std::int64_t image_id) const {
    return images_[slot(image_id)];
  }

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count_if(
        images_.begin(), images_.end(),
        [s](const ImageRecord& r) { return r.split == s; }));
  }

  // Images of one split, ascending image_id.
  std::vector<const ImageRecord*> images_in(Split s) const {
    std::vector<const ImageRecord*> out;
    for (const auto& r : images_)
      if (r.split == s) out.push_back(&r);
    return out;
  }

  // Captions of an image, ascending caption_id.
  std::span<const CaptionRecord> captions_of(std::int64_t image_id) const {
    const auto& r = caption_ranges_[slot(image_id)];
    return std::span<const CaptionRecord>(captions_).subspan(r.first,
                                                             r.second);
  }

  std::span<const PersonInstance> instances_of(std::int64_t image_id) const {
    const auto& r = instance_ranges_[slot(image_id)];
    return std::span<const PersonInstance>(instances_).subspan(r.first,
                                                               r.second);
  }

  // Up to k non-crowd person instances by descending area, ties by
  // ascending instance_id.
  std::vector<PersonInstance> largest_person_boxes(std::int64_t image_id,
                                                   std::size_t k) const {
    std::vector<PersonInstance> out;
    for (const auto& p : instances_of(image_id))
      if (!p.iscrowd) out.push_back(p);
    std::stable_sort(out.begin(), out.end(),
                     [](const PersonInstance& a, const PersonInstance& b) {
                       return a.area > b.area;
                     });
    if (out.size() > k) out.resize(k);
    return out;
  }

 private:
  static std::unordered_map<std::int64_t, Split> parse_split_file(
      const JsonSource& src) {
    nlohmann::json doc = detail::parse_json(src);
    std::unordered_map<std::int64_t, Split> out;
    std::vector<std::int64_t> dup;
    detail::with_schema(src.name, [&] {
      if (!doc.is_object())
        throw ConfigError(src.name + ": split file must be a JSON object");
      for (const auto& [key, ids] : doc.items()) {
        auto s = parse_split(key);
        if (!s)
          throw ConfigError(src.name + ": unknown split name '" + key + "'");
        for (const auto& id : ids) {
          auto v = id.get<std::int64_t>();
          if (!out.emplace(v, *s).second) dup.push_back(v);
        }
      }
      return 0;
    });
    if (!dup.empty())
      throw ConfigError(src.name + ": image ids assigned to several splits" +
                        IntegrityError("", detail::sorted_unique(dup)).what());
    return out;
  }

  void build_indices() {
    std::sort(images_.begin(), images_.end(),
              [](const ImageRecord& a, const ImageRecord& b) {
                return a.image_id < b.image_id;
              });
    std::sort(captions_.begin(), captions_.end(),
              [](const CaptionRecord& a, const CaptionRecord& b) {
                return std::pair(a.image_id, a.caption_id) <
                       std::pair(b.image_id, b.caption_id);
              });
    std::sort(instances_.begin(), instances_.end(),
              [](const PersonInstance& a, const PersonInstance& b) {
                return std::pair(a.image_id, a.instance_id) <
                       std::pair(b.image_id, b.instance_id);
              });

    std::vector<std::int64_t> dup;
    {
      std::vector<std::int64_t> ids;
      ids.reserve(captions_.size());
      for (const auto& c : captions_) ids.push_back(c.caption_id);
      std::sort(ids.begin(), ids.end());
      for (std::size_t i = 1; i < ids.size(); ++i)
        if (ids[i] == ids[i - 1]) dup.push_back(ids[i]);
    }
    if (!dup.empty())
      throw IntegrityError("duplicate caption ids", detail::sorted_unique(dup));

    index_.clear();
    for (std::size_t i = 0; i < images_.size(); ++i)
      index_.emplace(images_[i].image_id, i);

    caption_ranges_.assign(images_.size(), {0, 0});
    instance_ranges_.assign(images_.size(), {0, 0});
    fill_ranges(captions_, caption_ranges_);
    fill_ranges(instances_, instance_ranges_);
  }

  template <typename Rec>
  void fill_ranges(const std::vector<Rec>& recs,
                   std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
    std::size_t i = 0;
    while (i < recs.size()) {
      std::size_t j = i;
      while (j < recs.size() && recs[j].image_id == recs[i].image_id) ++j;
      ranges[index_.at(recs[i].image_id)] = {i, j - i};
      i = j;
    }
  }

  std::size_t slot(std::int64_t image_id) const {
    auto it = index_.find(image_id);
    if (it == index_.end())
      throw LookupError("unknown image id " + std::to_string(image_id));
    return it->second;
  }

  std::vector<ImageRecord> images_;
  std::vector<CaptionRecord> captions_;
  std::vector<PersonInstance> instances_;
  std::unordered_map<std::int64_t, std::size_t> index_;
  std::vector<std::pair<std::size_t, std::size_t>> caption_ranges_;
  std::vector<std::pair<std::size_t, std::size_t>> instance_ranges_;
  LoadStats stats_;
  std::string hash_;
  std::string split_id_;
  bool has_instances_ = false;
};

// Loads one or more COCO captions files (their image and annotation arrays
// are merged), optional COCO instances files and a split definition
// {"train": [ids], "val": [ids], "test": [ids]}.
inline Corpus load_corpus(const std::vector<std::string>& caption_paths,
                          const std::vector<std::string>& instance_paths,
                          const std::string& split_path) {
  std::vector<JsonSource> caps, inst;
  for (const auto& p : caption_paths) caps.push_back({p, read_file(p)});
  for (const auto& p : instance_paths) inst.push_back({p, read_file(p)});
  JsonSource split{split_path, read_file(split_path)};
  return Corpus::from_sources(
      caps, inst, split, std::filesystem::path(split_path).stem().string());
}

inline Corpus load_corpus(const std::string& captions_path,
                          const std::optional<std::string>& instances_path,
                          const std::string& split_path) {
  std::vector<std::string> inst;
  if (instances_path) inst.push_back(*instances_path);
  return load_corpus(std::vector<std::string>{captions_path}, inst,
                     split_path);
}

}  // namespace capbias
