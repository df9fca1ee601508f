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
// Gender-neutral caption rewriting with an edit audit trail.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "capbias/corpus.hpp"
#include "capbias/lexicon.hpp"
#include "capbias/parallel.hpp"
#include "capbias/tokenize.hpp"
#include "json.hpp"

namespace capbias {

struct TokenEdit {
  std::size_t index = 0;
  std::string original;
  std::string replacement;
  GenderClass original_class = GenderClass::NonPerson;
};

// Edits are in strictly increasing index order.
struct RewriteRecord {
  std::int64_t caption_id = 0;
  std::vector<TokenEdit> edits;
};

struct NeutralCaption {
  std::vector<std::string> tokens;
  RewriteRecord record;
};

inline NeutralCaption neutralize_tokens(const Lexicon& lex,
                                        const std::vector<std::string>& tokens,
                                        std::int64_t caption_id = 0) {
  NeutralCaption out{tokens, {caption_id, {}}};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const GenderClass cls = lex.classify(tokens[i]);
    if (!is_gendered(cls)) continue;
    const std::string& rep = lex.replacement_at(tokens, i);
    out.tokens[i] = rep;
    out.record.edits.push_back({i, tokens[i], rep, cls});
  }
  return out;
}

inline NeutralCaption neutralize_caption(const Lexicon& lex,
                                         const CaptionRecord& caption) {
  return neutralize_tokens(lex, caption.tokens, caption.caption_id);
}

// Replays a rewrite record on the original tokens.
inline std::vector<std::string> apply_edits(std::vector<std::string> tokens,
                                            const RewriteRecord& record) {
  for (const auto& e : record.edits) {
    if (e.index >= tokens.size() || tokens[e.index] != e.original)
      throw ContractError("rewrite record does not match caption " +
                          std::to_string(record.caption_id));
    tokens[e.index] = e.replacement;
  }
  return tokens;
}

struct NeutralizedCaption {
  std::int64_t caption_id = 0;
  std::int64_t image_id = 0;
  std::string text;
};

struct NeutralizedCorpus {
  std::vector<const ImageRecord*> images;
  std::vector<NeutralizedCaption> captions;  // ascending (image_id, caption_id)
  std::vector<RewriteRecord> records;        // captions with at least one edit
  std::map<GenderClass, std::size_t> edits_by_class;
  std::size_t total_edits = 0;
};

// Rewrites every caption of the selected split (all splits when `filter` is
// empty). Unedited captions keep their original text; edited captions are
// the single-space join of their neutral tokens.
inline NeutralizedCorpus neutralize_corpus(const Lexicon& lex,
                                           const Corpus& corpus,
                                           std::optional<Split> filter,
                                           unsigned threads = 1) {
  NeutralizedCorpus out;
  for (const auto& img : corpus.images())
    if (!filter || img.split == *filter) out.images.push_back(&img);

  struct Shard {
    std::vector<NeutralizedCaption> captions;
    std::vector<RewriteRecord> records;
  };
  auto shards = parallel_shards(
      out.images.size(), threads, [&](std::size_t b, std::size_t e) {
        Shard s;
        for (std::size_t i = b; i < e; ++i) {
          for (const auto& cap : corpus.captions_of(out.images[i]->image_id)) {
            NeutralCaption n = neutralize_caption(lex, cap);
            if (n.record.edits.empty()) {
              s.captions.push_back({cap.caption_id, cap.image_id, cap.text});
            } else {
              s.captions.push_back(
                  {cap.caption_id, cap.image_id, join_tokens(n.tokens)});
              s.records.push_back(std::move(n.record));
            }
          }
        }
        return s;
      });
  for (auto& s : shards) {
    for (auto& c : s.captions) out.captions.push_back(std::move(c));
    for (auto& r : s.records) {
      for (const auto& e : r.edits) ++out.edits_by_class[e.original_class];
      out.total_edits += r.edits.size();
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

// COCO captions document with the rewritten texts.
inline nlohmann::json to_coco_json(const NeutralizedCorpus& nc) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto* img : nc.images)
    images.push_back({{"id", img->image_id}, {"file_name", img->file_name}});
  nlohmann::json anns = nlohmann::json::array();
  for (const auto& c : nc.captions)
    anns.push_back(
        {{"id", c.caption_id}, {"image_id", c.image_id}, {"caption", c.text}});
  return {{"images", std::move(images)}, {"annotations", std::move(anns)}};
}

// caption_id, index, original, replacement, class
inline std::string edit_report_tsv(const NeutralizedCorpus& nc) {
  std::ostringstream os;
  os << "caption_id\tindex\toriginal\treplacement\tclass\n";
  for (const auto& r : nc.records)
    for (const auto& e : r.edits)
      os << r.caption_id << '\t' << e.index << '\t' << e.original << '\t'
         << e.replacement << '\t' << to_string(e.original_class) << '\n';
  return os.str();
}

}  // namespace capbias
