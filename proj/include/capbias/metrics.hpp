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
// Corpus and per-instance BLEU-1..4 against multi-reference ground truth.
//
// Clipped n-gram counts and lengths are pooled over the corpus before the
// geometric mean is taken. The effective reference length of a candidate is
// the length of its closest reference, the shorter one on ties.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "capbias/error.hpp"
#include "capbias/parallel.hpp"

namespace capbias {

inline constexpr std::size_t kMaxBleuOrder = 4;
inline constexpr double kBleuEpsilon = 1e-9;

enum class Smoothing { none, epsilon };

// Sufficient statistics; additive over candidate/reference pairs.
struct BleuStats {
  std::array<std::uint64_t, kMaxBleuOrder> matches{};
  std::array<std::uint64_t, kMaxBleuOrder> totals{};
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;

  void merge(const BleuStats& o) {
    for (std::size_t k = 0; k < kMaxBleuOrder; ++k) {
      matches[k] += o.matches[k];
      totals[k] += o.totals[k];
    }
    candidate_length += o.candidate_length;
    reference_length += o.reference_length;
  }
};

struct BleuResult {
  std::array<double, kMaxBleuOrder> bleu{};  // bleu[n-1] is BLEU-n
  double brevity_penalty = 1;
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;
};

using Tokens = std::vector<std::string>;
using ReferenceSet = std::vector<Tokens>;

namespace detail {

using NgramCounts = std::unordered_map<std::string, std::uint32_t>;

inline NgramCounts count_ngrams(const Tokens& toks, std::size_t n) {
  NgramCounts out;
  if (toks.size() < n) return out;
  std::string key;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    key.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key.push_back('\x1f');
      key += toks[i + j];
    }
    ++out[key];
  }
  return out;
}

}  // namespace detail

inline BleuStats bleu_stats(const Tokens& candidate, const ReferenceSet& refs,
                            std::size_t max_n = kMaxBleuOrder) {
  if (refs.empty()) throw InputError("empty reference set");
  if (max_n == 0 || max_n > kMaxBleuOrder)
    throw InputError("BLEU order must be in 1..4");
  BleuStats s;
  s.candidate_length = candidate.size();
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) {
      return len > candidate.size() ? len - candidate.size()
                                    : candidate.size() - len;
    };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best))
      best = r.size();
  }
  s.reference_length = best;

  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = detail::count_ngrams(candidate, n);
    detail::NgramCounts max_ref;
    for (const auto& r : refs)
      for (const auto& [g, c] : detail::count_ngrams(r, n)) {
        auto& m = max_ref[g];
        m = std::max(m, c);
      }
    std::uint64_t matched = 0, total = 0;
    for (const auto& [g, c] : cand) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    s.matches[n - 1] = matched;
    s.totals[n - 1] = total;
  }
  return s;
}

inline BleuResult bleu_from_stats(const BleuStats& s,
                                  std::size_t max_n = kMaxBleuOrder,
                                  Smoothing smoothing = Smoothing::none) {
  BleuResult r;
  r.candidate_length = s.candidate_length;
  r.reference_length = s.reference_length;
  if (s.candidate_length == 0) {
    // Limit of exp(1 - r/c) as c -> 0.
    r.brevity_penalty = s.reference_length == 0 ? 1 : 0;
    return r;
  }
  if (s.candidate_length < s.reference_length)
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(s.reference_length) /
                                           static_cast<double>(s.candidate_length));
  double log_sum = 0;
  bool zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    double p;
    if (smoothing == Smoothing::epsilon) {
      const double m = s.matches[n - 1] > 0
                           ? static_cast<double>(s.matches[n - 1])
                           : kBleuEpsilon;
      p = m / static_cast<double>(std::max<std::uint64_t>(s.totals[n - 1], 1));
    } else {
      zero |= s.matches[n - 1] == 0;
      p = zero ? 0.0
               : static_cast<double>(s.matches[n - 1]) /
                     static_cast<double>(s.totals[n - 1]);
    }
    if (zero) {
      r.bleu[n - 1] = 0;
      continue;
    }
    log_sum += std::log(p);
    r.bleu[n - 1] = r.brevity_penalty * std::exp(log_sum / static_cast<double>(n));
  }
  return r;
}

// Corpus BLEU over aligned candidate/reference-set lists.
inline BleuResult bleu(std::span<const Tokens> candidates,
                       std::span<const ReferenceSet> references,
                       std::size_t max_n = kMaxBleuOrder,
                       Smoothing smoothing = Smoothing::none,
                       unsigned threads = 1) {
  if (candidates.empty() || candidates.size() != references.size())
    throw InputError("BLEU needs equally many candidates and reference sets");
  auto shards = parallel_shards(
      candidates.size(), threads, [&](std::size_t b, std::size_t e) {
        BleuStats s;
        for (std::size_t i = b; i < e; ++i)
          s.merge(bleu_stats(candidates[i], references[i], max_n));
        return s;
      });
  BleuStats total;
  for (const auto& s : shards) total.merge(s);
  return bleu_from_stats(total, max_n, smoothing);
}

// Single pair, epsilon smoothed.
inline BleuResult sentence_bleu(const Tokens& candidate,
                                const ReferenceSet& refs,
                                std::size_t max_n = kMaxBleuOrder) {
  return bleu_from_stats(bleu_stats(candidate, refs, max_n), max_n,
                         Smoothing::epsilon);
}

}  // namespace capbias
