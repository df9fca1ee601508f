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
// Sharded parallel fold with deterministic, shard-ordered results.

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace capbias {

inline unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Splits [0, n) into at most `threads` contiguous shards, runs
// fn(begin, end) -> R on each and returns the results in shard order.
// Shard boundaries depend on `threads`, so callers must merge with an
// associative, commutative reduction to stay independent of it.
template <typename Fn>
auto parallel_shards(std::size_t n, unsigned threads, Fn fn)
    -> std::vector<decltype(fn(std::size_t{}, std::size_t{}))> {
  using R = decltype(fn(std::size_t{}, std::size_t{}));
  const std::size_t shards =
      std::max<std::size_t>(1, std::min<std::size_t>(threads ? threads : 1, n));
  std::vector<R> results(shards);
  if (shards == 1) {
    results[0] = fn(0, n);
    return results;
  }
  std::vector<std::exception_ptr> errors(shards);
  std::vector<std::thread> pool;
  pool.reserve(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    const std::size_t b = n * s / shards, e = n * (s + 1) / shards;
    pool.emplace_back([&, s, b, e] {
      try {
        results[s] = fn(b, e);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return results;
}

}  // namespace capbias
