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
// Helpers for building small in-memory corpora in tests.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capbias/corpus.hpp"
#include "json.hpp"

namespace capbias::testing {

struct ImageSpec {
  std::int64_t id = 0;
  Split split = Split::train;
  std::vector<std::string> captions = {};
  std::vector<double> person_areas = {};  // one person instance per entry
};

// Caption ids are id * 100 + k, instance ids id * 100 + 50 + k.
inline Corpus make_corpus(const std::vector<ImageSpec>& images,
                          bool with_instances = false) {
  nlohmann::json imgs = nlohmann::json::array(), anns = nlohmann::json::array(),
                 people = nlohmann::json::array();
  nlohmann::json split = nlohmann::json::object();
  for (const auto& im : images) {
    imgs.push_back({{"id", im.id}, {"file_name", std::to_string(im.id) + ".jpg"}});
    split[std::string(to_string(im.split))].push_back(im.id);
    for (std::size_t k = 0; k < im.captions.size(); ++k)
      anns.push_back({{"id", im.id * 100 + static_cast<std::int64_t>(k)},
                      {"image_id", im.id},
                      {"caption", im.captions[k]}});
    for (std::size_t k = 0; k < im.person_areas.size(); ++k)
      people.push_back({{"id", im.id * 100 + 50 + static_cast<std::int64_t>(k)},
                        {"image_id", im.id},
                        {"category_id", 1},
                        {"bbox", {0, 0, 10, 10}},
                        {"area", im.person_areas[k]},
                        {"segmentation", nlohmann::json::array()},
                        {"iscrowd", 0}});
  }
  std::vector<JsonSource> inst;
  if (with_instances)
    inst.push_back({"instances", nlohmann::json{{"annotations", people}}.dump()});
  return Corpus::from_sources(
      {{"captions", nlohmann::json{{"images", imgs}, {"annotations", anns}}.dump()}},
      inst, {"split", split.dump()}, "test-split");
}

inline std::vector<std::string> repeat(const std::string& s, std::size_t n) {
  return std::vector<std::string>(n, s);
}

}  // namespace capbias::testing
