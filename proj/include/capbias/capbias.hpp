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
// Umbrella header.

#pragma once

#include "capbias/biasstats.hpp"
#include "capbias/corpus.hpp"
#include "capbias/datasetgen.hpp"
#include "capbias/error.hpp"
#include "capbias/lexicon.hpp"
#include "capbias/metrics.hpp"
#include "capbias/neutralizer.hpp"
#include "capbias/reinjector.hpp"
#include "capbias/tokenize.hpp"
