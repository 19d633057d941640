// Copyright 2026 The mixmnl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIXMNL_MIXMNL_HPP_
#define MIXMNL_MIXMNL_HPP_

#include "mixmnl/altmin.hpp"
#include "mixmnl/common.hpp"
#include "mixmnl/graph.hpp"
#include "mixmnl/io.hpp"
#include "mixmnl/model.hpp"
#include "mixmnl/moments.hpp"
#include "mixmnl/pipeline.hpp"
#include "mixmnl/rank_centrality.hpp"
#include "mixmnl/spectral.hpp"
#include "mixmnl/tensor.hpp"

#endif  // MIXMNL_MIXMNL_HPP_
