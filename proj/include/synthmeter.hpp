// Copyright 2026 The synthmeter Authors
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

#pragma once

#include "synthmeter/codemap.hpp"
#include "synthmeter/csv.hpp"
#include "synthmeter/error.hpp"
#include "synthmeter/image.hpp"
#include "synthmeter/json_canonical.hpp"
#include "synthmeter/manifest.hpp"
#include "synthmeter/metrics.hpp"
#include "synthmeter/neighborhood.hpp"
#include "synthmeter/parallel.hpp"
#include "synthmeter/pipeline.hpp"
#include "synthmeter/plot.hpp"
#include "synthmeter/quantize.hpp"
#include "synthmeter/random.hpp"
#include "synthmeter/stats.hpp"
#include "synthmeter/sweep.hpp"
#include "synthmeter/textures.hpp"
#include "synthmeter/utility.hpp"
