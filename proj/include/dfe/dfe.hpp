// Copyright 2026 The dfe Authors
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

#include "dfe/baseline.hpp"
#include "dfe/bench.hpp"
#include "dfe/common.hpp"
#include "dfe/linalg.hpp"
#include "dfe/measurement.hpp"
#include "dfe/parallel.hpp"
#include "dfe/rng.hpp"
#include "dfe/shadow_dfe.hpp"
#include "dfe/snapshot.hpp"
#include "dfe/state_io.hpp"
#include "dfe/states.hpp"
