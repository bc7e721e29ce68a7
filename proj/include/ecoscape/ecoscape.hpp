// Copyright 2026 The Ecoscape Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ecoscape/chaos.hpp"
#include "ecoscape/config.hpp"
#include "ecoscape/errors.hpp"
#include "ecoscape/remediation.hpp"
#include "ecoscape/rng.hpp"
#include "ecoscape/runner.hpp"
#include "ecoscape/scoring_io.hpp"
#include "ecoscape/simcore.hpp"
#include "ecoscape/slo.hpp"
#include "ecoscape/time.hpp"
#include "ecoscape/world.hpp"
