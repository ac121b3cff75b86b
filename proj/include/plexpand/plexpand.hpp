// Copyright 2026 The plexpand Authors
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

#ifndef PLEXPAND_PLEXPAND_HPP
#define PLEXPAND_PLEXPAND_HPP

#include "plexpand/abs_normal.hpp"
#include "plexpand/bench.hpp"
#include "plexpand/bounds.hpp"
#include "plexpand/errors.hpp"
#include "plexpand/interval.hpp"
#include "plexpand/kernels.hpp"
#include "plexpand/linalg.hpp"
#include "plexpand/linearize.hpp"
#include "plexpand/newton.hpp"
#include "plexpand/parser.hpp"
#include "plexpand/plsolve.hpp"
#include "plexpand/tape.hpp"

#endif  // PLEXPAND_PLEXPAND_HPP
