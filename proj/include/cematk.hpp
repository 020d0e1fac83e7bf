/*
 * Copyright 2026 The cematk Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CEMATK_CEMATK_HPP
#define CEMATK_CEMATK_HPP

#include "cematk/cema.hpp"
#include "cematk/dsp.hpp"
#include "cematk/eval.hpp"
#include "cematk/io.hpp"
#include "cematk/leakage.hpp"
#include "cematk/present.hpp"
#include "cematk/rng.hpp"
#include "cematk/sim.hpp"
#include "cematk/trace.hpp"

#endif // CEMATK_CEMATK_HPP
