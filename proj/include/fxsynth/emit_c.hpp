// Copyright 2026 The fxsynth Authors
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

#include <string>

#include "fxsynth/fxprogram.hpp"

namespace fxsynth {

// C89 source for `prog`. Controller programs with one measurement and one
// control emit `float name(float yin)`; other controller programs emit
// `void name(const float yin[], float uout[])`. Free-form programs emit an
// integer interface `void name(const long in[], long out[])`.
// Throws UnsupportedError when an intermediate could exceed the C type.
std::string emit_c_source(const FxProgram& prog,
                          const std::string& function_name = "controller");

}  // namespace fxsynth
