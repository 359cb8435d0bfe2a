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

#include <cstdint>
#include <string>

namespace fxsynth {

struct Interval {
  double lo = 0;
  double hi = 0;

  // Throws Error unless lo <= hi and both are finite.
  static Interval make(double lo, double hi);
  double center() const { return 0.5 * (lo + hi); }
  double halfwidth() const { return 0.5 * (hi - lo); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

// Fixed-point type <s,n,m>: value = integer * 2^-m.
struct FxFormat {
  bool is_signed = true;
  int n = 16;
  int m = 0;

  void validate() const;
  std::int64_t min_int() const;
  std::int64_t max_int() const;
  double lsb() const;
  double min_real() const;
  double max_real() const;
  // True when every real value in `range` lies in [min_real, max_real].
  bool holds(const Interval& range) const;
  bool fits(std::int64_t v) const { return v >= min_int() && v <= max_int(); }
  // "<1,16,14>"
  std::string str() const;
  bool operator==(const FxFormat&) const = default;
};

// Format with the fewest integer bits that holds `range` in n bits. For signed
// formats m is capped at n - 1. Throws BudgetExceeded if no m >= 0 works.
FxFormat allocate_format(const Interval& range, bool is_signed, int n);

// Truncation toward zero of x * 2^m.
std::int64_t quantize(double x, int m);
double to_real(std::int64_t v, int m);

// Division by 2^k truncated toward zero (sign-magnitude shift).
__int128 shift_right_sm(__int128 v, int k);

}  // namespace fxsynth
