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

#include "fxsynth/fxformat.hpp"

#include <cmath>

#include "fxsynth/error.hpp"

namespace fxsynth {

Interval Interval::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error("interval bounds must be finite");
  }
  if (lo > hi) {
    throw Error("empty interval [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]");
  }
  return Interval{lo, hi};
}

void FxFormat::validate() const {
  if (n < 1 || n > 64) throw Error("format width out of [1, 64]: " + str());
  if (m < 0 || m > n - (is_signed ? 1 : 0)) {
    throw Error("fraction bits out of range: " + str());
  }
  if (is_signed && n < 2) throw Error("signed format needs n >= 2");
}

std::int64_t FxFormat::min_int() const {
  if (!is_signed) return 0;
  return n == 64 ? INT64_MIN : -(std::int64_t{1} << (n - 1));
}

std::int64_t FxFormat::max_int() const {
  if (is_signed) {
    return n == 64 ? INT64_MAX : (std::int64_t{1} << (n - 1)) - 1;
  }
  return n >= 63 ? INT64_MAX : (std::int64_t{1} << n) - 1;
}

double FxFormat::lsb() const { return std::ldexp(1.0, -m); }

double FxFormat::min_real() const {
  return std::ldexp(static_cast<double>(min_int()), -m);
}

double FxFormat::max_real() const {
  return std::ldexp(static_cast<double>(max_int()), -m);
}

bool FxFormat::holds(const Interval& range) const {
  return range.lo >= min_real() && range.hi <= max_real();
}

std::string FxFormat::str() const {
  return "<" + std::to_string(is_signed ? 1 : 0) + "," + std::to_string(n) +
         "," + std::to_string(m) + ">";
}

FxFormat allocate_format(const Interval& range, bool is_signed, int n) {
  FxFormat probe{is_signed, n, 0};
  probe.validate();
  if (!is_signed && range.lo < 0) {
    throw BudgetExceeded("unsigned format cannot hold negative range");
  }
  for (int m = n - (is_signed ? 1 : 0); m >= 0; --m) {
    FxFormat f{is_signed, n, m};
    if (f.holds(range)) return f;
  }
  throw BudgetExceeded("range [" + std::to_string(range.lo) + ", " +
                       std::to_string(range.hi) + "] needs more than " +
                       std::to_string(n) + " bits");
}

std::int64_t quantize(double x, int m) {
  const double scaled = std::trunc(std::ldexp(x, m));
  if (!std::isfinite(scaled) || std::fabs(scaled) >= 0x1p63) {
    throw Error("quantize: value out of 64-bit range");
  }
  return static_cast<std::int64_t>(scaled);
}

double to_real(std::int64_t v, int m) {
  return std::ldexp(static_cast<double>(v), -m);
}

__int128 shift_right_sm(__int128 v, int k) {
  if (k <= 0) return v;
  if (k >= 127) return 0;
  return v < 0 ? -((-v) >> k) : (v >> k);
}

}  // namespace fxsynth
