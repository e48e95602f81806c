// Copyright 2026 The hierlpr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Exact block arithmetic.
//
// Every LPR in [0, 1] is mapped once onto the fixed-point grid 2^-64 and
// stored as a 128-bit integer. Block sums are then exact and associative, so
// the three rankers agree bit-for-bit on every mean comparison no matter in
// which order they accumulate. Means are compared by cross multiplication
// (sum_a * size_b vs sum_b * size_a), which stays exact while
// n^2 * 2^64 < 2^127, i.e. for n below ~3e9 instances.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace hierlpr {

using Fixed = __int128;

inline constexpr int kFixedBits = 64;

// Truncating conversion; monotone, exact for every double >= 2^-11.
inline Fixed to_fixed(double v) {
  return static_cast<Fixed>(std::ldexp(v, kFixedBits));
}

inline double from_fixed(Fixed f) {
  return static_cast<double>(
      std::ldexp(static_cast<long double>(f), -kFixedBits));
}

inline std::string fixed_to_string(Fixed v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v)
                            : static_cast<unsigned __int128>(v);
  std::string s;
  while (u != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

// (sum, size) pair; the mean is sum / (size * 2^64).
struct Mass {
  Fixed sum = 0;
  std::int64_t size = 0;

  static Mass of(double lpr) { return Mass{to_fixed(lpr), 1}; }

  Mass& operator+=(const Mass& o) {
    sum += o.sum;
    size += o.size;
    return *this;
  }
  friend Mass operator+(Mass a, const Mass& b) { return a += b; }
  friend Mass operator-(Mass a, const Mass& b) {
    a.sum -= b.sum;
    a.size -= b.size;
    return a;
  }
  friend bool operator==(const Mass&, const Mass&) = default;

  double mean() const {
    return size == 0 ? 0.0 : from_fixed(sum) / static_cast<double>(size);
  }
};

// Three-way comparison of means; both masses must be non-empty.
inline std::strong_ordering compare_means(const Mass& a, const Mass& b) {
  Fixed lhs = a.sum * static_cast<Fixed>(b.size);
  Fixed rhs = b.sum * static_cast<Fixed>(a.size);
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace hierlpr
