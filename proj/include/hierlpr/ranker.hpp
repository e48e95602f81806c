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

#include <array>
#include <optional>
#include <string_view>

#include "hierlpr/brute.hpp"
#include "hierlpr/cssa.hpp"
#include "hierlpr/fast.hpp"
#include "hierlpr/naive.hpp"

namespace hierlpr {

enum class Algo { naive, fast, cssa, brute };

inline constexpr std::array<std::pair<Algo, std::string_view>, 4> kAlgoRegistry{{
    {Algo::naive, "naive"},
    {Algo::fast, "fast"},
    {Algo::cssa, "cssa"},
    {Algo::brute, "brute"},
}};

inline std::string_view to_string(Algo a) {
  for (const auto& [k, name] : kAlgoRegistry) {
    if (k == a) return name;
  }
  return "?";
}

inline std::optional<Algo> parse_algo(std::string_view s) {
  for (const auto& [k, name] : kAlgoRegistry) {
    if (name == s) return k;
  }
  return std::nullopt;
}

inline Ranking rank(const InstanceForest& forest, Algo algo, TieRule rule = TieRule::canonical) {
  switch (algo) {
    case Algo::naive:
      return hier_lpr_naive(forest, rule);
    case Algo::fast:
      return hier_lpr_fast(forest, rule);
    case Algo::cssa:
      return cssa_rank(forest, rule);
    case Algo::brute:
      return brute_force_optimal(forest).ranking;
  }
  return {};
}

}  // namespace hierlpr
