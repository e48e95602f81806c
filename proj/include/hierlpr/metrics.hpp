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

// Call-ordered evaluation: hit curve, its area, eAUC, pooled PR curves and
// F-measure. Curves carry one point per call (prefix), not per threshold.

#include <cstdint>
#include <span>
#include <vector>

#include "hierlpr/error.hpp"
#include "hierlpr/hierarchy.hpp"
#include "hierlpr/mass.hpp"

namespace hierlpr {

// sum_k (n - k + 1) * lpr_(k)
inline double eauc(std::span<const double> lpr_in_order) {
  const std::size_t n = lpr_in_order.size();
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += static_cast<double>(n - k) * lpr_in_order[k];
  return total;
}

// Same sum on the fixed-point grid; exact, so tie-broken rankings compare equal.
inline Fixed eauc_exact(const InstanceForest& forest, std::span<const InstanceId> order) {
  const std::size_t n = order.size();
  Fixed total = 0;
  for (std::size_t k = 0; k < n; ++k) total += static_cast<Fixed>(n - k) * forest.mass(order[k]).sum;
  return total;
}

inline double eauc(const InstanceForest& forest, std::span<const InstanceId> order) {
  std::vector<double> v;
  v.reserve(order.size());
  for (InstanceId id : order) v.push_back(forest.lpr(id));
  return eauc(v);
}

inline std::int64_t hit_auc(std::span<const std::uint8_t> truth_in_order) {
  const auto n = static_cast<std::int64_t>(truth_in_order.size());
  std::int64_t total = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (truth_in_order[static_cast<std::size_t>(k)]) total += n - k;
  }
  return total;
}

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

inline std::vector<PrPoint> pr_curve(std::span<const std::uint8_t> truth_in_order,
                                     std::size_t total_positives) {
  if (total_positives == 0) throw ZeroPositivesError("PR curve needs at least one positive");
  std::vector<PrPoint> out;
  out.reserve(truth_in_order.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth_in_order.size(); ++k) {
    hits += truth_in_order[k] ? 1 : 0;
    out.push_back({static_cast<double>(hits) / static_cast<double>(total_positives),
                   static_cast<double>(hits) / static_cast<double>(k + 1)});
  }
  return out;
}

// Harmonic mean of precision and recall over the first k calls (1-based k).
inline double f_measure_at(std::span<const std::uint8_t> truth_in_order, std::size_t k,
                           std::size_t total_positives) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k && i < truth_in_order.size(); ++i) hits += truth_in_order[i] ? 1 : 0;
  if (hits == 0 || total_positives == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(k);
  const double r = static_cast<double>(hits) / static_cast<double>(total_positives);
  return 2.0 * p * r / (p + r);
}

struct HitPoint {
  std::size_t calls = 0;
  std::size_t hits = 0;
};

struct MaxF {
  double value = 0.0;
  std::size_t cut_index = 0;  // number of calls
};

struct CurveSet {
  std::vector<HitPoint> hit_curve;
  std::vector<PrPoint> pr;
  std::int64_t hit_auc = 0;
  double eauc = 0.0;
  MaxF max_f;
};

inline CurveSet compute_curves(std::span<const double> lpr_in_order,
                               std::span<const std::uint8_t> truth_in_order) {
  if (lpr_in_order.size() != truth_in_order.size()) {
    throw LengthMismatchError("LPR and truth sequences differ in length");
  }
  std::size_t positives = 0;
  for (auto t : truth_in_order) positives += t ? 1 : 0;
  CurveSet cs;
  cs.eauc = eauc(lpr_in_order);
  cs.hit_auc = hit_auc(truth_in_order);
  cs.pr = pr_curve(truth_in_order, positives);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth_in_order.size(); ++k) {
    hits += truth_in_order[k] ? 1 : 0;
    cs.hit_curve.push_back({k + 1, hits});
    const auto& pt = cs.pr[k];
    const double f = hits == 0 ? 0.0 : 2.0 * pt.precision * pt.recall / (pt.precision + pt.recall);
    if (f > cs.max_f.value) cs.max_f = {f, k + 1};
  }
  return cs;
}

inline CurveSet compute_curves(const InstanceForest& forest, std::span<const InstanceId> order) {
  if (!forest.has_truth()) throw ValidationError("curves need ground truth");
  std::vector<double> lpr;
  std::vector<std::uint8_t> truth;
  for (InstanceId v : order) {
    lpr.push_back(forest.lpr(v));
    truth.push_back(forest.truth(v) ? 1 : 0);
  }
  return compute_curves(lpr, truth);
}

// Precision at each recall grid point (j / grid_size, j = 1..grid_size),
// interpolated linearly between the (recall, precision) points where hits
// occur; left of the first hit the first hit's precision is used.
inline std::vector<double> interpolate_precision(std::span<const PrPoint> curve,
                                                 std::span<const double> recall_grid) {
  std::vector<PrPoint> hits;
  double last = 0.0;
  for (const auto& p : curve) {
    if (p.recall > last) {
      hits.push_back(p);
      last = p.recall;
    }
  }
  std::vector<double> out(recall_grid.size(), 0.0);
  if (hits.empty()) return out;
  std::size_t j = 0;
  for (std::size_t g = 0; g < recall_grid.size(); ++g) {
    const double r = recall_grid[g];
    while (j < hits.size() && hits[j].recall < r) ++j;
    if (j == hits.size()) {
      out[g] = hits.back().precision;
    } else if (j == 0 || hits[j].recall == r) {
      out[g] = hits[j].precision;
    } else {
      const auto& a = hits[j - 1];
      const auto& b = hits[j];
      const double t = (r - a.recall) / (b.recall - a.recall);
      out[g] = a.precision + t * (b.precision - a.precision);
    }
  }
  return out;
}

inline std::vector<double> recall_grid(std::size_t points = 200) {
  std::vector<double> g(points);
  for (std::size_t j = 0; j < points; ++j) g[j] = static_cast<double>(j + 1) / static_cast<double>(points);
  return g;
}

// Vertical average of several PR curves on a shared recall grid.
class PrAverager {
 public:
  explicit PrAverager(std::size_t points = 200) : grid_(recall_grid(points)), sum_(points, 0.0) {}

  void add(std::span<const PrPoint> curve) {
    auto p = interpolate_precision(curve, grid_);
    for (std::size_t i = 0; i < p.size(); ++i) sum_[i] += p[i];
    ++count_;
  }

  const std::vector<double>& grid() const { return grid_; }
  std::size_t count() const { return count_; }
  std::vector<double> mean() const {
    std::vector<double> m(sum_.size(), 0.0);
    if (count_ == 0) return m;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = sum_[i] / static_cast<double>(count_);
    return m;
  }

 private:
  std::vector<double> grid_;
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

}  // namespace hierlpr
