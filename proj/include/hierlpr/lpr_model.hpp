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

// From classifier scores to local precision rates.
//
// The smoother works on the percentile axis u = F(s). G(u), the precision of
// calling everything above the u-th percentile, is observed empirically at
// each distinct training score and fitted by a weighted local quadratic, which
// yields G and dG/du together; LPR(u) = G(u) - (1 - u) dG/du.
// The plug-in alternative evaluates pi f1(s) / f(s) from density estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierlpr/error.hpp"
#include "hierlpr/hierarchy.hpp"
#include "hierlpr/random.hpp"

namespace hierlpr {

inline double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

struct ScoreColumn {
  LabelId label = 0;
  std::vector<double> scores;
  std::vector<std::uint8_t> truth;

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](auto t) { return t != 0; }));
  }
  double prevalence() const {
    return truth.empty() ? 0.0 : static_cast<double>(positives()) / static_cast<double>(truth.size());
  }
};

struct FitOptions {
  std::optional<double> bandwidth;  // on the u axis; rule of thumb when unset
  std::size_t grid_size = 512;
  std::optional<std::uint64_t> resample_seed;  // fit on one bootstrap resample when set
};

struct PrecisionPoint {
  double u = 0.0;
  double g = 0.0;
  double weight = 0.0;
};

class PrecisionCurve {
 public:
  LabelId label = 0;
  double bandwidth = 0.0;
  double prevalence = 0.0;
  std::vector<double> grid;
  std::vector<double> G;
  std::vector<double> dG;
  std::vector<double> lpr_at_u;

  PrecisionCurve() = default;
  PrecisionCurve(LabelId lab, std::vector<double> sorted_scores, std::vector<PrecisionPoint> points, double h,
                 double pi)
      : label(lab),
        bandwidth(h),
        prevalence(pi),
        sorted_scores_(std::move(sorted_scores)),
        points_(std::move(points)) {}

  // Fraction of training scores <= s.
  double percentile(double s) const {
    auto it = std::upper_bound(sorted_scores_.begin(), sorted_scores_.end(), s);
    return static_cast<double>(it - sorted_scores_.begin()) / static_cast<double>(sorted_scores_.size());
  }

  // Local quadratic fit at u: (G, dG/du), G clipped to [0, 1].
  std::pair<double, double> fit_at(double u) const;

  double lpr_at(double u) const {
    auto [g, dg] = fit_at(u);
    return clip01(g - (1.0 - u) * dg);
  }
  double lpr_of_score(double s) const { return lpr_at(percentile(s)); }

  const std::vector<PrecisionPoint>& points() const { return points_; }

 private:
  std::vector<double> sorted_scores_;
  std::vector<PrecisionPoint> points_;
};

namespace detail {

// Solves the 3x3 system A x = b by Gaussian elimination with partial pivoting.
inline bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b, std::array<double, 3>& x) {
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return false;
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10 * scale) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 3; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return true;
}

inline double epanechnikov(double t) { return std::abs(t) >= 1.0 ? 0.0 : 0.75 * (1.0 - t * t); }

// Weighted local quadratic around u0 with half-width h, in scaled t = (u - u0) / h.
inline bool local_quadratic(std::span<const PrecisionPoint> pts, double u0, double h, double& g, double& dg) {
  auto lo = std::lower_bound(pts.begin(), pts.end(), u0 - h,
                             [](const PrecisionPoint& p, double v) { return p.u < v; });
  std::array<double, 5> s{};
  std::array<double, 3> t{};
  std::size_t used = 0;
  for (auto it = lo; it != pts.end() && it->u <= u0 + h; ++it) {
    const double x = (it->u - u0) / h;
    const double w = it->weight * epanechnikov(x);
    if (w <= 0.0) continue;
    ++used;
    double xp = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += w * xp;
      if (k < 3) t[k] += w * xp * it->g;
      xp *= x;
    }
  }
  if (used < 3) return false;
  std::array<std::array<double, 3>, 3> a{{{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}}};
  std::array<double, 3> coef{};
  if (!solve3(a, t, coef)) return false;
  g = coef[0];
  dg = coef[1] / h;
  return true;
}

inline double rule_of_thumb_bandwidth(std::span<const double> sorted) {
  const std::size_t m = sorted.size();
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(m > 1 ? m - 1 : 1));
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(m - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return i + 1 < m ? sorted[i] * (1.0 - f) + sorted[i + 1] * f : sorted[m - 1];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
}

}  // namespace detail

inline std::pair<double, double> PrecisionCurve::fit_at(double u) const {
  double g = prevalence;
  double dg = 0.0;
  double h = bandwidth;
  bool ok = false;
  for (int tries = 0; tries < 8 && !ok; ++tries, h *= 2.0) ok = detail::local_quadratic(points_, u, h, g, dg);
  if (!ok) {
    g = prevalence;
    dg = 0.0;
  }
  return {clip01(g), dg};
}

inline PrecisionCurve fit_precision_curve(const ScoreColumn& input, const FitOptions& opt = {}) {
  if (input.scores.size() != input.truth.size()) {
    throw LengthMismatchError("label " + std::to_string(input.label) + ": scores and truth differ in length");
  }
  if (opt.grid_size < 10) throw ValidationError("grid size must be at least 10");
  if (opt.bandwidth && !(*opt.bandwidth > 0.0)) throw BandwidthError("bandwidth must be positive");
  for (double s : input.scores) {
    if (!std::isfinite(s)) throw ValidationError("label " + std::to_string(input.label) + ": non-finite score");
  }

  ScoreColumn resampled;
  const ScoreColumn* col = &input;
  if (opt.resample_seed) {
    Rng rng = make_rng(*opt.resample_seed, static_cast<std::uint64_t>(input.label));
    std::uniform_int_distribution<std::size_t> pick(0, input.scores.size() - 1);
    resampled.label = input.label;
    for (std::size_t i = 0; i < input.scores.size(); ++i) {
      const std::size_t j = input.scores.empty() ? 0 : pick(rng);
      resampled.scores.push_back(input.scores[j]);
      resampled.truth.push_back(input.truth[j]);
    }
    col = &resampled;
  }

  const std::size_t m = col->scores.size();
  const std::size_t pos = col->positives();
  if (pos < 2 || m - pos < 2) {
    throw DegenerateClassError("label " + std::to_string(col->label) + " has " + std::to_string(pos) +
                               " positives and " + std::to_string(m - pos) + " negatives (need 2 of each)");
  }

  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return col->scores[a] < col->scores[b]; });
  std::vector<double> sorted(m);
  for (std::size_t i = 0; i < m; ++i) sorted[i] = col->scores[idx[i]];

  // One point per distinct score v: u = #(s <= v) / m, G = positives above v / count above v.
  const double pi = static_cast<double>(pos) / static_cast<double>(m);
  std::vector<PrecisionPoint> pts;
  pts.push_back({0.0, pi, static_cast<double>(m)});
  std::size_t pos_above = pos;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && sorted[j] == sorted[i]) {
      pos_above -= col->truth[idx[j]] ? 1 : 0;
      ++j;
    }
    const std::size_t above = m - j;
    if (above > 0) {
      pts.push_back({static_cast<double>(j) / static_cast<double>(m),
                     static_cast<double>(pos_above) / static_cast<double>(above), static_cast<double>(above)});
    }
    i = j;
  }

  std::vector<double> us;
  us.reserve(pts.size());
  for (const auto& p : pts) us.push_back(p.u);
  const double h = opt.bandwidth ? *opt.bandwidth : detail::rule_of_thumb_bandwidth(us);

  PrecisionCurve curve(col->label, std::move(sorted), std::move(pts), h, pi);
  curve.grid.resize(opt.grid_size);
  curve.G.resize(opt.grid_size);
  curve.dG.resize(opt.grid_size);
  curve.lpr_at_u.resize(opt.grid_size);
  for (std::size_t i = 0; i < opt.grid_size; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(opt.grid_size - 1);
    auto [g, dg] = curve.fit_at(u);
    curve.grid[i] = u;
    curve.G[i] = g;
    curve.dG[i] = dg;
    curve.lpr_at_u[i] = clip01(g - (1.0 - u) * dg);
  }
  return curve;
}

// Densities on the score axis.
class Density {
 public:
  static Density beta(double a, double b) {
    Density d;
    d.kind_ = Kind::beta;
    d.a_ = a;
    d.b_ = b;
    d.log_norm_ = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    return d;
  }

  // Gaussian KDE, Silverman bandwidth unless given.
  static Density kde(std::vector<double> samples, std::optional<double> bandwidth = std::nullopt) {
    if (samples.empty()) throw ValidationError("kernel density needs at least one sample");
    Density d;
    d.kind_ = Kind::kde;
    std::sort(samples.begin(), samples.end());
    d.h_ = bandwidth ? *bandwidth : silverman(samples);
    if (!(d.h_ > 0.0)) throw BandwidthError("kernel density bandwidth must be positive");
    d.samples_ = std::move(samples);
    return d;
  }

  double pdf(double s) const {
    if (kind_ == Kind::beta) {
      if (s < 0.0 || s > 1.0) return 0.0;
      if ((s == 0.0 && a_ < 1.0) || (s == 1.0 && b_ < 1.0)) return std::numeric_limits<double>::infinity();
      if ((s == 0.0 && a_ > 1.0) || (s == 1.0 && b_ > 1.0)) return 0.0;
      return std::exp(log_norm_ + (a_ - 1.0) * std::log(s) + (b_ - 1.0) * std::log1p(-s));
    }
    // Kernel mass beyond 8 bandwidths is below 1e-14; skip it.
    auto lo = std::lower_bound(samples_.begin(), samples_.end(), s - 8.0 * h_);
    auto hi = std::upper_bound(samples_.begin(), samples_.end(), s + 8.0 * h_);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double z = (s - *it) / h_;
      acc += std::exp(-0.5 * z * z);
    }
    return acc / (static_cast<double>(samples_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
  }

  bool is_beta() const { return kind_ == Kind::beta; }
  double bandwidth() const { return h_; }

 private:
  enum class Kind { beta, kde };

  static double silverman(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n < 2) return 1.0;
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n - 1));
    const double iqr = sorted[(3 * (n - 1)) / 4] - sorted[(n - 1) / 4];
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = sd > 0.0 ? sd : 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  }

  Kind kind_ = Kind::beta;
  double a_ = 1.0;
  double b_ = 1.0;
  double log_norm_ = 0.0;
  double h_ = 0.0;
  std::vector<double> samples_;
};

struct DensityModel {
  LabelId label = 0;
  double prevalence = 0.0;
  Density f1;
  Density f0;

  double f(double s) const { return prevalence * f1.pdf(s) + (1.0 - prevalence) * f0.pdf(s); }

  static DensityModel fit_kde(const ScoreColumn& col) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < col.scores.size(); ++i) (col.truth[i] ? pos : neg).push_back(col.scores[i]);
    if (pos.empty() || neg.empty()) {
      throw DegenerateClassError("label " + std::to_string(col.label) + " needs both classes");
    }
    return {col.label, col.prevalence(), Density::kde(std::move(pos)), Density::kde(std::move(neg))};
  }
};

inline double lpr_from_densities(double prevalence, double f1, double f0) {
  const double f = prevalence * f1 + (1.0 - prevalence) * f0;
  if (!(f > 0.0)) throw ZeroDensityError("mixture density is zero");
  if (std::isinf(f1)) return 1.0;
  return clip01(prevalence * f1 / f);
}

inline double lpr_from_densities(const DensityModel& model, double s) {
  return lpr_from_densities(model.prevalence, model.f1.pdf(s), model.f0.pdf(s));
}

struct MonotonicityReport {
  double max_violation = 0.0;
  std::size_t first = 0;  // pair (first, second), first < second, with the largest drop
  std::size_t second = 0;
  double violating_fraction = 0.0;

  bool monotone() const { return max_violation == 0.0; }
};

// LPR should not decrease in u; checks every grid pair.
inline MonotonicityReport check_monotonicity(std::span<const double> lpr) {
  MonotonicityReport r;
  const std::size_t g = lpr.size();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = i + 1; j < g; ++j) {
      const double drop = lpr[i] - lpr[j];
      if (drop > 0.0) {
        ++bad;
        if (drop > r.max_violation) {
          r.max_violation = drop;
          r.first = i;
          r.second = j;
        }
      }
    }
  }
  const std::size_t pairs = g * (g - 1) / 2;
  r.violating_fraction = pairs == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(pairs);
  return r;
}

inline MonotonicityReport check_monotonicity(const PrecisionCurve& curve) { return check_monotonicity(curve.lpr_at_u); }

// Fitted curves indexed by label; unset entries are unfitted.
using LprModel = std::vector<std::optional<PrecisionCurve>>;

inline LprModel fit_lpr_model(std::span<const ScoreColumn> columns, std::size_t labels, const FitOptions& opt = {}) {
  LprModel model(labels);
  for (const auto& c : columns) {
    if (c.label < 0 || static_cast<std::size_t>(c.label) >= labels) {
      throw ValidationError("score column for unknown label " + std::to_string(c.label));
    }
    model[static_cast<std::size_t>(c.label)] = fit_precision_curve(c, opt);
  }
  return model;
}

// Splits a scored table with truth into one column per label.
inline std::vector<ScoreColumn> columns_of(const InstanceTable& table) {
  if (!table.truth) throw ValidationError("training scores need a truth column");
  std::vector<ScoreColumn> cols(table.labels);
  for (std::size_t l = 0; l < table.labels; ++l) cols[l].label = static_cast<LabelId>(l);
  for (std::size_t s = 0; s < table.samples(); ++s) {
    for (std::size_t l = 0; l < table.labels; ++l) {
      const std::size_t i = s * table.labels + l;
      if (std::isnan(table.values[i])) continue;
      cols[l].scores.push_back(table.values[i]);
      cols[l].truth.push_back((*table.truth)[i]);
    }
  }
  return cols;
}

// Maps every score to its label's LPR. Missing cells stay missing.
inline InstanceTable lpr_table(const LprModel& model, const InstanceTable& scores) {
  if (model.size() != scores.labels) {
    throw LengthMismatchError("model has " + std::to_string(model.size()) + " labels, scores have " +
                              std::to_string(scores.labels));
  }
  InstanceTable out = scores;
  for (std::size_t s = 0; s < scores.samples(); ++s) {
    for (std::size_t l = 0; l < scores.labels; ++l) {
      const std::size_t i = s * scores.labels + l;
      if (std::isnan(scores.values[i])) continue;
      if (!model[l]) throw UnfittedLabelError("label " + std::to_string(l) + " has no fitted curve");
      out.values[i] = model[l]->lpr_of_score(scores.values[i]);
    }
  }
  return out;
}

}  // namespace hierlpr
