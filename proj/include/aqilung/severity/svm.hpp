// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"
#include "aqilung/rng.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::severity {

struct KernelSpec {
  enum class Kind { kLinear, kRbf };
  Kind kind = Kind::kRbf;
  double gamma = 1.0;

  static KernelSpec linear() { return {Kind::kLinear, 0.0}; }
  static KernelSpec rbf(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("rbf gamma must be finite and positive");
    return {Kind::kRbf, gamma};
  }

  double operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == Kind::kLinear) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    }
    return std::exp(-gamma * squared_distance(a, b));
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  return KernelSpec::rbf(gamma)(a, b);
}

/// Decision function f(x) = sum_i coef_i K(sv_i, x) + bias, coef_i = alpha_i y_i.
struct BinarySvm {
  KernelSpec kernel;
  Tensor support_vectors;
  std::vector<double> coef;
  double bias = 0.0;

  double decision(std::span<const double> x) const {
    double f = bias;
    for (std::size_t i = 0; i < coef.size(); ++i) f += coef[i] * kernel(support_vectors.row(i), x);
    return f;
  }
};

struct SmoConfig {
  double c = 1.0;
  double tol = 1e-3;
  /// Consecutive outer passes allowed without lowering the worst KKT
  /// violation; 0 means 10 * n. Total passes are capped at 100 times this.
  std::size_t max_passes = 0;
};

struct SmoResult {
  BinarySvm machine;
  /// Dual variables for every training row, in input order.
  std::vector<double> alphas;
  std::vector<std::size_t> support_indices;
  double worst_kkt_violation = 0.0;
  std::size_t passes = 0;
};

/// Largest KKT violation of a dual solution, given decision values f(x_i):
/// alpha = 0 needs y f >= 1, 0 < alpha < C needs y f = 1, alpha = C needs y f <= 1.
inline double kkt_violation(std::span<const double> alphas, std::span<const int> y,
                            std::span<const double> decision, double c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double m = y[i] * decision[i];
    double v = 0.0;
    if (alphas[i] <= 0.0) {
      v = std::max(0.0, 1.0 - m);
    } else if (alphas[i] >= c) {
      v = std::max(0.0, m - 1.0);
    } else {
      v = std::abs(m - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

/// Platt's sequential minimal optimization with a full error cache and a
/// precomputed kernel matrix.
class SmoSolver {
 public:
  SmoSolver(const Tensor& x, std::span<const int> y, const KernelSpec& kernel, const SmoConfig& cfg,
            SeededRng& rng)
      : n_(x.rows()), y_(y.begin(), y.end()), c_(cfg.c), tol_(cfg.tol), rng_(rng) {
    k_.resize(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i; j < n_; ++j) {
        const double v = kernel(x.row(i), x.row(j));
        k_[i * n_ + j] = v;
        k_[j * n_ + i] = v;
      }
    }
    alpha_.assign(n_, 0.0);
    error_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -static_cast<double>(y_[i]);
  }

  /// Outer passes run until KKT holds. `max_stalled` bounds consecutive passes
  /// that fail to lower the best worst-case violation seen so far; the total
  /// is capped at kHardCapFactor times that.
  std::size_t run(std::size_t max_stalled) {
    std::size_t passes = 0, stalled = 0;
    double best = std::numeric_limits<double>::infinity();
    bool examine_all = true;
    std::size_t changed = 0;
    while (changed > 0 || examine_all) {
      if (stalled >= max_stalled || passes >= kHardCapFactor * max_stalled) break;
      ++passes;
      changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (examine_all || non_bound(i)) changed += examine(i);
      }
      if (examine_all) {
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
      const double worst = cached_violation();
      if (worst < best) {
        best = worst;
        stalled = 0;
      } else {
        ++stalled;
      }
    }
    return passes;
  }

  const std::vector<double>& alphas() const { return alpha_; }
  double bias() const { return b_; }

  std::vector<double> decisions() const {
    std::vector<double> f(n_, b_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (alpha_[j] == 0.0) continue;
      const double cj = alpha_[j] * y_[j];
      for (std::size_t i = 0; i < n_; ++i) f[i] += cj * k_[j * n_ + i];
    }
    return f;
  }

 private:
  bool non_bound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }
  double kern(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }

  // y f - 1 equals y E, so the cache gives the KKT residuals directly.
  double cached_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = y_[i] * error_[i];
      const double v = alpha_[i] <= 0.0 ? -r : alpha_[i] >= c_ ? r : std::abs(r);
      worst = std::max(worst, v);
    }
    return worst;
  }

  std::size_t examine(std::size_t i2) {
    const double r2 = error_[i2] * y_[i2];
    if (!((r2 < -tol_ && alpha_[i2] < c_) || (r2 > tol_ && alpha_[i2] > 0.0))) return 0;

    // Second choice: maximize |E1 - E2| over non-bound examples.
    std::size_t best = n_;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!non_bound(i)) continue;
      const double gap = std::abs(error_[i] - error_[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return 1;

    const std::size_t start = static_cast<std::size_t>(rng_.below(n_));
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (non_bound(i1) && take_step(i1, i2)) return 1;
    }
    const std::size_t start2 = static_cast<std::size_t>(rng_.below(n_));
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start2 + k) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a2 + a1 - c_);
      hi = std::min(c_, a2 + a1);
    }
    if (hi - lo <= 0.0) return false;
    const double k11 = kern(i1, i1), k12 = kern(i1, i2), k22 = kern(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2_new;
    if (eta > 0.0) {
      a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Objective at the segment ends (f = sum + b convention).
      const double f1 = y1 * (e1 - b_) - a1 * k11 - s * a2 * k12;
      const double f2 = y2 * (e2 - b_) - s * a1 * k12 - a2 * k22;
      const double l1 = a1 + s * (a2 - lo);
      const double h1 = a1 + s * (a2 - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - kStepEps) {
        a2_new = lo;
      } else if (obj_lo > obj_hi + kStepEps) {
        a2_new = hi;
      } else {
        a2_new = a2;
      }
    }
    a2_new = snap(a2_new);
    if (std::abs(a2_new - a2) < kStepEps * (a2_new + a2 + kStepEps)) return false;
    double a1_new = snap(std::clamp(a1 + s * (a2 - a2_new), 0.0, c_));

    const double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    double b_new;
    if (a1_new > 0.0 && a1_new < c_) {
      b_new = b1;
    } else if (a2_new > 0.0 && a2_new < c_) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    const double db = b_new - b_;
    for (std::size_t i = 0; i < n_; ++i) error_[i] += d1 * kern(i1, i) + d2 * kern(i2, i) + db;
    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    b_ = b_new;
    return true;
  }

  double snap(double a) const {
    if (a < kBoundEps * c_) return 0.0;
    if (a > c_ * (1.0 - kBoundEps)) return c_;
    return a;
  }

  static constexpr double kStepEps = 1e-10;
  static constexpr double kBoundEps = 1e-12;
  static constexpr std::size_t kHardCapFactor = 100;

  std::size_t n_;
  std::vector<int> y_;
  double c_;
  double tol_;
  SeededRng& rng_;
  std::vector<double> k_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double b_ = 0.0;
};

}  // namespace detail

/// Solves the soft-margin SVM dual with SMO. Labels must be -1 or +1 with
/// both present. Throws ConvergenceError when the pass budget runs out
/// before every example meets the KKT conditions within `tol`.
inline SmoResult smo_train_binary(const Tensor& x, std::span<const int> y, const KernelSpec& kernel,
                                  const SmoConfig& config, SeededRng& rng) {
  if (x.rank() != 2 || x.rows() != y.size()) throw DimensionError("smo: feature rows and labels differ");
  if (!(config.c > 0.0)) throw DomainError("smo: C must be positive");
  if (!(config.tol > 0.0)) throw DomainError("smo: tol must be positive");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      throw DomainError("smo: labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw DomainError("smo: both classes must be present");

  const std::size_t n = x.rows();
  const std::size_t budget = config.max_passes ? config.max_passes : 10 * n;
  detail::SmoSolver solver(x, y, kernel, config, rng);
  SmoResult result;
  result.passes = solver.run(budget);
  result.alphas = solver.alphas();
  const std::vector<double> f = solver.decisions();
  result.worst_kkt_violation = kkt_violation(result.alphas, y, f, config.c);
  if (result.worst_kkt_violation > config.tol) {
    throw ConvergenceError(result.worst_kkt_violation,
                           "smo did not satisfy KKT within tol " + std::to_string(config.tol) + " after " +
                               std::to_string(result.passes) + " passes (worst violation " +
                               std::to_string(result.worst_kkt_violation) + ")");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (result.alphas[i] > 0.0) result.support_indices.push_back(i);
  }
  result.machine.kernel = kernel;
  result.machine.bias = solver.bias();
  if (!result.support_indices.empty()) {
    result.machine.support_vectors = gather_rows(x, result.support_indices);
    for (std::size_t i : result.support_indices) result.machine.coef.push_back(result.alphas[i] * y[i]);
  }
  return result;
}

}  // namespace aqilung::severity
