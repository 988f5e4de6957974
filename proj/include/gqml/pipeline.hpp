// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gqml/errors.hpp"

namespace gqml::pipeline {

// ---------------------------------------------------------------------------
// MinMax scaling

class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<double> min, std::vector<double> max)
      : min_(std::move(min)), max_(std::move(max)), fitted_(true) {
    if (min_.size() != max_.size()) throw StructuralError("scaler channel count mismatch");
    for (std::size_t c = 0; c < min_.size(); ++c)
      if (!(max_[c] > min_[c])) throw DegenerateScaleError("scaler channel has max <= min");
  }

  // rows[i][c]: sample i, channel c.
  static MinMaxScaler fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ValidationError("cannot fit a scaler on zero rows");
    const std::size_t channels = rows.front().size();
    std::vector<double> lo(channels, std::numeric_limits<double>::infinity());
    std::vector<double> hi(channels, -std::numeric_limits<double>::infinity());
    for (const auto& r : rows) {
      if (r.size() != channels) throw StructuralError("scaler rows differ in channel count");
      for (std::size_t c = 0; c < channels; ++c) {
        lo[c] = std::min(lo[c], r[c]);
        hi[c] = std::max(hi[c], r[c]);
      }
    }
    for (std::size_t c = 0; c < channels; ++c)
      if (!(hi[c] > lo[c]))
        throw DegenerateScaleError("channel " + std::to_string(c) + " is constant; cannot scale");
    return MinMaxScaler(std::move(lo), std::move(hi));
  }

  // Single channel.
  static MinMaxScaler fit(std::span<const double> values) {
    std::vector<std::vector<double>> rows;
    rows.reserve(values.size());
    for (double v : values) rows.push_back({v});
    return fit(rows);
  }

  bool fitted() const { return fitted_; }
  std::size_t channels() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }
  double span(std::size_t channel = 0) const { return max_.at(channel) - min_.at(channel); }

  // Values outside the fit range map outside [0, 1]; no refit happens here.
  double transform(double v, std::size_t channel = 0) const {
    require_fitted();
    return (v - min_.at(channel)) / span(channel);
  }
  double inverse(double v, std::size_t channel = 0) const {
    require_fitted();
    return v * span(channel) + min_.at(channel);
  }

  std::vector<double> transform(std::span<const double> v, std::size_t channel = 0) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = transform(v[i], channel);
    return out;
  }
  std::vector<double> inverse(std::span<const double> v, std::size_t channel = 0) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = inverse(v[i], channel);
    return out;
  }

  bool operator==(const MinMaxScaler&) const = default;

 private:
  void require_fitted() const {
    if (!fitted_) throw ValidationError("scaler used before fit");
  }

  std::vector<double> min_, max_;
  bool fitted_ = false;
};

// ---------------------------------------------------------------------------
// Losses and clipping

inline constexpr double kHuberDelta = 0.5;

inline double huber(double r, double delta = kHuberDelta) {
  if (!(delta > 0.0)) throw ValidationError("huber delta must be positive");
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

inline double huber_derivative(double r, double delta = kHuberDelta) {
  if (!(delta > 0.0)) throw ValidationError("huber delta must be positive");
  return std::abs(r) <= delta ? r : (r > 0 ? delta : -delta);
}

enum class ForceLoss { Mse, Huber };

inline double force_loss(ForceLoss kind, double r) {
  return kind == ForceLoss::Mse ? r * r : huber(r);
}
inline double force_loss_derivative(ForceLoss kind, double r) {
  return kind == ForceLoss::Mse ? 2.0 * r : huber_derivative(r);
}

inline constexpr double kQuantumClipNorm = 10.0;
inline constexpr double kClassicalClipNorm = 5.0;

inline double l2_norm(std::span<const double> g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

inline std::vector<double> clip_gradient(std::vector<double> g, double max_norm) {
  if (!(max_norm > 0.0)) throw ValidationError("clip max_norm must be positive");
  const double n = l2_norm(g);
  if (n > max_norm) {
    const double s = max_norm / n;
    for (double& v : g) v *= s;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Post-correction

namespace detail {

// Least squares min |A x - y| via Householder QR on column-normalised A.
// cols[j] is column j. Throws DegenerateFitError when A is rank deficient.
inline std::vector<double> least_squares(std::vector<std::vector<double>> cols, std::vector<double> y) {
  const std::size_t n = cols.size();
  const std::size_t m = y.size();
  if (m < n) throw DegenerateFitError("fewer observations than coefficients");
  std::vector<double> scale(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (double v : cols[j]) s += v * v;
    s = std::sqrt(s);
    if (!(s > 0.0)) throw DegenerateFitError("design matrix has a zero column");
    scale[j] = s;
    for (double& v : cols[j]) v /= s;
  }
  for (std::size_t k = 0; k < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k; i < m; ++i) alpha += cols[k][i] * cols[k][i];
    alpha = std::sqrt(alpha);
    if (alpha < 1e-10) throw DegenerateFitError("design matrix is rank deficient");
    if (cols[k][k] > 0) alpha = -alpha;
    std::vector<double> v(m, 0.0);
    for (std::size_t i = k; i < m; ++i) v[i] = cols[k][i];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
    auto reflect = [&](std::vector<double>& x) {
      double d = 0.0;
      for (std::size_t i = k; i < m; ++i) d += v[i] * x[i];
      const double f = 2.0 * d / vnorm2;
      for (std::size_t i = k; i < m; ++i) x[i] -= f * v[i];
    };
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < n; ++j) reflect(cols[j]);
      reflect(y);
    }
    if (std::abs(cols[k][k]) < 1e-10) throw DegenerateFitError("design matrix is rank deficient");
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double s = y[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= cols[j][k] * x[j];
    x[k] = s / cols[k][k];
  }
  for (std::size_t j = 0; j < n; ++j) x[j] /= scale[j];
  return x;
}

}  // namespace detail

// energy' = c2 p^2 + c1 p + c0;  force' = m p + b (all components pooled)
struct PostCorrection {
  double c2 = 0.0, c1 = 1.0, c0 = 0.0;
  double m = 1.0, b = 0.0;

  double energy(double p) const { return (c2 * p + c1) * p + c0; }
  double force(double p) const { return m * p + b; }

  bool operator==(const PostCorrection&) const = default;
};

inline void fit_energy_correction(PostCorrection& pc, std::span<const double> pred,
                                  std::span<const double> target) {
  if (pred.size() != target.size()) throw StructuralError("prediction/target length mismatch");
  if (pred.size() < 3) throw DegenerateFitError("energy correction needs at least 3 pairs");
  std::vector<double> p2(pred.size()), p1(pred.begin(), pred.end()), one(pred.size(), 1.0);
  for (std::size_t i = 0; i < pred.size(); ++i) p2[i] = pred[i] * pred[i];
  const auto c = detail::least_squares({p2, p1, one}, {target.begin(), target.end()});
  pc.c2 = c[0], pc.c1 = c[1], pc.c0 = c[2];
}

inline void fit_force_correction(PostCorrection& pc, std::span<const double> pred,
                                 std::span<const double> target) {
  if (pred.size() != target.size()) throw StructuralError("prediction/target length mismatch");
  if (pred.size() < 2) throw DegenerateFitError("force correction needs at least 2 pairs");
  std::vector<double> p1(pred.begin(), pred.end()), one(pred.size(), 1.0);
  const auto c = detail::least_squares({p1, one}, {target.begin(), target.end()});
  pc.m = c[0], pc.b = c[1];
}

inline PostCorrection fit_postcorrection(std::span<const double> energy_pred,
                                         std::span<const double> energy_target,
                                         std::span<const double> force_pred,
                                         std::span<const double> force_target) {
  PostCorrection pc;
  fit_energy_correction(pc, energy_pred, energy_target);
  fit_force_correction(pc, force_pred, force_target);
  return pc;
}

// ---------------------------------------------------------------------------
// Schedules

// Piecewise-linear in epoch. Knots are (epoch, value) with non-decreasing
// epochs; two knots at the same epoch form a step that takes the right-hand
// value from that epoch on. Constant extrapolation outside the knot range.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;

  double operator()(double x) const {
    if (knots.empty()) return 0.0;
    std::size_t j = 0;
    while (j < knots.size() && knots[j].first <= x) ++j;
    if (j == 0) return knots.front().second;
    if (j == knots.size()) return knots.back().second;
    const auto [x0, y0] = knots[j - 1];
    const auto [x1, y1] = knots[j];
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }
};

struct TrainSchedule {
  PiecewiseLinear energy_weight;
  PiecewiseLinear force_weight;
  double warmup_end = 0.0;  // w_F == 0 for epoch <= warmup_end (when > 0)
  double ramp_end = 0.0;    // w_F reaches its final value here
};

struct Weights {
  double energy = 1.0;
  double force = 0.0;
};

inline Weights schedule_weights(const TrainSchedule& s, double epoch) {
  if (epoch < 0) throw ValidationError("epoch must be >= 0");
  return {s.energy_weight(epoch), s.force_weight(epoch)};
}

// Energy-only until `warmup_end`, then a linear force ramp reaching 1 at
// `ramp_end`. ramp_end == warmup_end gives a hard switch at that epoch.
// warmup_end == 0 means forces are on from the start.
inline TrainSchedule make_schedule(double warmup_end, double ramp_end) {
  if (warmup_end < 0 || ramp_end < warmup_end)
    throw ValidationError("schedule requires 0 <= warmup_end <= ramp_end");
  TrainSchedule s;
  s.energy_weight.knots = {{0.0, 1.0}};
  s.warmup_end = warmup_end;
  s.ramp_end = ramp_end;
  if (warmup_end == 0.0 && ramp_end == 0.0) {
    s.force_weight.knots = {{0.0, 1.0}};
  } else {
    s.force_weight.knots = {{0.0, 0.0}, {warmup_end, 0.0}, {ramp_end, 1.0}};
  }
  return s;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(AdamConfig cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw StructuralError("Adam: parameter/gradient size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      params[i] -= cfg_.lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

}  // namespace gqml::pipeline
