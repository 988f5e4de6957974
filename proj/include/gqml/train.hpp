// SPDX-License-Identifier: Apache-2.0
#pragma once

// Energy/force training loop.
//
// Per-sample loss: w_E (E_s - E_t)^2 + w_F mean_c l(r_c), with E_s the scaled
// model energy, E_t the scaled target and r_c = (F_pred,c - F_true,c) / span(F)
// the difference of MinMax-scaled force components. Parameter gradients come
// from evaluate_energy() (adjoint / backprop). The force term needs the mixed
// derivative d^2E/dx dtheta contracted with dl/dr; it is taken as a central
// difference of dE/dtheta along that contraction direction, so each sample
// costs 2 gradient evaluations on top of the 6A energy evaluations for F.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gqml/data.hpp"
#include "gqml/errors.hpp"
#include "gqml/models.hpp"
#include "gqml/pipeline.hpp"

namespace gqml::train {

using models::Model;
using models::ModelKind;

struct TrainOptions {
  int epochs = 0;
  pipeline::TrainSchedule schedule;
  pipeline::AdamConfig adam;
  double clip_norm = pipeline::kQuantumClipNorm;
  std::size_t batch_size = 0;  // 0: full batch
  pipeline::ForceLoss force_loss = pipeline::ForceLoss::Mse;
  double force_step = models::kForceStep;
};

// Phase boundaries as fractions of the epoch budget.
struct PhaseFractions {
  double warmup = 0.0;
  double ramp_end = 0.0;
};

inline int default_epochs(ModelKind k) {
  switch (k) {
    case ModelKind::RotEqQML: return 300;
    case ModelKind::NonEqQML: return 300;
    case ModelKind::GraphPermQML: return 400;
    case ModelKind::ClassicalEqNN: return 200;
  }
  return 0;
}

inline PhaseFractions default_fractions(ModelKind k) {
  switch (k) {
    case ModelKind::RotEqQML: return {1.0 / 3.0, 1.0};  // ramp over [100, 300]
    case ModelKind::NonEqQML: return {0.0, 0.0};         // forces from epoch 0
    case ModelKind::GraphPermQML: return {0.5, 0.5};     // switch at 200 of 400
    case ModelKind::ClassicalEqNN: return {0.3, 0.6};
  }
  return {};
}

inline TrainOptions make_options(ModelKind k, int epochs, PhaseFractions f) {
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (!(f.warmup >= 0.0 && f.ramp_end >= f.warmup && f.ramp_end <= 1.0))
    throw ValidationError("phase fractions need 0 <= warmup <= ramp_end <= 1");
  TrainOptions o;
  o.epochs = epochs;
  o.schedule = pipeline::make_schedule(f.warmup * epochs, f.ramp_end * epochs);
  if (models::is_quantum(k)) {
    o.adam.lr = 0.05;
    o.clip_norm = pipeline::kQuantumClipNorm;
    o.batch_size = 0;
    o.force_loss = pipeline::ForceLoss::Mse;
  } else {
    o.adam.lr = 1e-3;
    o.clip_norm = pipeline::kClassicalClipNorm;
    o.batch_size = 32;
    o.force_loss = pipeline::ForceLoss::Huber;
  }
  return o;
}

inline TrainOptions default_options(ModelKind k, int epochs = 0) {
  return make_options(k, epochs > 0 ? epochs : default_epochs(k), default_fractions(k));
}

// Energy scaler on energies, force scaler on all force components pooled into
// one channel (a single span keeps F_raw = span(E) * F_s covariant).
inline void fit_scalers(Model& m, const data::Dataset& d) {
  std::vector<double> e, f;
  for (const auto& s : d.samples) {
    e.push_back(s.energy);
    for (const auto& v : s.forces) f.insert(f.end(), v.begin(), v.end());
  }
  m.energy_scaler = pipeline::MinMaxScaler::fit(e);
  m.force_scaler = pipeline::MinMaxScaler::fit(f);
}

struct SampleLoss {
  double loss = 0.0;
  std::vector<double> gradient;
};

inline SampleLoss sample_loss(const Model& m, std::span<const double> params,
                              const data::MoleculeSample& s, pipeline::Weights w,
                              const TrainOptions& opt) {
  const auto& cfg = m.config;
  const double span_e = m.energy_scaler.span();
  const double span_f = m.force_scaler.span();
  auto ev = models::evaluate_energy(cfg, params, s.positions, true);
  const double de = ev.energy - m.energy_scaler.transform(s.energy);
  SampleLoss out;
  out.loss = w.energy * de * de;
  out.gradient.resize(params.size());
  for (std::size_t k = 0; k < params.size(); ++k)
    out.gradient[k] = w.energy * 2.0 * de * ev.gradient[k];
  if (w.force == 0.0) return out;

  const auto fs = models::fd_forces(cfg, params, s.positions, opt.force_step);
  const std::size_t C = 3 * fs.size();
  std::vector<Vec3> dir(fs.size());
  double gnorm2 = 0.0;
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (int c = 0; c < 3; ++c) {
      const double r = (span_e * fs[a][c] - s.forces[a][c]) / span_f;
      out.loss += w.force * pipeline::force_loss(opt.force_loss, r) / C;
      dir[a][c] = pipeline::force_loss_derivative(opt.force_loss, r) / C;
      gnorm2 += dir[a][c] * dir[a][c];
    }
  // A non-finite loss is reported by the caller; stepping along a NaN
  // direction would only surface as a geometry error.
  if (gnorm2 == 0.0 || !std::isfinite(out.loss)) return out;
  const double gnorm = std::sqrt(gnorm2), h = opt.force_step;
  std::vector<Vec3> xp = s.positions, xm = s.positions;
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (int c = 0; c < 3; ++c) {
      xp[a][c] += h * dir[a][c] / gnorm;
      xm[a][c] -= h * dir[a][c] / gnorm;
    }
  const auto gp = models::evaluate_energy(cfg, params, xp, true).gradient;
  const auto gm = models::evaluate_energy(cfg, params, xm, true).gradient;
  // d loss / d theta = w_F sum_c l'(r_c)/C * dr_c/dtheta, dr_c/dtheta = -(span_e/span_f) d2E/dx_c dtheta
  const double k = -w.force * (span_e / span_f) * gnorm / (2.0 * h);
  for (std::size_t j = 0; j < params.size(); ++j) out.gradient[j] += k * (gp[j] - gm[j]);
  return out;
}

struct TrainHistory {
  std::vector<double> loss;  // mean per-sample loss per epoch
};

// Trains in place. Scalers must already be fitted on the training data.
inline TrainHistory train(Model& m, const data::Dataset& d, const TrainOptions& opt) {
  if (!m.energy_scaler.fitted() || !m.force_scaler.fitted())
    throw ValidationError("fit scalers on the training data before training");
  if (d.samples.empty()) throw ValidationError("training set is empty");
  if (d.molecule != m.config.molecule)
    throw ValidationError("dataset molecule does not match model config");
  const std::size_t n = d.samples.size();
  const std::size_t batch = opt.batch_size == 0 ? n : std::min(opt.batch_size, n);
  pipeline::Adam adam(opt.adam, m.params.size());
  std::seed_seq seq{static_cast<std::uint32_t>(m.config.seed),
                    static_cast<std::uint32_t>(m.config.seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory hist;
  std::vector<double> per_sample(n);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto w = pipeline::schedule_weights(opt.schedule, epoch);
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    std::size_t b_index = 0;
    for (std::size_t start = 0; start < n; start += batch, ++b_index) {
      const std::size_t stop = std::min(n, start + batch);
      std::vector<double> grad(m.params.size(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const auto sl = sample_loss(m, m.params, d.samples[order[i]], w, opt);
        per_sample[order[i]] = sl.loss;
        if (!std::isfinite(sl.loss))
          throw TrainingAbortedError("non-finite loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(b_index));
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += sl.gradient[k];
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (auto& g : grad) g *= inv;
      grad = pipeline::clip_gradient(std::move(grad), opt.clip_norm);
      adam.step(m.params, grad);
      for (double p : m.params)
        if (!std::isfinite(p))
          throw TrainingAbortedError("non-finite parameter after epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(b_index));
    }
    double total = 0.0;
    for (double l : per_sample) total += l;
    hist.loss.push_back(total / static_cast<double>(n));
  }
  return hist;
}

// Post-correction from training-set predictions, in scaled space.
inline void fit_postcorrection(Model& m, const data::Dataset& d) {
  std::vector<double> ep, et, fp, ft;
  const double span_e = m.energy_scaler.span();
  for (const auto& s : d.samples) {
    ep.push_back(models::predict_energy(m, s.positions));
    et.push_back(m.energy_scaler.transform(s.energy));
    const auto f = models::predict_forces(m, s.positions);
    for (std::size_t a = 0; a < f.size(); ++a)
      for (int c = 0; c < 3; ++c) {
        fp.push_back(m.force_scaler.transform(span_e * f[a][c]));
        ft.push_back(m.force_scaler.transform(s.forces[a][c]));
      }
  }
  m.postcorrection = pipeline::fit_postcorrection(ep, et, fp, ft);
}

// Mean training loss at the current parameters under the given weights.
inline double dataset_loss(const Model& m, const data::Dataset& d, pipeline::Weights w,
                           const TrainOptions& opt) {
  double total = 0.0;
  for (const auto& s : d.samples) total += sample_loss(m, m.params, s, w, opt).loss;
  return total / static_cast<double>(d.samples.size());
}

}  // namespace gqml::train
