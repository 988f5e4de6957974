// SPDX-License-Identifier: Apache-2.0
#pragma once

// k-fold cross-validation: splits, regression metrics, fold summaries and
// report writers.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gqml/data.hpp"
#include "gqml/errors.hpp"
#include "gqml/io.hpp"
#include "gqml/models.hpp"
#include "gqml/pipeline.hpp"
#include "gqml/train.hpp"

namespace gqml::crossval {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffled partition into k test folds; fold sizes differ by at most one.
inline std::vector<Split> kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw StructuralError("k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    throw StructuralError("cannot split " + std::to_string(n) + " samples into " +
                          std::to_string(k) + " folds");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t ku = static_cast<std::size_t>(k);
  std::vector<Split> out(ku);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < ku; ++f) {
    const std::size_t len = n / ku + (f < n % ku ? 1 : 0);
    out[f].test.assign(idx.begin() + pos, idx.begin() + pos + len);
    std::sort(out[f].test.begin(), out[f].test.end());
    pos += len;
  }
  for (std::size_t f = 0; f < ku; ++f)
    for (std::size_t g = 0; g < ku; ++g)
      if (g != f) out[f].train.insert(out[f].train.end(), out[g].test.begin(), out[g].test.end());
  for (auto& s : out) std::sort(s.train.begin(), s.train.end());
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

namespace detail {
inline void check_pair(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw StructuralError("prediction/target length mismatch");
  if (pred.empty()) throw StructuralError("metrics need at least one value");
}
}  // namespace detail

inline double mae(std::span<const double> pred, std::span<const double> target) {
  detail::check_pair(pred, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

inline double rmse(std::span<const double> pred, std::span<const double> target) {
  detail::check_pair(pred, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - target[i]) * (pred[i] - target[i]);
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

inline double r2(std::span<const double> pred, std::span<const double> target) {
  detail::check_pair(pred, target);
  const double mean =
      std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (ss_tot == 0.0) throw UndefinedMetricError("R^2 is undefined for constant targets");
  return 1.0 - ss_res / ss_tot;
}

struct Metrics {
  double r2 = 0.0, mae = 0.0, rmse = 0.0;
};

inline Metrics regression_metrics(std::span<const double> pred, std::span<const double> target) {
  return {r2(pred, target), mae(pred, target), rmse(pred, target)};
}

struct CVSummary {
  double mean = 0.0;
  double std = 0.0;            // population (divisor k)
  std::optional<double> cov;   // std / mean; empty when mean == 0
  double range = 0.0;          // max - min
};

inline CVSummary summarize(std::span<const double> scores) {
  if (scores.size() < 2) throw ValidationError("summaries need at least 2 fold scores");
  const double k = static_cast<double>(scores.size());
  CVSummary s;
  s.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / k;
  double ss = 0.0;
  for (double x : scores) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / k);
  if (s.mean != 0.0) s.cov = s.std / s.mean;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  s.range = *hi - *lo;
  return s;
}

// ---------------------------------------------------------------------------
// Fold harness

// Which sample indices (dataset-global) each fitted object saw.
struct FitRecord {
  std::string object;
  std::vector<std::size_t> indices;
};

struct FoldReport {
  int fold = 0;
  std::vector<std::pair<std::string, double>> metrics;  // ordered
  std::size_t n_params = 0;
  double wall_seconds = 0.0;  // console only, never written to report files
  std::vector<FitRecord> audit;
  std::vector<std::size_t> test_indices;

  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    throw ValidationError("no metric named " + name);
  }
};

struct FoldModel {
  std::function<models::Prediction(const data::MoleculeSample&)> predict;
  std::size_t n_params = 0;
};

// Fits on the training subset. `train_indices` are dataset-global and should
// be recorded in the audit for every fitted object.
using Fitter = std::function<FoldModel(const data::Dataset& train,
                                       std::span<const std::size_t> train_indices,
                                       std::uint64_t seed, std::vector<FitRecord>& audit)>;

inline std::vector<std::string> metric_names() {
  std::vector<std::string> out;
  for (const char* m : {"r2", "mae", "rmse"}) out.push_back(std::string("energy_") + m);
  for (const char* c : {"x", "y", "z", "mean"})
    for (const char* m : {"r2", "mae", "rmse"})
      out.push_back(std::string("force_") + c + "_" + m);
  return out;
}

inline std::vector<std::pair<std::string, double>> evaluate_fold(const data::Dataset& test,
                                                                 const FoldModel& model) {
  std::vector<double> ep, et;
  std::array<std::vector<double>, 3> fp, ft;
  for (const auto& s : test.samples) {
    const auto p = model.predict(s);
    ep.push_back(p.energy);
    et.push_back(s.energy);
    for (std::size_t a = 0; a < s.forces.size(); ++a)
      for (int c = 0; c < 3; ++c) {
        fp[c].push_back(p.forces[a][c]);
        ft[c].push_back(s.forces[a][c]);
      }
  }
  std::vector<std::pair<std::string, double>> out;
  const Metrics e = regression_metrics(ep, et);
  out.insert(out.end(), {{"energy_r2", e.r2}, {"energy_mae", e.mae}, {"energy_rmse", e.rmse}});
  Metrics mean;
  const char* names[3] = {"x", "y", "z"};
  for (int c = 0; c < 3; ++c) {
    const Metrics f = regression_metrics(fp[c], ft[c]);
    const std::string pre = std::string("force_") + names[c] + "_";
    out.insert(out.end(), {{pre + "r2", f.r2}, {pre + "mae", f.mae}, {pre + "rmse", f.rmse}});
    mean.r2 += f.r2 / 3.0, mean.mae += f.mae / 3.0, mean.rmse += f.rmse / 3.0;
  }
  out.insert(out.end(),
             {{"force_mean_r2", mean.r2}, {"force_mean_mae", mean.mae}, {"force_mean_rmse", mean.rmse}});
  return out;
}

struct KindResult {
  std::string kind;
  std::vector<FoldReport> folds;
  std::vector<std::pair<std::string, CVSummary>> summary;  // metric order
};

// Seed for fold i is base_seed + i. Folds may run on `jobs` threads; results
// are ordered by fold index regardless of completion order.
inline KindResult run_cv(const data::Dataset& d, const std::string& kind, const Fitter& fitter,
                         int k, std::uint64_t base_seed, int jobs = 1) {
  data::validate(d);
  const auto splits = kfold_split(d.size(), k, base_seed);
  KindResult res;
  res.kind = kind;
  res.folds.resize(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());

  auto run_fold = [&](std::size_t f) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      FoldReport& rep = res.folds[f];
      rep.fold = static_cast<int>(f);
      rep.test_indices = splits[f].test;
      const data::Dataset train = d.subset(splits[f].train);
      const data::Dataset test = d.subset(splits[f].test);
      const FoldModel model = fitter(train, splits[f].train, base_seed + f, rep.audit);
      rep.metrics = evaluate_fold(test, model);
      rep.n_params = model.n_params;
      rep.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs < 1 ? 1 : jobs, 1, splits.size());
  if (workers == 1) {
    for (std::size_t f = 0; f < splits.size(); ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t f; (f = next++) < splits.size();) run_fold(f);
      });
    for (auto& t : pool) t.join();
  }

  for (std::size_t f = 0; f < errors.size(); ++f) {
    if (!errors[f]) continue;
    const std::string ctx = kind + " fold " + std::to_string(f) + ": ";
    try {
      std::rethrow_exception(errors[f]);
    } catch (const TrainingAbortedError& e) {
      throw TrainingAbortedError(ctx + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(ctx + e.what());
    }
  }

  for (const auto& name : metric_names()) {
    std::vector<double> v;
    for (const auto& rep : res.folds) v.push_back(rep.metric(name));
    res.summary.emplace_back(name, summarize(v));
  }
  return res;
}

// Standard fitter for a model kind: scalers on train, train, post-correction
// on train predictions (scaled space).
inline Fitter model_fitter(const models::ModelConfig& base, const train::TrainOptions& opt) {
  return [base, opt](const data::Dataset& train_set, std::span<const std::size_t> train_indices,
                     std::uint64_t seed, std::vector<FitRecord>& audit) {
    models::ModelConfig cfg = base;
    cfg.seed = seed;
    auto m = std::make_shared<models::Model>(models::make_model(cfg));
    const std::vector<std::size_t> idx(train_indices.begin(), train_indices.end());
    train::fit_scalers(*m, train_set);
    audit.push_back({"energy_scaler", idx});
    audit.push_back({"force_scaler", idx});
    train::train(*m, train_set, opt);

    train::fit_postcorrection(*m, train_set);
    audit.push_back({"postcorrection", idx});

    FoldModel fm;
    fm.n_params = m->params.size();
    fm.predict = [m](const data::MoleculeSample& s) { return models::predict_raw(*m, s.positions); };
    return fm;
  };
}

// ---------------------------------------------------------------------------
// Reports

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string folds_csv(const KindResult& r) {
  std::string out = "fold,metric,value\n";
  for (const auto& rep : r.folds) {
    for (const auto& [name, v] : rep.metrics)
      out += std::to_string(rep.fold) + "," + name + "," + format_double(v) + "\n";
    out += std::to_string(rep.fold) + ",n_params," + std::to_string(rep.n_params) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json summary_json(const std::vector<KindResult>& results) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& r : results) {
    nlohmann::ordered_json kind = nlohmann::ordered_json::object();
    for (const auto& [name, s] : r.summary) {
      nlohmann::ordered_json cov = nullptr;
      if (s.cov) cov = *s.cov;
      kind[name] = {{"mean", s.mean}, {"std", s.std}, {"cov", cov}, {"range", s.range}};
    }
    j[r.kind] = kind;
  }
  return j;
}

// Five display axes in [0, 1]: energy R^2 and mean force R^2 (clamped), and
// three inverted spread axes 1 - v / max_kinds(v) for the std of energy R^2,
// the std of mean force R^2 and the range of energy R^2. Higher is better on
// every axis.
inline std::string radar_csv(const std::vector<KindResult>& results) {
  auto stat = [](const KindResult& r, const std::string& metric) -> const CVSummary& {
    for (const auto& [n, s] : r.summary)
      if (n == metric) return s;
    throw ValidationError("missing metric " + metric);
  };
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  std::vector<std::array<double, 3>> spread;
  std::array<double, 3> max_spread{0.0, 0.0, 0.0};
  for (const auto& r : results) {
    const std::array<double, 3> v{stat(r, "energy_r2").std, stat(r, "force_mean_r2").std,
                                  stat(r, "energy_r2").range};
    for (int a = 0; a < 3; ++a) max_spread[a] = std::max(max_spread[a], v[a]);
    spread.push_back(v);
  }
  std::string out =
      "kind,energy_r2,force_r2,energy_consistency,force_consistency,energy_stability\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out += r.kind + "," + format_double(clamp01(stat(r, "energy_r2").mean)) + "," +
           format_double(clamp01(stat(r, "force_mean_r2").mean));
    for (int a = 0; a < 3; ++a) {
      const double v = max_spread[a] > 0.0 ? 1.0 - spread[i][a] / max_spread[a] : 1.0;
      out += "," + format_double(v);
    }
    out += "\n";
  }
  return out;
}

inline void write_reports(const std::filesystem::path& dir, const std::vector<KindResult>& results) {
  for (const auto& r : results) io::write_file_atomic(dir / (r.kind + "_folds.csv"), folds_csv(r));
  io::write_file_atomic(dir / "summary.json", summary_json(results).dump(2) + "\n");
  io::write_file_atomic(dir / "radar.csv", radar_csv(results));
}

}  // namespace gqml::crossval
