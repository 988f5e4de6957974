// SPDX-License-Identifier: Apache-2.0
#pragma once

// `gqml` command line: gen-data, train, crossval, check-equivariance, report.
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gqml/checks.hpp"
#include "gqml/crossval.hpp"
#include "gqml/data.hpp"
#include "gqml/errors.hpp"
#include "gqml/io.hpp"
#include "gqml/models.hpp"
#include "gqml/train.hpp"

namespace gqml::cli {

using models::ModelKind;

// Training settings for one kind after defaults, config file and flags.
struct KindSettings {
  int epochs = 0;
  double lr = 0.0;
  double clip_norm = 0.0;
  double warmup_fraction = 0.0;
  double ramp_end_fraction = 0.0;
  std::size_t batch_size = 0;
};

inline KindSettings default_settings(ModelKind k) {
  const auto o = train::default_options(k);
  const auto f = train::default_fractions(k);
  return {o.epochs, o.adam.lr, o.clip_norm, f.warmup, f.ramp_end, o.batch_size};
}

inline void apply_settings(KindSettings& s, const nlohmann::json& j, const std::string& where,
                           bool allow_sections) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (allow_sections && v.is_object()) continue;  // per-kind section
    if (!v.is_number())
      throw ValidationError(where + ": '" + key + "' must be a number");
    if (key == "epochs") s.epochs = v.get<int>();
    else if (key == "lr") s.lr = v.get<double>();
    else if (key == "clip_norm") s.clip_norm = v.get<double>();
    else if (key == "warmup_fraction") s.warmup_fraction = v.get<double>();
    else if (key == "ramp_end_fraction") s.ramp_end_fraction = v.get<double>();
    else if (key == "batch_size") s.batch_size = v.get<std::size_t>();
    else throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

// Precedence: defaults < config top level < config per-kind section < flags.
inline KindSettings resolve_settings(ModelKind k, const nlohmann::json& config, int epochs_flag) {
  KindSettings s = default_settings(k);
  if (!config.is_null()) {
    for (const auto& [key, v] : config.items())
      if (v.is_object()) models::parse_kind(key);  // rejects unknown sections
    apply_settings(s, config, "config", true);
    const std::string name = models::to_string(k);
    if (config.contains(name)) apply_settings(s, config.at(name), "config." + name, false);
  }
  if (epochs_flag > 0) s.epochs = epochs_flag;
  if (s.epochs < 0) throw ValidationError("epochs must be >= 0");
  if (!(s.lr >= 0.0)) throw ValidationError("lr must be >= 0");
  if (!(s.clip_norm > 0.0)) throw ValidationError("clip_norm must be > 0");
  return s;
}

inline train::TrainOptions to_options(ModelKind k, const KindSettings& s) {
  auto o = train::make_options(k, s.epochs, {s.warmup_fraction, s.ramp_end_fraction});
  o.adam.lr = s.lr;
  o.clip_norm = s.clip_norm;
  o.batch_size = s.batch_size;
  return o;
}

inline nlohmann::ordered_json settings_json(ModelKind k, const KindSettings& s) {
  return {{"epochs", s.epochs},
          {"lr", s.lr},
          {"clip_norm", s.clip_norm},
          {"warmup_fraction", s.warmup_fraction},
          {"ramp_end_fraction", s.ramp_end_fraction},
          {"batch_size", s.batch_size},
          {"force_loss", models::is_quantum(k) ? "mse" : "huber"}};
}

inline nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nullptr;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config " + path + " must be a JSON object");
  return j;
}

inline std::vector<ModelKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ModelKind> out;
  auto add = [&](ModelKind k) {
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  };
  for (const auto& n : names) {
    if (n == "all") {
      for (auto k : models::kAllKinds) add(k);
    } else {
      add(models::parse_kind(n));
    }
  }
  if (out.empty()) throw ValidationError("no model kinds selected");
  return out;
}

namespace detail {

struct Options {
  std::string molecule;
  std::size_t n = 0;
  std::uint64_t seed = 0;      // gen-data, train
  std::uint64_t cv_seed = 1;   // crossval, check-equivariance
  double noise = 0.0;
  std::string out;
  std::string data;
  std::string in;
  std::vector<std::string> kinds{"all"};
  int k = 5;
  int epochs = 0;
  bool strict = true;
  int jobs = 1;
  std::string config;
  std::string suite = "all";
};

inline void echo(std::ostream& out, const nlohmann::ordered_json& resolved) {
  out << "resolved config: " << resolved.dump() << "\n";
}

inline int gen_data(const Options& o, std::ostream& out) {
  const Molecule m = parse_molecule(o.molecule);
  if (o.n < 1) throw ValidationError("--n must be >= 1");
  if (o.noise < 0.0) throw ValidationError("--noise must be >= 0");
  echo(out, {{"command", "gen-data"}, {"molecule", o.molecule}, {"n", o.n},
             {"seed", o.seed}, {"noise", o.noise}, {"out", o.out}});
  const auto d = data::generate(m, o.n, o.seed, o.noise);
  data::save_dataset(d, o.out);
  out << "wrote " << d.size() << " " << o.molecule << " samples to " << o.out << "\n";
  return 0;
}

inline nlohmann::ordered_json kinds_json(const std::vector<ModelKind>& kinds,
                                         const std::vector<KindSettings>& settings) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kinds.size(); ++i)
    j[models::to_string(kinds[i])] = settings_json(kinds[i], settings[i]);
  return j;
}

inline int train_cmd(const Options& o, std::ostream& out) {
  const auto d = data::load_dataset(o.data);
  const auto kinds = parse_kinds(o.kinds);
  const auto config = load_config(o.config);
  std::vector<KindSettings> settings;
  for (auto k : kinds) settings.push_back(resolve_settings(k, config, o.epochs));
  const nlohmann::ordered_json resolved = {{"command", "train"}, {"data", o.data},
                                           {"molecule", to_string(d.molecule)}, {"seed", o.seed},
                                           {"strict_equivariance", o.strict}, {"out", o.out},
                                           {"kinds", kinds_json(kinds, settings)}};
  echo(out, resolved);
  const std::filesystem::path dir(o.out);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto opt = to_options(kinds[i], settings[i]);
    auto m = models::make_model(models::canonical_config(kinds[i], d.molecule, o.strict, o.seed));
    train::fit_scalers(m, d);
    const auto hist = train::train(m, d, opt);
    train::fit_postcorrection(m, d);
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < hist.loss.size(); ++e)
      csv += std::to_string(e) + "," + crossval::format_double(hist.loss[e]) + "\n";
    const std::string name = models::to_string(kinds[i]);
    io::write_file_atomic(dir / (name + "_history.csv"), csv);
    io::write_file_atomic(dir / (name + ".json"), models::to_json(m).dump() + "\n");
    out << name << ": " << m.params.size() << " parameters";
    if (!hist.loss.empty())
      out << ", loss " << hist.loss.front() << " -> " << hist.loss.back();
    out << ", checkpoint " << (dir / (name + ".json")).string() << "\n";
  }
  return 0;
}

inline int crossval_cmd(const Options& o, std::ostream& out) {
  const auto d = data::load_dataset(o.data);
  const auto kinds = parse_kinds(o.kinds);
  const auto config = load_config(o.config);
  if (o.jobs < 1) throw ValidationError("--jobs must be >= 1");
  std::vector<KindSettings> settings;
  for (auto k : kinds) settings.push_back(resolve_settings(k, config, o.epochs));
  const nlohmann::ordered_json resolved = {
      {"command", "crossval"}, {"data", o.data},   {"molecule", to_string(d.molecule)},
      {"samples", d.size()},   {"k", o.k},         {"seed", o.seed},
      {"strict_equivariance", o.strict},           {"jobs", o.jobs},
      {"kinds", kinds_json(kinds, settings)}};
  echo(out, resolved);
  crossval::kfold_split(d.size(), o.k, o.seed);  // validates n >= k before any training

  std::vector<crossval::KindResult> results;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto cfg = models::canonical_config(kinds[i], d.molecule, o.strict, o.seed);
    const auto fitter = crossval::model_fitter(cfg, to_options(kinds[i], settings[i]));
    auto r = crossval::run_cv(d, models::to_string(kinds[i]), fitter, o.k, o.seed, o.jobs);
    for (const auto& f : r.folds)
      out << r.kind << " fold " << f.fold << ": energy R2 " << f.metric("energy_r2")
          << ", force R2 " << f.metric("force_mean_r2") << " (" << std::fixed
          << std::setprecision(1) << f.wall_seconds << " s)" << std::defaultfloat
          << std::setprecision(6) << "\n";
    results.push_back(std::move(r));
  }
  const std::filesystem::path dir(o.out);
  crossval::write_reports(dir, results);
  io::write_file_atomic(dir / "resolved_config.json", resolved.dump(2) + "\n");
  out << "reports written to " << dir.string() << "\n";
  return 0;
}

inline int check_cmd(const Options& o, std::ostream& out) {
  echo(out, {{"command", "check-equivariance"}, {"suite", o.suite}, {"seed", o.seed}});
  const auto results = checks::run_suite(o.suite, o.seed);
  bool ok = true;
  out << std::left << std::setw(11) << "suite" << std::setw(52) << "check" << std::setw(8)
      << "trials" << std::setw(14) << "max error" << std::setw(10) << "tolerance"
      << "result\n";
  for (const auto& r : results) {
    std::ostringstream err, tol;
    err << std::scientific << std::setprecision(2) << r.max_error;
    tol << std::scientific << std::setprecision(0) << r.tolerance;
    out << std::left << std::setw(11) << r.suite << std::setw(52) << r.name << std::setw(8)
        << r.trials << std::setw(14) << err.str() << std::setw(10) << tol.str()
        << (r.passed() ? "PASS" : "FAIL") << "\n";
    ok = ok && r.passed();
  }
  out << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? 0 : 2;
}

inline int report_cmd(const Options& o, std::ostream& out) {
  const std::filesystem::path p = std::filesystem::path(o.in) / "summary.json";
  if (!std::filesystem::exists(p)) throw ValidationError("no summary.json in " + o.in);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(io::read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
  const char* shown[] = {"energy_r2", "energy_mae", "energy_rmse", "force_mean_r2",
                         "force_mean_mae", "force_mean_rmse"};
  out << std::left << std::setw(12) << "kind" << std::setw(18) << "metric" << std::setw(14)
      << "mean" << std::setw(14) << "std" << std::setw(14) << "cov" << "range\n";
  for (const auto& [kind, metrics] : j.items())
    for (const char* m : shown) {
      if (!metrics.contains(m)) continue;
      const auto& s = metrics.at(m);
      auto fmt = [](const nlohmann::ordered_json& v) {
        if (v.is_null()) return std::string("undefined");
        std::ostringstream ss;
        ss << std::setprecision(6) << v.get<double>();
        return ss.str();
      };
      out << std::left << std::setw(12) << kind << std::setw(18) << m << std::setw(14)
          << fmt(s.at("mean")) << std::setw(14) << fmt(s.at("std")) << std::setw(14)
          << fmt(s.at("cov")) << fmt(s.at("range")) << "\n";
    }
  return 0;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric QML benchmark toolkit", "gqml"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  detail::Options o;

  auto* gen = app.add_subcommand("gen-data", "Generate a surrogate dataset");
  gen->add_option("--molecule", o.molecule, "LiH or NH3")->required();
  gen->add_option("--n", o.n, "Number of samples")->required();
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--noise", o.noise, "Gaussian force noise std (eV/A)");
  gen->add_option("--out", o.out, "Output JSON file")->required();

  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Dataset JSON file")->required();
    sub->add_option("--kinds", o.kinds, "rot-eq, non-eq, graph-perm, classical or all")
        ->delimiter(',');
    sub->add_option("--epochs", o.epochs, "Epoch override for every kind (0 keeps defaults)");
    sub->add_option("--strict-equivariance", o.strict, "Graph-perm weight sharing (true|false)");
    sub->add_option("--config", o.config, "JSON file: epochs, lr, clip_norm, warmup_fraction, "
                                          "ramp_end_fraction, batch_size, per-kind sections");
  };

  auto* tr = app.add_subcommand("train", "Train models on a dataset and write checkpoints");
  add_training(tr);
  tr->add_option("--seed", o.seed, "Initialization seed");
  tr->add_option("--out", o.out, "Output directory")->required();

  auto* cv = app.add_subcommand("crossval", "k-fold cross-validation with reports");
  add_training(cv);
  cv->add_option("--k", o.k, "Number of folds");
  cv->add_option("--seed", o.cv_seed, "Base seed (fold i uses seed + i)");
  cv->add_option("--jobs", o.jobs, "Folds trained in parallel");
  cv->add_option("--out", o.out, "Report directory")->required();

  auto* chk = app.add_subcommand("check-equivariance", "Run symmetry and gradient property checks");
  chk->add_option("--suite", o.suite, "all, encodings, models, gradients or data");
  chk->add_option("--seed", o.cv_seed, "Random seed");

  auto* rep = app.add_subcommand("report", "Print a summary table from a report directory");
  rep->add_option("--in", o.in, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return detail::gen_data(o, out);
    if (tr->parsed()) return detail::train_cmd(o, out);
    if (cv->parsed()) {
      o.seed = o.cv_seed;
      return detail::crossval_cmd(o, out);
    }
    if (chk->parsed()) {
      o.seed = o.cv_seed;
      return detail::check_cmd(o, out);
    }
    if (rep->parsed()) return detail::report_cmd(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace gqml::cli
