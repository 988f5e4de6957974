// SPDX-License-Identifier: Apache-2.0
#pragma once

// Property checks over random inputs: symmetry of the encodings and models,
// gradient agreement, and surrogate data consistency. Each check reports its
// worst observed error against a fixed tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gqml/data.hpp"
#include "gqml/encodings.hpp"
#include "gqml/features.hpp"
#include "gqml/models.hpp"
#include "gqml/qsim.hpp"

namespace gqml::checks {

struct CheckResult {
  std::string suite;
  std::string name;
  std::size_t trials = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

using qsim::Complex;
using qsim::GateOp;
using qsim::Statevector;
using Dense = std::vector<std::vector<Complex>>;

namespace detail {

inline std::mt19937_64 rng_for(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Dense dagger(const Dense& a) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i][j] = std::conj(a[j][i]);
  return c;
}

inline double max_entry_diff(const Dense& a, const Dense& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline Dense kron(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), m = b.size();
  Dense c(n * m, std::vector<Complex>(n * m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) c[i * m + k][j * m + l] = a[i][j] * b[k][l];
  return c;
}

inline double state_diff(const Statevector& a, const Statevector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class Rng>
encodings::EulerAngles random_euler(Rng& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  return {u(rng), u(rng), u(rng)};
}

template <class Rng>
Vec3 random_vec(Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline std::vector<Vec3> moved(std::span<const Vec3> x, const Mat3& r, const Vec3& t) {
  std::vector<Vec3> out;
  for (const auto& p : x) out.push_back(r * p + t);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encodings

// U(r x) = V U(x) V^dag with V = U(psi, theta, phi), entrywise on 2x2 matrices.
inline CheckResult so3_embedding(std::size_t trials, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 1);
  CheckResult r{"encodings", "so3_embedding_equivariance", trials, 0.0, 1e-10};
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec3 x = detail::random_vec(rng, 3.0);
    const auto a = detail::random_euler(rng);
    const GateOp lhs[] = {encodings::so3_embed(encodings::euler_rotate(a, x))};
    const auto v = qsim::unitary_matrix(1, encodings::so3_conjugator(a));
    const GateOp ux[] = {encodings::so3_embed(x)};
    const Dense rhs = detail::matmul(detail::matmul(v, qsim::unitary_matrix(1, ux)), detail::dagger(v));
    r.max_error = std::max(r.max_error, detail::max_entry_diff(qsim::unitary_matrix(1, lhs), rhs));
  }
  return r;
}

// Negated-angle conjugator pairs with the passive rotation r(-psi,-theta,-phi).
inline CheckResult so3_passive_form(std::size_t trials, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 2);
  CheckResult r{"encodings", "so3_negated_angle_form", trials, 0.0, 1e-10};
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec3 x = detail::random_vec(rng, 3.0);
    const auto a = detail::random_euler(rng);
    const encodings::EulerAngles neg{-a.psi, -a.theta, -a.phi};
    const GateOp lhs[] = {encodings::so3_embed(encodings::euler_rotate(neg, x))};
    const auto v = qsim::unitary_matrix(1, encodings::euler_gates(neg));
    const GateOp ux[] = {encodings::so3_embed(x)};
    const Dense rhs = detail::matmul(detail::matmul(v, qsim::unitary_matrix(1, ux)), detail::dagger(v));
    r.max_error = std::max(r.max_error, detail::max_entry_diff(qsim::unitary_matrix(1, lhs), rhs));
  }
  return r;
}

// <XX+YY+ZZ> on (|01> - |10>)/sqrt2 against explicit Kronecker products, and
// against the simulator on each pair of a 3-pair register.
inline CheckResult singlet_heisenberg() {
  CheckResult r{"encodings", "singlet_heisenberg_expectation", 1, 0.0, 1e-12};
  using namespace std::complex_literals;
  const Dense X{{0.0, 1.0}, {1.0, 0.0}}, Y{{0.0, -1i}, {1i, 0.0}}, Z{{1.0, 0.0}, {0.0, -1.0}};
  const Dense xx = detail::kron(X, X), yy = detail::kron(Y, Y), zz = detail::kron(Z, Z);
  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<Complex> singlet{0.0, s, -s, 0.0};
  Complex e{0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      e += std::conj(singlet[i]) * (xx[i][j] + yy[i][j] + zz[i][j]) * singlet[j];
  r.max_error = std::abs(e - Complex{-3.0, 0.0});
  const Statevector one = encodings::singlet_init(1);
  for (std::size_t i = 0; i < 4; ++i) r.max_error = std::max(r.max_error, std::abs(one[i] - singlet[i]));
  const Statevector three = encodings::singlet_init(3);
  for (int p = 0; p < 3; ++p)
    r.max_error = std::max(r.max_error,
                           std::abs(qsim::expectation(three, encodings::heisenberg_observable(6, 2 * p, 2 * p + 1)) + 3.0));
  return r;
}

// v (x) v leaves the singlet unchanged up to a global phase.
inline CheckResult singlet_rotation_invariance(std::size_t trials, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 3);
  CheckResult r{"encodings", "singlet_rotation_invariance", trials, 0.0, 1e-12};
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec3 x = detail::random_vec(rng, 3.0);
    Statevector s = encodings::singlet_init(1);
    qsim::apply(s, encodings::so3_embed(x, 0));
    qsim::apply(s, encodings::so3_embed(x, 1));
    r.max_error = std::max(r.max_error, std::abs(1.0 - qsim::fidelity(s, encodings::singlet_init(1))));
  }
  return r;
}

// [Heisenberg coupler, v (x) v] = 0 on random two-qubit states.
inline CheckResult heisenberg_commutes(std::size_t trials, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 4);
  CheckResult r{"encodings", "heisenberg_coupler_commutes_with_global_rotation", trials, 0.0, 1e-12};
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<Complex> amp(4);
    double nn = 0.0;
    for (auto& a : amp) a = {n(rng), n(rng)}, nn += std::norm(a);
    for (auto& a : amp) a /= std::sqrt(nn);
    const Vec3 x = detail::random_vec(rng, 3.0);
    const GateOp h = GateOp::heisenberg(0, 1, u(rng), u(rng));
    Statevector a = Statevector::from_amplitudes(amp), b = a;
    qsim::apply(a, h);
    qsim::apply(a, encodings::so3_embed(x, 0));
    qsim::apply(a, encodings::so3_embed(x, 1));
    qsim::apply(b, encodings::so3_embed(x, 0));
    qsim::apply(b, encodings::so3_embed(x, 1));
    qsim::apply(b, h);
    r.max_error = std::max(r.max_error, detail::state_diff(a, b));
  }
  return r;
}

// P |G(x)> = |G(P x)> for all hydrogen relabellings of random NH3 graphs.
inline CheckResult graph_permutation(std::size_t graphs, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 5);
  CheckResult r{"encodings", "graph_encoding_permutation_equivariance", 0, 0.0, 1e-10};
  const auto d = data::gen_nh3(graphs, seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const auto& s : d.samples) {
    const auto g = features::build_graph(features::compute_features(s.positions, Molecule::NH3));
    std::vector<std::vector<double>> betas(3, std::vector<double>(g.feature_dim()));
    std::vector<double> gammas(3);
    for (auto& b : betas)
      for (auto& v : b) v = u(rng);
    for (auto& v : gammas) v = u(rng);
    const Statevector base = encodings::graph_encode(g, betas, gammas);
    for (const auto& p : encodings::permutations_of(g.n_nodes, g.permutable)) {
      const Statevector lhs = encodings::permute_state(base, p);
      const Statevector rhs = encodings::graph_encode(encodings::permute_graph(g, p), betas, gammas);
      r.max_error = std::max(r.max_error, detail::state_diff(lhs, rhs));
      ++r.trials;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Models

inline double max_force_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(a[i][c] - b[i][c]));
  return m;
}

inline std::vector<double> random_params(const models::ModelConfig& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p = models::init_params(c);
  if (models::is_quantum(c.kind))
    for (auto& v : p) v = u(rng);
  return p;
}

// Rot-eq energy invariance and force covariance under random rigid motions.
inline std::array<CheckResult, 2> roteq_rigid_motion(std::size_t trials, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 6);
  std::array<CheckResult, 2> r{CheckResult{"models", "roteq_energy_rigid_invariance", trials, 0.0, 1e-8},
                               CheckResult{"models", "roteq_force_rotation_covariance", trials, 0.0, 1e-6}};
  const auto lih = data::gen_lih(trials, seed + 1), nh3 = data::gen_nh3(trials, seed + 2);
  for (std::size_t t = 0; t < trials; ++t) {
    const Molecule m = t % 2 == 0 ? Molecule::NH3 : Molecule::LiH;
    const auto& x = (m == Molecule::NH3 ? nh3 : lih).samples[t].positions;
    const auto cfg = models::canonical_config(models::ModelKind::RotEqQML, m);
    const auto p = random_params(cfg, rng);
    const Mat3 rot = data::random_rotation(rng);
    const auto y = detail::moved(x, rot, detail::random_vec(rng, 2.0));
    r[0].max_error = std::max(r[0].max_error, std::abs(models::energy(cfg, p, x) - models::energy(cfg, p, y)));
    auto fx = models::fd_forces(cfg, p, x);
    for (auto& f : fx) f = rot * f;
    r[1].max_error = std::max(r[1].max_error, max_force_diff(fx, models::fd_forces(cfg, p, y)));
  }
  return r;
}

// Hydrogen permutation of the atoms: node relabelling of the graph.
inline std::vector<Vec3> permute_atoms(std::span<const Vec3> x, const encodings::QubitPermutation& p) {
  std::vector<Vec3> out(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) out[p.sigma[a]] = x[a];
  return out;
}

// Strict graph-perm: energy invariant and forces permuted under the 6
// hydrogen permutations.
inline std::array<CheckResult, 2> graph_model_invariance(std::size_t geometries, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 7);
  std::array<CheckResult, 2> r{CheckResult{"models", "graphperm_strict_energy_invariance", 0, 0.0, 1e-10},
                               CheckResult{"models", "graphperm_strict_force_covariance", 0, 0.0, 1e-8}};
  const auto d = data::gen_nh3(geometries, seed + 3);
  const auto cfg = models::canonical_config(models::ModelKind::GraphPermQML, Molecule::NH3, true);
  for (const auto& s : d.samples) {
    const auto p = random_params(cfg, rng);
    const double e0 = models::energy(cfg, p, s.positions);
    const auto f0 = models::fd_forces(cfg, p, s.positions);
    for (const auto& perm : encodings::permutations_of(4, {1, 2, 3})) {
      const auto y = permute_atoms(s.positions, perm);
      r[0].max_error = std::max(r[0].max_error, std::abs(models::energy(cfg, p, y) - e0));
      r[1].max_error = std::max(r[1].max_error,
                                max_force_diff(permute_atoms(f0, perm), models::fd_forces(cfg, p, y)));
      ++r[0].trials, ++r[1].trials;
    }
  }
  return r;
}

// Classical energy invariant under rigid motions combined with hydrogen
// permutations.
inline CheckResult classical_invariance(std::size_t trials, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 8);
  CheckResult r{"models", "classical_e3_permutation_invariance", trials, 0.0, 1e-10};
  const auto d = data::gen_nh3(trials, seed + 4);
  const auto perms = encodings::permutations_of(4, {1, 2, 3});
  auto cfg = models::canonical_config(models::ModelKind::ClassicalEqNN, Molecule::NH3);
  for (std::size_t t = 0; t < trials; ++t) {
    cfg.seed = seed + t;
    const auto p = models::init_params(cfg);
    const auto& x = d.samples[t].positions;
    const auto y = permute_atoms(detail::moved(x, data::random_rotation(rng), detail::random_vec(rng, 2.0)),
                                 perms[t % perms.size()]);
    r.max_error = std::max(r.max_error, std::abs(models::energy(cfg, p, x) - models::energy(cfg, p, y)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gradients

// Shift rule against central differences on random RX/RY/RZ/ZZ/CNOT circuits.
// Error is relative to the largest gradient component (floor 1e-3).
inline CheckResult param_shift_vs_fd(std::size_t circuits, std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 9);
  CheckResult r{"gradients", "param_shift_vs_finite_difference", circuits, 0.0, 1e-6};
  std::uniform_int_distribution<int> nq(1, 6), kind(0, 4), nops(3, 12);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi), c(-1.0, 1.0);
  const char labels[] = {'I', 'X', 'Y', 'Z'};
  for (std::size_t t = 0; t < circuits; ++t) {
    const int n = nq(rng);
    const int ops = nops(rng);
    qsim::Circuit circ(n, static_cast<std::size_t>(ops));
    std::uniform_int_distribution<int> q(0, n - 1);
    for (int k = 0; k < ops; ++k) {
      int g = kind(rng);
      if (n == 1 && g >= 3) g = g % 3;
      const int a = q(rng);
      int b = q(rng);
      while (n > 1 && b == a) b = q(rng);
      switch (g) {
        case 0: circ.add(GateOp::rx(a, u(rng)), k, c(rng)); break;
        case 1: circ.add(GateOp::ry(a, u(rng)), k, c(rng)); break;
        case 2: circ.add(GateOp::rz(a, u(rng)), k, c(rng)); break;
        case 3: circ.add(GateOp::zz(a, b, u(rng)), k, c(rng)); break;
        default: circ.add(GateOp::cnot(a, b)); break;
      }
    }
    qsim::PauliObservable obs(n);
    std::uniform_int_distribution<int> pl(0, 3);
    for (int term = 0; term < 3; ++term) {
      std::string s(n, 'I');
      for (auto& ch : s) ch = labels[pl(rng)];
      obs.add(c(rng), s);
    }
    std::vector<double> theta(ops);
    for (auto& v : theta) v = u(rng);
    Statevector init(n);
    for (int k = 0; k < n; ++k) qsim::apply(init, GateOp::ry(k, u(rng)));
    const auto ps = qsim::grad_param_shift(circ, theta, obs, init);
    const auto fd = qsim::grad_fd(
        [&](std::span<const double> th) { return qsim::expectation(qsim::run(circ, th, init), obs); },
        theta, 1e-5);
    double scale = 1e-3, diff = 0.0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      scale = std::max(scale, std::abs(ps[k]));
      diff = std::max(diff, std::abs(ps[k] - fd[k]));
    }
    r.max_error = std::max(r.max_error, diff / scale);
  }
  return r;
}

// Exact classical forces against the FD path, relative to the largest force.
inline CheckResult classical_backprop_vs_fd(std::size_t trials, std::uint64_t seed) {
  CheckResult r{"gradients", "classical_backprop_forces_vs_fd", trials, 0.0, 1e-5};
  const auto lih = data::gen_lih(trials, seed + 5), nh3 = data::gen_nh3(trials, seed + 6);
  for (std::size_t t = 0; t < trials; ++t) {
    const Molecule m = t % 2 == 0 ? Molecule::NH3 : Molecule::LiH;
    auto cfg = models::canonical_config(models::ModelKind::ClassicalEqNN, m);
    cfg.seed = seed + t;
    const auto p = models::init_params(cfg);
    const auto& x = (m == Molecule::NH3 ? nh3 : lih).samples[t].positions;
    const auto fb = models::classical_backprop_forces(cfg, p, x);
    const auto ff = models::fd_forces(cfg, p, x);
    double scale = 1e-8;
    for (const auto& f : fb)
      for (double v : f) scale = std::max(scale, std::abs(v));
    r.max_error = std::max(r.max_error, max_force_diff(fb, ff) / scale);
  }
  return r;
}

// Model parameter gradients (adjoint / backprop) against central differences.
inline CheckResult model_gradients_vs_fd(std::uint64_t seed) {
  auto rng = detail::rng_for(seed, 10);
  CheckResult r{"gradients", "model_parameter_gradients_vs_fd", 0, 0.0, 1e-6};
  const auto nh3 = data::gen_nh3(1, seed + 7);
  for (auto k : models::kAllKinds)
    for (bool strict : {true, false}) {
      if (!strict && k != models::ModelKind::GraphPermQML) continue;
      auto cfg = models::canonical_config(k, Molecule::NH3, strict, seed);
      const auto p = random_params(cfg, rng);
      const auto& x = nh3.samples[0].positions;
      const auto g = models::evaluate_energy(cfg, p, x, true).gradient;
      const auto fd = qsim::grad_fd([&](std::span<const double> th) { return models::energy(cfg, th, x); },
                                    p, 1e-5);
      double scale = 1e-3, diff = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        scale = std::max(scale, std::abs(g[i]));
        diff = std::max(diff, std::abs(g[i] - fd[i]));
      }
      r.max_error = std::max(r.max_error, diff / scale);
      ++r.trials;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Data

// Analytic surrogate forces against -FD of the surrogate energy (h = 1e-5).
inline CheckResult surrogate_forces_vs_fd(Molecule m, std::size_t samples, std::uint64_t seed) {
  CheckResult r{"data", "surrogate_forces_vs_fd_" + to_string(m), samples, 0.0, 1e-6};
  const auto d = data::generate(m, samples, seed);
  const double h = 1e-5;
  for (const auto& s : d.samples) {
    std::vector<Vec3> x = s.positions;
    for (std::size_t a = 0; a < x.size(); ++a)
      for (int c = 0; c < 3; ++c) {
        const double x0 = x[a][c];
        x[a][c] = x0 + h;
        const double ep = data::surrogate_energy(m, x);
        x[a][c] = x0 - h;
        const double em = data::surrogate_energy(m, x);
        x[a][c] = x0;
        r.max_error = std::max(r.max_error, std::abs(s.forces[a][c] + (ep - em) / (2 * h)));
      }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Suites

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"all", "encodings", "models", "gradients", "data"};
  return names;
}

inline std::vector<CheckResult> run_suite(const std::string& suite, std::uint64_t seed) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw ValidationError("unknown suite '" + suite + "' (expected all, encodings, models, gradients or data)");
  const bool all = suite == "all";
  std::vector<CheckResult> out;
  if (all || suite == "encodings") {
    out.push_back(so3_embedding(100, seed));
    out.push_back(so3_passive_form(100, seed));
    out.push_back(singlet_heisenberg());
    out.push_back(singlet_rotation_invariance(50, seed));
    out.push_back(heisenberg_commutes(50, seed));
    out.push_back(graph_permutation(20, seed));
  }
  if (all || suite == "models") {
    for (const auto& c : roteq_rigid_motion(50, seed)) out.push_back(c);
    for (const auto& c : graph_model_invariance(20, seed)) out.push_back(c);
    out.push_back(classical_invariance(20, seed));
  }
  if (all || suite == "gradients") {
    out.push_back(param_shift_vs_fd(50, seed));
    out.push_back(classical_backprop_vs_fd(20, seed));
    out.push_back(model_gradients_vs_fd(seed));
  }
  if (all || suite == "data") {
    out.push_back(surrogate_forces_vs_fd(Molecule::LiH, 50, seed));
    out.push_back(surrogate_forces_vs_fd(Molecule::NH3, 50, seed));
  }
  return out;
}

}  // namespace gqml::checks
