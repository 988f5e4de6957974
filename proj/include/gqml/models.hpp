// SPDX-License-Identifier: Apache-2.0
#pragma once

// The four energy models. Each maps atomic positions to a scalar energy in
// scaled units; forces are -dE/dx. evaluate_energy() is the single entry point
// used for prediction and training and optionally returns dE/dtheta.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gqml/encodings.hpp"
#include "gqml/errors.hpp"
#include "gqml/features.hpp"
#include "gqml/pipeline.hpp"
#include "gqml/qsim.hpp"
#include "gqml/vec3.hpp"

namespace gqml::models {

using qsim::Circuit;
using qsim::GateOp;
using qsim::PauliObservable;
using qsim::Statevector;

enum class ModelKind { RotEqQML, NonEqQML, GraphPermQML, ClassicalEqNN };

inline constexpr ModelKind kAllKinds[] = {ModelKind::RotEqQML, ModelKind::NonEqQML,
                                          ModelKind::GraphPermQML, ModelKind::ClassicalEqNN};

// CLI spelling.
inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::RotEqQML: return "rot-eq";
    case ModelKind::NonEqQML: return "non-eq";
    case ModelKind::GraphPermQML: return "graph-perm";
    case ModelKind::ClassicalEqNN: return "classical";
  }
  return "?";
}

inline ModelKind parse_kind(std::string_view s) {
  for (ModelKind k : kAllKinds)
    if (s == to_string(k)) return k;
  throw ValidationError("unknown model kind '" + std::string(s) +
                        "' (expected rot-eq, non-eq, graph-perm or classical)");
}

inline bool is_quantum(ModelKind k) { return k != ModelKind::ClassicalEqNN; }

struct ModelConfig {
  ModelKind kind = ModelKind::RotEqQML;
  Molecule molecule = Molecule::LiH;
  int n_qubits = 0;
  int layers = 0;
  bool strict_equivariance = true;  // GraphPermQML only
  std::vector<int> hidden;          // ClassicalEqNN only
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

inline ModelConfig canonical_config(ModelKind kind, Molecule m, bool strict = true,
                                    std::uint64_t seed = 0) {
  ModelConfig c;
  c.kind = kind;
  c.molecule = m;
  c.seed = seed;
  switch (kind) {
    case ModelKind::RotEqQML: c.n_qubits = 6, c.layers = 6; break;
    case ModelKind::NonEqQML: c.n_qubits = 4, c.layers = 4; break;
    case ModelKind::GraphPermQML:
      c.n_qubits = 4, c.layers = 4, c.strict_equivariance = strict;
      break;
    case ModelKind::ClassicalEqNN: c.hidden = {128, 128, 64}; break;
  }
  return c;
}

inline void validate(const ModelConfig& c) {
  switch (c.kind) {
    case ModelKind::RotEqQML:
      if (c.n_qubits < 4 || c.n_qubits > qsim::kMaxQubits || c.n_qubits % 2 != 0)
        throw ValidationError("rot-eq needs an even qubit count in [4, 8]");
      break;
    case ModelKind::NonEqQML:
      if (c.n_qubits < 1 || c.n_qubits > qsim::kMaxQubits)
        throw ValidationError("non-eq qubit count must be in [1, 8]");
      break;
    case ModelKind::GraphPermQML:
      if (c.n_qubits != 4) throw ValidationError("graph-perm uses one qubit per graph node (4)");
      break;
    case ModelKind::ClassicalEqNN:
      if (c.hidden.empty()) throw ValidationError("classical needs at least one hidden layer");
      for (int h : c.hidden)
        if (h < 1) throw ValidationError("hidden layer sizes must be positive");
      return;
  }
  if (c.layers < 1) throw ValidationError("layer count must be positive");
}

// ---------------------------------------------------------------------------
// Parameter layouts

namespace layout {

// rot-eq, per layer: [scale, ring times (n), chord times (n)]; then [a, b].
inline std::size_t roteq_per_layer(int n) { return 1 + 2 * static_cast<std::size_t>(n); }

// graph-perm table mode, per layer: W_node[4][3] then W_edge[6][2].
inline constexpr std::size_t kNodes = 4, kEdges = 6, kNodeFeatures = 3, kEdgeFeatures = 2;
inline constexpr std::size_t kTablePerLayer = kNodes * kNodeFeatures + kEdges * kEdgeFeatures;
inline constexpr std::size_t kTableReadout = kNodes + kEdges + 2;
// strict mode, per layer: [W_center(3), W_ligand(3), W_radial(2), W_angular(2)];
// readout [z_center, z_ligand, zz_radial, zz_angular, scale, bias].
inline constexpr std::size_t kStrictPerLayer = 2 * kNodeFeatures + 2 * kEdgeFeatures;
inline constexpr std::size_t kStrictReadout = 6;

}  // namespace layout

inline std::size_t count_params(const ModelConfig& c) {
  validate(c);
  const auto L = static_cast<std::size_t>(c.layers);
  switch (c.kind) {
    case ModelKind::RotEqQML: return L * layout::roteq_per_layer(c.n_qubits) + 2;
    case ModelKind::NonEqQML: return L * static_cast<std::size_t>(c.n_qubits) * 3;
    case ModelKind::GraphPermQML:
      return c.strict_equivariance ? L * layout::kStrictPerLayer + layout::kStrictReadout
                                   : L * layout::kTablePerLayer + layout::kTableReadout;
    case ModelKind::ClassicalEqNN: {
      std::size_t n = 0, in = features::kInvariantFeatureCount;
      for (int h : c.hidden) {
        n += in * h + h;
        in = static_cast<std::size_t>(h);
      }
      return n + in + 1;
    }
  }
  return 0;
}

inline std::vector<double> init_params(const ModelConfig& c) {
  const std::size_t n = count_params(c);
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(c.kind)};
  std::mt19937_64 rng(seq);
  std::vector<double> p(n, 0.0);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  switch (c.kind) {
    case ModelKind::RotEqQML: {
      const std::size_t per = layout::roteq_per_layer(c.n_qubits);
      for (int l = 0; l < c.layers; ++l) {
        p[l * per] = uniform(0.5, 1.5);
        for (std::size_t k = 1; k < per; ++k) p[l * per + k] = uniform(-0.5, 0.5);
      }
      p[n - 2] = 0.1;
      p[n - 1] = 0.5;
      break;
    }
    case ModelKind::NonEqQML:
      for (auto& v : p) v = uniform(-std::numbers::pi, std::numbers::pi);
      break;
    case ModelKind::GraphPermQML:
      for (auto& v : p) v = uniform(-0.5, 0.5);
      p[n - 2] = 0.5;
      p[n - 1] = 0.5;
      break;
    case ModelKind::ClassicalEqNN: {
      std::size_t off = 0, in = features::kInvariantFeatureCount;
      for (int h : c.hidden) {
        std::normal_distribution<double> w(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
        for (std::size_t k = 0; k < in * h; ++k) p[off + k] = w(rng);
        off += in * h + h;  // biases stay 0
        in = static_cast<std::size_t>(h);
      }
      std::normal_distribution<double> w(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
      for (std::size_t k = 0; k < in; ++k) p[off + k] = w(rng);
      p[n - 1] = 0.5;
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Circuits

namespace detail {

inline void check_positions(const ModelConfig& c, std::span<const Vec3> positions) {
  if (static_cast<int>(positions.size()) != atom_count(c.molecule))
    throw ValidationError("sample has " + std::to_string(positions.size()) +
                          " atoms but the model is configured for " + to_string(c.molecule));
}

inline void check_params(const ModelConfig& c, std::span<const double> params) {
  const std::size_t want = count_params(c);
  if (params.size() != want)
    throw StructuralError("parameter vector has " + std::to_string(params.size()) +
                          " entries, model layout needs " + std::to_string(want));
}

struct QuantumProblem {
  Circuit circuit;
  PauliObservable observable;
  Statevector initial;
};

// Bond vector p of the rot-eq encoding; LiH reuses its single bond.
inline QuantumProblem roteq_problem(const ModelConfig& c, const features::GeometricFeatures& f) {
  const int n = c.n_qubits, pairs = n / 2, nb = f.bond_count();
  const std::size_t per = layout::roteq_per_layer(n);
  QuantumProblem qp{Circuit(n, c.layers * per), PauliObservable(n),
                    encodings::singlet_init(pairs)};
  for (int l = 0; l < c.layers; ++l) {
    const std::size_t base = l * per;
    // Encoding acts on the first qubit of each singlet pair only; see README.
    for (int p = 0; p < pairs; ++p)
      qp.circuit.add(GateOp::pauli_vec_rot(2 * p, f.bond_vectors[p % nb], 0.0), base);
    for (int q = 0; q < n; ++q)
      qp.circuit.add(GateOp::heisenberg(q, (q + 1) % n, 1.0, 0.0), base + 1 + q);
    for (int q = 0; q < n; ++q)
      qp.circuit.add(GateOp::heisenberg(q, (q + 2) % n, 1.0, 0.0), base + 1 + n + q);
  }
  for (int p = 0; p < pairs; ++p)
    qp.observable += encodings::heisenberg_observable(n, 2 * p, 2 * p + 1);
  return qp;
}

// Bond lengths first, then H-H distances, cycled to fill the register.
inline std::vector<double> noneq_inputs(const features::GeometricFeatures& f, int n_qubits) {
  std::vector<double> pool = f.distances;
  for (int i = 0; i < f.bond_count(); ++i)
    for (int j = i + 1; j < f.bond_count(); ++j)
      pool.push_back(norm(f.bond_vectors[i] - f.bond_vectors[j]));
  std::vector<double> out(n_qubits);
  for (int q = 0; q < n_qubits; ++q) out[q] = pool[q % pool.size()];
  return out;
}

inline QuantumProblem noneq_problem(const ModelConfig& c, const features::GeometricFeatures& f) {
  const int n = c.n_qubits;
  const auto d = noneq_inputs(f, n);
  QuantumProblem qp{Circuit(n, c.layers * n * 3), PauliObservable(n), Statevector(n)};
  for (int l = 0; l < c.layers; ++l) {
    for (int q = 0; q < n; ++q) qp.circuit.add(GateOp::ry(q, d[q]));
    for (int q = 0; q < n; ++q) {
      const std::size_t base = (static_cast<std::size_t>(l) * n + q) * 3;
      qp.circuit.add(GateOp::ry(q, 0.0), base);
      qp.circuit.add(GateOp::rz(q, 0.0), base + 1);
      qp.circuit.add(GateOp::ry(q, 0.0), base + 2);
    }
    if (n > 1)
      for (int q = 0; q < n; ++q) {
        const int t = (q + 1) % n;
        if (n == 2 && q == 1) break;
        qp.circuit.add(GateOp::cnot(q, t));
      }
  }
  for (int q = 0; q < n; ++q) qp.observable.add(1.0, {{q, 'Z'}});
  return qp;
}

inline std::array<double, 2> edge_features(const encodings::GraphEdge& e) {
  if (e.cls == encodings::EdgeClass::Radial) return {e.weight, 1.0};
  return {std::sin(e.weight), std::cos(e.weight)};
}

// Parameter index helpers for both graph-perm layouts.
struct GraphIndex {
  const ModelConfig& c;
  const encodings::GraphSpec& g;

  std::size_t node(int l, int v, int k) const {
    if (c.strict_equivariance) {
      const bool center = g.node_classes[v] == encodings::NodeClass::Center;
      return l * layout::kStrictPerLayer + (center ? 0 : 3) + k;
    }
    return l * layout::kTablePerLayer + v * layout::kNodeFeatures + k;
  }
  std::size_t edge(int l, std::size_t e, int k) const {
    if (c.strict_equivariance) {
      const bool radial = g.edges[e].cls == encodings::EdgeClass::Radial;
      return l * layout::kStrictPerLayer + (radial ? 6 : 8) + k;
    }
    return l * layout::kTablePerLayer + layout::kNodes * layout::kNodeFeatures +
           e * layout::kEdgeFeatures + k;
  }
  std::size_t readout_base() const {
    return c.layers * (c.strict_equivariance ? layout::kStrictPerLayer : layout::kTablePerLayer);
  }
  std::size_t z(int v) const {
    if (c.strict_equivariance)
      return readout_base() + (g.node_classes[v] == encodings::NodeClass::Center ? 0 : 1);
    return readout_base() + v;
  }
  std::size_t zz(std::size_t e) const {
    if (c.strict_equivariance)
      return readout_base() + (g.edges[e].cls == encodings::EdgeClass::Radial ? 2 : 3);
    return readout_base() + layout::kNodes + e;
  }
  std::size_t scale() const { return readout_base() + (c.strict_equivariance ? 4 : 10); }
  std::size_t bias() const { return scale() + 1; }
};

inline Circuit graph_circuit(const ModelConfig& c, const encodings::GraphSpec& g) {
  const GraphIndex ix{c, g};
  Circuit circ(g.n_nodes, ix.readout_base());
  for (int l = 0; l < c.layers; ++l) {
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto phi = edge_features(g.edges[e]);
      const std::size_t op = circ.add(GateOp::zz(g.edges[e].i, g.edges[e].j, 0.0));
      for (int k = 0; k < 2; ++k) circ.bind_slot(ix.edge(l, e, k), op, phi[k]);
    }
    for (int v = 0; v < g.n_nodes; ++v) {
      const std::size_t op = circ.add(GateOp::rx(v, 0.0));
      for (int k = 0; k < 3; ++k) circ.bind_slot(ix.node(l, v, k), op, g.node_features[v][k]);
    }
  }
  return circ;
}

// ---------------------------------------------------------------------------
// MLP

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
inline double silu(double z) { return z * sigmoid(z); }
inline double silu_derivative(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

// The second hidden layer adds its input when the widths match.
inline bool has_skip(const std::vector<int>& hidden, std::size_t k) {
  return k == 1 && hidden[1] == hidden[0];
}

struct MlpResult {
  double energy = 0.0;
  std::vector<double> param_grad;
  std::vector<double> input_grad;
};

inline MlpResult mlp(const std::vector<int>& hidden, std::span<const double> params,
                     std::span<const double> x, bool want_param_grad, bool want_input_grad) {
  const std::size_t K = hidden.size();
  std::vector<std::vector<double>> h(K + 1), z(K);
  std::vector<std::size_t> offset(K + 1);
  h[0].assign(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t in = h[k].size(), out = static_cast<std::size_t>(hidden[k]);
    offset[k] = off;
    const double* W = params.data() + off;
    const double* b = W + in * out;
    z[k].resize(out);
    h[k + 1].resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = W + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * h[k][i];
      z[k][o] = acc;
      h[k + 1][o] = silu(acc) + (has_skip(hidden, k) ? h[k][o] : 0.0);
    }
    off += in * out + out;
  }
  offset[K] = off;
  const std::size_t last = h[K].size();
  MlpResult r;
  r.energy = params[off + last];
  for (std::size_t i = 0; i < last; ++i) r.energy += params[off + i] * h[K][i];
  if (!want_param_grad && !want_input_grad) return r;

  if (want_param_grad) {
    r.param_grad.assign(params.size(), 0.0);
    for (std::size_t i = 0; i < last; ++i) r.param_grad[off + i] = h[K][i];
    r.param_grad[off + last] = 1.0;
  }
  std::vector<double> dh(params.begin() + off, params.begin() + off + last);
  for (std::size_t k = K; k-- > 0;) {
    const std::size_t in = h[k].size(), out = h[k + 1].size();
    const double* W = params.data() + offset[k];
    std::vector<double> dz(out);
    for (std::size_t o = 0; o < out; ++o) dz[o] = dh[o] * silu_derivative(z[k][o]);
    if (want_param_grad) {
      double* gW = r.param_grad.data() + offset[k];
      double* gb = gW + in * out;
      for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) gW[o * in + i] = dz[o] * h[k][i];
        gb[o] = dz[o];
      }
    }
    if (k == 0 && !want_input_grad) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = W + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * dz[o];
    }
    if (has_skip(hidden, k))
      for (std::size_t i = 0; i < in; ++i) prev[i] += dh[i];
    dh = std::move(prev);
  }
  if (want_input_grad) r.input_grad = std::move(dh);
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Evaluation

struct EnergyEval {
  double energy = 0.0;
  std::vector<double> gradient;  // dE/dtheta, empty unless requested
};

inline EnergyEval evaluate_energy(const ModelConfig& c, std::span<const double> params,
                                  std::span<const Vec3> positions, bool want_gradient) {
  detail::check_positions(c, positions);
  detail::check_params(c, params);
  EnergyEval out;

  if (c.kind == ModelKind::ClassicalEqNN) {
    const auto x = features::invariant_feature_vector(positions, c.molecule);
    auto r = detail::mlp(c.hidden, params, x, want_gradient, false);
    out.energy = r.energy;
    out.gradient = std::move(r.param_grad);
    return out;
  }

  const auto f = features::compute_features(positions, c.molecule);

  if (c.kind == ModelKind::GraphPermQML) {
    const auto g = features::build_graph(f);
    const detail::GraphIndex ix{c, g};
    const Circuit circ = detail::graph_circuit(c, g);
    const std::span<const double> theta = params.first(circ.n_params());
    PauliObservable obs(g.n_nodes);
    for (int v = 0; v < g.n_nodes; ++v) obs.add(params[ix.z(v)], {{v, 'Z'}});
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      obs.add(params[ix.zz(e)], {{g.edges[e].i, 'Z'}, {g.edges[e].j, 'Z'}});
    const double scale = params[ix.scale()], bias = params[ix.bias()];
    const Statevector s0 = encodings::uniform_superposition(g.n_nodes);
    if (!want_gradient) {
      out.energy = scale * qsim::expectation(qsim::run(circ, theta, s0), obs) + bias;
      return out;
    }
    auto vg = qsim::grad_adjoint(circ, theta, obs, s0);
    out.energy = scale * vg.value + bias;
    out.gradient.assign(params.size(), 0.0);
    for (std::size_t k = 0; k < vg.gradient.size(); ++k) out.gradient[k] = scale * vg.gradient[k];
    const Statevector& psi = *vg.final_state;
    for (int v = 0; v < g.n_nodes; ++v) {
      PauliObservable zv(g.n_nodes);
      zv.add(1.0, {{v, 'Z'}});
      out.gradient[ix.z(v)] += scale * qsim::expectation(psi, zv);
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      PauliObservable zz(g.n_nodes);
      zz.add(1.0, {{g.edges[e].i, 'Z'}, {g.edges[e].j, 'Z'}});
      out.gradient[ix.zz(e)] += scale * qsim::expectation(psi, zz);
    }
    out.gradient[ix.scale()] = vg.value;
    out.gradient[ix.bias()] = 1.0;
    return out;
  }

  const bool roteq = c.kind == ModelKind::RotEqQML;
  detail::QuantumProblem qp = roteq ? detail::roteq_problem(c, f) : detail::noneq_problem(c, f);
  const std::span<const double> theta = params.first(qp.circuit.n_params());
  const double a = roteq ? params[params.size() - 2] : 1.0;
  const double b = roteq ? params[params.size() - 1] : 0.0;
  if (!want_gradient) {
    out.energy = a * qsim::expectation(qsim::run(qp.circuit, theta, qp.initial), qp.observable) + b;
    return out;
  }
  auto vg = qsim::grad_adjoint(qp.circuit, theta, qp.observable, qp.initial);
  out.energy = a * vg.value + b;
  out.gradient.assign(params.size(), 0.0);
  for (std::size_t k = 0; k < vg.gradient.size(); ++k) out.gradient[k] = a * vg.gradient[k];
  if (roteq) {
    out.gradient[params.size() - 2] = vg.value;
    out.gradient[params.size() - 1] = 1.0;
  }
  return out;
}

inline double energy(const ModelConfig& c, std::span<const double> params,
                     std::span<const Vec3> positions) {
  return evaluate_energy(c, params, positions, false).energy;
}

inline constexpr double kForceStep = 1e-4;  // Angstrom

// -dE/dx by central differences on raw coordinates, scaled-energy units.
inline std::vector<Vec3> fd_forces(const ModelConfig& c, std::span<const double> params,
                                   std::span<const Vec3> positions, double h = kForceStep) {
  std::vector<Vec3> x(positions.begin(), positions.end());
  std::vector<Vec3> f(x.size());
  for (std::size_t a = 0; a < x.size(); ++a)
    for (int k = 0; k < 3; ++k) {
      const double x0 = x[a][k];
      x[a][k] = x0 + h;
      const double ep = energy(c, params, x);
      x[a][k] = x0 - h;
      const double em = energy(c, params, x);
      x[a][k] = x0;
      f[a][k] = -(ep - em) / (2.0 * h);
    }
  return f;
}

// Exact -dE/dx for the classical network: backprop to the descriptor, then
// through its Jacobian.
inline std::vector<Vec3> classical_backprop_forces(const ModelConfig& c,
                                                   std::span<const double> params,
                                                   std::span<const Vec3> positions) {
  if (c.kind != ModelKind::ClassicalEqNN)
    throw ValidationError("backprop forces are only available for the classical model");
  detail::check_positions(c, positions);
  detail::check_params(c, params);
  const auto feats = features::invariant_features(positions, c.molecule, true);
  const auto r = detail::mlp(c.hidden, params, feats.values, false, true);
  std::vector<Vec3> f(positions.size(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < feats.values.size(); ++i)
    for (std::size_t k = 0; k < 3 * positions.size(); ++k)
      f[k / 3][k % 3] -= r.input_grad[i] * feats.jacobian[i][k];
  return f;
}

// ---------------------------------------------------------------------------
// Model

struct Model {
  ModelConfig config;
  std::vector<double> params;
  pipeline::MinMaxScaler energy_scaler;
  pipeline::MinMaxScaler force_scaler;  // one channel, all components pooled
  std::optional<pipeline::PostCorrection> postcorrection;

  bool operator==(const Model&) const = default;
};

inline Model make_model(const ModelConfig& c) {
  return Model{c, init_params(c), {}, {}, std::nullopt};
}

// Scaled-unit energy, no calibration.
inline double predict_energy(const Model& m, std::span<const Vec3> positions) {
  return energy(m.config, m.params, positions);
}

inline std::vector<Vec3> predict_forces(const Model& m, std::span<const Vec3> positions) {
  return fd_forces(m.config, m.params, positions);
}

struct Prediction {
  double energy = 0.0;
  std::vector<Vec3> forces;
};

// Raw-unit energy and forces with post-correction applied when fitted.
// Scaled forces live in the energy scaler's units per Angstrom, so the raw
// force is span(E) * F_s.
inline Prediction predict_raw(const Model& m, std::span<const Vec3> positions) {
  Prediction p;
  double e = predict_energy(m, positions);
  if (m.postcorrection) e = m.postcorrection->energy(e);
  p.energy = m.energy_scaler.inverse(e);
  p.forces = predict_forces(m, positions);
  const double span_e = m.energy_scaler.span();
  for (auto& f : p.forces)
    for (auto& v : f) {
      v *= span_e;
      if (m.postcorrection)
        v = m.force_scaler.inverse(m.postcorrection->force(m.force_scaler.transform(v)));
    }
  return p;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"kind", to_string(c.kind)},     {"molecule", to_string(c.molecule)},
          {"n_qubits", c.n_qubits},        {"layers", c.layers},
          {"strict_equivariance", c.strict_equivariance},
          {"hidden", c.hidden},            {"seed", c.seed}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  c.molecule = parse_molecule(j.at("molecule").get<std::string>());
  c.n_qubits = j.at("n_qubits").get<int>();
  c.layers = j.at("layers").get<int>();
  c.strict_equivariance = j.at("strict_equivariance").get<bool>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  validate(c);
  return c;
}

namespace detail {

inline nlohmann::json scaler_to_json(const pipeline::MinMaxScaler& s) {
  if (!s.fitted()) return nullptr;
  return {{"min", s.min()}, {"max", s.max()}};
}

inline pipeline::MinMaxScaler scaler_from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  return pipeline::MinMaxScaler(j.at("min").get<std::vector<double>>(),
                                j.at("max").get<std::vector<double>>());
}

}  // namespace detail

inline nlohmann::json to_json(const Model& m) {
  nlohmann::json pc = nullptr;
  if (m.postcorrection) {
    const auto& p = *m.postcorrection;
    pc = {{"c2", p.c2}, {"c1", p.c1}, {"c0", p.c0}, {"m", p.m}, {"b", p.b}};
  }
  return {{"kind", to_string(m.config.kind)},
          {"config", config_to_json(m.config)},
          {"params", m.params},
          {"scalers",
           {{"energy", detail::scaler_to_json(m.energy_scaler)},
            {"force", detail::scaler_to_json(m.force_scaler)}}},
          {"postcorrection", pc}};
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    Model m;
    m.config = config_from_json(j.at("config"));
    if (parse_kind(j.at("kind").get<std::string>()) != m.config.kind)
      throw ValidationError("checkpoint kind does not match its config");
    m.params = j.at("params").get<std::vector<double>>();
    detail::check_params(m.config, m.params);
    m.energy_scaler = detail::scaler_from_json(j.at("scalers").at("energy"));
    m.force_scaler = detail::scaler_from_json(j.at("scalers").at("force"));
    const auto& pc = j.at("postcorrection");
    if (!pc.is_null())
      m.postcorrection = pipeline::PostCorrection{pc.at("c2").get<double>(), pc.at("c1").get<double>(),
                                                  pc.at("c0").get<double>(), pc.at("m").get<double>(),
                                                  pc.at("b").get<double>()};
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace gqml::models
