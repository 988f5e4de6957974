// SPDX-License-Identifier: Apache-2.0
#pragma once

// Symmetry-aware circuit building blocks: the SO(3) Bloch-sphere embedding,
// Heisenberg couplers and readout, singlet pairs, and the alternating
// edge/node layers of the graph permutation-equivariant encoding.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gqml/errors.hpp"
#include "gqml/qsim.hpp"
#include "gqml/vec3.hpp"

namespace gqml::encodings {

using qsim::GateOp;
using qsim::PauliObservable;
using qsim::Statevector;

// ---------------------------------------------------------------------------
// Rotations

struct EulerAngles {
  double psi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

// r(psi, theta, phi) = r_z(psi) r_x(theta) r_z(phi)
inline Mat3 rotation_matrix(const EulerAngles& a) {
  return rot_z(a.psi) * rot_x(a.theta) * rot_z(a.phi);
}

inline Vec3 euler_rotate(const EulerAngles& a, const Vec3& x) {
  return rotation_matrix(a) * x;
}

// U(psi, theta, phi) = R_Z(psi) R_X(theta) R_Z(phi) as an op sequence in
// application order.
inline std::vector<GateOp> euler_gates(const EulerAngles& a, int qubit = 0) {
  return {GateOp::rz(qubit, a.phi), GateOp::rx(qubit, a.theta),
          GateOp::rz(qubit, a.psi)};
}

// Conjugator V with U(r x) = V U(x) V^dag for the active rotation convention
// used by rotation_matrix (r_z(a) turns x toward y). This is U(psi,theta,phi);
// the negated-angle form U(-psi,-theta,-phi) is the conjugator for the
// passive rotation r(-psi,-theta,-phi).
inline std::vector<GateOp> so3_conjugator(const EulerAngles& a, int qubit = 0) {
  return euler_gates(a, qubit);
}

// exp(-i/2 (x1 X + x2 Y + x3 Z)) on one qubit.
inline GateOp so3_embed(const Vec3& x, int qubit = 0) {
  return GateOp::pauli_vec_rot(qubit, x, 1.0);
}

// ---------------------------------------------------------------------------
// Heisenberg pieces

// X(i)X(j) + Y(i)Y(j) + Z(i)Z(j)
inline PauliObservable heisenberg_observable(int n_qubits, int i, int j) {
  if (i == j) throw StructuralError("heisenberg_observable: i must differ from j");
  PauliObservable o(n_qubits);
  o.add(1.0, {{i, 'X'}, {j, 'X'}});
  o.add(1.0, {{i, 'Y'}, {j, 'Y'}});
  o.add(1.0, {{i, 'Z'}, {j, 'Z'}});
  return o;
}

// Product of (|01> - |10>)/sqrt(2) on qubit pairs (2k, 2k+1).
inline Statevector singlet_init(int pair_count) {
  if (pair_count < 1) throw StructuralError("pair_count must be >= 1");
  const int n = 2 * pair_count;
  std::vector<qsim::Complex> amp(std::size_t{1} << n, 0.0);
  // Each pair contributes bits (01) with +1/sqrt2 or (10) with -1/sqrt2.
  const double weight = std::pow(0.5, 0.5 * pair_count);
  for (std::size_t choice = 0; choice < (std::size_t{1} << pair_count); ++choice) {
    std::size_t index = 0;
    double sign = 1.0;
    for (int k = 0; k < pair_count; ++k) {
      const bool flipped = (choice >> k) & 1;
      const std::size_t hi = std::size_t{1} << (n - 1 - 2 * k);
      const std::size_t lo = std::size_t{1} << (n - 2 - 2 * k);
      if (flipped) {
        index |= hi;
        sign = -sign;
      } else {
        index |= lo;
      }
    }
    amp[index] = sign * weight;
  }
  return Statevector::from_amplitudes(std::move(amp));
}

// |s> = 2^{-n/2} sum_x |x>
inline Statevector uniform_superposition(int n_qubits) {
  if (n_qubits < 1) throw StructuralError("uniform_superposition: n must be >= 1");
  const std::size_t dim = std::size_t{1} << n_qubits;
  return Statevector::from_amplitudes(
      std::vector<qsim::Complex>(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
}

// ---------------------------------------------------------------------------
// Graphs

enum class NodeClass { Center, Ligand };
enum class EdgeClass { Radial, Angular };  // center-ligand, ligand-ligand

struct GraphEdge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
  EdgeClass cls = EdgeClass::Radial;
};

struct GraphSpec {
  int n_nodes = 0;
  std::vector<std::vector<double>> node_features;  // one row per node
  std::vector<NodeClass> node_classes;
  std::vector<GraphEdge> edges;  // canonical order: sorted by (i, j)
  std::vector<int> permutable;   // nodes whose relabelling is a symmetry

  std::size_t feature_dim() const {
    return node_features.empty() ? 0 : node_features.front().size();
  }
};

inline void sort_edges(GraphSpec& g) {
  std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
}

inline void validate(const GraphSpec& g) {
  if (g.n_nodes < 1) throw StructuralError("graph needs at least one node");
  if (static_cast<int>(g.node_features.size()) != g.n_nodes ||
      static_cast<int>(g.node_classes.size()) != g.n_nodes)
    throw StructuralError("graph node arrays do not match n_nodes");
  for (const auto& row : g.node_features) {
    if (row.size() != g.feature_dim())
      throw StructuralError("graph node feature rows differ in length");
    for (double v : row)
      if (!std::isfinite(v)) throw StructuralError("non-finite node feature");
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    if (ed.i < 0 || ed.j >= g.n_nodes || !(ed.i < ed.j))
      throw StructuralError("graph edge endpoints must satisfy 0 <= i < j < n");
    if (!std::isfinite(ed.weight)) throw StructuralError("non-finite edge weight");
    for (std::size_t f = 0; f < e; ++f)
      if (g.edges[f].i == ed.i && g.edges[f].j == ed.j)
        throw StructuralError("duplicate graph edge");
  }
  std::vector<bool> seen(g.n_nodes, false);
  for (int p : g.permutable) {
    if (p < 0 || p >= g.n_nodes || seen[p])
      throw StructuralError("invalid permutable node set");
    seen[p] = true;
  }
}

// sum over edges of weight * Z(i) Z(j)
inline PauliObservable graph_hamiltonian(const GraphSpec& g) {
  PauliObservable h(g.n_nodes);
  for (const auto& e : g.edges) h.add(e.weight, {{e.i, 'Z'}, {e.j, 'Z'}});
  return h;
}

// One alternating layer U_N(a, beta) U_G(E, gamma): first exp(-i gamma w_ij
// Z_i Z_j) for every edge in list order, then RX(beta . a_l) on every node.
// With one feature per node this is exactly RX(a_l * beta).
inline std::vector<GateOp> graph_layer(const GraphSpec& g, std::span<const double> beta,
                                       double gamma) {
  if (beta.size() != g.feature_dim())
    throw StructuralError("graph_layer: beta length must equal node feature dimension");
  std::vector<GateOp> ops;
  ops.reserve(g.edges.size() + g.n_nodes);
  for (const auto& e : g.edges) ops.push_back(GateOp::zz(e.i, e.j, gamma * e.weight));
  for (int l = 0; l < g.n_nodes; ++l) {
    const auto& a = g.node_features[l];
    ops.push_back(GateOp::rx(l, std::inner_product(a.begin(), a.end(), beta.begin(), 0.0)));
  }
  return ops;
}

inline std::vector<GateOp> graph_layer(const GraphSpec& g, double beta, double gamma) {
  const double b[1] = {beta};
  return graph_layer(g, std::span<const double>(b, 1), gamma);
}

// p alternating layers on |s>.
inline Statevector graph_encode(const GraphSpec& g, std::span<const double> betas,
                                std::span<const double> gammas) {
  if (betas.size() != gammas.size())
    throw StructuralError("graph_encode: beta/gamma layer counts differ");
  validate(g);
  Statevector s = uniform_superposition(g.n_nodes);
  for (std::size_t p = 0; p < betas.size(); ++p)
    for (const auto& op : graph_layer(g, betas[p], gammas[p])) qsim::apply(s, op);
  return s;
}

// Vector-valued beta per layer, for multi-feature nodes.
inline Statevector graph_encode(const GraphSpec& g, const std::vector<std::vector<double>>& betas,
                                std::span<const double> gammas) {
  if (betas.size() != gammas.size())
    throw StructuralError("graph_encode: beta/gamma layer counts differ");
  validate(g);
  Statevector s = uniform_superposition(g.n_nodes);
  for (std::size_t p = 0; p < betas.size(); ++p)
    for (const auto& op : graph_layer(g, betas[p], gammas[p])) qsim::apply(s, op);
  return s;
}

// ---------------------------------------------------------------------------
// Permutations

// sigma maps old label l to new label sigma[l].
struct QubitPermutation {
  std::vector<int> sigma;

  int size() const { return static_cast<int>(sigma.size()); }

  void validate(int n) const {
    if (size() != n) throw StructuralError("permutation size mismatch");
    std::vector<bool> hit(n, false);
    for (int v : sigma) {
      if (v < 0 || v >= n || hit[v])
        throw StructuralError("permutation is not a bijection");
      hit[v] = true;
    }
  }

  QubitPermutation inverse() const {
    QubitPermutation inv{std::vector<int>(sigma.size())};
    for (int l = 0; l < size(); ++l) inv.sigma[sigma[l]] = l;
    return inv;
  }

  static QubitPermutation identity(int n) {
    QubitPermutation p{std::vector<int>(n)};
    std::iota(p.sigma.begin(), p.sigma.end(), 0);
    return p;
  }
};

// Node l of the input becomes node sigma[l] of the output; edge endpoints
// follow and weights are carried. Edges are re-sorted into canonical order.
inline GraphSpec permute_graph(const GraphSpec& g, const QubitPermutation& p) {
  p.validate(g.n_nodes);
  GraphSpec out;
  out.n_nodes = g.n_nodes;
  out.node_features.resize(g.n_nodes);
  out.node_classes.resize(g.n_nodes);
  for (int l = 0; l < g.n_nodes; ++l) {
    out.node_features[p.sigma[l]] = g.node_features[l];
    out.node_classes[p.sigma[l]] = g.node_classes[l];
  }
  for (const auto& e : g.edges) {
    int a = p.sigma[e.i], b = p.sigma[e.j];
    if (a > b) std::swap(a, b);
    out.edges.push_back({a, b, e.weight, e.cls});
  }
  sort_edges(out);
  for (int v : g.permutable) out.permutable.push_back(p.sigma[v]);
  std::sort(out.permutable.begin(), out.permutable.end());
  return out;
}

// The content of qubit l moves to qubit sigma[l].
inline Statevector permute_state(const Statevector& s, const QubitPermutation& p) {
  const int n = s.n_qubits();
  p.validate(n);
  std::vector<qsim::Complex> out(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    std::size_t j = 0;
    for (int l = 0; l < n; ++l)
      if (i & (std::size_t{1} << (n - 1 - l))) j |= std::size_t{1} << (n - 1 - p.sigma[l]);
    out[j] = s[i];
  }
  return Statevector::from_amplitudes(std::move(out));
}

inline PauliObservable permute_observable(const PauliObservable& o,
                                          const QubitPermutation& p) {
  p.validate(o.n_qubits());
  PauliObservable out(o.n_qubits());
  for (const auto& t : o.terms()) {
    std::string s(o.n_qubits(), 'I');
    for (int l = 0; l < o.n_qubits(); ++l) s[p.sigma[l]] = t.paulis[l];
    out.add(t.coefficient, std::move(s));
  }
  return out;
}

// Every permutation of `nodes` (as full permutations of 0..n-1 fixing the
// rest), identity first.
inline std::vector<QubitPermutation> permutations_of(int n, std::vector<int> nodes) {
  std::sort(nodes.begin(), nodes.end());
  std::vector<QubitPermutation> out;
  std::vector<int> image = nodes;
  do {
    QubitPermutation p = QubitPermutation::identity(n);
    for (std::size_t k = 0; k < nodes.size(); ++k) p.sigma[nodes[k]] = image[k];
    out.push_back(std::move(p));
  } while (std::next_permutation(image.begin(), image.end()));
  return out;
}

}  // namespace gqml::encodings
