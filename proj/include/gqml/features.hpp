// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gqml/encodings.hpp"
#include "gqml/errors.hpp"
#include "gqml/vec3.hpp"

namespace gqml {

enum class Molecule { LiH, NH3 };

inline int atom_count(Molecule m) { return m == Molecule::LiH ? 2 : 4; }

inline std::string to_string(Molecule m) { return m == Molecule::LiH ? "LiH" : "NH3"; }

inline Molecule parse_molecule(std::string_view s) {
  if (s == "LiH") return Molecule::LiH;
  if (s == "NH3") return Molecule::NH3;
  throw ValidationError("unknown molecule '" + std::string(s) + "' (expected LiH or NH3)");
}

}  // namespace gqml

namespace gqml::features {

inline constexpr double kMinBondLength = 1e-8;  // Angstrom

// Atom 0 is the heavy atom (Li or N); atoms 1.. are hydrogens.
struct GeometricFeatures {
  Molecule molecule = Molecule::LiH;
  std::vector<Vec3> bond_vectors;  // x_Hi - x_heavy
  std::vector<double> distances;
  std::vector<Vec3> unit_dirs;
  std::vector<double> angles;  // theta_ij over bond pairs i<j, lexicographic

  int bond_count() const { return static_cast<int>(distances.size()); }

  static std::size_t pair_index(int i, int j, int n_bonds) {
    if (i > j) std::swap(i, j);
    // rows before i hold (n-1) + (n-2) + ... entries
    return static_cast<std::size_t>(i * (2 * n_bonds - i - 1) / 2 + (j - i - 1));
  }

  double angle(int i, int j) const { return angles[pair_index(i, j, bond_count())]; }
};

inline double clamped_angle(const Vec3& ui, const Vec3& uj) {
  return std::acos(std::clamp(dot(ui, uj), -1.0, 1.0));
}

inline GeometricFeatures compute_features(std::span<const Vec3> positions, Molecule m) {
  if (static_cast<int>(positions.size()) != atom_count(m))
    throw ValidationError(to_string(m) + " expects " + std::to_string(atom_count(m)) +
                          " atoms, got " + std::to_string(positions.size()));
  GeometricFeatures f;
  f.molecule = m;
  const Vec3& heavy = positions[0];
  for (std::size_t a = 1; a < positions.size(); ++a) {
    const Vec3 r = positions[a] - heavy;
    const double d = norm(r);
    if (!(d >= kMinBondLength))
      throw DegenerateGeometryError("atoms 0 and " + std::to_string(a) +
                                    " coincide (d < 1e-8 A)");
    f.bond_vectors.push_back(r);
    f.distances.push_back(d);
    f.unit_dirs.push_back((1.0 / d) * r);
  }
  const int nb = f.bond_count();
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j)
      f.angles.push_back(clamped_angle(f.unit_dirs[i], f.unit_dirs[j]));
  return f;
}

// Gradients of bond lengths and bond angles with respect to all 3A atomic
// coordinates (flattened atom-major).
struct InternalJacobian {
  std::vector<std::vector<double>> distance;  // [bond][3A]
  std::vector<std::vector<double>> angle;     // [pair][3A]
};

inline InternalJacobian internal_jacobian(const GeometricFeatures& f) {
  const int nb = f.bond_count();
  const std::size_t dof = 3 * static_cast<std::size_t>(nb + 1);
  InternalJacobian jac;
  jac.distance.assign(nb, std::vector<double>(dof, 0.0));
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < 3; ++c) {
      jac.distance[b][3 * (b + 1) + c] = f.unit_dirs[b][c];
      jac.distance[b][c] = -f.unit_dirs[b][c];
    }
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) {
      std::vector<double> row(dof, 0.0);
      const double cos_t = dot(f.unit_dirs[i], f.unit_dirs[j]);
      const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
      if (sin_t > 1e-12) {
        // d theta / d r_i = -(u_j - cos u_i) / (d_i sin)
        const Vec3 gi = (-1.0 / (f.distances[i] * sin_t)) * (f.unit_dirs[j] - cos_t * f.unit_dirs[i]);
        const Vec3 gj = (-1.0 / (f.distances[j] * sin_t)) * (f.unit_dirs[i] - cos_t * f.unit_dirs[j]);
        for (int c = 0; c < 3; ++c) {
          row[3 * (i + 1) + c] = gi[c];
          row[3 * (j + 1) + c] = gj[c];
          row[c] = -gi[c] - gj[c];
        }
      }
      jac.angle.push_back(std::move(row));
    }
  return jac;
}

// ---------------------------------------------------------------------------
// Graph construction

// Four nodes: the heavy atom (node 0, Center) and one Ligand node per bond.
// Radial edges (0, i) carry d_i, Angular edges (i, j) carry theta_ij.
// Node features: ligand i -> (d_i, mean of its angles, 1); center -> (mean d,
// mean theta, 0). LiH has a single bond, which is replicated onto all three
// ligand nodes so both molecules share one four-qubit register layout.
inline encodings::GraphSpec build_graph(const GeometricFeatures& f) {
  using encodings::EdgeClass;
  using encodings::NodeClass;
  constexpr int kLigands = 3;
  std::array<double, kLigands> d{};
  std::array<std::array<double, kLigands>, kLigands> theta{};
  if (f.molecule == Molecule::NH3) {
    for (int i = 0; i < kLigands; ++i) {
      d[i] = f.distances[i];
      for (int j = 0; j < kLigands; ++j) theta[i][j] = i == j ? 0.0 : f.angle(i, j);
    }
  } else {
    d.fill(f.distances[0]);
  }

  encodings::GraphSpec g;
  g.n_nodes = kLigands + 1;
  double mean_d = 0.0, mean_theta = 0.0;
  for (int i = 0; i < kLigands; ++i) mean_d += d[i] / kLigands;
  for (int i = 0; i < kLigands; ++i)
    for (int j = i + 1; j < kLigands; ++j) mean_theta += theta[i][j] / 3.0;
  g.node_features.push_back({mean_d, mean_theta, 0.0});
  g.node_classes.push_back(NodeClass::Center);
  for (int i = 0; i < kLigands; ++i) {
    double own = 0.0;
    for (int j = 0; j < kLigands; ++j)
      if (j != i) own += theta[i][j] / 2.0;
    g.node_features.push_back({d[i], own, 1.0});
    g.node_classes.push_back(NodeClass::Ligand);
  }
  for (int i = 0; i < kLigands; ++i) g.edges.push_back({0, i + 1, d[i], EdgeClass::Radial});
  for (int i = 0; i < kLigands; ++i)
    for (int j = i + 1; j < kLigands; ++j)
      g.edges.push_back({i + 1, j + 1, theta[i][j], EdgeClass::Angular});
  encodings::sort_edges(g);
  if (f.molecule == Molecule::NH3) g.permutable = {1, 2, 3};
  return g;
}

// ---------------------------------------------------------------------------
// Invariant descriptor for the classical network

inline constexpr int kRbfCount = 16;
inline constexpr double kRbfMin = 0.5;
inline constexpr double kRbfMax = 3.0;
inline constexpr double kMorseExponent = 1.0;  // 1/Angstrom

// Equilibrium bond length of the surrogate surface for each molecule.
inline double reference_bond_length(Molecule m) { return m == Molecule::LiH ? 1.6 : 1.01; }

// Layout: pools (mean, min, max) of d, 1/d, exp(-a (d - r0)), then pools of
// the bond angles (zeros when there are none), then 16 Gaussian RBFs of the
// mean bond length.
inline constexpr std::size_t kInvariantFeatureCount = 3 * 4 + kRbfCount;

namespace detail {

struct Pooled {
  double mean, min, max;
  std::size_t argmin, argmax;
};

inline Pooled pool(const std::vector<double>& v) {
  Pooled p{0.0, v[0], v[0], 0, 0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    p.mean += v[i] / static_cast<double>(v.size());
    if (v[i] < p.min) p.min = v[i], p.argmin = i;
    if (v[i] > p.max) p.max = v[i], p.argmax = i;
  }
  return p;
}

inline double rbf_width() { return (kRbfMax - kRbfMin) / (kRbfCount - 1); }
inline double rbf_center(int k) { return kRbfMin + k * rbf_width(); }

}  // namespace detail

struct InvariantFeatures {
  std::vector<double> values;
  std::vector<std::vector<double>> jacobian;  // [feature][3A], filled on request
};

inline InvariantFeatures invariant_features(std::span<const Vec3> positions, Molecule m,
                                            bool with_jacobian) {
  const GeometricFeatures f = compute_features(positions, m);
  const int nb = f.bond_count();
  const std::size_t dof = 3 * positions.size();
  const double r0 = reference_bond_length(m);

  // Per-element scalars and their gradients w.r.t. the bond length.
  std::vector<double> inv(nb), morse(nb), dinv(nb), dmorse(nb);
  for (int b = 0; b < nb; ++b) {
    const double d = f.distances[b];
    inv[b] = 1.0 / d;
    dinv[b] = -1.0 / (d * d);
    morse[b] = std::exp(-kMorseExponent * (d - r0));
    dmorse[b] = -kMorseExponent * morse[b];
  }

  InvariantFeatures out;
  out.values.reserve(kInvariantFeatureCount);
  InternalJacobian jac;
  if (with_jacobian) jac = internal_jacobian(f);

  auto push_row = [&](const std::vector<double>& row) {
    if (with_jacobian) out.jacobian.push_back(row);
  };
  auto scaled_row = [&](const std::vector<double>& base, double s) {
    std::vector<double> r(dof);
    for (std::size_t k = 0; k < dof; ++k) r[k] = s * base[k];
    return r;
  };

  // Bond-wise channels: value(b), d value / d d_b.
  const std::vector<const std::vector<double>*> channels = {&f.distances, &inv, &morse};
  const std::vector<double> ones(nb, 1.0);
  const std::vector<const std::vector<double>*> slopes = {&ones, &dinv, &dmorse};
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& v = *channels[c];
    const auto& s = *slopes[c];
    const detail::Pooled p = detail::pool(v);
    out.values.insert(out.values.end(), {p.mean, p.min, p.max});
    if (with_jacobian) {
      std::vector<double> mean_row(dof, 0.0);
      for (int b = 0; b < nb; ++b)
        for (std::size_t k = 0; k < dof; ++k) mean_row[k] += s[b] * jac.distance[b][k] / nb;
      push_row(mean_row);
      push_row(scaled_row(jac.distance[p.argmin], s[p.argmin]));
      push_row(scaled_row(jac.distance[p.argmax], s[p.argmax]));
    }
  }

  if (f.angles.empty()) {
    out.values.insert(out.values.end(), {0.0, 0.0, 0.0});
    for (int k = 0; k < 3; ++k) push_row(std::vector<double>(dof, 0.0));
  } else {
    const detail::Pooled p = detail::pool(f.angles);
    out.values.insert(out.values.end(), {p.mean, p.min, p.max});
    if (with_jacobian) {
      std::vector<double> mean_row(dof, 0.0);
      const double na = static_cast<double>(f.angles.size());
      for (const auto& row : jac.angle)
        for (std::size_t k = 0; k < dof; ++k) mean_row[k] += row[k] / na;
      push_row(mean_row);
      push_row(jac.angle[p.argmin]);
      push_row(jac.angle[p.argmax]);
    }
  }

  const double mean_d = std::accumulate(f.distances.begin(), f.distances.end(), 0.0) / nb;
  std::vector<double> mean_d_row;
  if (with_jacobian) {
    mean_d_row.assign(dof, 0.0);
    for (int b = 0; b < nb; ++b)
      for (std::size_t k = 0; k < dof; ++k) mean_d_row[k] += jac.distance[b][k] / nb;
  }
  const double w = detail::rbf_width();
  for (int k = 0; k < kRbfCount; ++k) {
    const double z = (mean_d - detail::rbf_center(k)) / w;
    const double g = std::exp(-z * z);
    out.values.push_back(g);
    if (with_jacobian) push_row(scaled_row(mean_d_row, -2.0 * z / w * g));
  }
  return out;
}

inline std::vector<double> invariant_feature_vector(std::span<const Vec3> positions, Molecule m) {
  return invariant_features(positions, m, false).values;
}

inline std::vector<double> invariant_feature_vector(const GeometricFeatures& f) {
  std::vector<Vec3> positions{{0.0, 0.0, 0.0}};
  positions.insert(positions.end(), f.bond_vectors.begin(), f.bond_vectors.end());
  return invariant_features(positions, f.molecule, false).values;
}

}  // namespace gqml::features
