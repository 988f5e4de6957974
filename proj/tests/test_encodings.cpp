// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gqml/encodings.hpp"
#include "oracles.hpp"

using namespace gqml;
using namespace gqml::encodings;
using qsim::Complex;
using std::numbers::pi;

namespace {

oracle::Vec as_vec(const Statevector& s) { return {s.amplitudes().begin(), s.amplitudes().end()}; }

oracle::Mat dense(int n, const std::vector<GateOp>& ops) { return qsim::unitary_matrix(n, ops); }

EulerAngles random_euler(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-pi, pi);
  return {a(rng), a(rng), a(rng)};
}

Vec3 random_vec(std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// Dense single-qubit exp(-i/2 x.sigma) built from Pauli matrices.
oracle::Mat dense_embed(const Vec3& x) {
  oracle::Mat g = oracle::zeros(2);
  g = oracle::add(g, oracle::pauli('X'), x[0] / 2);
  g = oracle::add(g, oracle::pauli('Y'), x[1] / 2);
  g = oracle::add(g, oracle::pauli('Z'), x[2] / 2);
  return oracle::exp_i(g, 1.0);
}

oracle::Mat dagger(const oracle::Mat& a) {
  oracle::Mat out = oracle::zeros(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = std::conj(a[j][i]);
  return out;
}

// Random graph on 4 nodes with node 0 fixed and {1,2,3} permutable.
GraphSpec random_graph(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  GraphSpec g;
  g.n_nodes = 4;
  for (int l = 0; l < 4; ++l) {
    g.node_features.push_back({u(rng)});
    g.node_classes.push_back(l == 0 ? NodeClass::Center : NodeClass::Ligand);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      g.edges.push_back({i, j, u(rng), i == 0 ? EdgeClass::Radial : EdgeClass::Angular});
  g.permutable = {1, 2, 3};
  return g;
}

}  // namespace

TEST(Encodings, EmbedAlongZIsRz) {
  const auto u = dense(1, {so3_embed({0.0, 0.0, pi})});
  EXPECT_LE(oracle::max_diff(u, dense(1, {GateOp::rz(0, pi)})), 1e-15);
  EXPECT_NEAR(std::abs(u[0][0] - std::polar(1.0, -pi / 2)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u[1][1] - std::polar(1.0, pi / 2)), 0.0, 1e-15);
}

TEST(Encodings, EmbedOfZeroIsIdentity) {
  EXPECT_LE(oracle::max_diff(dense(1, {so3_embed({0.0, 0.0, 0.0})}), oracle::eye(2)), 1e-15);
  EXPECT_LE(oracle::max_diff(dense(1, {so3_embed({1e-12, 0.0, 0.0})}), oracle::eye(2)), 1e-12);
}

TEST(Encodings, EmbedMatchesDenseExponential) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x = random_vec(rng);
    EXPECT_LE(oracle::max_diff(dense(1, {so3_embed(x)}), dense_embed(x)), 1e-12);
  }
}

TEST(Encodings, EmbeddingIsSo3Equivariant) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_euler(rng);
    const Vec3 x = random_vec(rng);
    const auto lhs = dense_embed(euler_rotate(a, x));
    const auto v = dense(1, so3_conjugator(a));
    const auto rhs = oracle::mul(oracle::mul(v, dense_embed(x)), dagger(v));
    ASSERT_LE(oracle::max_diff(lhs, rhs), 1e-10);
  }
}

TEST(Encodings, NegatedAnglesConjugatePassiveRotation) {
  // The negated-angle gate sequence conjugates the embedding of
  // r(-psi,-theta,-phi) x.
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_euler(rng);
    const Vec3 x = random_vec(rng);
    const auto v = dense(1, euler_gates({-a.psi, -a.theta, -a.phi}));
    const Vec3 rx = rotation_matrix({-a.psi, -a.theta, -a.phi}) * x;
    const auto rhs = oracle::mul(oracle::mul(v, dense_embed(x)), dagger(v));
    ASSERT_LE(oracle::max_diff(dense_embed(rx), rhs), 1e-10);
  }
}

TEST(Encodings, EulerRotateExamples) {
  const Vec3 x{0.3, -1.2, 2.0};
  const Vec3 same = euler_rotate({0, 0, 0}, x);
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(same[c], x[c]);
  const Vec3 y = euler_rotate({0.0, 0.0, pi / 2}, {1.0, 0.0, 0.0});
  EXPECT_NEAR(y[0], 0.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0, 1e-15);
  EXPECT_NEAR(y[2], 0.0, 1e-15);
}

TEST(Encodings, EulerRotatePreservesNormAndInverts) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_euler(rng);
    const Vec3 x = random_vec(rng);
    const Vec3 y = euler_rotate(a, x);
    EXPECT_NEAR(norm(y), norm(x), 1e-12);
    const Vec3 back = euler_rotate({-a.phi, -a.theta, -a.psi}, y);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(back[c], x[c], 1e-12);
  }
}

TEST(Encodings, SingletAmplitudes) {
  const auto s = singlet_init(1);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_EQ(s.n_qubits(), 2);
  EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
  EXPECT_NEAR(s[1].real(), r, 1e-15);
  EXPECT_NEAR(s[2].real(), -r, 1e-15);
  EXPECT_NEAR(std::abs(s[3]), 0.0, 1e-15);
  EXPECT_THROW(singlet_init(0), StructuralError);
}

TEST(Encodings, MultiPairSingletIsTensorProduct) {
  const auto one = as_vec(singlet_init(1));
  oracle::Vec want = one;
  for (int pairs = 2; pairs <= 3; ++pairs) {
    oracle::Vec next;
    for (auto a : want)
      for (auto b : one) next.push_back(a * b);
    want = next;
    EXPECT_LE(oracle::max_diff(as_vec(singlet_init(pairs)), want), 1e-15);
  }
}

TEST(Encodings, HeisenbergObservableExamples) {
  const auto o = heisenberg_observable(2, 0, 1);
  EXPECT_NEAR(qsim::expectation(Statevector(2), o), 1.0, 1e-15);
  const auto dense_o = oracle::add(oracle::add(oracle::pauli_string("XX"), oracle::pauli_string("YY")),
                                   oracle::pauli_string("ZZ"));
  const double want = oracle::expectation(as_vec(singlet_init(1)), dense_o);
  EXPECT_NEAR(want, -3.0, 1e-12);
  EXPECT_NEAR(qsim::expectation(singlet_init(1), o), want, 1e-12);
  EXPECT_THROW(heisenberg_observable(2, 1, 1), StructuralError);
}

TEST(Encodings, SingletInvariantUnderIdenticalRotations) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_euler(rng);
    auto s = singlet_init(2);
    const auto psi = s;
    for (int q : {2, 3})
      for (const auto& op : euler_gates(a, q)) qsim::apply(s, op);
    EXPECT_NEAR(qsim::fidelity(s, psi), 1.0, 1e-12);
  }
}

TEST(Encodings, HeisenbergExpectationInvariantUnderGlobalRotation) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_euler(rng);
    const auto psi = Statevector::from_amplitudes(oracle::random_state(8, rng));
    auto rotated = psi;
    for (int q = 0; q < 3; ++q)
      for (const auto& op : euler_gates(a, q)) qsim::apply(rotated, op);
    auto o = heisenberg_observable(3, 0, 1);
    o += heisenberg_observable(3, 1, 2).scaled(-0.7);
    EXPECT_NEAR(qsim::expectation(rotated, o), qsim::expectation(psi, o), 1e-10);
  }
}

TEST(Encodings, UniformSuperposition) {
  const auto s1 = uniform_superposition(1);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(s1[i].real(), 1 / std::sqrt(2.0), 1e-15);
  const auto s2 = uniform_superposition(2);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s2[i].real(), 0.5, 1e-15);
  const auto s3 = uniform_superposition(3);
  for (const auto& p : permutations_of(3, {0, 1, 2}))
    EXPECT_LE(oracle::max_diff(as_vec(permute_state(s3, p)), as_vec(s3)), 1e-15);
}

TEST(Encodings, ZeroAnglesLayerIsIdentity) {
  std::mt19937_64 rng(7);
  const auto g = random_graph(rng);
  const auto psi = Statevector::from_amplitudes(oracle::random_state(16, rng));
  auto s = psi;
  for (const auto& op : graph_layer(g, 0.0, 0.0)) qsim::apply(s, op);
  EXPECT_LE(oracle::max_diff(as_vec(s), as_vec(psi)), 1e-15);
}

TEST(Encodings, SingleEdgeLayerMatchesDense) {
  GraphSpec g;
  g.n_nodes = 2;
  g.node_features = {{1.0}, {1.0}};
  g.node_classes = {NodeClass::Ligand, NodeClass::Ligand};
  g.edges = {{0, 1, 1.0, EdgeClass::Angular}};
  auto s = uniform_superposition(2);
  for (const auto& op : graph_layer(g, 0.0, pi / 4)) qsim::apply(s, op);
  const auto plus = as_vec(uniform_superposition(2));
  const auto want = oracle::apply(oracle::exp_i(oracle::pauli_string("ZZ"), pi / 4), plus);
  EXPECT_LE(oracle::max_diff(as_vec(s), want), 1e-12);
  EXPECT_NEAR(oracle::expectation(want, oracle::pauli_string("ZZ")), 0.0, 1e-12);
  EXPECT_NEAR(oracle::expectation(want, oracle::pauli_string("XI")), std::cos(pi / 2), 1e-12);
  PauliObservable x0(2);
  x0.add(1.0, "XI");
  EXPECT_NEAR(qsim::expectation(s, x0), 0.0, 1e-12);
}

TEST(Encodings, EdgeOrderDoesNotChangeState) {
  std::mt19937_64 rng(8);
  const auto g = random_graph(rng);
  auto rev = g;
  std::reverse(rev.edges.begin(), rev.edges.end());
  auto a = uniform_superposition(4), b = a;
  for (const auto& op : graph_layer(g, 0.8, 1.3)) qsim::apply(a, op);
  for (const auto& op : graph_layer(rev, 0.8, 1.3)) qsim::apply(b, op);
  EXPECT_LE(oracle::max_diff(as_vec(a), as_vec(b)), 1e-12);
}

TEST(Encodings, GraphValidationRejectsMalformedSpecs) {
  std::mt19937_64 rng(9);
  auto g = random_graph(rng);
  EXPECT_NO_THROW(validate(g));
  auto dup = g;
  dup.edges.push_back(dup.edges.front());
  EXPECT_THROW(validate(dup), StructuralError);
  auto bad = g;
  bad.edges.front() = {2, 1, 0.1, EdgeClass::Angular};
  EXPECT_THROW(validate(bad), StructuralError);
  auto nan = g;
  nan.edges.front().weight = std::nan("");
  EXPECT_THROW(validate(nan), StructuralError);
}

TEST(Encodings, IdentityPermutationChangesNothing) {
  std::mt19937_64 rng(10);
  const auto g = random_graph(rng);
  const auto id = QubitPermutation::identity(4);
  const auto pg = permute_graph(g, id);
  EXPECT_EQ(pg.node_features, g.node_features);
  ASSERT_EQ(pg.edges.size(), g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) EXPECT_EQ(pg.edges[e].weight, g.edges[e].weight);
  const auto psi = Statevector::from_amplitudes(oracle::random_state(16, rng));
  EXPECT_EQ(as_vec(permute_state(psi, id)), as_vec(psi));
}

TEST(Encodings, NonBijectionIsStructuralError) {
  const QubitPermutation p{{0, 1, 1}};
  EXPECT_THROW(permute_state(Statevector(3), p), StructuralError);
  EXPECT_THROW(permute_state(Statevector(3), QubitPermutation{{0, 1}}), StructuralError);
}

TEST(Encodings, PermutationRoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  const auto psi = Statevector::from_amplitudes(oracle::random_state(16, rng));
  for (const auto& p : permutations_of(4, {0, 1, 2, 3})) {
    const auto back = permute_state(permute_state(psi, p), p.inverse());
    ASSERT_LE(oracle::max_diff(as_vec(back), as_vec(psi)), 1e-12);
  }
  EXPECT_EQ(permutations_of(4, {0, 1, 2, 3}).size(), 24u);
}

TEST(Encodings, PermuteStateMatchesPermutedPauliExpectations) {
  // <P_sigma psi| sigma(P) |P_sigma psi> = <psi|P|psi> for Pauli strings.
  std::mt19937_64 rng(12);
  const auto psi = Statevector::from_amplitudes(oracle::random_state(8, rng));
  PauliObservable o(3);
  o.add(1.0, "XZI").add(0.3, "IYZ");
  for (const auto& p : permutations_of(3, {0, 1, 2}))
    EXPECT_NEAR(qsim::expectation(permute_state(psi, p), permute_observable(o, p)),
                qsim::expectation(psi, o), 1e-12);
}

TEST(Encodings, GraphEncodingIsPermutationEquivariant) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_graph(rng);
    const std::vector<double> betas = {u(rng), u(rng)}, gammas = {u(rng), u(rng)};
    const auto base = graph_encode(g, betas, gammas);
    const auto energy = qsim::expectation(base, graph_hamiltonian(g));
    for (const auto& p : permutations_of(4, g.permutable)) {
      const auto pg = permute_graph(g, p);
      // Encoding the relabelled graph equals relabelling the encoded state.
      const auto lhs = graph_encode(pg, betas, gammas);
      ASSERT_LE(oracle::max_diff(as_vec(lhs), as_vec(permute_state(base, p))), 1e-10);
      EXPECT_NEAR(qsim::expectation(lhs, graph_hamiltonian(pg)), energy, 1e-10);
    }
  }
}

TEST(Encodings, MultiFeatureGraphEncodingIsPermutationEquivariant) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto g = random_graph(rng);
  for (auto& row : g.node_features) row = {u(rng), u(rng), u(rng)};
  const std::vector<std::vector<double>> betas = {{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
  const std::vector<double> gammas = {u(rng), u(rng)};
  const auto base = graph_encode(g, betas, gammas);
  for (const auto& p : permutations_of(4, g.permutable)) {
    const auto lhs = graph_encode(permute_graph(g, p), betas, gammas);
    ASSERT_LE(oracle::max_diff(as_vec(lhs), as_vec(permute_state(base, p))), 1e-10);
  }
}
