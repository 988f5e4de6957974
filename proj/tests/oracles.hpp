// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense linear-algebra oracles for the tests. Everything here is built
// directly from matrix definitions (Kronecker products, Taylor-series
// exponentials) and shares no code with the simulator kernels.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using Mat = std::vector<std::vector<C>>;
using Vec = std::vector<C>;

inline Mat zeros(std::size_t n) { return Mat(n, std::vector<C>(n, 0.0)); }

inline Mat eye(std::size_t n) {
  Mat m = zeros(n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat pauli(char p) {
  using namespace std::complex_literals;
  switch (p) {
    case 'X': return {{0.0, 1.0}, {1.0, 0.0}};
    case 'Y': return {{0.0, -1i}, {1i, 0.0}};
    case 'Z': return {{1.0, 0.0}, {0.0, -1.0}};
    default: return eye(2);
  }
}

inline Mat kron(const Mat& a, const Mat& b) {
  const std::size_t n = a.size(), m = b.size();
  Mat c = zeros(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) c[i * m + k][j * m + l] = a[i][j] * b[k][l];
  return c;
}

inline Mat mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat add(const Mat& a, const Mat& b, C s = 1.0) {
  Mat c = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) c[i][j] += s * b[i][j];
  return c;
}

inline Mat scale(const Mat& a, C s) {
  Mat c = a;
  for (auto& row : c)
    for (auto& v : row) v *= s;
  return c;
}

inline Vec apply(const Mat& a, const Vec& v) {
  Vec out(v.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[i] += a[i][j] * v[j];
  return out;
}

// Pauli string, qubit 0 leftmost factor.
inline Mat pauli_string(const std::string& s) {
  Mat m = pauli(s[0]);
  for (std::size_t q = 1; q < s.size(); ++q) m = kron(m, pauli(s[q]));
  return m;
}

// One-qubit matrix on qubit q of n.
inline Mat embed1(const Mat& u, int q, int n) {
  Mat m = q == 0 ? u : eye(2);
  for (int k = 1; k < n; ++k) m = kron(m, k == q ? u : eye(2));
  return m;
}

// exp(A) by scaling and squaring with a 30-term Taylor series.
inline Mat expm(const Mat& a) {
  double norm = 0.0;
  for (const auto& row : a)
    for (const auto& v : row) norm = std::max(norm, std::abs(v));
  int squarings = 0;
  while (norm * a.size() > 0.5) norm /= 2, ++squarings;
  const Mat s = scale(a, std::pow(0.5, squarings));
  Mat result = eye(a.size()), term = eye(a.size());
  for (int k = 1; k <= 30; ++k) {
    term = scale(mul(term, s), 1.0 / k);
    result = add(result, term);
  }
  for (int i = 0; i < squarings; ++i) result = mul(result, result);
  return result;
}

// exp(-i t G)
inline Mat exp_i(const Mat& g, double t) { return expm(scale(g, C{0.0, -t})); }

inline double max_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline double max_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Vec random_state(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(dim);
  double nn = 0.0;
  for (auto& a : v) a = {n(rng), n(rng)}, nn += std::norm(a);
  for (auto& a : v) a /= std::sqrt(nn);
  return v;
}

inline double expectation(const Vec& psi, const Mat& o) {
  const Vec op = apply(o, psi);
  C acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) acc += std::conj(psi[i]) * op[i];
  return acc.real();
}

}  // namespace oracle
