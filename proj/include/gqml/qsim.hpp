// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense statevector simulator.
//
// Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of the
// amplitude index: qubit q is addressed by bit (n - 1 - q). With this
// convention |01> (qubit 0 in |0>, qubit 1 in |1>) is amplitude index 1.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gqml/errors.hpp"
#include "gqml/vec3.hpp"

namespace gqml::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 8;

class Statevector {
 public:
  // |0...0> on n qubits.
  explicit Statevector(int n_qubits) : n_qubits_(checked(n_qubits)) {
    amplitudes_.assign(std::size_t{1} << n_qubits_, Complex{0.0, 0.0});
    amplitudes_[0] = 1.0;
  }

  static Statevector basis(int n_qubits, std::size_t index) {
    Statevector s(n_qubits);
    if (index >= s.dim()) throw StructuralError("basis index out of range");
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
  }

  // Length must be 2^n for 1 <= n <= 8 and the vector must be normalised.
  static Statevector from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t len = amplitudes.size();
    if (len < 2 || !std::has_single_bit(len))
      throw StructuralError("amplitude count must be a power of two >= 2");
    Statevector s(std::countr_zero(len));
    s.amplitudes_ = std::move(amplitudes);
    if (std::abs(s.norm_squared() - 1.0) > 1e-10)
      throw StructuralError("amplitudes are not normalised");
    return s;
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<Complex> data() { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amplitudes_) acc += std::norm(a);
    return acc;
  }

  std::size_t mask(int qubit) const {
    return std::size_t{1} << (n_qubits_ - 1 - qubit);
  }

 private:
  static int checked(int n) {
    if (n < 1 || n > kMaxQubits)
      throw StructuralError("qubit count must be in [1, 8]");
    return n;
  }

  int n_qubits_;
  std::vector<Complex> amplitudes_;
};

// <a|b>
inline Complex inner(const Statevector& a, const Statevector& b) {
  if (a.dim() != b.dim()) throw StructuralError("state dimension mismatch");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline double fidelity(const Statevector& a, const Statevector& b) {
  return std::abs(inner(a, b));
}

// ---------------------------------------------------------------------------
// Gates

enum class GateKind { RX, RY, RZ, CNOT, PauliVecRot, HeisenbergCoupler, ZZRot };

inline const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::PauliVecRot: return "PauliVecRot";
    case GateKind::HeisenbergCoupler: return "HeisenbergCoupler";
    case GateKind::ZZRot: return "ZZRot";
  }
  return "?";
}

// One gate. `value` is the gate's scalar parameter and the target of circuit
// parameter slots:
//   RX/RY/RZ       exp(-i value P / 2)
//   ZZRot          exp(-i value Z(q0) Z(q1))
//   PauliVecRot    exp(-i/2 value (axis . sigma))
//   Heisenberg     exp(-i value H),  H = -coupling (XX + YY + ZZ)
struct GateOp {
  GateKind kind = GateKind::RX;
  int q0 = 0;
  int q1 = -1;
  double value = 0.0;
  Vec3 axis{0.0, 0.0, 0.0};
  double coupling = 1.0;

  static GateOp rx(int q, double angle) { return {GateKind::RX, q, -1, angle}; }
  static GateOp ry(int q, double angle) { return {GateKind::RY, q, -1, angle}; }
  static GateOp rz(int q, double angle) { return {GateKind::RZ, q, -1, angle}; }
  static GateOp cnot(int control, int target) {
    return {GateKind::CNOT, control, target, 0.0};
  }
  static GateOp zz(int i, int j, double angle) {
    return {GateKind::ZZRot, i, j, angle};
  }
  static GateOp pauli_vec_rot(int q, const Vec3& x, double scale = 1.0) {
    return {GateKind::PauliVecRot, q, -1, scale, x};
  }
  static GateOp heisenberg(int i, int j, double coupling, double time) {
    return {GateKind::HeisenbergCoupler, i, j, time, {0.0, 0.0, 0.0}, coupling};
  }

  bool two_qubit() const {
    return kind == GateKind::CNOT || kind == GateKind::ZZRot ||
           kind == GateKind::HeisenbergCoupler;
  }
};

inline GateOp adjoint(GateOp op) {
  if (op.kind != GateKind::CNOT) op.value = -op.value;
  return op;
}

inline void validate(const GateOp& op, int n_qubits) {
  auto in_range = [&](int q) { return q >= 0 && q < n_qubits; };
  if (!in_range(op.q0))
    throw StructuralError(std::string(to_string(op.kind)) +
                          ": qubit index out of range");
  if (op.two_qubit()) {
    if (!in_range(op.q1))
      throw StructuralError(std::string(to_string(op.kind)) +
                            ": qubit index out of range");
    if (op.q0 == op.q1)
      throw StructuralError(std::string(to_string(op.kind)) +
                            ": qubits must differ");
  }
}

namespace detail {

using Mat2 = std::array<Complex, 4>;  // row-major

inline Mat2 single_qubit_matrix(const GateOp& op) {
  using namespace std::complex_literals;
  switch (op.kind) {
    case GateKind::RX: {
      const double c = std::cos(op.value / 2), s = std::sin(op.value / 2);
      return {c, -1i * s, -1i * s, c};
    }
    case GateKind::RY: {
      const double c = std::cos(op.value / 2), s = std::sin(op.value / 2);
      return {c, -s, s, c};
    }
    case GateKind::RZ:
      return {std::polar(1.0, -op.value / 2), 0.0, 0.0,
              std::polar(1.0, op.value / 2)};
    case GateKind::PauliVecRot: {
      const Vec3 x = op.value * op.axis;
      const double theta = norm(x);
      const double c = std::cos(theta / 2);
      // sin(theta/2)/theta, finite at 0
      const double k = theta < 1e-8 ? 0.5 : std::sin(theta / 2) / theta;
      const double nx = k * x[0], ny = k * x[1], nz = k * x[2];
      return {Complex{c, -nz}, Complex{-ny, -nx}, Complex{ny, -nx},
              Complex{c, nz}};
    }
    default:
      throw StructuralError("not a single-qubit rotation");
  }
}

inline void apply_matrix(std::span<Complex> amp, std::size_t mask,
                         const Mat2& m) {
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (i & mask) continue;
    const Complex a0 = amp[i], a1 = amp[i | mask];
    amp[i] = m[0] * a0 + m[1] * a1;
    amp[i | mask] = m[2] * a0 + m[3] * a1;
  }
}

// amp <- a * amp + b * SWAP(i,j) amp
inline void apply_swap_mix(std::span<Complex> amp, std::size_t mi,
                           std::size_t mj, Complex a, Complex b) {
  const Complex same = a + b;
  for (std::size_t idx = 0; idx < amp.size(); ++idx) {
    const bool bi = idx & mi, bj = idx & mj;
    if (bi == bj) {
      amp[idx] *= same;
    } else if (bi) {
      const std::size_t partner = idx ^ mi ^ mj;
      const Complex x = amp[idx], y = amp[partner];
      amp[idx] = a * x + b * y;
      amp[partner] = a * y + b * x;
    }
  }
}

inline void apply_kernel(std::span<Complex> amp, int n, const GateOp& op) {
  auto mask = [n](int q) { return std::size_t{1} << (n - 1 - q); };
  switch (op.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::PauliVecRot:
      apply_matrix(amp, mask(op.q0), single_qubit_matrix(op));
      return;
    case GateKind::CNOT: {
      const std::size_t mc = mask(op.q0), mt = mask(op.q1);
      for (std::size_t i = 0; i < amp.size(); ++i)
        if ((i & mc) && !(i & mt)) std::swap(amp[i], amp[i | mt]);
      return;
    }
    case GateKind::ZZRot: {
      const std::size_t mi = mask(op.q0), mj = mask(op.q1);
      const Complex even = std::polar(1.0, -op.value);
      const Complex odd = std::polar(1.0, op.value);
      for (std::size_t i = 0; i < amp.size(); ++i)
        amp[i] *= (static_cast<bool>(i & mi) == static_cast<bool>(i & mj))
                      ? even
                      : odd;
      return;
    }
    case GateKind::HeisenbergCoupler: {
      // exp(-i t H) = exp(i t J O) with O = XX+YY+ZZ = 2 SWAP - I, whose
      // spectrum is +1 on the triplet and -3 on the singlet.
      const double phi = op.value * op.coupling;
      const Complex triplet = std::polar(1.0, phi);
      const Complex singlet = std::polar(1.0, -3.0 * phi);
      apply_swap_mix(amp, mask(op.q0), mask(op.q1), 0.5 * (triplet + singlet),
                     0.5 * (triplet - singlet));
      return;
    }
  }
}

// amp <- G amp where op = exp(-i value G).
inline void apply_generator(std::span<Complex> amp, int n, const GateOp& op) {
  using namespace std::complex_literals;
  auto mask = [n](int q) { return std::size_t{1} << (n - 1 - q); };
  switch (op.kind) {
    case GateKind::RX:
      apply_matrix(amp, mask(op.q0), {0.0, 0.5, 0.5, 0.0});
      return;
    case GateKind::RY:
      apply_matrix(amp, mask(op.q0), {0.0, -0.5i, 0.5i, 0.0});
      return;
    case GateKind::RZ:
      apply_matrix(amp, mask(op.q0), {0.5, 0.0, 0.0, -0.5});
      return;
    case GateKind::PauliVecRot: {
      const Vec3& x = op.axis;
      apply_matrix(amp, mask(op.q0),
                   {0.5 * x[2], 0.5 * Complex{x[0], -x[1]},
                    0.5 * Complex{x[0], x[1]}, -0.5 * x[2]});
      return;
    }
    case GateKind::ZZRot: {
      const std::size_t mi = mask(op.q0), mj = mask(op.q1);
      for (std::size_t i = 0; i < amp.size(); ++i)
        if (static_cast<bool>(i & mi) != static_cast<bool>(i & mj))
          amp[i] = -amp[i];
      return;
    }
    case GateKind::HeisenbergCoupler:
      // H = -J (2 SWAP - I)
      apply_swap_mix(amp, mask(op.q0), mask(op.q1), op.coupling,
                     -2.0 * op.coupling);
      return;
    case GateKind::CNOT:
      throw StructuralError("CNOT has no continuous parameter");
  }
}

}  // namespace detail

inline void apply(Statevector& state, const GateOp& op) {
  validate(op, state.n_qubits());
  detail::apply_kernel(state.data(), state.n_qubits(), op);
}

inline Statevector apply_gate(Statevector state, const GateOp& op) {
  apply(state, op);
  return state;
}

// ---------------------------------------------------------------------------
// Observables

struct PauliTerm {
  double coefficient = 1.0;
  std::string paulis;  // one of I/X/Y/Z per qubit, qubit 0 first
};

class PauliObservable {
 public:
  explicit PauliObservable(int n_qubits) : n_qubits_(n_qubits) {}

  int n_qubits() const { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }

  PauliObservable& add(double coefficient, std::string paulis) {
    if (static_cast<int>(paulis.size()) != n_qubits_)
      throw StructuralError("Pauli string length does not match qubit count");
    for (char c : paulis)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw StructuralError("invalid Pauli label");
    terms_.push_back({coefficient, std::move(paulis)});
    return *this;
  }

  // Sparse form: e.g. add(1.0, {{0, 'Z'}, {2, 'Z'}}).
  PauliObservable& add(double coefficient,
                       std::initializer_list<std::pair<int, char>> ops) {
    std::string s(n_qubits_, 'I');
    for (auto [q, c] : ops) {
      if (q < 0 || q >= n_qubits_)
        throw StructuralError("Pauli qubit index out of range");
      s[q] = c;
    }
    return add(coefficient, std::move(s));
  }

  PauliObservable& operator+=(const PauliObservable& other) {
    if (other.n_qubits_ != n_qubits_)
      throw StructuralError("observable qubit count mismatch");
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    return *this;
  }

  PauliObservable scaled(double s) const {
    PauliObservable out = *this;
    for (auto& t : out.terms_) t.coefficient *= s;
    return out;
  }

 private:
  int n_qubits_;
  std::vector<PauliTerm> terms_;
};

namespace detail {

struct PauliMasks {
  std::size_t flip = 0;   // X or Y
  std::size_t phase = 0;  // Y or Z
  int n_y = 0;
};

inline PauliMasks masks_of(const std::string& paulis) {
  const int n = static_cast<int>(paulis.size());
  PauliMasks m;
  for (int q = 0; q < n; ++q) {
    const std::size_t bit = std::size_t{1} << (n - 1 - q);
    switch (paulis[q]) {
      case 'X': m.flip |= bit; break;
      case 'Y': m.flip |= bit; m.phase |= bit; ++m.n_y; break;
      case 'Z': m.phase |= bit; break;
      default: break;
    }
  }
  return m;
}

// i^k
inline Complex i_pow(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// out += c * P amp
inline void accumulate_pauli(std::span<const Complex> amp, double c,
                             const std::string& paulis,
                             std::span<Complex> out) {
  const PauliMasks m = masks_of(paulis);
  const Complex base = c * i_pow(m.n_y);
  for (std::size_t j = 0; j < amp.size(); ++j) {
    const double sign = (std::popcount(j & m.phase) & 1) ? -1.0 : 1.0;
    out[j ^ m.flip] += sign * base * amp[j];
  }
}

inline double pauli_expectation(std::span<const Complex> amp,
                                const std::string& paulis) {
  const PauliMasks m = masks_of(paulis);
  const Complex base = i_pow(m.n_y);
  Complex acc{0.0, 0.0};
  for (std::size_t j = 0; j < amp.size(); ++j) {
    const double sign = (std::popcount(j & m.phase) & 1) ? -1.0 : 1.0;
    acc += std::conj(amp[j ^ m.flip]) * sign * amp[j];
  }
  return (base * acc).real();
}

}  // namespace detail

inline double expectation(const Statevector& state, const PauliObservable& obs) {
  if (obs.n_qubits() != state.n_qubits())
    throw StructuralError("observable qubit count does not match state");
  double acc = 0.0;
  for (const auto& t : obs.terms())
    acc += t.coefficient * detail::pauli_expectation(state.amplitudes(), t.paulis);
  return acc;
}

// O|psi>, not normalised.
inline std::vector<Complex> apply_observable(const Statevector& state,
                                             const PauliObservable& obs) {
  if (obs.n_qubits() != state.n_qubits())
    throw StructuralError("observable qubit count does not match state");
  std::vector<Complex> out(state.dim(), Complex{0.0, 0.0});
  for (const auto& t : obs.terms())
    detail::accumulate_pauli(state.amplitudes(), t.coefficient, t.paulis, out);
  return out;
}

// ---------------------------------------------------------------------------
// Circuits

// Trainable parameter `param` contributes coefficient * theta[param] to the
// scalar value of op `op`. An op's bound value is its base value plus the sum
// over all slots targeting it.
struct ParamSlot {
  std::size_t param = 0;
  std::size_t op = 0;
  double coefficient = 1.0;
};

class Circuit {
 public:
  explicit Circuit(int n_qubits, std::size_t n_params = 0)
      : n_qubits_(n_qubits), n_params_(n_params) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
      throw StructuralError("qubit count must be in [1, 8]");
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t n_params() const { return n_params_; }
  const std::vector<GateOp>& ops() const { return ops_; }
  const std::vector<ParamSlot>& slots() const { return slots_; }

  std::size_t add(const GateOp& op) {
    validate(op, n_qubits_);
    ops_.push_back(op);
    return ops_.size() - 1;
  }

  std::size_t add(const GateOp& op, std::size_t param,
                  double coefficient = 1.0) {
    const std::size_t pos = add(op);
    bind_slot(param, pos, coefficient);
    return pos;
  }

  void bind_slot(std::size_t param, std::size_t op, double coefficient = 1.0) {
    if (param >= n_params_) throw StructuralError("parameter index out of range");
    if (op >= ops_.size()) throw StructuralError("op index out of range");
    if (ops_[op].kind == GateKind::CNOT)
      throw StructuralError("CNOT has no parameter field");
    slots_.push_back({param, op, coefficient});
  }

  std::vector<GateOp> bind(std::span<const double> params) const {
    if (params.size() != n_params_)
      throw StructuralError("parameter vector length " +
                            std::to_string(params.size()) +
                            " does not match circuit slot count " +
                            std::to_string(n_params_));
    std::vector<GateOp> out = ops_;
    for (const auto& s : slots_)
      out[s.op].value += s.coefficient * params[s.param];
    return out;
  }

 private:
  int n_qubits_;
  std::size_t n_params_;
  std::vector<GateOp> ops_;
  std::vector<ParamSlot> slots_;
};

inline void apply_all(Statevector& state, std::span<const GateOp> ops) {
  for (const auto& op : ops) detail::apply_kernel(state.data(), state.n_qubits(), op);
}

inline Statevector run(const Circuit& circuit, std::span<const double> params,
                       Statevector initial) {
  if (initial.n_qubits() != circuit.n_qubits())
    throw StructuralError("initial state qubit count does not match circuit");
  const auto ops = circuit.bind(params);
  apply_all(initial, ops);
  return initial;
}

// ---------------------------------------------------------------------------
// Gradients

inline std::vector<double> grad_fd(const std::function<double(std::span<const double>)>& f,
                                   std::span<const double> point, double h) {
  if (!(h > 0.0)) throw StructuralError("finite-difference step must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x0 = x[k];
    x[k] = x0 + h;
    const double fp = f(x);
    x[k] = x0 - h;
    const double fm = f(x);
    x[k] = x0;
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Exact gradient by the two-term shift rule. Only single-Pauli-generator gates
// qualify: RX/RY/RZ (eigenvalues +-1/2, shift pi/2) and ZZRot (eigenvalues +-1,
// shift pi/4).
inline std::vector<double> grad_param_shift(const Circuit& circuit,
                                            std::span<const double> params,
                                            const PauliObservable& obs,
                                            const Statevector& initial) {
  for (const auto& s : circuit.slots()) {
    const GateKind k = circuit.ops()[s.op].kind;
    if (k == GateKind::HeisenbergCoupler || k == GateKind::PauliVecRot)
      throw UnsupportedGeneratorError(
          std::string("parameter shift is not defined for ") + to_string(k) +
          "; use grad_fd");
  }
  if (initial.n_qubits() != circuit.n_qubits())
    throw StructuralError("initial state qubit count does not match circuit");
  const auto bound = circuit.bind(params);
  auto energy = [&](const std::vector<GateOp>& ops) {
    Statevector s = initial;
    apply_all(s, ops);
    return expectation(s, obs);
  };
  std::vector<double> grad(circuit.n_params(), 0.0);
  for (const auto& s : circuit.slots()) {
    const double r = circuit.ops()[s.op].kind == GateKind::ZZRot ? 1.0 : 0.5;
    const double shift = std::numbers::pi / (4.0 * r);
    auto ops = bound;
    ops[s.op].value = bound[s.op].value + shift;
    const double ep = energy(ops);
    ops[s.op].value = bound[s.op].value - shift;
    const double em = energy(ops);
    grad[s.param] += s.coefficient * r * (ep - em);
  }
  return grad;
}

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;  // per circuit parameter
  std::optional<Statevector> final_state;
};

// Reverse-mode (adjoint) differentiation: one forward sweep plus one backward
// sweep carrying psi_k and lambda_k = U_{k+1}^dag ... U_N^dag O psi_N.
// dE/dvalue_k = 2 Im <lambda_k | G_k | psi_k>. Exact for every gate kind.
inline ValueAndGradient grad_adjoint(const Circuit& circuit,
                                     std::span<const double> params,
                                     const PauliObservable& obs,
                                     const Statevector& initial) {
  if (initial.n_qubits() != circuit.n_qubits())
    throw StructuralError("initial state qubit count does not match circuit");
  const int n = circuit.n_qubits();
  const auto ops = circuit.bind(params);

  Statevector psi = initial;
  apply_all(psi, ops);
  std::vector<Complex> lambda = apply_observable(psi, obs);

  ValueAndGradient out;
  {
    Complex e{0.0, 0.0};
    for (std::size_t i = 0; i < psi.dim(); ++i) e += std::conj(psi[i]) * lambda[i];
    out.value = e.real();
  }
  out.final_state = psi;

  std::vector<bool> trainable(ops.size(), false);
  for (const auto& s : circuit.slots()) trainable[s.op] = true;

  std::vector<double> op_grad(ops.size(), 0.0);
  std::vector<Complex> scratch(psi.dim());
  auto psi_amp = psi.data();
  for (std::size_t k = ops.size(); k-- > 0;) {
    if (trainable[k]) {
      std::copy(psi_amp.begin(), psi_amp.end(), scratch.begin());
      detail::apply_generator(scratch, n, ops[k]);
      Complex acc{0.0, 0.0};
      for (std::size_t i = 0; i < scratch.size(); ++i)
        acc += std::conj(lambda[i]) * scratch[i];
      op_grad[k] = 2.0 * acc.imag();
    }
    if (k == 0) break;
    const GateOp inv = adjoint(ops[k]);
    detail::apply_kernel(psi_amp, n, inv);
    detail::apply_kernel(lambda, n, inv);
  }

  out.gradient.assign(circuit.n_params(), 0.0);
  for (const auto& s : circuit.slots())
    out.gradient[s.param] += s.coefficient * op_grad[s.op];
  return out;
}

// Dense unitary of an op sequence, column j = U|j>. Intended for checks.
inline std::vector<std::vector<Complex>> unitary_matrix(
    int n_qubits, std::span<const GateOp> ops) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<std::vector<Complex>> u(dim, std::vector<Complex>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    Statevector s = Statevector::basis(n_qubits, j);
    for (const auto& op : ops) apply(s, op);
    for (std::size_t i = 0; i < dim; ++i) u[i][j] = s[i];
  }
  return u;
}

}  // namespace gqml::qsim
