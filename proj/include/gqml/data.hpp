// SPDX-License-Identifier: Apache-2.0
#pragma once

// Surrogate LiH / NH3 datasets with analytic forces, and the JSON dataset
// file format:
//   {"molecule": "LiH"|"NH3",
//    "samples": [{"positions": [[x,y,z],...], "forces": [[..],...], "energy": e}, ...]}

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqml/errors.hpp"
#include "gqml/features.hpp"
#include "gqml/io.hpp"
#include "gqml/vec3.hpp"

namespace gqml::data {

struct MoleculeSample {
  std::vector<Vec3> positions;  // Angstrom
  std::vector<Vec3> forces;     // eV/Angstrom
  double energy = 0.0;

  bool operator==(const MoleculeSample&) const = default;
};

enum class Provenance { Surrogate, Ingested };

struct Dataset {
  Molecule molecule = Molecule::LiH;
  Provenance provenance = Provenance::Surrogate;
  std::vector<MoleculeSample> samples;

  std::size_t size() const { return samples.size(); }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out{molecule, provenance, {}};
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(samples.at(i));
    return out;
  }
};

inline void validate(const Dataset& d) {
  if (d.samples.empty()) throw ValidationError("dataset is empty");
  const std::size_t atoms = static_cast<std::size_t>(atom_count(d.molecule));
  for (std::size_t r = 0; r < d.samples.size(); ++r) {
    const auto& s = d.samples[r];
    const std::string where = "record " + std::to_string(r) + ": ";
    if (s.positions.size() != atoms || s.forces.size() != atoms)
      throw ValidationError(where + "expected " + std::to_string(atoms) + " atoms for " +
                            to_string(d.molecule));
    for (std::size_t a = 0; a < atoms; ++a)
      for (int c = 0; c < 3; ++c) {
        if (!std::isfinite(s.positions[a][c]))
          throw ValidationError(where + "positions contain a non-finite value");
        if (!std::isfinite(s.forces[a][c]))
          throw ValidationError(where + "forces contain a non-finite value");
      }
    if (!std::isfinite(s.energy)) throw ValidationError(where + "energy is not a finite number");
  }
}

// ---------------------------------------------------------------------------
// Surrogate potentials

struct MorseConstants {
  double depth = 2.5;
  double exponent = 1.2;       // 1/Angstrom
  double equilibrium = 1.6;    // Angstrom
};

struct PyramidalConstants {
  double bond_stiffness = 20.0;
  double angle_stiffness = 5.0;
  double bond_length = 1.01;   // Angstrom
  double bond_angle = 1.87;    // rad
};

inline constexpr MorseConstants kLiH{};
inline constexpr PyramidalConstants kNH3{};

inline double surrogate_energy(Molecule m, std::span<const Vec3> positions) {
  const auto f = features::compute_features(positions, m);
  if (m == Molecule::LiH) {
    const double x = 1.0 - std::exp(-kLiH.exponent * (f.distances[0] - kLiH.equilibrium));
    return kLiH.depth * x * x;
  }
  double e = 0.0;
  for (double d : f.distances) e += 0.5 * kNH3.bond_stiffness * (d - kNH3.bond_length) * (d - kNH3.bond_length);
  for (double t : f.angles) e += 0.5 * kNH3.angle_stiffness * (t - kNH3.bond_angle) * (t - kNH3.bond_angle);
  return e;
}

// F = -dE/dx, exact.
inline std::vector<Vec3> surrogate_forces(Molecule m, std::span<const Vec3> positions) {
  const auto f = features::compute_features(positions, m);
  const auto jac = features::internal_jacobian(f);
  std::vector<double> grad(3 * positions.size(), 0.0);
  if (m == Molecule::LiH) {
    const double mexp = std::exp(-kLiH.exponent * (f.distances[0] - kLiH.equilibrium));
    const double dE_dd = 2.0 * kLiH.depth * kLiH.exponent * (1.0 - mexp) * mexp;
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = dE_dd * jac.distance[0][k];
  } else {
    for (int b = 0; b < f.bond_count(); ++b) {
      const double s = kNH3.bond_stiffness * (f.distances[b] - kNH3.bond_length);
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += s * jac.distance[b][k];
    }
    for (std::size_t p = 0; p < f.angles.size(); ++p) {
      const double s = kNH3.angle_stiffness * (f.angles[p] - kNH3.bond_angle);
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += s * jac.angle[p][k];
    }
  }
  std::vector<Vec3> forces(positions.size());
  for (std::size_t a = 0; a < positions.size(); ++a)
    for (int c = 0; c < 3; ++c) forces[a][c] = -grad[3 * a + c];
  return forces;
}

// ---------------------------------------------------------------------------
// Generation

// Independent stream per (seed, sample index), so generation order and
// parallel splitting never change a sample.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  return std::mt19937_64(seq);
}

// Uniform on SO(3) via a normalised Gaussian quaternion.
template <class Rng>
Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  const double s = 1.0 / std::sqrt(w * w + x * x + y * y + z * z);
  w *= s, x *= s, y *= s, z *= s;
  return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
          Vec3{2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
          Vec3{2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
}

namespace detail {

template <class Rng>
std::vector<Vec3> rigid_motion(std::vector<Vec3> local, Rng& rng) {
  const Mat3 rot = random_rotation(rng);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  const Vec3 t{shift(rng), shift(rng), shift(rng)};
  for (auto& p : local) p = rot * p + t;
  return local;
}

template <class Rng>
MoleculeSample finish(Molecule m, std::vector<Vec3> positions, double noise_scale, Rng& rng) {
  MoleculeSample s;
  s.energy = surrogate_energy(m, positions);
  s.forces = surrogate_forces(m, positions);
  if (noise_scale > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_scale);
    for (auto& f : s.forces)
      for (auto& c : f) c += noise(rng);
  }
  s.positions = std::move(positions);
  return s;
}

}  // namespace detail

inline std::vector<Vec3> nh3_equilibrium_positions() {
  const double cos_t = std::cos(kNH3.bond_angle);
  const double sin_a = std::sqrt((1.0 - cos_t) / 1.5);
  const double cos_a = std::sqrt(1.0 - sin_a * sin_a);
  std::vector<Vec3> pos{{0.0, 0.0, 0.0}};
  for (int i = 0; i < 3; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / 3.0;
    pos.push_back(kNH3.bond_length * Vec3{sin_a * std::cos(phi), sin_a * std::sin(phi), -cos_a});
  }
  return pos;
}

// Bond length uniform in [1.2, 2.4] A, random orientation and placement.
inline Dataset gen_lih(std::size_t n, std::uint64_t seed, double noise_scale = 0.0) {
  if (n < 1) throw ValidationError("gen_lih: n must be >= 1");
  Dataset d{Molecule::LiH, Provenance::Surrogate, {}};
  d.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = sample_rng(seed, i);
    std::uniform_real_distribution<double> bond(1.2, 2.4);
    auto pos = detail::rigid_motion({{0.0, 0.0, 0.0}, {bond(rng), 0.0, 0.0}}, rng);
    d.samples.push_back(detail::finish(Molecule::LiH, std::move(pos), noise_scale, rng));
  }
  return d;
}

// Trigonal pyramid with bond lengths scaled by U(0.9, 1.1) and bond directions
// jittered (angles move by up to ~10%), then a random rigid motion.
inline Dataset gen_nh3(std::size_t n, std::uint64_t seed, double noise_scale = 0.0) {
  if (n < 1) throw ValidationError("gen_nh3: n must be >= 1");
  Dataset d{Molecule::NH3, Provenance::Surrogate, {}};
  d.samples.reserve(n);
  const auto base = nh3_equilibrium_positions();
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = sample_rng(seed, i);
    std::uniform_real_distribution<double> scale(0.9, 1.1);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::vector<Vec3> local{{0.0, 0.0, 0.0}};
    for (int h = 1; h <= 3; ++h) {
      Vec3 u = (1.0 / kNH3.bond_length) * base[h];
      u += Vec3{jitter(rng), jitter(rng), jitter(rng)};
      u = (1.0 / norm(u)) * u;
      local.push_back((kNH3.bond_length * scale(rng)) * u);
    }
    auto pos = detail::rigid_motion(std::move(local), rng);
    d.samples.push_back(detail::finish(Molecule::NH3, std::move(pos), noise_scale, rng));
  }
  return d;
}

inline Dataset generate(Molecule m, std::size_t n, std::uint64_t seed, double noise_scale = 0.0) {
  return m == Molecule::LiH ? gen_lih(n, seed, noise_scale) : gen_nh3(n, seed, noise_scale);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Dataset& d) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : d.samples) {
    nlohmann::json pos = nlohmann::json::array(), frc = nlohmann::json::array();
    for (const auto& p : s.positions) pos.push_back({p[0], p[1], p[2]});
    for (const auto& f : s.forces) frc.push_back({f[0], f[1], f[2]});
    samples.push_back({{"positions", std::move(pos)}, {"forces", std::move(frc)}, {"energy", s.energy}});
  }
  return {{"molecule", to_string(d.molecule)}, {"samples", std::move(samples)}};
}

namespace detail {

inline std::vector<Vec3> read_matrix(const nlohmann::json& j, std::size_t atoms, const std::string& where,
                                     const char* field) {
  const std::string expected = "(" + std::to_string(atoms) + ", 3)";
  if (!j.is_array()) throw ValidationError(where + field + " must be an array of shape " + expected);
  std::vector<Vec3> out;
  const bool rows_ok = j.size() == atoms;
  std::size_t cols = 0;
  for (const auto& row : j) {
    if (!row.is_array()) throw ValidationError(where + field + " must be an array of shape " + expected);
    cols = row.size();
    if (!rows_ok || cols != 3)
      throw ValidationError(where + field + " has shape (" + std::to_string(j.size()) + ", " +
                            std::to_string(cols) + "), expected " + expected);
    Vec3 v{};
    for (int c = 0; c < 3; ++c) {
      if (row[c].is_null()) throw ValidationError(where + field + " contain a non-finite value");
      if (!row[c].is_number()) throw ValidationError(where + field + " entries must be numbers");
      v[c] = row[c].get<double>();
    }
    out.push_back(v);
  }
  if (!rows_ok)
    throw ValidationError(where + field + " has " + std::to_string(j.size()) + " rows, expected " + expected);
  return out;
}

}  // namespace detail

inline Dataset from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("dataset file must contain a JSON object");
  if (!j.contains("molecule") || !j["molecule"].is_string())
    throw ValidationError("dataset file is missing the \"molecule\" string");
  if (!j.contains("samples") || !j["samples"].is_array())
    throw ValidationError("dataset file is missing the \"samples\" array");
  Dataset d;
  d.molecule = parse_molecule(j["molecule"].get<std::string>());
  d.provenance = Provenance::Ingested;
  const std::size_t atoms = static_cast<std::size_t>(atom_count(d.molecule));
  const auto& samples = j["samples"];
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& rec = samples[r];
    const std::string where = "record " + std::to_string(r) + ": ";
    if (!rec.is_object()) throw ValidationError(where + "must be an object");
    for (const char* key : {"positions", "forces", "energy"})
      if (!rec.contains(key)) throw ValidationError(where + "missing \"" + key + "\"");
    MoleculeSample s;
    s.positions = detail::read_matrix(rec["positions"], atoms, where, "positions");
    s.forces = detail::read_matrix(rec["forces"], atoms, where, "forces");
    if (!rec["energy"].is_number()) throw ValidationError(where + "energy is not a finite number");
    s.energy = rec["energy"].get<double>();
    d.samples.push_back(std::move(s));
  }
  validate(d);
  return d;
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  validate(d);
  io::write_file_atomic(path, to_json(d).dump() + "\n");
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  const std::string text = io::sanitize_nonfinite_tokens(io::read_file(path));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed dataset file '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

}  // namespace gqml::data
