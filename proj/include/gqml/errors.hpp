// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gqml {

// Input/shape problems the caller can fix. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Out-of-range qubit/parameter indices, length mismatches, bad permutations.
class StructuralError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Parameter-shift requested on a gate whose generator has more than two
// eigenvalues (HeisenbergCoupler, PauliVecRot).
class UnsupportedGeneratorError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Coincident atoms.
class DegenerateGeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Constant channel handed to a MinMax scaler.
class DegenerateScaleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Rank-deficient least-squares design matrix.
class DegenerateFitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// R^2 on constant targets.
class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite loss during optimisation. Runtime failure (exit code 2).
class TrainingAbortedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gqml
