#pragma once

#include <stdexcept>
#include <string>

namespace eagc {

// Bad shapes, out-of-range hyperparameters, malformed flags.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be processed: empty sets, non-finite entries,
// malformed files, classes without samples.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity that is undefined for the given input (zero vectors, all-zero
// norms). Treated as a data problem by the CLI.
class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

class SymmetryError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Factorization failures, non-convergence, non-finite losses.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear dynamics whose iteration matrix has spectral radius >= 1.
class StabilityError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

}  // namespace eagc
