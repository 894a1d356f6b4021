#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace subrec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or ambient-dimension mismatch between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Operand expected to be symmetric is not (beyond tolerance).
struct SymmetryError : Error {
  using Error::Error;
};

// Subspace basis is not orthonormal.
struct BasisError : Error {
  using Error::Error;
};

// SPD solve hit a numerically singular operand.
struct SingularityError : Error {
  SingularityError(const std::string& msg, double condition_estimate)
      : Error(msg), condition_estimate(condition_estimate) {}
  double condition_estimate;
};

// Data does not span the working space; caller should reduce dimension
// losslessly (or use ridge regularization) before solving.
struct RankDeficiencyError : Error {
  RankDeficiencyError(const std::string& msg, Eigen::Index rank)
      : Error(msg), rank(rank) {}
  Eigen::Index rank;
};

// Kernel extraction found no usable eigenvalue split.
struct DegenerateKernelError : Error {
  using Error::Error;
};

// Input outside the mathematical domain of the operation.
struct DomainError : Error {
  using Error::Error;
};

// Request exceeds what the implementation supports (e.g. dense rate bound cap).
struct CapabilityError : Error {
  using Error::Error;
};

// Lambda bisection could not attain the requested kernel dimension.
struct BracketError : Error {
  BracketError(const std::string& msg, Eigen::Index kernel_dim_lo,
               Eigen::Index kernel_dim_hi)
      : Error(msg), kernel_dim_lo(kernel_dim_lo), kernel_dim_hi(kernel_dim_hi) {}
  Eigen::Index kernel_dim_lo;
  Eigen::Index kernel_dim_hi;
};

// Fixed-point iteration diverged (condition-number blowup).
struct DivergenceError : Error {
  DivergenceError(const std::string& msg, double condition_estimate)
      : Error(msg), condition_estimate(condition_estimate) {}
  double condition_estimate;
};

// A stated precondition failed; carries the offending point indices if any.
struct PreconditionError : Error {
  PreconditionError(const std::string& msg, std::vector<Eigen::Index> indices = {})
      : Error(msg), offending_indices(std::move(indices)) {}
  std::vector<Eigen::Index> offending_indices;
};

// Invalid configuration value.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace subrec
