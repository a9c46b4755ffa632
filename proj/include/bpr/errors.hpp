#ifndef BPR_ERRORS_HPP
#define BPR_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace bpr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument: non-positive dimensions, non-binary mask, invalid spec fields.
class InvalidInput : public Error {
public:
  explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

/// Two operands whose grid dimensions (or coil/set counts) disagree.
class DimensionMismatch : public InvalidInput {
public:
  explicit DimensionMismatch(const std::string& msg) : InvalidInput(msg) {}
};

/// A patch plan (or recombination) leaves k-space bins unreconstructed.
/// Carries the flat indices of the uncovered bins for diagnostics.
class CoverageError : public Error {
public:
  CoverageError(const std::string& msg, std::vector<long> uncovered_bins)
      : Error(msg), uncovered(std::move(uncovered_bins)) {}
  std::vector<long> uncovered;
};

/// File format / parse failures in the grid container and CSV outputs.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Divergence or non-finite gradients during optimization.
class TrainingError : public Error {
public:
  explicit TrainingError(const std::string& msg) : Error(msg) {}
};

} // namespace bpr

#endif
