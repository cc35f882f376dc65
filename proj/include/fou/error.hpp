#pragma once

#include <stdexcept>
#include <string>

namespace fou {

/// A parameter lies outside the admissible region (H outside [1/2, 3/4],
/// non-positive drift, negative time, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operands do not share a grid or have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed: quadrature did not reach tolerance, a path
/// is degenerate, a ratio denominator vanished, or a Gram form went negative.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace fou
