#pragma once

#include <stdexcept>
#include <string>

namespace ccfix {

/// Malformed input: wrong shapes, invalid masses, bad parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two bodies closer than the collision guard allows.
class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside the domain of an operation, e.g. U(q) <= 0 for the map F.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A group element that does not preserve the pair coefficients or the masses.
class SymmetryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver ran out of iterations or stalled.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate critical point, non-maximal isotropy, or an ambiguous spectrum.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of a verification step does not hold (gates, fixedness, planarity).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccfix
