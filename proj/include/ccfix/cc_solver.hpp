#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ccfix/potentials.hpp"
#include "ccfix/procrustes.hpp"

namespace ccfix {

struct SolverConfig {
  double tol = 1e-11;
  int max_iter = 500;
  double damping = 0.5;
  std::uint64_t rng_seed = 20240101;
  int n_starts = 64;
  int threads = 1;
  double dedup_tol = 1e-7;
  // also identify classes related by the permutations of this spec
  std::optional<SymmetrySpec> permutation_quotient;

  void validate() const {
    if (!(tol > 0)) throw InvalidArgument("solver tol must be positive");
    if (n_starts < 1) throw InvalidArgument("n_starts must be at least 1");
    if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
    if (!(damping > 0 && damping <= 1)) throw InvalidArgument("damping must lie in (0, 1]");
    if (threads < 1) throw InvalidArgument("threads must be at least 1");
  }
};

/// A converged central configuration on S.
struct CriticalRecord {
  EllipsoidPoint q;
  double lambda = 0;    // grad_M U = lambda q, equal to -alpha U
  double residual = 0;
  double U_value = 0;
  std::vector<double> distance_signature;
  int isotropy_rank = 0;  // rank of the SO(d) orbit directions
  int iterations = 0;
  int multiplicity = 1;   // census starts that landed in this class
};

/// F(q) = -grad_M U(q) / |grad_M U(q)|_M, a self-map of S when U > 0.
EllipsoidPoint map_F(const PairPotential<double>& u, const EllipsoidPoint& q);

/// |grad_M U + alpha U q|_M / |grad_M U|_M; zero exactly at central configurations.
double residual(const PairPotential<double>& u, const Configuration& q);

/// Builds a record from a configuration already known to be central (residual is recomputed).
CriticalRecord make_record(const PairPotential<double>& u, const EllipsoidPoint& q, int iterations = 0);

/// Critical point of U restricted to S, starting from a collision-free seed.
CriticalRecord find_cc(const PairPotential<double>& u, const Configuration& seed, const SolverConfig& cfg);

struct CensusResult {
  std::vector<CriticalRecord> classes;
  int starts = 0;
  int converged = 0;
  int failed = 0;
};

/// Seed for start `index`: centered Gaussian normalized onto S, near-collisions rejected.
EllipsoidPoint census_seed(const Masses& m, int d, std::uint64_t rng_seed, int index);

/// Multistart find_cc with deduplication up to SO(d) (and optionally permutations).
CensusResult census(const PairPotential<double>& u, int d, const SolverConfig& cfg);

/// True when a and b are in the same SO(d)-class (optionally up to the quotient permutations).
bool same_class(const CriticalRecord& a, const CriticalRecord& b, const Masses& m, const SolverConfig& cfg);

struct PropertyCheck {
  int j = -1;                 // argmax_k |p(q_k)|^2
  double value = 0;           // p(dU/dq_j) . p(q_j), <= 0 for attractive potentials
  bool projection_ok = true;  // p(q_j) != 0 whenever some p(q_i) != 0
  double mapped_value = 0;    // p(F_j(q)) . p(q_j), >= 0 as a consequence
};

/// Projection inequality at the body farthest from the axis orthogonal to `plane`
/// (plane: d x 2 with orthonormal columns).
PropertyCheck check_property_F(const PairPotential<double>& u, const EllipsoidPoint& q, const Mat& plane);

struct QuotientLift {
  Mat rotation;                 // g minimizing |F(q) - g q|_M
  double alignment_residual = 0;
  double deviation = 0;         // |g - I|_F
  bool is_identity = false;
};

/// Given a fixed point of the map induced on S/SO(d), recovers g with F(q) = g q.
/// Throws PreconditionError when q is not a quotient fixed point within tol.
QuotientLift check_quotient_lift(const PairPotential<double>& u, const EllipsoidPoint& q, double tol);

/// |F(sigma g q) - sigma g F(q)|_M for a rotation g and a coefficient-preserving sigma.
double equivariance_test(const PairPotential<double>& u, const EllipsoidPoint& q, const Mat& rotation,
                         const BodyPermutation& sigma);

}  // namespace ccfix
