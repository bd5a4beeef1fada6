#pragma once

#include <array>

#include "ccfix/cc_solver.hpp"

namespace ccfix {

/// Level set <Pq, q>_M = c in Y, with P the orthogonal projection of R^3 onto the xy-plane.
struct CylinderSpec {
  double c = 1.0;

  void validate() const {
    if (!(c > 0) || !std::isfinite(c)) throw InvalidArgument("cylinder level must be positive");
  }
};

/// P = diag(1, 1, 0).
inline Mat horizontal_projector() {
  Mat p = Mat::Identity(3, 3);
  p(2, 2) = 0;
  return p;
}

inline double cylinder_value(const Configuration& q, const Masses& m) {
  if (q.cols() != 3) throw InvalidArgument("cylinder_value: needs d = 3");
  if (q.rows() != m.size()) throw InvalidArgument("cylinder_value: shape mismatch");
  return (q.leftCols(2).rowwise().squaredNorm().array() * m.values().array()).sum();
}

struct RelEquilibriumRecord {
  Configuration q;
  double omega_sq = 0;          // alpha U / |Pq|_M^2, rotation about the z-axis
  double residual = 0;          // |grad_M U + omega^2 P q|_M / |grad_M U|_M
  double defect = 0;            // |grad_M U + omega^2 P q|_M
  double U_value = 0;
  bool planar = false;          // max |z_j| <= 1e-9
  bool central = false;
  int iterations = 0;
};

inline constexpr double kPlanarTol = 1e-9;
inline constexpr double kCentralAngleTol = 1e-8;

/// Assembles the record for a configuration assumed critical on its cylinder. Throws
/// DomainError when U <= 0 and DegenerateError when |Pq|^2 < 1e-8 |q|^2.
RelEquilibriumRecord make_re_record(const PairPotential<double>& u, const Configuration& q, int iterations = 0);

/// Critical point of U on the cylinder within Y, with U > 0.
RelEquilibriumRecord find_re(const PairPotential<double>& u, const CylinderSpec& spec, const Configuration& seed,
                             const SolverConfig& cfg);

/// Angle between the lines spanned by grad_M U(q) and q.
double central_angle(const PairPotential<double>& u, const Configuration& q);
bool is_central(const PairPotential<double>& u, const Configuration& q, double tol = kCentralAngleTol);

// --- the three-pair charged example ------------------------------------------

struct ExampleParams {
  double c1 = 0, c2 = 0, c3 = 0;

  void validate() const {
    for (double c : {c1, c2, c3})
      if (c == 0 || !std::isfinite(c)) throw InvalidArgument("example charges must be finite and non-zero");
  }
  Vec gamma() const {
    Vec g(6);
    g << c1, c1, c2, c2, c3, c3;
    return g;
  }
};

/// Charged potential kappa_ij = 1 - gamma_i gamma_j, unit masses, alpha = 1.
PairPotential<double> example_potential(const ExampleParams& p);

/// q1 = (x,0,0), q2 = -q1, q3 = (0,y,0), q4 = -q3, q5 = (0,0,z), q6 = -q5.
Configuration lift_xyz(double x, double y, double z);
inline Configuration lift(double t, double z) { return lift_xyz(std::cos(t), std::sin(t), z); }

/// U on the fixed-point set, in the coordinates (x, y, z) of bodies 1, 3 and 5.
double symmetric_U(double x, double y, double z, const ExampleParams& p);
Eigen::Vector3d symmetric_U_gradient(double x, double y, double z, const ExampleParams& p);

/// U(cos t, sin t, z) on the strip (0, pi/2) x (0, inf).
double restricted_U(double t, double z, const ExampleParams& p);
Eigen::Vector2d restricted_U_gradient(double t, double z, const ExampleParams& p);
Eigen::Matrix2d restricted_U_hessian(double t, double z, const ExampleParams& p);

struct Gates {
  bool signs = false;    // c1 > 1, c2 < -1, c3 < -1
  bool decay = false;    // 1 - c1^2 + 8(1 - c1 c3) < 0
  bool vertical = false; // c3^2 - 1 + 8(c2 c3 - 1) < 8(1 - c1 c3)
  double decay_value = 0;
  double vertical_lhs = 0;
  double vertical_rhs = 0;

  bool all() const { return signs && decay && vertical; }
};

Gates inequality_gate(const ExampleParams& p);

struct RestrictedMaximum {
  double t = 0, z = 0, U = 0;
  double grad_norm = 0;
  Eigen::Vector2d hessian_eigenvalues = Eigen::Vector2d::Zero();
  int iterations = 0;
};

struct MaximizeOptions {
  double grad_tol = 1e-10;
  int max_iter = 200;
};

/// Interior maximum of restricted_U by multistart trust-region Newton ascent.
/// PreconditionError when the gates fail; ConvergenceError on stalling or when the
/// iterates run to the boundary of the strip.
RestrictedMaximum maximize_restricted(const ExampleParams& p, const MaximizeOptions& opts = {});

struct ExampleCertificate {
  ExampleParams params;
  Gates gates;
  double U_reference = 0;                   // restricted_U(pi/4, 1/2)
  double U_reference_lifted = 0;            // the same value from the six-body potential
  RestrictedMaximum maximum;
  RelEquilibriumRecord record;
  std::array<double, 3> symmetry_residuals{};  // |g q - q| for the three non-trivial elements of K
  double symmetric_gradient_mismatch = 0;   // analytic (x,y,z)-gradient vs projected full gradient
  double central_angle = 0;

  bool critical = false;     // |grad_M U + omega^2 P q|_M <= 1e-8
  bool non_planar = false;   // z* > 1e-3
  bool non_central = false;
  bool positive = false;     // U > 0

  bool passed() const { return critical && non_planar && non_central && positive; }
};

/// The three non-trivial elements of K as (permutation, rotation by pi about x, y, z).
std::array<GroupElement, 3> example_symmetry_group();

ExampleCertificate verify_example(const ExampleParams& p, const MaximizeOptions& opts = {});

// --- dynamics ------------------------------------------------------------------

struct DynamicsResult {
  double drift = 0;         // max_t |q(t) - e^{t Omega} q(0)|_M
  double omega = 0;
  double period = 0;        // integration window T
  int steps = 0;
  bool completed = true;
  double failure_time = 0;  // first time the integration left the collision-free set
};

/// Integrates q'' = grad_M U(q) from q(0) = q0, q'(0) = Omega q0 by fixed-step RK4 and
/// compares against the rigid rotation e^{t Omega} q0.
DynamicsResult integrate_rotation(const PairPotential<double>& u, const Configuration& q0, const Mat& omega,
                                  double horizon, int steps);

/// One period of the rotating solution through a relative equilibrium (axis z).
DynamicsResult verify_dynamics(const PairPotential<double>& u, const RelEquilibriumRecord& rec, int steps = 10000);

/// One period of the rigid rotation of a planar central configuration, about the normal
/// of its plane. PreconditionError for non-planar d = 3 records.
DynamicsResult verify_dynamics(const PairPotential<double>& u, const CriticalRecord& rec, int steps = 10000);

}  // namespace ccfix
