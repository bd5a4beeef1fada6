#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ccfix/cc_solver.hpp"

namespace ccfix {

/// Linear coordinates c on Y in which the mass-metric is the dot product and the
/// central configuration sits at (1, 0, ..., 0). The chart u -> (sqrt(1-|u|^2), u)
/// parametrizes S near it.
struct AdaptedFrame {
  Mat to_chart;    // (l+1) x nd, c = to_chart * flat(q) for q in Y
  Mat from_chart;  // nd x (l+1), flat(q) = from_chart * c
  Mat rotation;    // (l+1) x (l+1) orthogonal part, det +1
  int d = 0;

  int chart_dim() const { return static_cast<int>(to_chart.rows()) - 1; }
  /// u_1..u_l as n x d arrays (orthonormal in the mass-metric, tangent to S at the base point).
  std::vector<Configuration> chart_basis() const;
  Vec coordinates(const Configuration& q) const { return to_chart * flat(q); }
  Configuration configuration(const Vec& c) const;
};

/// Rotation with det +1 sending the unit vector y to e_0: a Householder reflection
/// composed with a reflection fixing e_0; the identity when y == e_0.
Mat chart_rotation(const Vec& y);

/// `completion_seed` composes a random rotation of the complement of e_0, giving a
/// different but equally valid frame.
AdaptedFrame adapted_frame(const EllipsoidPoint& q, const Masses& m,
                           std::optional<std::uint64_t> completion_seed = std::nullopt);

/// Kernel band used throughout: |lambda| <= 1e-6 * max(spectral radius, alpha U).
inline constexpr double kKernelRelTol = 1e-6;
inline constexpr double kMinGapRatio = 1e3;

/// D^2 U~ at the base point: d^2U/dx_a dx_b - delta_ab dU/dx_0 for a, b = 1..l.
/// Throws DegenerateError when more than d(d-1)/2 eigenvalues fall in the kernel band.
Mat restricted_hessian(const PairPotential<double>& u, const AdaptedFrame& frame, const EllipsoidPoint& q);

struct FJacobian {
  Mat matrix;            // dF_a/du_b at u = 0, a, b = 1..l
  double du_dx0 = 0;     // dU/dx_0 at the base point
  double grad_norm = 0;  // |grad U| in chart coordinates
  double alpha_u = 0;    // alpha U(q)
};

/// Derivative of the normalized gradient map read through the chart.
FJacobian map_F_jacobian(const PairPotential<double>& u, const AdaptedFrame& frame, const EllipsoidPoint& q);

struct IdentityResiduals {
  // |-alpha U (I - F') - D^2 U~| / (alpha U), the relation with the opposite sign
  double stated = 0;
  // |alpha U (I - F') - D^2 U~| / (alpha U), the relation the derivatives satisfy
  double corrected = 0;
};

IdentityResiduals identity_check(const PairPotential<double>& u, const CriticalRecord& rec);

/// d(n-1) - 1 - d(d-1)/2.
int epsilon(int n, int d);

struct IndexRecord {
  int morse_index = 0;         // negative eigenvalues of D^2 U~
  int kernel_dim = 0;
  int fixed_point_index = 0;   // sign det(I - F') on the orbit-orthogonal slice
  int formula_index = 0;       // (-1)^(mu + epsilon)
  int epsilon = 0;
  bool routes_agree = false;
  Vec spectrum;                // eigenvalues of D^2 U~, ascending
  double gap_ratio = 0;        // smallest non-kernel |eigenvalue| / largest kernel |eigenvalue|
  int unit_eigenvalues = 0;    // eigenvalues of F' within 1e-6 of 1
  double slice_determinant = 0;
  IdentityResiduals identity;
};

/// Morse and fixed-point index of a non-degenerate, maximal-isotropy central configuration.
IndexRecord fixed_point_index(const PairPotential<double>& u, const CriticalRecord& rec);

}  // namespace ccfix
