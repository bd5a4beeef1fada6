#pragma once

#include <functional>
#include <vector>

#include "ccfix/potentials.hpp"

namespace ccfix::detail {

// Mass-scaled coordinates x_j = sqrt(m_j) q_j turn the mass-metric into the
// standard dot product on R^{nd}.
Vec to_scaled(const Configuration& q, const Masses& m);
Configuration from_scaled(const Vec& x, const Masses& m, int d);

/// Orthonormal basis (columns) of the complement of the center-of-mass directions.
Mat center_constraint_basis(const Masses& m, int d);

/// Orthonormal basis of the orthogonal complement of span(cols), by rank-revealing QR.
Mat complement_basis(const Mat& cols, double rel_tol = 1e-9);

/// Level set {x in Y : x^T Q x = level} with Q an orthogonal projector acting body-wise.
struct LevelSet {
  Mat body_projector;                 // d x d, identity for S, P for the vertical cylinder
  double level = 1.0;
  std::vector<Mat> gauge_generators;  // skew d x d generators of the residual symmetry
};

struct LevelSetOptions {
  double tol = 1e-11;
  int max_iter = 200;
  double damping = 0.5;
  int fallback_steps = 60;
  // reject iterates with U <= 0 (the map F is undefined there)
  bool require_positive_u = false;
  // optional fixed-point map on the scaled coordinates (used as fallback)
  std::function<Vec(const Vec&)> fallback_map;
};

struct LevelSetResult {
  Vec x;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton (Levenberg-Marquardt) on the Lagrange system grad U = beta Q x,
/// restricted to the slice orthogonal to the gauge orbit; retracts to the level set
/// after each step.
LevelSetResult solve_level_set(const PairPotential<double>& u, const LevelSet& set, Vec x0,
                               const LevelSetOptions& opts);

/// |Pi_T grad U| / |grad U| in scaled coordinates, with T the tangent space of the level set.
double level_set_residual(const PairPotential<double>& u, const LevelSet& set, const Vec& x);

Vec retract(const LevelSet& set, const Vec& x);

}  // namespace ccfix::detail
