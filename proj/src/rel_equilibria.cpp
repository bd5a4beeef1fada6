#include "ccfix/rel_equilibria.hpp"

#include <cmath>
#include <numbers>

#include "ccfix/detail/level_set_newton.hpp"

namespace ccfix {

namespace {

Configuration project_horizontal(const Configuration& q) {
  Configuration out = q;
  out.col(2).setZero();
  return out;
}

// Fields of the record without the U > 0 and |Pq| guards.
RelEquilibriumRecord assemble(const PairPotential<double>& u, const Configuration& q, int iterations) {
  const Masses& m = u.masses();
  RelEquilibriumRecord rec;
  rec.q = q;
  rec.U_value = value(u, q);
  const Configuration g = mass_gradient(u, q);
  const Configuration pq = project_horizontal(q);
  rec.omega_sq = u.alpha() * rec.U_value / mass_inner(pq, pq, m);
  rec.defect = mass_norm(g + rec.omega_sq * pq, m);
  rec.residual = rec.defect / mass_norm(g, m);
  rec.planar = q.col(2).cwiseAbs().maxCoeff() <= kPlanarTol;
  rec.central = is_central(u, q);
  rec.iterations = iterations;
  return rec;
}

}  // namespace

double central_angle(const PairPotential<double>& u, const Configuration& q) {
  const Masses& m = u.masses();
  const Configuration g = mass_gradient(u, q);
  const double gn = mass_norm(g, m), qn = mass_norm(q, m);
  if (!(gn > 0)) throw DomainError("central_angle: vanishing gradient");
  if (!(qn > 0)) throw InvalidArgument("central_angle: zero configuration");
  const double cosine = std::abs(mass_inner(g, q, m)) / (gn * qn);
  const double sine = mass_norm(g / gn - (mass_inner(g, q, m) / (gn * qn * qn)) * q, m);
  return std::atan2(sine, cosine);
}

bool is_central(const PairPotential<double>& u, const Configuration& q, double tol) {
  return central_angle(u, q) <= tol;
}

RelEquilibriumRecord make_re_record(const PairPotential<double>& u, const Configuration& q, int iterations) {
  if (q.cols() != 3) throw InvalidArgument("relative equilibria on the cylinder need d = 3");
  const Masses& m = u.masses();
  const Configuration pq = project_horizontal(q);
  if (mass_inner(pq, pq, m) < 1e-8 * mass_inner(q, q, m))
    throw DegenerateError("configuration lies on the rotation axis; omega^2 is undefined");
  RelEquilibriumRecord rec = assemble(u, q, iterations);
  if (!(rec.U_value > 0))
    throw DomainError("critical point on the cylinder has U <= 0; it is not a relative equilibrium");
  return rec;
}

RelEquilibriumRecord find_re(const PairPotential<double>& u, const CylinderSpec& spec, const Configuration& seed,
                             const SolverConfig& cfg) {
  cfg.validate();
  spec.validate();
  const Masses& m = u.masses();
  if (seed.cols() != 3) throw InvalidArgument("find_re: seed must be three-dimensional");
  if (seed.rows() != m.size()) throw InvalidArgument("find_re: seed has the wrong number of bodies");
  require_collision_free(seed);
  const Configuration start = project_center(seed, m);
  if (!(cylinder_value(start, m) > 0)) throw InvalidArgument("find_re: seed lies on the rotation axis");

  detail::LevelSet cylinder{horizontal_projector(), spec.c, {so_basis(3)[2]}};
  detail::LevelSetOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  opts.damping = cfg.damping;
  const auto solved = detail::solve_level_set(u, cylinder, detail::to_scaled(start, m), opts);
  const Configuration q = project_center(detail::from_scaled(solved.x, m, 3), m);
  RelEquilibriumRecord rec = make_re_record(u, q, solved.iterations);
  if (!(rec.residual <= 10 * cfg.tol)) throw ConvergenceError("find_re: residual lost after recentering");
  return rec;
}

// --- example -------------------------------------------------------------------

PairPotential<double> example_potential(const ExampleParams& p) {
  p.validate();
  return PairPotential<double>::charged(p.gamma(), Masses::equal(6), 1.0);
}

Configuration lift_xyz(double x, double y, double z) {
  Configuration q = Configuration::Zero(6, 3);
  q(0, 0) = x;
  q(1, 0) = -x;
  q(2, 1) = y;
  q(3, 1) = -y;
  q(4, 2) = z;
  q(5, 2) = -z;
  return q;
}

namespace {

struct Coefficients {
  double a, b, c;  // self terms 1 - c_i^2
  double ab, ac, bc;  // cross terms 1 - c_i c_j
};

Coefficients coefficients(const ExampleParams& p) {
  p.validate();
  return {1 - p.c1 * p.c1, 1 - p.c2 * p.c2, 1 - p.c3 * p.c3,
          1 - p.c1 * p.c2, 1 - p.c1 * p.c3, 1 - p.c2 * p.c3};
}

// k / sqrt(u^2 + v^2) and its derivatives in (u, v)
struct PairTerm {
  double value;
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
};

PairTerm pair_term(double k, double u, double v) {
  const double r2 = u * u + v * v;
  const double r = std::sqrt(r2);
  const double r3 = r2 * r, r5 = r3 * r2;
  PairTerm t;
  t.value = k / r;
  t.grad << -k * u / r3, -k * v / r3;
  t.hess << k * (3 * u * u / r5 - 1 / r3), 3 * k * u * v / r5, 3 * k * u * v / r5, k * (3 * v * v / r5 - 1 / r3);
  return t;
}

// Hessian of symmetric_U at positive (x, y, z)
Eigen::Matrix3d symmetric_U_hessian(double x, double y, double z, const Coefficients& k) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(0, 0) += k.a / (x * x * x);
  h(1, 1) += k.b / (y * y * y);
  h(2, 2) += k.c / (z * z * z);
  auto add = [&](const PairTerm& t, int i, int j) {
    h(i, i) += t.hess(0, 0);
    h(i, j) += t.hess(0, 1);
    h(j, i) += t.hess(1, 0);
    h(j, j) += t.hess(1, 1);
  };
  add(pair_term(4 * k.ab, x, y), 0, 1);
  add(pair_term(4 * k.ac, x, z), 0, 2);
  add(pair_term(4 * k.bc, y, z), 1, 2);
  return h;
}

void require_strip(double t, double z) {
  if (!(t > 0 && t < std::numbers::pi / 2 && z > 0) || !std::isfinite(z))
    throw DomainError("restricted_U: (t, z) outside the strip (0, pi/2) x (0, inf)");
}

}  // namespace

double symmetric_U(double x, double y, double z, const ExampleParams& p) {
  const Coefficients k = coefficients(p);
  if (x == 0 || y == 0 || z == 0) throw CollisionError("symmetric_U: a pair of bodies collides at the origin");
  return k.a / (2 * std::abs(x)) + k.b / (2 * std::abs(y)) + k.c / (2 * std::abs(z)) +
         4 * k.ab / std::hypot(x, y) + 4 * k.ac / std::hypot(x, z) + 4 * k.bc / std::hypot(y, z);
}

Eigen::Vector3d symmetric_U_gradient(double x, double y, double z, const ExampleParams& p) {
  const Coefficients k = coefficients(p);
  if (x == 0 || y == 0 || z == 0) throw CollisionError("symmetric_U: a pair of bodies collides at the origin");
  Eigen::Vector3d g;
  g << -k.a * std::copysign(1.0, x) / (2 * x * x), -k.b * std::copysign(1.0, y) / (2 * y * y),
      -k.c * std::copysign(1.0, z) / (2 * z * z);
  const PairTerm xy = pair_term(4 * k.ab, x, y), xz = pair_term(4 * k.ac, x, z), yz = pair_term(4 * k.bc, y, z);
  g[0] += xy.grad[0] + xz.grad[0];
  g[1] += xy.grad[1] + yz.grad[0];
  g[2] += xz.grad[1] + yz.grad[1];
  return g;
}

double restricted_U(double t, double z, const ExampleParams& p) {
  require_strip(t, z);
  const Coefficients k = coefficients(p);
  const double ct = std::cos(t), st = std::sin(t);
  return k.a / (2 * ct) + k.b / (2 * st) + k.c / (2 * z) + 4 * k.ab + 4 * k.ac / std::sqrt(ct * ct + z * z) +
         4 * k.bc / std::sqrt(st * st + z * z);
}

Eigen::Vector2d restricted_U_gradient(double t, double z, const ExampleParams& p) {
  require_strip(t, z);
  const double ct = std::cos(t), st = std::sin(t);
  const Eigen::Vector3d g = symmetric_U_gradient(ct, st, z, p);
  return {-st * g[0] + ct * g[1], g[2]};
}

Eigen::Matrix2d restricted_U_hessian(double t, double z, const ExampleParams& p) {
  require_strip(t, z);
  const double ct = std::cos(t), st = std::sin(t);
  const Eigen::Vector3d g = symmetric_U_gradient(ct, st, z, p);
  const Eigen::Matrix3d h = symmetric_U_hessian(ct, st, z, coefficients(p));
  // chain rule through (x, y, z) = (cos t, sin t, z)
  Eigen::Matrix2d out;
  out(0, 0) = st * st * h(0, 0) - 2 * st * ct * h(0, 1) + ct * ct * h(1, 1) - ct * g[0] - st * g[1];
  out(0, 1) = out(1, 0) = -st * h(0, 2) + ct * h(1, 2);
  out(1, 1) = h(2, 2);
  return out;
}

Gates inequality_gate(const ExampleParams& p) {
  p.validate();
  Gates g;
  g.signs = p.c1 > 1 && p.c2 < -1 && p.c3 < -1;
  g.decay_value = 1 - p.c1 * p.c1 + 8 * (1 - p.c1 * p.c3);
  g.decay = g.decay_value < 0;
  g.vertical_lhs = p.c3 * p.c3 - 1 + 8 * (p.c2 * p.c3 - 1);
  g.vertical_rhs = 8 * (1 - p.c1 * p.c3);
  g.vertical = g.vertical_lhs < g.vertical_rhs;
  return g;
}

namespace {

bool inside_strip(const Eigen::Vector2d& x) {
  return x[0] > 0 && x[0] < std::numbers::pi / 2 && x[1] > 0 && std::isfinite(x[1]);
}

bool near_boundary(const Eigen::Vector2d& x) {
  return x[0] < 1e-6 || x[0] > std::numbers::pi / 2 - 1e-6 || x[1] < 1e-6 || x[1] > 1e6;
}

// Levenberg-damped Newton ascent; the damping keeps -H + lambda I positive definite.
std::optional<RestrictedMaximum> ascend(const ExampleParams& p, Eigen::Vector2d x, const MaximizeOptions& opts) {
  double f = restricted_U(x[0], x[1], p);
  double lambda = -1;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Eigen::Vector2d g = restricted_U_gradient(x[0], x[1], p);
    const Eigen::Matrix2d h = restricted_U_hessian(x[0], x[1], p);
    if (g.norm() <= opts.grad_tol) {
      RestrictedMaximum out;
      out.t = x[0];
      out.z = x[1];
      out.U = f;
      out.grad_norm = g.norm();
      out.hessian_eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues();
      out.iterations = iter;
      return out;
    }
    const double scale = h.cwiseAbs().maxCoeff() + 1e-300;
    if (lambda < 0) lambda = 1e-8 * scale;
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      const Eigen::Matrix2d mtx = -h + lambda * Eigen::Matrix2d::Identity();
      Eigen::LLT<Eigen::Matrix2d> llt(mtx);
      if (llt.info() == Eigen::Success) {
        const Eigen::Vector2d step = llt.solve(g);
        const Eigen::Vector2d trial = x + step;
        if (inside_strip(trial)) {
          const double ft = restricted_U(trial[0], trial[1], p);
          const bool gains = ft > f;
          // at round-off level only the gradient can still make progress
          const bool flat = ft >= f - 1e-13 * std::abs(f) &&
                            restricted_U_gradient(trial[0], trial[1], p).norm() < g.norm();
          if (gains || flat) {
            x = trial;
            f = ft;
            accepted = true;
            lambda = std::max(lambda * 0.1, 1e-14 * scale);
            break;
          }
        }
      }
      lambda *= 10;
    }
    if (!accepted) return std::nullopt;
    if (near_boundary(x)) throw ConvergenceError("maximize_restricted: iterates ran to the boundary of the strip");
  }
  return std::nullopt;
}

}  // namespace

RestrictedMaximum maximize_restricted(const ExampleParams& p, const MaximizeOptions& opts) {
  const Gates gates = inequality_gate(p);
  if (!gates.all()) throw PreconditionError("maximize_restricted: the inequality gates do not all hold");
  std::optional<RestrictedMaximum> best;
  constexpr double pi = std::numbers::pi;
  for (double t : {pi / 8, pi / 4, 3 * pi / 8})
    for (double z : {0.25, 0.5, 1.0, 2.0}) {
      const auto found = ascend(p, {t, z}, opts);
      if (!found) continue;
      // discard saddles
      const double tol = 1e-8 * std::max(1.0, found->hessian_eigenvalues.cwiseAbs().maxCoeff());
      if (found->hessian_eigenvalues.maxCoeff() > tol) continue;
      if (!best || found->U > best->U) best = found;
    }
  if (!best) throw ConvergenceError("maximize_restricted: no start converged to an interior maximum");
  return *best;
}

std::array<GroupElement, 3> example_symmetry_group() {
  auto diag = [](double a, double b, double c) { return Mat(Eigen::Vector3d(a, b, c).asDiagonal()); };
  return {GroupElement{BodyPermutation::swaps(6, {{2, 3}, {4, 5}}), diag(1, -1, -1)},
          GroupElement{BodyPermutation::swaps(6, {{0, 1}, {4, 5}}), diag(-1, 1, -1)},
          GroupElement{BodyPermutation::swaps(6, {{0, 1}, {2, 3}}), diag(-1, -1, 1)}};
}

ExampleCertificate verify_example(const ExampleParams& p, const MaximizeOptions& opts) {
  const PairPotential<double> u = example_potential(p);
  ExampleCertificate cert;
  cert.params = p;
  cert.gates = inequality_gate(p);
  if (!cert.gates.all()) throw PreconditionError("verify_example: the inequality gates do not all hold");
  constexpr double pi = std::numbers::pi;
  cert.U_reference = restricted_U(pi / 4, 0.5, p);
  cert.U_reference_lifted = value(u, lift(pi / 4, 0.5));
  cert.maximum = maximize_restricted(p, opts);

  const Configuration q = lift(cert.maximum.t, cert.maximum.z);
  cert.record = assemble(u, q, cert.maximum.iterations);
  const auto group = example_symmetry_group();
  for (std::size_t k = 0; k < group.size(); ++k)
    cert.symmetry_residuals[k] = mass_norm(group[k].apply(q) - q, u.masses());

  // the full gradient read along the three symmetric coordinates
  const Configuration full = euclid_gradient(u, q);
  const Eigen::Vector3d projected(full(0, 0) - full(1, 0), full(2, 1) - full(3, 1), full(4, 2) - full(5, 2));
  const Eigen::Vector3d analytic = symmetric_U_gradient(q(0, 0), q(2, 1), q(4, 2), p);
  cert.symmetric_gradient_mismatch = (projected - analytic).norm() / std::max(1.0, analytic.norm());
  cert.central_angle = central_angle(u, q);

  cert.critical = cert.record.defect <= 1e-8;
  cert.non_planar = cert.maximum.z > 1e-3;
  cert.non_central = !cert.record.central;
  cert.positive = cert.record.U_value > 0;
  return cert;
}

// --- dynamics ------------------------------------------------------------------

DynamicsResult integrate_rotation(const PairPotential<double>& u, const Configuration& q0, const Mat& omega,
                                  double horizon, int steps) {
  if (steps < 1 || !(horizon > 0)) throw InvalidArgument("integrate_rotation: need positive horizon and steps");
  if (omega.rows() != q0.cols() || omega.cols() != q0.cols()) throw InvalidArgument("integrate_rotation: generator shape");
  const Masses& m = u.masses();
  const double h = horizon / steps;
  Configuration q = q0;
  Configuration v = apply_linear(q0, omega);

  DynamicsResult out;
  out.period = horizon;
  out.steps = steps;
  auto accel = [&](const Configuration& x) { return mass_gradient(u, x); };
  try {
    for (int k = 1; k <= steps; ++k) {
      const Configuration a1 = accel(q);
      const Configuration q2 = q + 0.5 * h * v, v2 = v + 0.5 * h * a1;
      const Configuration a2 = accel(q2);
      const Configuration q3 = q + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
      const Configuration a3 = accel(q3);
      const Configuration q4 = q + h * v3, v4 = v + h * a3;
      const Configuration a4 = accel(q4);
      q += (h / 6) * (v + 2 * v2 + 2 * v3 + v4);
      v += (h / 6) * (a1 + 2 * a2 + 2 * a3 + a4);
      const double t = k * h;
      if (!q.allFinite()) throw CollisionError("non-finite state");
      const Mat rot = (t * omega).exp();
      out.drift = std::max(out.drift, mass_norm(q - apply_linear(q0, rot), m));
      out.failure_time = t;
    }
  } catch (const CollisionError&) {
    out.completed = false;
    out.failure_time += h;
    return out;
  }
  out.failure_time = 0;
  return out;
}

DynamicsResult verify_dynamics(const PairPotential<double>& u, const RelEquilibriumRecord& rec, int steps) {
  if (!(rec.omega_sq > 0)) throw PreconditionError("verify_dynamics: omega^2 must be positive");
  const double omega = std::sqrt(rec.omega_sq);
  DynamicsResult out = integrate_rotation(u, rec.q, omega * so_basis(3)[2], 2 * std::numbers::pi / omega, steps);
  out.omega = omega;
  return out;
}

DynamicsResult verify_dynamics(const PairPotential<double>& u, const CriticalRecord& rec, int steps) {
  const Configuration& q = rec.q.q();
  const int d = rec.q.dim();
  Mat generator;
  if (d == 2) {
    generator = so_basis(2)[0];
  } else {
    Eigen::JacobiSVD<Mat> svd(Mat(q), Eigen::ComputeFullV);
    if (svd.singularValues()[2] > kPlanarTol * svd.singularValues()[0])
      throw PreconditionError("verify_dynamics: a non-planar central configuration does not rotate rigidly");
    const Eigen::Vector3d n = svd.matrixV().col(2);
    generator = Mat::Zero(3, 3);
    generator << 0, -n[2], n[1], n[2], 0, -n[0], -n[1], n[0], 0;
  }
  const double omega = std::sqrt(u.alpha() * value(u, q) / mass_inner(q, q, u.masses()));
  DynamicsResult out = integrate_rotation(u, q, omega * generator, 2 * std::numbers::pi / omega, steps);
  out.omega = omega;
  return out;
}

}  // namespace ccfix
