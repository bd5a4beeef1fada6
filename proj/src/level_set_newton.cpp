#include "ccfix/detail/level_set_newton.hpp"

#include <cmath>
#include <limits>

namespace ccfix::detail {

Vec to_scaled(const Configuration& q, const Masses& m) {
  Vec x = flat(q);
  return x.cwiseProduct(m.expanded(static_cast<int>(q.cols())).cwiseSqrt());
}

Configuration from_scaled(const Vec& x, const Masses& m, int d) {
  const Vec v = x.cwiseQuotient(m.expanded(d).cwiseSqrt());
  return unflat(v, d);
}

Mat center_constraint_basis(const Masses& m, int d) {
  Mat w = Mat::Zero(m.size() * d, d);
  for (int j = 0; j < m.size(); ++j)
    for (int a = 0; a < d; ++a) w(j * d + a, a) = std::sqrt(m[j]);
  for (int a = 0; a < d; ++a) w.col(a).normalize();
  return w;
}

Mat complement_basis(const Mat& cols, double rel_tol) {
  Eigen::ColPivHouseholderQR<Mat> qr(cols);
  qr.setThreshold(rel_tol);
  const auto rank = qr.rank();
  const Mat q = qr.householderQ();
  return q.rightCols(cols.rows() - rank);
}

namespace {

Mat body_block(const Mat& p, int n) {
  const auto d = p.rows();
  Mat out = Mat::Zero(n * d, n * d);
  for (int j = 0; j < n; ++j) out.block(j * d, j * d, d, d) = p;
  return out;
}

Vec apply_bodywise(const Mat& a, const Vec& x) {
  const auto d = a.rows();
  Vec out(x.size());
  for (Eigen::Index j = 0; j < x.size() / d; ++j) out.segment(j * d, d) = a * x.segment(j * d, d);
  return out;
}

struct Evaluation {
  double u = 0;
  Vec grad;  // scaled-coordinate gradient
  double residual = std::numeric_limits<double>::infinity();
};

Evaluation evaluate(const PairPotential<double>& u, const LevelSet& set, const Vec& x, bool with_grad = true) {
  const int d = static_cast<int>(set.body_projector.rows());
  const Configuration q = from_scaled(x, u.masses(), d);
  Evaluation e;
  e.u = value(u, q);
  if (!with_grad) return e;
  e.grad = flat(euclid_gradient(u, q)).cwiseQuotient(u.masses().expanded(d).cwiseSqrt());
  const Vec normal = apply_bodywise(set.body_projector, x);
  const Vec tangential = e.grad - (e.grad.dot(normal) / normal.squaredNorm()) * normal;
  e.residual = tangential.norm() / e.grad.norm();
  return e;
}

}  // namespace

Vec retract(const LevelSet& set, const Vec& x) {
  const Vec horizontal = apply_bodywise(set.body_projector, x);
  const double h = horizontal.squaredNorm();
  if (!(h > 0)) throw DomainError("retraction through the axis of the level set");
  return x - horizontal + std::sqrt(set.level / h) * horizontal;
}

double level_set_residual(const PairPotential<double>& u, const LevelSet& set, const Vec& x) {
  return evaluate(u, set, x).residual;
}

LevelSetResult solve_level_set(const PairPotential<double>& u, const LevelSet& set, Vec x0,
                               const LevelSetOptions& opts) {
  const Masses& m = u.masses();
  const int d = static_cast<int>(set.body_projector.rows());
  const int n = m.size();
  const Mat w = center_constraint_basis(m, d);
  const Mat qform = body_block(set.body_projector, n);
  const Mat sqrt_inv = m.expanded(d).cwiseSqrt().cwiseInverse().asDiagonal();

  auto to_y = [&](const Vec& x) -> Vec { return x - w * (w.transpose() * x); };
  auto admissible = [&](const Vec& x) {
    return is_collision_free(from_scaled(x, m, d), 1e-7);
  };

  Vec x = retract(set, to_y(x0));
  if (!admissible(x)) throw CollisionError("seed is too close to a collision");
  Evaluation cur = evaluate(u, set, x);
  if (opts.require_positive_u && !(cur.u > 0)) throw DomainError("seed has U <= 0");

  double mu = -1.0;
  int fallbacks = 0;
  LevelSetResult out;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    out.iterations = iter;
    if (cur.residual <= opts.tol) {
      out.x = x;
      out.residual = cur.residual;
      return out;
    }
    const Configuration q = from_scaled(x, m, d);
    const Vec normal = qform * x;
    const double beta = cur.grad.dot(normal) / normal.squaredNorm();

    Mat constraints(n * d, d + 1 + static_cast<Eigen::Index>(set.gauge_generators.size()));
    constraints.leftCols(d) = w;
    constraints.col(d) = normal.normalized();
    for (std::size_t k = 0; k < set.gauge_generators.size(); ++k)
      constraints.col(d + 1 + static_cast<Eigen::Index>(k)) = apply_bodywise(set.gauge_generators[k], x);
    const Mat z = complement_basis(constraints);

    const Mat h = sqrt_inv * hessian(u, q) * sqrt_inv - beta * qform;
    const Mat hz = z.transpose() * h * z;
    const Vec rz = z.transpose() * cur.grad;
    const Mat normal_eq = hz.transpose() * hz;
    const Vec rhs = -hz.transpose() * rz;
    const double scale = normal_eq.diagonal().cwiseAbs().maxCoeff() + 1e-300;
    if (mu < 0) mu = 1e-6 * scale;

    const Vec step = (normal_eq + mu * Mat::Identity(z.cols(), z.cols())).ldlt().solve(rhs);
    bool accepted = false;
    if (step.allFinite()) {
      const Vec trial = retract(set, to_y(x + z * step));
      if (admissible(trial)) {
        Evaluation next = evaluate(u, set, trial);
        if ((next.u > 0 || !opts.require_positive_u) && next.residual < cur.residual) {
          x = trial;
          cur = std::move(next);
          accepted = true;
        }
      }
    }
    if (accepted) {
      mu = std::max(mu * 0.1, 1e-18 * scale);
      continue;
    }
    mu *= 10.0;
    if (mu > 1e10 * scale) {
      // stalled: try the fixed-point map, otherwise give up
      if (!opts.fallback_map || fallbacks >= 2) break;
      ++fallbacks;
      for (int k = 0; k < opts.fallback_steps; ++k) {
        const Vec mapped = opts.fallback_map(x);
        const Vec trial = retract(set, to_y((1.0 - opts.damping) * x + opts.damping * mapped));
        if (!admissible(trial) || (opts.require_positive_u && !(value(u, from_scaled(trial, m, d)) > 0))) break;
        x = trial;
      }
      cur = evaluate(u, set, x);
      mu = -1.0;
    }
  }
  if (!is_collision_free(from_scaled(x, m, d), 1e-6))
    throw CollisionError("iterate approached a collision");
  throw ConvergenceError("level-set Newton did not converge (residual " + std::to_string(cur.residual) + ")");
}

}  // namespace ccfix::detail
