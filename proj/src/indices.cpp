#include "ccfix/indices.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ccfix/detail/level_set_newton.hpp"

namespace ccfix {

std::vector<Configuration> AdaptedFrame::chart_basis() const {
  std::vector<Configuration> out;
  for (Eigen::Index a = 1; a < from_chart.cols(); ++a) out.push_back(unflat(Vec(from_chart.col(a)), d));
  return out;
}

Configuration AdaptedFrame::configuration(const Vec& c) const { return unflat(Vec(from_chart * c), d); }

Mat chart_rotation(const Vec& y) {
  const auto k = y.size();
  Mat out = Mat::Identity(k, k);
  Vec v = y;
  v[0] -= 1.0;
  if (v.norm() <= 1e-15) return out;
  out -= 2.0 * v * v.transpose() / v.squaredNorm();
  // the reflection has det -1; flip the last axis, which fixes e_0
  if (k > 1) out.row(k - 1) *= -1.0;
  return out;
}

AdaptedFrame adapted_frame(const EllipsoidPoint& q, const Masses& m, std::optional<std::uint64_t> completion_seed) {
  const int d = q.dim();
  const Mat basis = detail::complement_basis(detail::center_constraint_basis(m, d));
  const Vec y = basis.transpose() * detail::to_scaled(q.q(), m);
  Mat rot = chart_rotation(y);
  if (completion_seed && y.size() > 2) {
    const auto l = y.size() - 1;
    std::mt19937_64 gen(*completion_seed);
    std::normal_distribution<double> normal;
    Mat g(l, l);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(gen);
    Mat qmat = Eigen::HouseholderQR<Mat>(g).householderQ();
    if (qmat.determinant() < 0) qmat.col(0) *= -1.0;
    Mat completion = Mat::Identity(l + 1, l + 1);
    completion.bottomRightCorner(l, l) = qmat;
    rot = completion * rot;
  }
  const Vec sqrt_m = m.expanded(d).cwiseSqrt();
  AdaptedFrame frame;
  frame.d = d;
  frame.rotation = rot;
  frame.to_chart = rot * basis.transpose() * sqrt_m.asDiagonal();
  frame.from_chart = sqrt_m.cwiseInverse().asDiagonal() * basis * rot.transpose();
  return frame;
}

namespace {

struct ChartDerivatives {
  Mat hess;  // (l+1) x (l+1)
  Vec grad;  // l+1
};

ChartDerivatives chart_derivatives(const PairPotential<double>& u, const AdaptedFrame& frame,
                                   const EllipsoidPoint& q) {
  ChartDerivatives out;
  out.hess = frame.from_chart.transpose() * hessian(u, q.q()) * frame.from_chart;
  out.grad = frame.from_chart.transpose() * flat(euclid_gradient(u, q.q()));
  return out;
}

struct SpectrumSplit {
  int kernel = 0;
  int negative = 0;
  double gap_ratio = std::numeric_limits<double>::infinity();
};

SpectrumSplit split_spectrum(const Vec& ev, double alpha_u) {
  const double band = kKernelRelTol * std::max(ev.cwiseAbs().maxCoeff(), alpha_u);
  SpectrumSplit s;
  double kernel_max = 0, rest_min = std::numeric_limits<double>::infinity();
  for (double e : ev) {
    if (std::abs(e) <= band) {
      ++s.kernel;
      kernel_max = std::max(kernel_max, std::abs(e));
    } else {
      rest_min = std::min(rest_min, std::abs(e));
      if (e < 0) ++s.negative;
    }
  }
  if (kernel_max > 0) s.gap_ratio = rest_min / kernel_max;
  return s;
}

void require_maximal_isotropy(const CriticalRecord& rec, int d) {
  if (rec.isotropy_rank < so_dim(d))
    throw DegenerateError("degenerate: non-maximal isotropy, orbit rank " + std::to_string(rec.isotropy_rank) + " < " +
                          std::to_string(so_dim(d)));
}

}  // namespace

Mat restricted_hessian(const PairPotential<double>& u, const AdaptedFrame& frame, const EllipsoidPoint& q) {
  const auto der = chart_derivatives(u, frame, q);
  const auto l = der.hess.rows() - 1;
  Mat out = der.hess.bottomRightCorner(l, l);
  out.diagonal().array() -= der.grad[0];
  out = 0.5 * (out + out.transpose());
  if (l > 0) {
    const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(out, Eigen::EigenvaluesOnly).eigenvalues();
    if (split_spectrum(ev, u.alpha() * value(u, q.q())).kernel > so_dim(frame.d))
      throw DegenerateError("degenerate: restricted Hessian kernel exceeds the orbit dimension");
  }
  return out;
}

FJacobian map_F_jacobian(const PairPotential<double>& u, const AdaptedFrame& frame, const EllipsoidPoint& q) {
  const auto der = chart_derivatives(u, frame, q);
  const auto l = der.hess.rows() - 1;
  const double gnorm = der.grad.norm();
  // d(-g/|g|)[v] = -H v / |g| + g (g . H v) / |g|^3
  const Mat full = -der.hess / gnorm + der.grad * (der.grad.transpose() * der.hess) / (gnorm * gnorm * gnorm);
  FJacobian out;
  out.matrix = full.bottomRightCorner(l, l);
  out.du_dx0 = der.grad[0];
  out.grad_norm = gnorm;
  out.alpha_u = u.alpha() * value(u, q.q());
  return out;
}

IdentityResiduals identity_check(const PairPotential<double>& u, const CriticalRecord& rec) {
  require_maximal_isotropy(rec, rec.q.dim());
  const AdaptedFrame frame = adapted_frame(rec.q, u.masses());
  const Mat d2 = restricted_hessian(u, frame, rec.q);
  const FJacobian jac = map_F_jacobian(u, frame, rec.q);
  const Mat eye = Mat::Identity(d2.rows(), d2.cols());
  const Mat shift = jac.alpha_u * (eye - jac.matrix);
  IdentityResiduals out;
  out.stated = (-shift - d2).norm() / jac.alpha_u;
  out.corrected = (shift - d2).norm() / jac.alpha_u;
  return out;
}

int epsilon(int n, int d) {
  if (n < 2) throw InvalidArgument("epsilon: n must be at least 2");
  require_supported_dim(d);
  return d * (n - 1) - 1 - so_dim(d);
}

IndexRecord fixed_point_index(const PairPotential<double>& u, const CriticalRecord& rec) {
  const int d = rec.q.dim();
  const int n = rec.q.bodies();
  require_maximal_isotropy(rec, d);
  const AdaptedFrame frame = adapted_frame(rec.q, u.masses());
  const Mat d2 = restricted_hessian(u, frame, rec.q);
  const FJacobian jac = map_F_jacobian(u, frame, rec.q);

  IndexRecord out;
  out.epsilon = epsilon(n, d);
  out.spectrum = Eigen::SelfAdjointEigenSolver<Mat>(d2, Eigen::EigenvaluesOnly).eigenvalues();
  const SpectrumSplit split = split_spectrum(out.spectrum, jac.alpha_u);
  out.kernel_dim = split.kernel;
  out.gap_ratio = split.gap_ratio;
  if (split.kernel != so_dim(d))
    throw DegenerateError("degenerate: kernel dimension " + std::to_string(split.kernel) + " != " +
                          std::to_string(so_dim(d)));
  if (split.gap_ratio < kMinGapRatio)
    throw DegenerateError("ambiguous spectrum: kernel gap ratio " + std::to_string(split.gap_ratio));
  out.morse_index = split.negative;
  out.formula_index = ((out.morse_index + out.epsilon) % 2 == 0) ? 1 : -1;

  // slice = chart directions orthogonal to the SO(d) orbit
  const auto l = d2.rows();
  const auto orbit = orbit_directions(rec.q.q());
  Mat orbit_chart(l, static_cast<Eigen::Index>(orbit.size()));
  for (std::size_t k = 0; k < orbit.size(); ++k)
    orbit_chart.col(static_cast<Eigen::Index>(k)) = frame.coordinates(orbit[k]).tail(l);
  const Mat slice = detail::complement_basis(orbit_chart);
  const Mat reduced = Mat::Identity(slice.cols(), slice.cols()) - slice.transpose() * jac.matrix * slice;
  out.slice_determinant = slice.cols() == 0 ? 1.0 : reduced.determinant();
  out.fixed_point_index = out.slice_determinant > 0 ? 1 : -1;
  out.routes_agree = out.fixed_point_index == out.formula_index;

  const Eigen::VectorXcd fev = Eigen::EigenSolver<Mat>(jac.matrix, false).eigenvalues();
  for (const auto& e : fev)
    if (std::abs(e - 1.0) <= 1e-6) ++out.unit_eigenvalues;

  const Mat eye = Mat::Identity(l, l);
  const Mat shift = jac.alpha_u * (eye - jac.matrix);
  out.identity.stated = (-shift - d2).norm() / jac.alpha_u;
  out.identity.corrected = (shift - d2).norm() / jac.alpha_u;
  return out;
}

}  // namespace ccfix
