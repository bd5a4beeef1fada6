#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ccfix/errors.hpp"

namespace ccfix {

// A configuration stores one body per row; row-major storage makes the
// flattened vector body-major, (q_1, q_2, ..., q_n).
template <typename Scalar>
using ConfigT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Configuration = ConfigT<double>;
using Vec = VecT<double>;
using Mat = MatT<double>;

/// Relative collision guard: min pair distance must exceed this times the diameter.
inline constexpr double kCollisionGuard = 1e-9;

/// Positive masses defining the mass-metric <v,w>_M = sum_j m_j v_j . w_j.
template <typename Scalar>
class BasicMasses {
 public:
  BasicMasses() = default;

  explicit BasicMasses(VecT<Scalar> m) : m_(std::move(m)) {
    if (m_.size() < 2) throw InvalidArgument("masses: need at least two bodies");
    for (Eigen::Index j = 0; j < m_.size(); ++j) {
      if (!(m_[j] > Scalar(0)) || !std::isfinite(static_cast<double>(m_[j])))
        throw InvalidArgument("masses: every mass must be positive and finite");
    }
  }

  BasicMasses(std::initializer_list<Scalar> m)
      : BasicMasses(VecT<Scalar>(Eigen::Map<const VecT<Scalar>>(m.begin(), Eigen::Index(m.size())))) {}

  static BasicMasses equal(int n, Scalar value = Scalar(1)) {
    return BasicMasses(VecT<Scalar>::Constant(n, value));
  }

  int size() const { return static_cast<int>(m_.size()); }
  Scalar operator[](Eigen::Index j) const { return m_[j]; }
  const VecT<Scalar>& values() const { return m_; }
  Scalar total() const { return m_.sum(); }

  /// Per-coordinate weights for the flattened vector of an n x d array.
  VecT<Scalar> expanded(int d) const {
    VecT<Scalar> w(m_.size() * d);
    for (Eigen::Index j = 0; j < m_.size(); ++j) w.segment(j * d, d).setConstant(m_[j]);
    return w;
  }

  template <typename Other>
  BasicMasses<Other> cast() const {
    return BasicMasses<Other>(m_.template cast<Other>());
  }

 private:
  VecT<Scalar> m_;
};

using Masses = BasicMasses<double>;

template <typename Derived>
Eigen::Map<const VecT<typename Derived::Scalar>> flat(const Eigen::PlainObjectBase<Derived>& q) {
  static_assert(Derived::IsRowMajor || Derived::ColsAtCompileTime == 1,
                "flat() needs body-major storage");
  return Eigen::Map<const VecT<typename Derived::Scalar>>(q.data(), q.size());
}

template <typename Scalar>
ConfigT<Scalar> unflat(const VecT<Scalar>& v, int d) {
  return Eigen::Map<const ConfigT<Scalar>>(v.data(), v.size() / d, d);
}

namespace detail {
template <typename DA, typename DB, typename Scalar>
void require_shapes(const Eigen::MatrixBase<DA>& v, const Eigen::MatrixBase<DB>& w,
                    const BasicMasses<Scalar>& m) {
  if (v.rows() != w.rows() || v.cols() != w.cols() || v.rows() != m.size())
    throw InvalidArgument("mass_inner: shape mismatch");
}
}  // namespace detail

/// <v,w>_M for two n x d arrays.
template <typename DA, typename DB, typename Scalar>
Scalar mass_inner(const Eigen::MatrixBase<DA>& v, const Eigen::MatrixBase<DB>& w,
                  const BasicMasses<Scalar>& m) {
  detail::require_shapes(v, w, m);
  return (v.cwiseProduct(w).rowwise().sum().array() * m.values().array()).sum();
}

template <typename Derived, typename Scalar>
Scalar mass_norm(const Eigen::MatrixBase<Derived>& v, const BasicMasses<Scalar>& m) {
  using std::sqrt;
  return sqrt(mass_inner(v, v, m));
}

template <typename Derived, typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> center_of_mass(const Eigen::MatrixBase<Derived>& q,
                                                        const BasicMasses<Scalar>& m) {
  if (q.rows() != m.size()) throw InvalidArgument("center_of_mass: shape mismatch");
  return (m.values().transpose() * q) / m.total();
}

/// Orthogonal (mass-metric) projection onto the center-of-mass subspace Y.
template <typename Derived, typename Scalar>
ConfigT<Scalar> project_center(const Eigen::MatrixBase<Derived>& q, const BasicMasses<Scalar>& m) {
  ConfigT<Scalar> out = q;
  out.rowwise() -= center_of_mass(q, m);
  return out;
}

template <typename Derived>
typename Derived::Scalar min_pair_distance(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = i + 1; j < q.rows(); ++j) best = std::min(best, (q.row(i) - q.row(j)).norm());
  return best;
}

template <typename Derived>
typename Derived::Scalar diameter(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  Scalar best(0);
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = i + 1; j < q.rows(); ++j) best = std::max(best, (q.row(i) - q.row(j)).norm());
  return best;
}

template <typename Derived>
bool is_collision_free(const Eigen::MatrixBase<Derived>& q, double guard = kCollisionGuard) {
  const auto diam = diameter(q);
  if (!(diam > 0) || !std::isfinite(static_cast<double>(diam))) return false;
  return min_pair_distance(q) >= typename Derived::Scalar(guard) * diam;
}

template <typename Derived>
void require_collision_free(const Eigen::MatrixBase<Derived>& q, double guard = kCollisionGuard) {
  if (!is_collision_free(q, guard)) throw CollisionError("configuration has colliding bodies");
}

/// Sorted multiset of mutual distances; rotation and reflection invariant.
template <typename Derived>
std::vector<double> distance_signature(const Eigen::MatrixBase<Derived>& q) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = i + 1; j < q.rows(); ++j)
      out.push_back(static_cast<double>((q.row(i) - q.row(j)).norm()));
  std::sort(out.begin(), out.end());
  return out;
}

/// A centered configuration of unit mass-norm: a point of the inertia ellipsoid S.
class EllipsoidPoint {
 public:
  EllipsoidPoint(Configuration q, const Masses& m, double tol = 1e-12) : q_(std::move(q)) {
    if (q_.rows() != m.size()) throw InvalidArgument("EllipsoidPoint: shape mismatch");
    if (center_of_mass(q_, m).norm() > tol * std::sqrt(m.total()) + tol)
      throw InvalidArgument("EllipsoidPoint: configuration is not centered");
    if (std::abs(mass_inner(q_, q_, m) - 1.0) > tol)
      throw InvalidArgument("EllipsoidPoint: mass-norm is not 1");
  }

  const Configuration& q() const { return q_; }
  int bodies() const { return static_cast<int>(q_.rows()); }
  int dim() const { return static_cast<int>(q_.cols()); }

 private:
  Configuration q_;
};

/// Radial projection of a centered configuration onto S.
inline EllipsoidPoint normalize_to_ellipsoid(const Configuration& q, const Masses& m) {
  const double norm = mass_norm(q, m);
  if (!(norm > 0)) throw InvalidArgument("normalize_to_ellipsoid: zero mass-norm");
  Configuration scaled = q / norm;
  if (center_of_mass(scaled, m).norm() > 1e-10)
    throw InvalidArgument("normalize_to_ellipsoid: configuration is not centered");
  scaled = project_center(scaled, m);
  scaled /= mass_norm(scaled, m);
  return EllipsoidPoint(std::move(scaled), m);
}

inline void require_supported_dim(int d) {
  if (d != 2 && d != 3) throw InvalidArgument("only d = 2 and d = 3 are supported");
}

/// Fixed basis of so(d): the standard generator for d = 2, rotations about x, y, z for d = 3.
template <typename Scalar = double>
std::vector<MatT<Scalar>> so_basis(int d) {
  require_supported_dim(d);
  std::vector<MatT<Scalar>> out;
  if (d == 2) {
    MatT<Scalar> j(2, 2);
    j << 0, -1, 1, 0;
    out.push_back(j);
    return out;
  }
  for (int axis = 0; axis < 3; ++axis) {
    MatT<Scalar> l = MatT<Scalar>::Zero(3, 3);
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    l(b, a) = 1;
    l(a, b) = -1;
    out.push_back(l);
  }
  return out;
}

/// Applies a d x d linear map to every body: (A q)_j = A q_j.
template <typename Derived, typename DA>
ConfigT<typename Derived::Scalar> apply_linear(const Eigen::MatrixBase<Derived>& q,
                                               const Eigen::MatrixBase<DA>& a) {
  return q * a.transpose();
}

/// Orbit directions {Omega_k q} for the so(d) basis, tangent to S at q.
template <typename Derived>
std::vector<ConfigT<typename Derived::Scalar>> orbit_directions(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  std::vector<ConfigT<Scalar>> out;
  for (const auto& omega : so_basis<Scalar>(static_cast<int>(q.cols()))) out.push_back(apply_linear(q, omega));
  return out;
}

/// Numerical rank of the orbit directions in the mass metric; d(d-1)/2 iff the isotropy is trivial.
template <typename Derived, typename Scalar>
int orbit_rank(const Eigen::MatrixBase<Derived>& q, const BasicMasses<Scalar>& m, double rel_tol = 1e-6) {
  const auto dirs = orbit_directions(q);
  const auto k = static_cast<Eigen::Index>(dirs.size());
  MatT<Scalar> gram(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) gram(a, b) = mass_inner(dirs[a], dirs[b], m);
  Eigen::SelfAdjointEigenSolver<MatT<Scalar>> eig(gram);
  const auto& ev = eig.eigenvalues();
  const Scalar top = ev.cwiseAbs().maxCoeff();
  int rank = 0;
  for (Eigen::Index a = 0; a < k; ++a)
    if (top > Scalar(0) && ev[a] > Scalar(rel_tol * rel_tol) * top) ++rank;
  return rank;
}

inline int so_dim(int d) { return d * (d - 1) / 2; }

struct RotationForm {
  double lhs = 0;  // (e^Omega x) . (Omega x) via the matrix exponential
  double rhs = 0;  // sum_i theta_i sin(theta_i) |z_i|^2
};

/// Angles of a generator in diagonal 2x2-block form [[0,-theta],[theta,0]]; throws otherwise.
inline std::vector<double> block_angles(const Mat& omega, double tol = 1e-14) {
  const auto d = omega.rows();
  if (omega.cols() != d) throw InvalidArgument("generator must be square");
  std::vector<double> angles;
  Mat rebuilt = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i + 1 < d; i += 2) {
    angles.push_back(omega(i + 1, i));
    rebuilt(i + 1, i) = omega(i + 1, i);
    rebuilt(i, i + 1) = -omega(i + 1, i);
  }
  if ((omega - rebuilt).cwiseAbs().maxCoeff() > tol)
    throw InvalidArgument("generator is not in skew-symmetric 2x2 block-diagonal form");
  return angles;
}

inline Mat block_generator(const std::vector<double>& angles, int d) {
  if (static_cast<int>(angles.size()) > d / 2) throw InvalidArgument("too many rotation blocks");
  Mat omega = Mat::Zero(d, d);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    omega(2 * i + 1, 2 * i) = angles[i];
    omega(2 * i, 2 * i + 1) = -angles[i];
  }
  return omega;
}

inline RotationForm rotation_form_check(const Mat& omega, const Vec& x) {
  if (x.size() != omega.rows()) throw InvalidArgument("rotation_form_check: dimension mismatch");
  const auto angles = block_angles(omega);
  const Mat rot = omega.exp();
  RotationForm out;
  out.lhs = (rot * x).dot(omega * x);
  for (std::size_t i = 0; i < angles.size(); ++i)
    out.rhs += angles[i] * std::sin(angles[i]) * x.segment(2 * i, 2).squaredNorm();
  return out;
}

}  // namespace ccfix
