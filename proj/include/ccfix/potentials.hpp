#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ccfix/mass_geometry.hpp"

namespace ccfix {

/// U(q) = sum_{i<j} kappa_ij / |q_i - q_j|^alpha, homogeneous of degree -alpha.
template <typename Scalar>
class PairPotential {
 public:
  PairPotential(MatT<Scalar> kappa, Scalar alpha, BasicMasses<Scalar> masses)
      : kappa_(std::move(kappa)), alpha_(alpha), masses_(std::move(masses)) {
    const auto n = masses_.size();
    if (kappa_.rows() != n || kappa_.cols() != n) throw InvalidArgument("kappa must be n x n");
    if (!(alpha_ > Scalar(0))) throw InvalidArgument("alpha must be positive");
    for (int i = 0; i < n; ++i) {
      kappa_(i, i) = Scalar(0);
      for (int j = 0; j < i; ++j) {
        using std::abs;
        const Scalar scale = abs(kappa_(i, j)) + abs(kappa_(j, i)) + Scalar(1);
        if (abs(kappa_(i, j) - kappa_(j, i)) > Scalar(1e-14) * scale)
          throw InvalidArgument("kappa must be symmetric");
      }
    }
  }

  /// Gravitational coefficients kappa_ij = m_i m_j.
  static PairPotential newtonian(BasicMasses<Scalar> masses, Scalar alpha = Scalar(1)) {
    const auto& m = masses.values();
    MatT<Scalar> kappa = m * m.transpose();
    return PairPotential(std::move(kappa), alpha, std::move(masses));
  }

  /// Charged coefficients kappa_ij = 1 - gamma_i gamma_j.
  static PairPotential charged(const VecT<Scalar>& gamma, BasicMasses<Scalar> masses,
                               Scalar alpha = Scalar(1)) {
    if (gamma.size() != masses.size()) throw InvalidArgument("gamma must have n entries");
    MatT<Scalar> kappa = MatT<Scalar>::Ones(gamma.size(), gamma.size()) - gamma * gamma.transpose();
    return PairPotential(std::move(kappa), alpha, std::move(masses));
  }

  const MatT<Scalar>& kappa() const { return kappa_; }
  Scalar alpha() const { return alpha_; }
  const BasicMasses<Scalar>& masses() const { return masses_; }
  int size() const { return masses_.size(); }

  /// True when every off-diagonal coefficient is positive (attractive, Newtonian-like).
  bool all_positive() const {
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j)
        if (i != j && !(kappa_(i, j) > Scalar(0))) return false;
    return true;
  }

 private:
  MatT<Scalar> kappa_;
  Scalar alpha_;
  BasicMasses<Scalar> masses_;
};

namespace detail {
template <typename Scalar, typename Derived>
void require_config(const PairPotential<Scalar>& u, const Eigen::MatrixBase<Derived>& q) {
  if (q.rows() != u.size()) throw InvalidArgument("configuration has the wrong number of bodies");
  require_collision_free(q);
}
}  // namespace detail

template <typename Scalar, typename Derived>
Scalar value(const PairPotential<Scalar>& u, const Eigen::MatrixBase<Derived>& q) {
  using std::pow;
  detail::require_config(u, q);
  Scalar sum(0);
  for (int i = 0; i < u.size(); ++i)
    for (int j = i + 1; j < u.size(); ++j)
      sum += u.kappa()(i, j) * pow((q.row(i) - q.row(j)).norm(), -u.alpha());
  return sum;
}

/// dU/dq_j = alpha sum_{k != j} kappa_jk (q_k - q_j) / |q_k - q_j|^(alpha+2).
template <typename Scalar, typename Derived>
ConfigT<Scalar> euclid_gradient(const PairPotential<Scalar>& u, const Eigen::MatrixBase<Derived>& q) {
  using std::pow;
  detail::require_config(u, q);
  ConfigT<Scalar> grad = ConfigT<Scalar>::Zero(q.rows(), q.cols());
  for (int j = 0; j < u.size(); ++j)
    for (int k = j + 1; k < u.size(); ++k) {
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> diff = q.row(k) - q.row(j);
      const Scalar coeff = u.alpha() * u.kappa()(j, k) * pow(diff.norm(), -(u.alpha() + Scalar(2)));
      grad.row(j) += coeff * diff;
      grad.row(k) -= coeff * diff;
    }
  return grad;
}

/// Mass-metric gradient, (grad_M U)_j = m_j^{-1} dU/dq_j.
template <typename Scalar, typename Derived>
ConfigT<Scalar> mass_gradient(const PairPotential<Scalar>& u, const Eigen::MatrixBase<Derived>& q) {
  ConfigT<Scalar> grad = euclid_gradient(u, q);
  grad.array().colwise() /= u.masses().values().array();
  return grad;
}

/// Ambient Hessian d^2U/dq dq in the body-major flattening (nd x nd).
template <typename Scalar, typename Derived>
MatT<Scalar> hessian(const PairPotential<Scalar>& u, const Eigen::MatrixBase<Derived>& q) {
  using std::pow;
  detail::require_config(u, q);
  const auto d = q.cols();
  MatT<Scalar> h = MatT<Scalar>::Zero(u.size() * d, u.size() * d);
  const MatT<Scalar> eye = MatT<Scalar>::Identity(d, d);
  for (int j = 0; j < u.size(); ++j)
    for (int k = j + 1; k < u.size(); ++k) {
      const VecT<Scalar> diff = (q.row(j) - q.row(k)).transpose();
      const Scalar r2 = diff.squaredNorm();
      const Scalar a = u.alpha();
      // second derivative of kappa r^-alpha with respect to the separation vector
      const MatT<Scalar> block = a * u.kappa()(j, k) * pow(r2, -(a + Scalar(2)) / Scalar(2)) *
                                 ((a + Scalar(2)) * diff * diff.transpose() / r2 - eye);
      h.block(j * d, j * d, d, d) += block;
      h.block(k * d, k * d, d, d) += block;
      h.block(j * d, k * d, d, d) -= block;
      h.block(k * d, j * d, d, d) -= block;
    }
  return h;
}

/// A permutation of bodies: body i moves to slot image[i].
struct BodyPermutation {
  std::vector<int> image;

  static BodyPermutation identity(int n) {
    BodyPermutation p;
    for (int i = 0; i < n; ++i) p.image.push_back(i);
    return p;
  }

  /// Product of disjoint transpositions given as 0-based pairs.
  static BodyPermutation swaps(int n, std::initializer_list<std::pair<int, int>> pairs) {
    auto p = identity(n);
    for (auto [a, b] : pairs) std::swap(p.image[a], p.image[b]);
    return p;
  }

  int size() const { return static_cast<int>(image.size()); }

  bool is_identity() const {
    for (int i = 0; i < size(); ++i)
      if (image[i] != i) return false;
    return true;
  }

  void validate(int n) const {
    if (size() != n) throw InvalidArgument("permutation has the wrong length");
    std::vector<bool> seen(n, false);
    for (int v : image) {
      if (v < 0 || v >= n || seen[v]) throw InvalidArgument("not a permutation");
      seen[v] = true;
    }
  }

  template <typename Derived>
  ConfigT<typename Derived::Scalar> apply(const Eigen::MatrixBase<Derived>& q) const {
    ConfigT<typename Derived::Scalar> out(q.rows(), q.cols());
    for (int i = 0; i < size(); ++i) out.row(image[i]) = q.row(i);
    return out;
  }

  BodyPermutation compose(const BodyPermutation& first) const {
    BodyPermutation out;
    for (int i = 0; i < size(); ++i) out.image.push_back(image[first.image[i]]);
    return out;
  }
};

/// An element (sigma, R) of Sigma_n x O(d) acting by (g q)_{sigma(i)} = R q_i.
struct GroupElement {
  BodyPermutation perm;
  Mat rotation;

  template <typename Derived>
  ConfigT<typename Derived::Scalar> apply(const Eigen::MatrixBase<Derived>& q) const {
    return perm.apply(apply_linear(q, rotation.cast<typename Derived::Scalar>()));
  }
};

/// Generators of the coefficient- and mass-preserving permutation subgroup.
struct SymmetrySpec {
  std::vector<BodyPermutation> permutations;
  bool include_rotations = true;
};

/// Throws SymmetryError unless sigma preserves kappa and the masses.
template <typename Scalar>
void require_preserves(const PairPotential<Scalar>& u, const BodyPermutation& sigma, double tol = 1e-14) {
  sigma.validate(u.size());
  using std::abs;
  for (int i = 0; i < u.size(); ++i) {
    const int si = sigma.image[i];
    if (abs(u.masses()[si] - u.masses()[i]) > Scalar(tol) * abs(u.masses()[i]))
      throw SymmetryError("permutation does not preserve the masses");
    for (int j = 0; j < u.size(); ++j) {
      const int sj = sigma.image[j];
      if (abs(u.kappa()(si, sj) - u.kappa()(i, j)) > Scalar(tol) * (abs(u.kappa()(i, j)) + Scalar(1)))
        throw SymmetryError("permutation does not preserve the pair coefficients");
    }
  }
}

template <typename Scalar>
void validate(const SymmetrySpec& spec, const PairPotential<Scalar>& u) {
  for (const auto& p : spec.permutations) require_preserves(u, p);
}

/// Closure of the generators under composition (small groups only).
inline std::vector<BodyPermutation> generate_group(const std::vector<BodyPermutation>& generators, int n) {
  std::vector<BodyPermutation> group{BodyPermutation::identity(n)};
  for (std::size_t k = 0; k < group.size(); ++k)
    for (const auto& g : generators) {
      auto candidate = g.compose(group[k]);
      const bool known = std::any_of(group.begin(), group.end(),
                                     [&](const BodyPermutation& h) { return h.image == candidate.image; });
      if (!known) group.push_back(std::move(candidate));
    }
  return group;
}

struct InvarianceResiduals {
  double value = 0;     // |U(gq) - U(q)|
  double gradient = 0;  // |grad_M U(gq) - g grad_M U(q)|_M
};

template <typename Derived>
InvarianceResiduals invariance_check(const PairPotential<double>& u, const Eigen::MatrixBase<Derived>& q,
                                     const GroupElement& g) {
  require_preserves(u, g.perm);
  if (!(g.rotation.transpose() * g.rotation).isIdentity(1e-12))
    throw SymmetryError("rotation part is not orthogonal");
  const Configuration gq = g.apply(q);
  InvarianceResiduals out;
  out.value = std::abs(value(u, gq) - value(u, q));
  out.gradient = mass_norm(mass_gradient(u, gq) - g.apply(mass_gradient(u, q)), u.masses());
  return out;
}

}  // namespace ccfix
