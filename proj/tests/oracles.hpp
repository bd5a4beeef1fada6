#pragma once

// Independent reference computations for the tests: finite differences and
// random instance generators. Nothing here calls the analytic derivatives.

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "ccfix/mass_geometry.hpp"

namespace oracle {

using ccfix::Configuration;
using ccfix::Mat;
using ccfix::Vec;

// central differences, h = eps^(1/3) * scale
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double scale = 1.0) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double scale = 1.0) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
  const Vec f0 = f(x);
  Mat j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return j;
}

// second differences f(x + h e_i + h e_j) ..., h = eps^(1/4) * scale
inline Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double scale = 1.0) {
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.25) * scale;
  const auto n = x.size();
  Mat hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      auto at = [&](double a, double b) {
        Vec y = x;
        y[i] += a * h;
        y[j] += b * h;
        return f(y);
      };
      hess(i, j) = hess(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
    }
  return hess;
}

inline double rel_err(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

inline Configuration random_config(std::mt19937_64& gen, int n, int d, double min_sep = 0.05) {
  std::normal_distribution<double> normal;
  for (;;) {
    Configuration q(n, d);
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = normal(gen);
    if (ccfix::is_collision_free(q, min_sep)) return q;
  }
}

inline ccfix::Masses random_masses(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  Vec m(n);
  for (auto& v : m) v = u(gen);
  return ccfix::Masses(m);
}

inline Mat random_rotation(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> normal;
  Mat g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(gen);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline std::vector<int> random_permutation(std::mt19937_64& gen, int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), gen);
  return p;
}

inline ccfix::EllipsoidPoint on_ellipsoid(const Configuration& q, const ccfix::Masses& m) {
  return ccfix::normalize_to_ellipsoid(ccfix::project_center(q, m), m);
}

// two bodies of unit mass at +-(1/sqrt2, 0)
inline Configuration two_body() {
  Configuration q(2, 2);
  q << std::sqrt(0.5), 0, -std::sqrt(0.5), 0;
  return q;
}

// equal-mass equilateral triangle with unit side (unit mass-norm for n = 3)
inline Configuration equilateral(int d = 2) {
  Configuration q = Configuration::Zero(3, d);
  const double r = 1 / std::sqrt(3.0);
  for (int k = 0; k < 3; ++k) {
    q(k, 0) = r * std::cos(2 * M_PI * k / 3);
    q(k, 1) = r * std::sin(2 * M_PI * k / 3);
  }
  return q;
}

// equal-mass Euler collinear configuration on the first axis
inline Configuration collinear(int d = 2) {
  Configuration q = Configuration::Zero(3, d);
  q(0, 0) = -std::sqrt(0.5);
  q(2, 0) = std::sqrt(0.5);
  return q;
}

}  // namespace oracle
