#pragma once

#include "ccfix/mass_geometry.hpp"

namespace ccfix {

struct Alignment {
  Mat rotation;           // g in SO(d)
  double residual = 0.0;  // |target - g source|_M
};

/// Mass-weighted Kabsch alignment: the rotation g in SO(d) minimizing
/// |target - g source|_M. When the minimizer is not unique (collinear sets),
/// the one closest to the identity is returned.
inline Alignment align_rotation(const Configuration& source, const Configuration& target, const Masses& m) {
  if (source.rows() != target.rows() || source.cols() != target.cols() || source.rows() != m.size())
    throw InvalidArgument("align_rotation: shape mismatch");
  const auto d = source.cols();
  // cross-covariance sum_j m_j t_j s_j^T
  Mat cov = target.transpose() * m.values().asDiagonal() * source;
  // tie-break towards the identity among (near-)equal maximizers of tr(g^T cov)
  cov += 1e-12 * (cov.norm() + 1e-300) * Mat::Identity(d, d);
  Eigen::JacobiSVD<Mat> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat flip = Mat::Identity(d, d);
  flip(d - 1, d - 1) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  Alignment out;
  out.rotation = svd.matrixU() * flip * svd.matrixV().transpose();
  out.residual = mass_norm(target - apply_linear(source, out.rotation), m);
  return out;
}

}  // namespace ccfix
