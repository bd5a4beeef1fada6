#include "ccfix/cc_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <tuple>

#include "ccfix/detail/level_set_newton.hpp"

namespace ccfix {

EllipsoidPoint map_F(const PairPotential<double>& u, const EllipsoidPoint& q) {
  const double uq = value(u, q.q());
  if (!(uq > 0)) throw DomainError("map_F: U(q) <= 0, the normalized gradient map is undefined");
  Configuration f = -mass_gradient(u, q.q());
  f /= mass_norm(f, u.masses());
  return EllipsoidPoint(std::move(f), u.masses());
}

double residual(const PairPotential<double>& u, const Configuration& q) {
  const Configuration g = mass_gradient(u, q);
  const double gnorm = mass_norm(g, u.masses());
  if (!(gnorm > 0)) throw DomainError("residual: vanishing gradient");
  return mass_norm(g + u.alpha() * value(u, q) * q, u.masses()) / gnorm;
}

CriticalRecord make_record(const PairPotential<double>& u, const EllipsoidPoint& q, int iterations) {
  const Configuration g = mass_gradient(u, q.q());
  CriticalRecord rec{
      .q = q,
      .lambda = mass_inner(g, q.q(), u.masses()),
      .residual = residual(u, q.q()),
      .U_value = value(u, q.q()),
      .distance_signature = distance_signature(q.q()),
      .isotropy_rank = orbit_rank(q.q(), u.masses()),
      .iterations = iterations,
      .multiplicity = 1,
  };
  return rec;
}

CriticalRecord find_cc(const PairPotential<double>& u, const Configuration& seed, const SolverConfig& cfg) {
  cfg.validate();
  const Masses& m = u.masses();
  if (seed.rows() != m.size()) throw InvalidArgument("find_cc: seed has the wrong number of bodies");
  const int d = static_cast<int>(seed.cols());
  require_supported_dim(d);
  require_collision_free(seed);
  const EllipsoidPoint start = normalize_to_ellipsoid(project_center(seed, m), m);
  if (!(value(u, start.q()) > 0)) throw DomainError("find_cc: U <= 0 at the seed");

  detail::LevelSet sphere{Mat::Identity(d, d), 1.0, so_basis(d)};
  detail::LevelSetOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  opts.damping = cfg.damping;
  opts.require_positive_u = true;
  opts.fallback_map = [&](const Vec& x) -> Vec {
    const Configuration q = detail::from_scaled(x, m, d);
    Configuration f = -mass_gradient(u, q);
    return detail::to_scaled(f / mass_norm(f, m), m);
  };
  const auto solved = detail::solve_level_set(u, sphere, detail::to_scaled(start.q(), m), opts);
  Configuration q = detail::from_scaled(solved.x, m, d);
  q = project_center(q, m);
  q /= mass_norm(q, m);
  CriticalRecord rec = make_record(u, EllipsoidPoint(std::move(q), m), solved.iterations);
  if (!(rec.residual <= cfg.tol * 10)) throw ConvergenceError("find_cc: residual lost after renormalization");
  return rec;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::tuple<long long, std::vector<long long>> sort_key(const CriticalRecord& r) {
  std::vector<long long> sig;
  for (double v : r.distance_signature) sig.push_back(std::llround(v * 1e7));
  return {std::llround(r.U_value * 1e9), sig};
}

}  // namespace

EllipsoidPoint census_seed(const Masses& m, int d, std::uint64_t rng_seed, int index) {
  require_supported_dim(d);
  std::mt19937_64 gen(mix_seed(rng_seed, static_cast<std::uint64_t>(index)));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Configuration q(m.size(), d);
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = normal(gen);
    q = project_center(q, m);
    if (is_collision_free(q, 0.05)) return normalize_to_ellipsoid(q, m);
  }
}

bool same_class(const CriticalRecord& a, const CriticalRecord& b, const Masses& m, const SolverConfig& cfg) {
  const auto& sa = a.distance_signature;
  const auto& sb = b.distance_signature;
  if (sa.size() != sb.size()) return false;
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (std::abs(sa[i] - sb[i]) > cfg.dedup_tol * (1.0 + sa.back())) return false;
  const double align_tol = std::sqrt(cfg.dedup_tol);
  if (align_rotation(b.q.q(), a.q.q(), m).residual <= align_tol) return true;
  if (!cfg.permutation_quotient) return false;
  for (const auto& sigma : generate_group(cfg.permutation_quotient->permutations, m.size())) {
    if (sigma.is_identity()) continue;
    if (align_rotation(sigma.apply(b.q.q()), a.q.q(), m).residual <= align_tol) return true;
  }
  return false;
}

CensusResult census(const PairPotential<double>& u, int d, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.permutation_quotient) validate(*cfg.permutation_quotient, u);
  const Masses& m = u.masses();
  std::vector<std::optional<CriticalRecord>> found(static_cast<std::size_t>(cfg.n_starts));

  auto run_start = [&](int i) {
    try {
      found[static_cast<std::size_t>(i)] = find_cc(u, census_seed(m, d, cfg.rng_seed, i).q(), cfg);
    } catch (const ConvergenceError&) {
    } catch (const CollisionError&) {
    } catch (const DomainError&) {
    }
  };
  if (cfg.threads == 1) {
    for (int i = 0; i < cfg.n_starts; ++i) run_start(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < cfg.threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < cfg.n_starts; i = next++) run_start(i);
      });
  }

  CensusResult out;
  out.starts = cfg.n_starts;
  for (auto& rec : found) {
    if (!rec) {
      ++out.failed;
      continue;
    }
    ++out.converged;
    auto match = std::find_if(out.classes.begin(), out.classes.end(),
                              [&](const CriticalRecord& c) { return same_class(c, *rec, m, cfg); });
    if (match != out.classes.end())
      ++match->multiplicity;
    else
      out.classes.push_back(std::move(*rec));
  }
  std::stable_sort(out.classes.begin(), out.classes.end(),
                   [](const CriticalRecord& a, const CriticalRecord& b) { return sort_key(a) < sort_key(b); });
  return out;
}

PropertyCheck check_property_F(const PairPotential<double>& u, const EllipsoidPoint& q, const Mat& plane) {
  if (!u.all_positive()) throw PreconditionError("check_property_F: needs positive pair coefficients");
  if (plane.rows() != q.dim() || plane.cols() != 2 || !(plane.transpose() * plane).isIdentity(1e-12))
    throw InvalidArgument("check_property_F: plane must be a d x 2 orthonormal frame");
  const Mat projected = q.q() * plane;  // n x 2, row k = p(q_k)
  PropertyCheck out;
  Eigen::Index j = 0;
  projected.rowwise().squaredNorm().maxCoeff(&j);
  out.j = static_cast<int>(j);
  const Configuration grad = euclid_gradient(u, q.q());
  const Eigen::RowVector2d pj = projected.row(j);
  out.value = (grad.row(j) * plane).dot(pj);
  out.projection_ok = projected.norm() == 0.0 || pj.norm() > 0.0;
  const EllipsoidPoint f = map_F(u, q);
  out.mapped_value = (f.q().row(j) * plane).dot(pj);
  return out;
}

QuotientLift check_quotient_lift(const PairPotential<double>& u, const EllipsoidPoint& q, double tol) {
  const EllipsoidPoint f = map_F(u, q);
  const Alignment al = align_rotation(q.q(), f.q(), u.masses());
  if (al.residual > tol)
    throw PreconditionError("check_quotient_lift: not a fixed point of the quotient map (residual " +
                            std::to_string(al.residual) + ")");
  QuotientLift out;
  out.rotation = al.rotation;
  out.alignment_residual = al.residual;
  out.deviation = (al.rotation - Mat::Identity(q.dim(), q.dim())).norm();
  out.is_identity = out.deviation <= 10 * tol;
  return out;
}

double equivariance_test(const PairPotential<double>& u, const EllipsoidPoint& q, const Mat& rotation,
                         const BodyPermutation& sigma) {
  require_preserves(u, sigma);
  if (rotation.rows() != q.dim() || !(rotation.transpose() * rotation).isIdentity(1e-12))
    throw InvalidArgument("equivariance_test: rotation must be orthogonal d x d");
  const GroupElement g{sigma, rotation};
  const EllipsoidPoint gq(g.apply(q.q()), u.masses());
  return mass_norm(map_F(u, gq).q() - g.apply(map_F(u, q).q()), u.masses());
}

}  // namespace ccfix
