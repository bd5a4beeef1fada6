#include <doctest.h>

#include <numbers>

#include "ccfix/mass_geometry.hpp"
#include "oracles.hpp"

using namespace ccfix;

TEST_CASE("masses validate positivity and count") {
  CHECK_THROWS_AS(Masses({1.0}), InvalidArgument);
  CHECK_THROWS_AS(Masses({1.0, -2.0}), InvalidArgument);
  CHECK_THROWS_AS(Masses({1.0, 0.0}), InvalidArgument);
  const Masses m{1.0, 2.0, 3.0};
  CHECK(m.total() == 6.0);
  CHECK(m.expanded(2) == (Vec(6) << 1, 1, 2, 2, 3, 3).finished());
}

TEST_CASE("mass_inner on small arrays") {
  const Masses m{1.0, 1.0};
  Configuration v(2, 2), w(2, 2);
  v << 1, 0, 0, 1;
  w << 2, 0, 0, 3;
  CHECK(mass_inner(v, w, m) == 5.0);
  CHECK(mass_inner(oracle::two_body(), oracle::two_body(), m) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(mass_inner(v, Configuration(3, 2), m), InvalidArgument);
}

TEST_CASE("mass_inner is symmetric, bilinear and positive definite") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> nd(2, 8), dd(2, 3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nd(gen), d = dd(gen);
    const Masses m = oracle::random_masses(gen, n);
    Configuration u = Configuration::Random(n, d), v = Configuration::Random(n, d), w = Configuration::Random(n, d);
    const double a = normal(gen), b = normal(gen);
    CHECK(std::abs(mass_inner(v, w, m) - mass_inner(w, v, m)) <= 1e-15 * (1 + std::abs(mass_inner(v, w, m))));
    const double lhs = mass_inner(Configuration(a * u + b * v), w, m);
    const double rhs = a * mass_inner(u, w, m) + b * mass_inner(v, w, m);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * (1 + std::abs(lhs)));
    CHECK(mass_inner(v, v, m) > 0);
  }
}

TEST_CASE("mass_inner is templated on the scalar") {
  const BasicMasses<long double> m{1.0L, 3.0L};
  ConfigT<long double> v(2, 1);
  v << 1.0L, 1.0L / 3.0L;
  CHECK(std::abs(mass_inner(v, v, m) - 4.0L / 3.0L) < 1e-18L);
}

TEST_CASE("project_center") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Masses m = oracle::random_masses(gen, 5);
    const Configuration q = oracle::random_config(gen, 5, 3);
    const Configuration c = project_center(q, m);
    CHECK(center_of_mass(c, m).norm() <= 1e-14);
    CHECK((project_center(c, m) - c).cwiseAbs().maxCoeff() <= 1e-15);
    // distances unchanged
    const auto s1 = distance_signature(q), s2 = distance_signature(c);
    for (std::size_t k = 0; k < s1.size(); ++k) CHECK(std::abs(s1[k] - s2[k]) <= 1e-13);
    // orthogonal to every translation
    Configuration t(5, 3);
    t.rowwise() = Eigen::RowVector3d::Random();
    CHECK(std::abs(mass_inner(c, t, m)) <= 1e-13);
  }
  SUBCASE("already centered is unchanged") {
    const Configuration q = oracle::two_body();
    CHECK(project_center(q, Masses::equal(2)) == q);
  }
  SUBCASE("coincident points collapse and fail the collision guard") {
    Configuration q(2, 2);
    q << 1, 0, 1, 0;
    const Configuration c = project_center(q, Masses::equal(2));
    CHECK(c.isZero(0.0));
    CHECK_FALSE(is_collision_free(c));
  }
}

TEST_CASE("normalize_to_ellipsoid") {
  const Masses m = Masses::equal(2);
  for (double r : {1e-3, 0.5, 1.0, 42.0}) {
    Configuration q(2, 2);
    q << r, 0, -r, 0;
    const EllipsoidPoint p = normalize_to_ellipsoid(q, m);
    CHECK((p.q() - oracle::two_body()).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("projective invariance") {
    std::mt19937_64 gen(3);
    const Masses mm = oracle::random_masses(gen, 4);
    const Configuration q = project_center(oracle::random_config(gen, 4, 3), mm);
    const Configuration a = normalize_to_ellipsoid(q, mm).q(), b = normalize_to_ellipsoid(Configuration(7.0 * q), mm).q();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((normalize_to_ellipsoid(a, mm).q() - a).cwiseAbs().maxCoeff() <= 1e-15);
  }
  CHECK_THROWS_AS(normalize_to_ellipsoid(Configuration::Zero(2, 2), m), InvalidArgument);
  Configuration off(2, 2);
  off << 1, 0, 2, 0;
  CHECK_THROWS_AS(normalize_to_ellipsoid(off, m), InvalidArgument);
}

TEST_CASE("EllipsoidPoint rejects points off S") {
  const Masses m = Masses::equal(2);
  CHECK_NOTHROW(EllipsoidPoint(oracle::two_body(), m));
  CHECK_THROWS_AS(EllipsoidPoint(Configuration(2.0 * oracle::two_body()), m), InvalidArgument);
  Configuration shifted = oracle::two_body();
  shifted.col(1).array() += 0.1;
  CHECK_THROWS_AS(EllipsoidPoint(shifted, m), InvalidArgument);
}

TEST_CASE("collision guard is relative to the diameter") {
  Configuration q(3, 2);
  q << 0, 0, 1, 0, 1 + 1e-10, 0;
  CHECK_FALSE(is_collision_free(q));
  q(2, 0) = 1 + 1e-8;
  CHECK(is_collision_free(q));
  CHECK_THROWS_AS(require_collision_free(Configuration::Zero(3, 2)), CollisionError);
}

TEST_CASE("so(d) basis is skew") {
  for (int d : {2, 3}) {
    const auto basis = so_basis(d);
    CHECK(static_cast<int>(basis.size()) == so_dim(d));
    for (const auto& l : basis) CHECK((l + l.transpose()).isZero(0.0));
  }
  CHECK_THROWS_AS(so_basis(4), InvalidArgument);
}

TEST_CASE("orbit directions") {
  SUBCASE("two-body point in the plane") {
    const auto dirs = orbit_directions(oracle::two_body());
    REQUIRE(dirs.size() == 1);
    Configuration expected(2, 2);
    expected << 0, std::sqrt(0.5), 0, -std::sqrt(0.5);
    CHECK(std::min((dirs[0] - expected).norm(), (dirs[0] + expected).norm()) <= 1e-15);
    CHECK(orbit_rank(oracle::two_body(), Masses::equal(2)) == 1);
  }
  SUBCASE("collinear on the z-axis has rank 2") {
    Configuration q = Configuration::Zero(3, 3);
    q.col(2) << -1, 0.2, 0.8;
    CHECK(orbit_rank(q, Masses::equal(3)) == 2);
  }
  SUBCASE("random points: tangent to S, full rank in d = 3") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 100; ++trial) {
      const Masses m = oracle::random_masses(gen, 4);
      const auto p = oracle::on_ellipsoid(oracle::random_config(gen, 4, 3), m);
      for (const auto& v : orbit_directions(p.q())) CHECK(std::abs(mass_inner(v, p.q(), m)) <= 1e-12);
      CHECK(orbit_rank(p.q(), m) == 3);
    }
  }
}

TEST_CASE("rotation quadratic form") {
  SUBCASE("zero angle") {
    const auto r = rotation_form_check(block_generator({0.0}, 2), Vec::Random(2));
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }
  SUBCASE("angle pi") {
    const auto r = rotation_form_check(block_generator({std::numbers::pi}, 2), Vec::Unit(2, 0));
    CHECK(std::abs(r.lhs) <= 1e-15);
    CHECK(std::abs(r.rhs) <= 1e-15);
  }
  SUBCASE("random angles agree and are non-negative") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 1000; ++trial) {
      const int d = trial % 2 ? 3 : 2;
      Vec x(d);
      for (auto& v : x) v = normal(gen);
      const auto r = rotation_form_check(block_generator({angle(gen)}, d), x);
      CHECK(std::abs(r.lhs - r.rhs) <= 1e-12);
      CHECK(r.lhs >= -1e-15);
    }
  }
  SUBCASE("non-block generators are rejected") {
    CHECK_THROWS_AS(rotation_form_check(so_basis(3)[0], Vec::Ones(3)), InvalidArgument);
    CHECK_NOTHROW(block_angles(so_basis(3)[2]));
  }
}
