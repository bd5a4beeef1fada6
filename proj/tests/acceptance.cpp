// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "ccfix/cli.hpp"
#include "oracles.hpp"

using namespace ccfix;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("[%s] C%d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PairPotential<double> random_potential(std::mt19937_64& gen, int n, bool charged) {
  const Masses m = oracle::random_masses(gen, n);
  std::uniform_real_distribution<double> alpha(0.5, 3.0), gamma(-2.0, 2.0);
  if (!charged) return PairPotential<double>::newtonian(m, alpha(gen));
  Vec g(n);
  for (auto& v : g) v = gamma(gen);
  return PairPotential<double>::charged(g, m, alpha(gen));
}

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  double worst_g = 0, worst_h = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5, d = 2 + (trial / 5) % 2;
    const auto u = random_potential(gen, n, trial % 2);
    const Configuration q = oracle::random_config(gen, n, d, 0.2);
    const Vec fd_g = oracle::fd_gradient([&](const Vec& x) { return value(u, unflat(x, d)); }, flat(q));
    worst_g = std::max(worst_g, rel(flat(euclid_gradient(u, q)), fd_g));
    const Mat fd_h = oracle::fd_jacobian(
        [&](const Vec& x) { return Vec(flat(euclid_gradient(u, unflat(x, d)))); }, flat(q));
    worst_h = std::max(worst_h, rel(hessian(u, q), fd_h));
  }
  const double dt = seconds_since(t0);
  report(1, worst_g <= 1e-6 && worst_h <= 1e-5 && dt < 10, "gradient/Hessian vs finite differences",
         fmt("200 instances, max rel err grad %.2e (<= 1e-6), Hessian %.2e (<= 1e-5), %.2fs", worst_g, worst_h, dt));
}

void criterion_2() {
  std::mt19937_64 gen(1002);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 5, d = 2 + (trial / 5) % 2;
    const auto u = random_potential(gen, n, trial % 2);
    const Configuration q = oracle::random_config(gen, n, d);
    const double au = u.alpha() * value(u, q);
    worst = std::max(worst, std::abs(mass_inner(mass_gradient(u, q), q, u.masses()) + au) / std::abs(au));
  }
  report(2, worst <= 1e-10, "Euler identity", fmt("1000 instances, max %.2e (<= 1e-10)", worst));
}

void criterion_3() {
  std::mt19937_64 gen(1003);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    // bodies come in pairs sharing mass and charge; sigma swaps inside pairs
    const int pairs = 1 + trial % 3, n = 2 * pairs, d = 2 + (trial / 3) % 2;
    Vec m(n), g(n);
    std::uniform_real_distribution<double> mass(0.2, 3.0), gamma(-2.0, 2.0);
    for (int k = 0; k < pairs; ++k) {
      m[2 * k] = m[2 * k + 1] = mass(gen);
      g[2 * k] = g[2 * k + 1] = gamma(gen);
    }
    const auto u = trial % 2 ? PairPotential<double>::charged(g, Masses(m)) : PairPotential<double>::newtonian(Masses(m));
    const auto q = oracle::on_ellipsoid(oracle::random_config(gen, n, d), u.masses());
    if (!(value(u, q.q()) > 0)) {
      --trial;
      continue;
    }
    std::vector<int> image(n);
    std::bernoulli_distribution coin;
    for (int k = 0; k < pairs; ++k) {
      const bool flip = coin(gen);
      image[2 * k] = 2 * k + flip;
      image[2 * k + 1] = 2 * k + !flip;
    }
    const BodyPermutation sigma{image};
    worst = std::max(worst, equivariance_test(u, q, oracle::random_rotation(gen, d), sigma));
  }
  report(3, worst <= 1e-11, "equivariance of F", fmt("500 instances, max %.2e (<= 1e-11)", worst));
}

void criterion_4() {
  std::mt19937_64 gen(1004);
  double worst = -std::numeric_limits<double>::infinity();
  int projection_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 5, d = 2 + trial % 2;
    const auto u = PairPotential<double>::newtonian(oracle::random_masses(gen, n));
    const auto q = oracle::on_ellipsoid(oracle::random_config(gen, n, d), u.masses());
    const Mat plane = oracle::random_rotation(gen, d).leftCols(2);
    const auto r = check_property_F(u, q, plane);
    worst = std::max(worst, r.value);
    if (!r.projection_ok) ++projection_failures;
  }
  report(4, worst <= 1e-12 && projection_failures == 0, "projection inequality at the farthest body",
         fmt("1000 instances, max p(dU/dq_j).p(q_j) = %.2e (<= 1e-12), %d projection failures", worst,
             projection_failures));
}

struct CensusCase {
  PairPotential<double> u;
  int d;
  CensusResult result;
};

std::vector<CensusCase> run_census() {
  std::vector<CensusCase> out;
  std::mt19937_64 gen(1005);
  SolverConfig cfg;
  cfg.n_starts = 48;
  for (int n = 2; n <= 5; ++n)
    for (int d = 2; d <= 3; ++d)
      for (bool random_masses : {false, true}) {
        auto u = PairPotential<double>::newtonian(random_masses ? oracle::random_masses(gen, n) : Masses::equal(n));
        CensusResult c = census(u, d, cfg);
        out.push_back({std::move(u), d, std::move(c)});
      }
  return out;
}

int so_dim(int d) { return d * (d - 1) / 2; }

void criteria_5_to_8() {
  const auto t0 = Clock::now();
  const auto cases = run_census();

  int accepted = 0, degenerate = 0, refused = 0;
  double worst_stated = 0, worst_corrected = 0;
  int kernel_bad = 0, maximal = 0;
  double worst_gap = std::numeric_limits<double>::infinity();
  int agree = 0, planar_mu_ok = 0, planar = 0;
  int lifts = 0, lift_bad = 0;
  double worst_lift = 0;
  for (const auto& cc : cases) {
    for (const auto& rec : cc.result.classes) {
      if (rec.isotropy_rank == so_dim(cc.d)) ++maximal;
      IndexRecord idx;
      try {
        idx = fixed_point_index(cc.u, rec);
      } catch (const DegenerateError&) {
        // non-maximal isotropy is outside the scope; a maximal record refused here had a wrong kernel
        if (rec.isotropy_rank == so_dim(cc.d)) {
          ++degenerate;
          ++kernel_bad;
        } else {
          ++refused;
        }
        continue;
      }
      ++accepted;
      worst_stated = std::max(worst_stated, idx.identity.stated);
      worst_corrected = std::max(worst_corrected, idx.identity.corrected);
      if (idx.kernel_dim != so_dim(cc.d) || idx.gap_ratio < kMinGapRatio) ++kernel_bad;
      worst_gap = std::min(worst_gap, idx.gap_ratio);
      if (idx.routes_agree) ++agree;
      if (cc.d == 2) {
        ++planar;
        if (idx.formula_index == (idx.morse_index % 2 ? -1 : 1)) ++planar_mu_ok;
      }
    }
    if (cc.d == 3)
      for (const auto& rec : cc.result.classes) {
        ++lifts;
        try {
          const auto lift = check_quotient_lift(cc.u, rec.q, 1e-8);
          worst_lift = std::max(worst_lift, lift.deviation);
          if (!(lift.deviation <= 1e-8)) ++lift_bad;
        } catch (const PreconditionError&) {
          ++lift_bad;
        }
      }
  }
  const double dt = seconds_since(t0);
  std::size_t classes = 0;
  for (const auto& cc : cases) classes += cc.result.classes.size();

  report(5, accepted > 0 && worst_stated <= 1e-8 && dt < 60, "Hessian identity in its stated sign",
         fmt("%d accepted of %zu classes (%d non-maximal isotropy skipped), max |-aU(I-F') - D2U~|/(aU) = %.2e "
             "(<= 1e-8), census %.1fs",
             accepted, classes, refused, worst_stated, dt));
  std::printf("       supplementary: max |aU(I-F') - D2U~|/(aU) = %.2e over the same records\n", worst_corrected);
  report(6, maximal > 0 && kernel_bad == 0, "kernel dimension and spectral gap",
         fmt("%d maximal-isotropy records, %d with wrong kernel or gap (%d refused as degenerate), min gap %.2e",
             maximal, kernel_bad, degenerate, worst_gap));
  const bool eps_ok = epsilon(3, 2) == 2 && epsilon(5, 2) == 6 && epsilon(6, 3) == 11;
  report(7, accepted > 0 && agree == accepted && planar_mu_ok == planar && eps_ok, "index formula vs determinant",
         fmt("routes agree on %d/%d accepted records; d=2 formula = (-1)^mu on %d/%d; epsilon spot checks %s",
             agree, accepted, planar_mu_ok, planar, eps_ok ? "ok" : "wrong"));
  report(8, lifts > 0 && lift_bad == 0, "quotient fixed points lift with g = I",
         fmt("%d spatial records, %d failures, max |g - I| = %.2e (<= 1e-8)", lifts, lift_bad, worst_lift));
}

void criterion_9() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = false;
  try {
    const ExampleParams p{20, -2, -2};
    const auto cert = verify_example(p);
    const bool arithmetic = cert.gates.decay_value == -71 && cert.gates.vertical_lhs == 27 && cert.gates.vertical_rhs == 328;
    const bool reference = cert.U_reference > 0 &&
                           std::abs(cert.U_reference - cert.U_reference_lifted) <= 1e-12 * std::abs(cert.U_reference);
    const double dt = seconds_since(t0);
    ok = cert.gates.all() && arithmetic && reference && cert.passed() && dt < 5;
    detail = fmt("gates %s (%g < 0, %g < %g); U(pi/4,1/2) = %.12g, lifted diff %.1e; (t*,z*) = (%.8f, %.8f); "
                 "defect %.2e; U = %.10g; central angle %.2e; %.2fs",
                 cert.gates.all() ? "pass" : "fail", cert.gates.decay_value, cert.gates.vertical_lhs,
                 cert.gates.vertical_rhs, cert.U_reference, std::abs(cert.U_reference - cert.U_reference_lifted),
                 cert.maximum.t, cert.maximum.z, cert.record.defect, cert.record.U_value, cert.central_angle, dt);
  } catch (const std::exception& e) {
    detail = std::string("threw: ") + e.what();
  }
  report(9, ok, "non-planar relative equilibrium of the charged example", detail);
}

void criterion_10() {
  std::string detail;
  bool ok = false;
  try {
    const auto u2 = PairPotential<double>::newtonian(Masses::equal(2));
    const auto circ = verify_dynamics(u2, make_record(u2, EllipsoidPoint(oracle::two_body(), u2.masses())));
    const ExampleParams p{20, -2, -2};
    const auto rot = verify_dynamics(example_potential(p), verify_example(p).record);
    const auto u3 = PairPotential<double>::newtonian(Masses::equal(3));
    Configuration q(3, 2);
    q << 1, 0, -0.3, 0.9, -0.5, -0.7;
    const auto control = integrate_rotation(u3, q, Mat::Zero(2, 2), 0.5, 1000);
    ok = circ.completed && circ.drift <= 1e-6 && rot.completed && rot.drift <= 1e-5 && control.drift > 1e-2;
    detail = fmt("two-body drift %.2e (<= 1e-6), rotating example drift %.2e (<= 1e-5), control drift %.2e (> 1e-2)",
                 circ.drift, rot.drift, control.drift);
  } catch (const std::exception& e) {
    detail = std::string("threw: ") + e.what();
  }
  report(10, ok, "dynamics", detail);
}

void criterion_11() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ccfix_acceptance";
  fs::create_directories(dir);
  const fs::path problem = dir / "problem.json";
  std::ofstream(problem) << R"({"n": 4, "d": 2, "masses": [1, 2, 3, 4], "solver": {"n_starts": 64, "rng_seed": 7}})";
  auto census_to = [&](const fs::path& out) {
    std::ostringstream sink, err;
    return cli::run({"census", problem.string(), "--seed", "11", "--out", out.string()}, sink, err);
  };
  const int c1 = census_to(dir / "a.json"), c2 = census_to(dir / "b.json");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = slurp(dir / "a.json"), b = slurp(dir / "b.json");
  report(11, c1 == 0 && c2 == 0 && !a.empty() && a == b, "deterministic census report",
         fmt("exit codes %d/%d, %zu bytes, %s", c1, c2, a.size(), a == b ? "identical" : "different"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_to_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d of 11 criteria failed\n", failures);
  return failures ? 1 : 0;
}
