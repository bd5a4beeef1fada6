#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccfix/indices.hpp"
#include "ccfix/rel_equilibria.hpp"

namespace ccfix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitVerification = 3;

/// Problem file does not match the schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DynamicsSpec {
  std::string kind = "cc";  // "cc": rigid rotation of a planar central configuration; "re": cylinder record
  int steps = 10000;
  double max_drift = 1e-5;
};

/// Parsed problem file.
///
///   { "n": 3, "d": 2, "masses": [1, 1, 1], "alpha": 1,
///     "potential": {"type": "newtonian"} | {"type": "charged", "gamma": [...]}
///                | {"type": "explicit", "kappa": [[...], ...]},
///     "solver": {"tol", "max_iter", "damping", "rng_seed", "n_starts", "threads", "dedup_tol",
///                "quotient_permutations": [[image...], ...]},
///     "seed": [[x, y(, z)], ...], "configuration": [[...], ...],
///     "cylinder": {"c": 2}, "plane": [[...], ...] (d x 2), "samples": 1000,
///     "dynamics": {"kind": "cc" | "re", "steps": 10000, "max_drift": 1e-5} }
struct Problem {
  Problem(nlohmann::json raw_, int n_, int d_, PairPotential<double> potential_, SolverConfig solver_)
      : raw(std::move(raw_)), n(n_), d(d_), potential(std::move(potential_)), solver(std::move(solver_)) {}

  nlohmann::json raw;
  int n = 0;
  int d = 0;
  PairPotential<double> potential;
  SolverConfig solver;
  std::optional<Configuration> seed;
  std::optional<Configuration> configuration;
  std::optional<double> cylinder_c;
  std::optional<Mat> plane;
  int samples = 1000;
  DynamicsSpec dynamics;
};

Problem parse_problem(const nlohmann::json& j);

/// SHA-256 (hex) of the canonical serialization of the problem document.
std::string problem_hash(const nlohmann::json& j);

/// Pretty JSON with every floating-point number written at 17 significant digits.
std::string dump_report(const nlohmann::json& j);

nlohmann::json to_json(const Configuration& q);
nlohmann::json to_json(const CriticalRecord& rec);
nlohmann::json to_json(const IndexRecord& rec);
nlohmann::json to_json(const RelEquilibriumRecord& rec);
nlohmann::json to_json(const ExampleCertificate& cert);
nlohmann::json to_json(const DynamicsResult& res);

/// CSV table of census classes, one row per class.
std::string census_csv(const CensusResult& census);

/// Entry point of the command-line tool; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace ccfix::cli
