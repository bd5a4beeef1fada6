#include "ccfix/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#ifndef CCFIX_VERSION
#define CCFIX_VERSION "0.0.0"
#endif

namespace ccfix::cli {

using json = nlohmann::json;

std::string version() { return CCFIX_VERSION; }

// --- problem files -------------------------------------------------------------

namespace {

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError(what + " must be a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw SchemaError(what + " must be an integer");
  return j.get<long long>();
}

Mat matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw SchemaError(what + " must be an array of " + std::to_string(rows) + " rows");
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw SchemaError(what + " rows must have " + std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) out(i, k) = number(row[static_cast<std::size_t>(k)], what);
  }
  return out;
}

Configuration configuration(const json& j, int n, int d, const std::string& what) {
  return matrix(j, n, d, what);
}

PairPotential<double> potential(const json& j, const Masses& m, double alpha) {
  const int n = m.size();
  if (!j.contains("potential")) return PairPotential<double>::newtonian(m, alpha);
  const json& p = j.at("potential");
  const std::string type = field(p, "type").get<std::string>();
  if (type == "newtonian") return PairPotential<double>::newtonian(m, alpha);
  if (type == "charged") {
    const json& g = field(p, "gamma");
    if (!g.is_array() || static_cast<int>(g.size()) != n) throw SchemaError("gamma must have n entries");
    Vec gamma(n);
    for (int i = 0; i < n; ++i) gamma[i] = number(g[static_cast<std::size_t>(i)], "gamma");
    return PairPotential<double>::charged(gamma, m, alpha);
  }
  if (type == "explicit") return PairPotential<double>(matrix(field(p, "kappa"), n, n, "kappa"), alpha, m);
  throw SchemaError("unknown potential type '" + type + "'");
}

SolverConfig solver_config(const json& j, int n) {
  SolverConfig cfg;
  if (!j.contains("solver")) return cfg;
  const json& s = j.at("solver");
  if (!s.is_object()) throw SchemaError("solver must be an object");
  if (s.contains("tol")) cfg.tol = number(s["tol"], "solver.tol");
  if (s.contains("max_iter")) cfg.max_iter = static_cast<int>(integer(s["max_iter"], "solver.max_iter"));
  if (s.contains("damping")) cfg.damping = number(s["damping"], "solver.damping");
  if (s.contains("rng_seed")) {
    if (!s["rng_seed"].is_number_unsigned()) throw SchemaError("solver.rng_seed must be a non-negative integer");
    cfg.rng_seed = s["rng_seed"].get<std::uint64_t>();
  }
  if (s.contains("n_starts")) cfg.n_starts = static_cast<int>(integer(s["n_starts"], "solver.n_starts"));
  if (s.contains("threads")) cfg.threads = static_cast<int>(integer(s["threads"], "solver.threads"));
  if (s.contains("dedup_tol")) cfg.dedup_tol = number(s["dedup_tol"], "solver.dedup_tol");
  if (s.contains("quotient_permutations")) {
    SymmetrySpec spec;
    for (const json& perm : s["quotient_permutations"]) {
      BodyPermutation p;
      for (const json& v : perm) p.image.push_back(static_cast<int>(integer(v, "permutation entry")));
      p.validate(n);
      spec.permutations.push_back(std::move(p));
    }
    cfg.permutation_quotient = std::move(spec);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

Problem parse_problem(const json& j) {
  try {
    if (!j.is_object()) throw SchemaError("problem must be a JSON object");
    const int n = static_cast<int>(integer(field(j, "n"), "n"));
    const int d = static_cast<int>(integer(field(j, "d"), "d"));
    if (n < 2) throw SchemaError("n must be at least 2");
    if (d != 2 && d != 3) throw SchemaError("d must be 2 or 3");
    const json& mj = field(j, "masses");
    if (!mj.is_array() || static_cast<int>(mj.size()) != n) throw SchemaError("masses must have n entries");
    Vec mv(n);
    for (int i = 0; i < n; ++i) mv[i] = number(mj[static_cast<std::size_t>(i)], "masses");
    const Masses m(mv);
    const double alpha = j.contains("alpha") ? number(j["alpha"], "alpha") : 1.0;

    Problem p(j, n, d, potential(j, m, alpha), solver_config(j, n));
    if (j.contains("seed")) p.seed = configuration(j["seed"], n, d, "seed");
    if (j.contains("configuration")) p.configuration = configuration(j["configuration"], n, d, "configuration");
    if (j.contains("cylinder")) p.cylinder_c = number(field(j["cylinder"], "c"), "cylinder.c");
    if (j.contains("plane")) p.plane = matrix(j["plane"], d, 2, "plane");
    if (j.contains("samples")) p.samples = static_cast<int>(integer(j["samples"], "samples"));
    if (j.contains("dynamics")) {
      const json& dy = j["dynamics"];
      if (dy.contains("kind")) p.dynamics.kind = dy["kind"].get<std::string>();
      if (dy.contains("steps")) p.dynamics.steps = static_cast<int>(integer(dy["steps"], "dynamics.steps"));
      if (dy.contains("max_drift")) p.dynamics.max_drift = number(dy["max_drift"], "dynamics.max_drift");
      if (p.dynamics.kind != "cc" && p.dynamics.kind != "re") throw SchemaError("dynamics.kind must be cc or re");
    }
    return p;
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  } catch (const SymmetryError& e) {
    throw SchemaError(e.what());
  }
}

std::string problem_hash(const json& j) {
  const std::string canonical = j.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// --- serialization -------------------------------------------------------------

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(std::string& s, const json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::number_float:
      s += format_double(j.get<double>());
      return;
    case json::value_t::object: {
      if (j.empty()) {
        s += "{}";
        return;
      }
      s += "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) s += ",\n";
        first = false;
        s += pad + json(key).dump() + ": ";
        write(s, val, depth + 1);
      }
      s += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        s += "[]";
        return;
      }
      // numeric rows stay on one line
      const bool flat_row = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
      s += flat_row ? "[" : "[\n";
      bool first = true;
      for (const auto& val : j) {
        if (!first) s += flat_row ? ", " : ",\n";
        first = false;
        if (!flat_row) s += pad;
        write(s, val, depth + 1);
      }
      s += flat_row ? "]" : "\n" + close + "]";
      return;
    }
    default:
      s += j.dump();
  }
}

}  // namespace

std::string dump_report(const json& j) {
  std::string s;
  write(s, j, 0);
  s += "\n";
  return s;
}

json to_json(const Configuration& q) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < q.cols(); ++k) row.push_back(q(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {
json to_json_vec(const Vec& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}
}  // namespace

json to_json(const CriticalRecord& rec) {
  return {{"q", to_json(rec.q.q())},
          {"lambda", rec.lambda},
          {"residual", rec.residual},
          {"U", rec.U_value},
          {"distance_signature", rec.distance_signature},
          {"isotropy_rank", rec.isotropy_rank},
          {"iterations", rec.iterations},
          {"multiplicity", rec.multiplicity}};
}

json to_json(const IndexRecord& rec) {
  return {{"morse_index", rec.morse_index},
          {"kernel_dim", rec.kernel_dim},
          {"fixed_point_index", rec.fixed_point_index},
          {"formula_index", rec.formula_index},
          {"epsilon", rec.epsilon},
          {"routes_agree", rec.routes_agree},
          {"spectrum", to_json_vec(rec.spectrum)},
          {"gap_ratio", rec.gap_ratio},
          {"unit_eigenvalues", rec.unit_eigenvalues},
          {"slice_determinant", rec.slice_determinant},
          {"identity", {{"stated", rec.identity.stated}, {"corrected", rec.identity.corrected}}}};
}

json to_json(const RelEquilibriumRecord& rec) {
  return {{"q", to_json(rec.q)},         {"omega_sq", rec.omega_sq}, {"residual", rec.residual},
          {"defect", rec.defect},        {"U", rec.U_value},         {"planar", rec.planar},
          {"central", rec.central},      {"iterations", rec.iterations}};
}

json to_json(const ExampleCertificate& c) {
  const auto& g = c.gates;
  return {
      {"params", {{"c1", c.params.c1}, {"c2", c.params.c2}, {"c3", c.params.c3}}},
      {"gates",
       {{"signs", g.signs},
        {"decay", g.decay},
        {"vertical", g.vertical},
        {"decay_value", g.decay_value},
        {"vertical_lhs", g.vertical_lhs},
        {"vertical_rhs", g.vertical_rhs}}},
      {"U_reference", c.U_reference},
      {"U_reference_lifted", c.U_reference_lifted},
      {"maximum",
       {{"t", c.maximum.t},
        {"z", c.maximum.z},
        {"U", c.maximum.U},
        {"grad_norm", c.maximum.grad_norm},
        {"hessian_eigenvalues", {c.maximum.hessian_eigenvalues[0], c.maximum.hessian_eigenvalues[1]}},
        {"iterations", c.maximum.iterations}}},
      {"record", to_json(c.record)},
      {"symmetry_residuals", c.symmetry_residuals},
      {"symmetric_gradient_mismatch", c.symmetric_gradient_mismatch},
      {"central_angle", c.central_angle},
      {"clauses",
       {{"critical", c.critical}, {"non_planar", c.non_planar}, {"non_central", c.non_central}, {"positive", c.positive}}},
      {"passed", c.passed()}};
}

json to_json(const DynamicsResult& r) {
  return {{"drift", r.drift},         {"omega", r.omega},         {"period", r.period},
          {"steps", r.steps},         {"completed", r.completed}, {"failure_time", r.failure_time}};
}

std::string census_csv(const CensusResult& census) {
  std::string s = "class,U,lambda,residual,isotropy_rank,multiplicity,iterations,distance_signature\n";
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < census.classes.size(); ++k) {
    const auto& r = census.classes[k];
    s += std::to_string(k) + "," + num(r.U_value) + "," + num(r.lambda) + "," + num(r.residual) + "," +
         std::to_string(r.isotropy_rank) + "," + std::to_string(r.multiplicity) + "," + std::to_string(r.iterations) + ",";
    for (std::size_t i = 0; i < r.distance_signature.size(); ++i)
      s += (i ? ";" : "") + num(r.distance_signature[i]);
    s += "\n";
  }
  return s;
}

// --- commands ------------------------------------------------------------------

namespace {

struct Options {
  std::string problem;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> starts;
  std::optional<int> threads;
  std::optional<int> steps;
  std::optional<int> samples;
  std::string out;
  std::string csv;
  double c1 = 0, c2 = 0, c3 = 0;
};

struct Outcome {
  json result;
  int code = kExitOk;
  std::string reason;
  std::string csv;
};

Outcome success(json result) {
  Outcome out;
  out.result = std::move(result);
  return out;
}

Outcome failure(int code, std::string reason) {
  Outcome out;
  out.code = code;
  out.reason = std::move(reason);
  return out;
}

/// Failure of a verification step, reported with exit code 3.
class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Problem load(const Options& o) {
  std::ifstream in(o.problem);
  if (!in) throw SchemaError("cannot read problem file '" + o.problem + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  Problem p = parse_problem(j);
  if (o.seed) p.solver.rng_seed = *o.seed;
  if (o.tol) p.solver.tol = *o.tol;
  if (o.starts) p.solver.n_starts = *o.starts;
  if (o.threads) p.solver.threads = *o.threads;
  if (o.steps) p.dynamics.steps = *o.steps;
  if (o.samples) p.samples = *o.samples;
  try {
    p.solver.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  return p;
}

json overrides(const Options& o) {
  json j = json::object();
  if (o.seed) j["seed"] = *o.seed;
  if (o.tol) j["tol"] = *o.tol;
  if (o.starts) j["starts"] = *o.starts;
  if (o.steps) j["steps"] = *o.steps;
  if (o.samples) j["samples"] = *o.samples;
  return j;
}

const Configuration& require_seed(const Problem& p) {
  if (!p.seed) throw SchemaError("this command needs a 'seed' configuration");
  return *p.seed;
}

// A single record from "configuration" (assumed central) or "seed" (solved); nullopt means census mode.
std::optional<CriticalRecord> single_record(const Problem& p) {
  const Masses& m = p.potential.masses();
  if (p.configuration) {
    const EllipsoidPoint q = normalize_to_ellipsoid(project_center(*p.configuration, m), m);
    CriticalRecord rec = make_record(p.potential, q);
    if (!(rec.residual <= 1e-8))
      throw VerificationFailure("configuration is not central (residual " + format_double(rec.residual) + ")");
    return rec;
  }
  if (p.seed) return find_cc(p.potential, *p.seed, p.solver);
  return std::nullopt;
}

Outcome cmd_census(const Problem& p, const Options& o) {
  const CensusResult c = census(p.potential, p.d, p.solver);
  Outcome out;
  json classes = json::array();
  for (const auto& rec : c.classes) classes.push_back(to_json(rec));
  out.result = {{"starts", c.starts},
                {"converged", c.converged},
                {"failed", c.failed},
                {"n_classes", c.classes.size()},
                {"classes", classes}};
  if (!o.csv.empty()) out.csv = census_csv(c);
  return out;
}

Outcome cmd_find_cc(const Problem& p, const Options&) {
  return success(to_json(find_cc(p.potential, require_seed(p), p.solver)));
}

Outcome cmd_index(const Problem& p, const Options&) {
  Outcome out;
  if (auto rec = single_record(p)) {
    const IndexRecord idx = fixed_point_index(p.potential, *rec);
    out.result = {{"record", to_json(*rec)}, {"index", to_json(idx)}};
    if (!idx.routes_agree) {
      out.code = kExitVerification;
      out.reason = "index routes disagree";
    }
    return out;
  }
  const CensusResult c = census(p.potential, p.d, p.solver);
  json classes = json::array();
  int accepted = 0, agree = 0;
  for (const auto& rec : c.classes) {
    json entry = {{"record", to_json(rec)}};
    try {
      const IndexRecord idx = fixed_point_index(p.potential, rec);
      entry["index"] = to_json(idx);
      ++accepted;
      agree += idx.routes_agree ? 1 : 0;
    } catch (const DegenerateError& e) {
      entry["refused"] = e.what();
    }
    classes.push_back(std::move(entry));
  }
  out.result = {{"accepted", accepted}, {"routes_agree", agree}, {"classes", classes}};
  if (agree != accepted) {
    out.code = kExitVerification;
    out.reason = "index routes disagree on " + std::to_string(accepted - agree) + " record(s)";
  }
  return out;
}

constexpr double kIdentityTol = 1e-8;

json identity_entry(const IdentityResiduals& r) {
  return {{"stated", r.stated}, {"corrected", r.corrected}, {"passed", r.corrected <= kIdentityTol}};
}

Outcome cmd_verify_identity(const Problem& p, const Options&) {
  Outcome out;
  if (auto rec = single_record(p)) {
    const IdentityResiduals r = identity_check(p.potential, *rec);
    out.result = {{"tolerance", kIdentityTol}, {"record", to_json(*rec)}, {"identity", identity_entry(r)}};
    if (!(r.corrected <= kIdentityTol)) {
      out.code = kExitVerification;
      out.reason = "identity residual above tolerance";
    }
    return out;
  }
  const CensusResult c = census(p.potential, p.d, p.solver);
  json classes = json::array();
  int accepted = 0, passed = 0;
  double worst_stated = 0, worst_corrected = 0;
  for (const auto& rec : c.classes) {
    json entry = {{"record", to_json(rec)}};
    try {
      const IdentityResiduals r = identity_check(p.potential, rec);
      entry["identity"] = identity_entry(r);
      ++accepted;
      passed += r.corrected <= kIdentityTol ? 1 : 0;
      worst_stated = std::max(worst_stated, r.stated);
      worst_corrected = std::max(worst_corrected, r.corrected);
    } catch (const DegenerateError& e) {
      entry["refused"] = e.what();
    }
    classes.push_back(std::move(entry));
  }
  out.result = {{"tolerance", kIdentityTol},       {"accepted", accepted},
                {"passed", passed},                {"max_stated", worst_stated},
                {"max_corrected", worst_corrected}, {"classes", classes}};
  if (passed != accepted) {
    out.code = kExitVerification;
    out.reason = "identity residual above tolerance on some records";
  }
  return out;
}

RelEquilibriumRecord solve_re(const Problem& p) {
  if (p.d != 3) throw SchemaError("relative equilibria on the cylinder need d = 3");
  const Configuration& seed = require_seed(p);
  const double c = p.cylinder_c ? *p.cylinder_c : cylinder_value(project_center(seed, p.potential.masses()), p.potential.masses());
  try {
    return find_re(p.potential, CylinderSpec{c}, seed, p.solver);
  } catch (const DomainError& e) {
    throw VerificationFailure(e.what());
  }
}

Outcome cmd_find_re(const Problem& p, const Options&) { return success(to_json(solve_re(p))); }

Outcome cmd_example(const Options& o) {
  const ExampleCertificate cert = verify_example(ExampleParams{o.c1, o.c2, o.c3});
  Outcome out = success(to_json(cert));
  if (!cert.passed()) {
    out.code = kExitVerification;
    out.reason = "certificate has failing clauses";
  }
  return out;
}

Mat random_plane(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> normal;
  Mat g(d, 2);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(gen);
  return Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(d, 2);
}

Outcome cmd_property_check(const Problem& p, const Options&) {
  const Masses& m = p.potential.masses();
  constexpr double tol = 1e-12;
  Outcome out;
  if (p.configuration && p.plane) {
    const EllipsoidPoint q = normalize_to_ellipsoid(project_center(*p.configuration, m), m);
    const PropertyCheck c = check_property_F(p.potential, q, *p.plane);
    out.result = {{"j", c.j}, {"value", c.value}, {"projection_ok", c.projection_ok}, {"mapped_value", c.mapped_value}};
    if (!(c.value <= tol) || !c.projection_ok) {
      out.code = kExitVerification;
      out.reason = "projection inequality violated";
    }
    return out;
  }
  std::mt19937_64 gen(p.solver.rng_seed);
  int violations = 0, projection_failures = 0;
  double max_value = -std::numeric_limits<double>::infinity();
  double min_mapped = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.samples; ++i) {
    const EllipsoidPoint q = census_seed(m, p.d, p.solver.rng_seed, i);
    const PropertyCheck c = check_property_F(p.potential, q, random_plane(gen, p.d));
    max_value = std::max(max_value, c.value);
    min_mapped = std::min(min_mapped, c.mapped_value);
    violations += c.value <= tol ? 0 : 1;
    projection_failures += c.projection_ok ? 0 : 1;
  }
  out.result = {{"samples", p.samples},           {"tolerance", tol},
                {"max_value", max_value},         {"min_mapped_value", min_mapped},
                {"violations", violations},       {"projection_failures", projection_failures}};
  if (violations + projection_failures > 0) {
    out.code = kExitVerification;
    out.reason = "projection inequality violated";
  }
  return out;
}

Outcome cmd_dynamics(const Problem& p, const Options&) {
  Outcome out;
  DynamicsResult res;
  if (p.dynamics.kind == "re") {
    const RelEquilibriumRecord rec = solve_re(p);
    res = verify_dynamics(p.potential, rec, p.dynamics.steps);
    out.result = {{"record", to_json(rec)}};
  } else {
    const CriticalRecord rec = find_cc(p.potential, require_seed(p), p.solver);
    res = verify_dynamics(p.potential, rec, p.dynamics.steps);
    out.result = {{"record", to_json(rec)}};
  }
  out.result["dynamics"] = to_json(res);
  out.result["max_drift"] = p.dynamics.max_drift;
  if (!res.completed || !(res.drift <= p.dynamics.max_drift)) {
    out.code = kExitVerification;
    out.reason = res.completed ? "drift above tolerance" : "integration left the collision-free set";
  }
  return out;
}

std::string error_kind(int code) {
  switch (code) {
    case kExitSchema:
      return "schema";
    case kExitSolver:
      return "solver";
    default:
      return "verification";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Central configurations as fixed points of the normalized gradient map", "ccfix"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_problem) {
    if (needs_problem) sub->add_option("problem", o.problem, "JSON problem file")->required();
    sub->add_option("--seed", o.seed, "RNG seed for census starts and sampling");
    sub->add_option("--tol", o.tol, "solver tolerance");
    sub->add_option("--starts", o.starts, "number of census starts");
    sub->add_option("--threads", o.threads, "census worker threads");
    sub->add_option("--out", o.out, "write the report here instead of stdout");
  };

  using Command = std::function<Outcome(const Problem&, const Options&)>;
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const char* name, const char* help, Command cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub, true);
    commands.emplace_back(sub, std::move(cmd));
    return sub;
  };
  add("census", "multistart search for central configuration classes", cmd_census)
      ->add_option("--csv", o.csv, "also write the class table as CSV");
  add("find-cc", "solve for one central configuration from the problem seed", cmd_find_cc);
  add("index", "Morse and fixed-point indices (one record, or every census class)", cmd_index);
  add("verify-identity", "check the Hessian / map-derivative identity", cmd_verify_identity);
  add("find-re", "relative equilibrium on the vertical cylinder", cmd_find_re);
  add("property-check", "projection inequality at the farthest body", cmd_property_check)
      ->add_option("--samples", o.samples, "random samples when no configuration is given");
  add("dynamics", "integrate the rotating solution and report its drift", cmd_dynamics)
      ->add_option("--steps", o.steps, "fixed RK4 steps per period");

  CLI::App* example = app.add_subcommand("example", "three charged pairs: non-planar relative equilibrium");
  common(example, false);
  example->add_option("--c1", o.c1, "charge of bodies 1, 2")->required();
  example->add_option("--c2", o.c2, "charge of bodies 3, 4")->required();
  example->add_option("--c3", o.c3, "charge of bodies 5, 6")->required();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitSchema;
  }

  CLI::App* chosen = app.get_subcommands().front();
  json report = {{"tool", "ccfix"}, {"version", version()}, {"command", chosen->get_name()}};
  Outcome outcome;
  try {
    if (chosen == example) {
      report["problem_sha256"] = problem_hash({{"c1", o.c1}, {"c2", o.c2}, {"c3", o.c3}});
      outcome = cmd_example(o);
    } else {
      const Problem p = load(o);
      report["problem_sha256"] = problem_hash(p.raw);
      report["overrides"] = overrides(o);
      for (auto& [sub, cmd] : commands)
        if (sub == chosen) outcome = cmd(p, o);
    }
  } catch (const SchemaError& e) {
    outcome = failure(kExitSchema, e.what());
  } catch (const InvalidArgument& e) {
    outcome = failure(kExitSchema, e.what());
  } catch (const SymmetryError& e) {
    outcome = failure(kExitSchema, e.what());
  } catch (const ConvergenceError& e) {
    outcome = failure(kExitSolver, e.what());
  } catch (const CollisionError& e) {
    outcome = failure(kExitSolver, e.what());
  } catch (const DomainError& e) {
    outcome = failure(kExitSolver, e.what());
  } catch (const DegenerateError& e) {
    outcome = failure(kExitVerification, e.what());
  } catch (const PreconditionError& e) {
    outcome = failure(kExitVerification, e.what());
  } catch (const VerificationFailure& e) {
    outcome = failure(kExitVerification, e.what());
  }

  report["status"] = outcome.code == kExitOk ? "ok" : error_kind(outcome.code) + "_failure";
  if (outcome.code != kExitOk) {
    report["reason"] = outcome.reason;
    err << "ccfix: " << outcome.reason << "\n";
  }
  if (!outcome.result.is_null()) report["result"] = outcome.result;

  const std::string text = dump_report(report);
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      err << "ccfix: cannot write '" << o.out << "'\n";
      return kExitSchema;
    }
    f << text;
  }
  if (!outcome.csv.empty()) {
    std::ofstream f(o.csv, std::ios::binary);
    if (!f) {
      err << "ccfix: cannot write '" << o.csv << "'\n";
      return kExitSchema;
    }
    f << outcome.csv;
  }
  return outcome.code;
}

}  // namespace ccfix::cli
