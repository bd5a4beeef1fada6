#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccfix/cli.hpp"

using namespace ccfix;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const json& j) {
  const auto path = std::filesystem::temp_directory_path() / ("ccfix_test_" + name);
  std::ofstream(path) << j.dump();
  return path.string();
}

json three_body() { return {{"n", 3}, {"d", 2}, {"masses", {1, 1, 1}}, {"solver", {{"n_starts", 64}}}}; }

}  // namespace

TEST_CASE("problem parsing") {
  const auto p = cli::parse_problem(three_body());
  CHECK(p.n == 3);
  CHECK(p.solver.n_starts == 64);
  CHECK(p.potential.kappa()(0, 1) == 1.0);

  json charged = three_body();
  charged["potential"] = {{"type", "charged"}, {"gamma", {2, -1, 0.5}}};
  CHECK(cli::parse_problem(charged).potential.kappa()(0, 1) == 3.0);

  auto rejects = [](json j) { CHECK_THROWS_AS(cli::parse_problem(j), cli::SchemaError); };
  json j = three_body();
  j.erase("d");
  rejects(j);
  j = three_body();
  j["masses"] = {1, 1};
  rejects(j);
  j["masses"] = {1, -1, 1};
  rejects(j);
  j = three_body();
  j["d"] = 4;
  rejects(j);
  j = three_body();
  j["potential"] = {{"type", "explicit"}, {"kappa", {{0, 1, 2}, {1, 0, 1}, {1, 1, 0}}}};
  rejects(j);
  j["potential"] = {{"type", "yukawa"}};
  rejects(j);
  j = three_body();
  j["seed"] = {{0, 0}, {1, 0}};
  rejects(j);
  j = three_body();
  j["solver"]["quotient_permutations"] = {{0, 0, 1}};
  rejects(j);
}

TEST_CASE("report formatting and hashing") {
  CHECK(cli::dump_report(json{{"x", 0.1}}) == "{\n  \"x\": 0.10000000000000001\n}\n");
  CHECK(cli::dump_report(json{{"v", {1.0, 2.5}}}) == "{\n  \"v\": [1, 2.5]\n}\n");
  const json a = json::parse(R"({"n": 3, "d": 2, "masses": [1, 1, 1]})");
  const json b = json::parse(R"({"masses": [1, 1, 1], "d": 2, "n": 3})");
  CHECK(cli::problem_hash(a) == cli::problem_hash(b));
  CHECK(cli::problem_hash(a).size() == 64);
  CHECK(cli::problem_hash(a) != cli::problem_hash(three_body()));
}

TEST_CASE("census command") {
  const std::string path = write_temp("census.json", three_body());
  const auto csv = (std::filesystem::temp_directory_path() / "ccfix_test_census.csv").string();
  const Run r1 = run({"census", path, "--csv", csv});
  const Run r2 = run({"census", path, "--csv", csv});
  REQUIRE(r1.code == cli::kExitOk);
  CHECK(r1.out == r2.out);
  const json report = json::parse(r1.out);
  CHECK(report["result"]["n_classes"] == 5);
  CHECK(report["version"] == cli::version());
  CHECK(report["problem_sha256"] == cli::problem_hash(three_body()));
  std::ifstream in(csv);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 6);
  const Run other = run({"census", path, "--seed", "99"});
  CHECK(json::parse(other.out)["overrides"]["seed"] == 99);
}

TEST_CASE("example command") {
  const Run ok = run({"example", "--c1", "20", "--c2", "-2", "--c3", "-2"});
  CHECK(ok.code == cli::kExitOk);
  CHECK(json::parse(ok.out)["result"]["passed"] == true);
  CHECK(run({"example", "--c1", "2", "--c2", "-2", "--c3", "-2"}).code == cli::kExitVerification);
  CHECK(run({"example", "--c1", "0", "--c2", "-2", "--c3", "-2"}).code == cli::kExitSchema);
}

TEST_CASE("index and identity commands") {
  json collinear = {{"n", 3}, {"d", 3}, {"masses", {1, 1, 1}}, {"configuration", {{-1, 0, 0}, {0, 0, 0}, {1, 0, 0}}}};
  const Run degenerate = run({"index", write_temp("collinear.json", collinear)});
  CHECK(degenerate.code == cli::kExitVerification);
  CHECK(json::parse(degenerate.out)["reason"].get<std::string>().find("degenerate") != std::string::npos);

  json planar = collinear;
  planar["d"] = 2;
  planar["configuration"] = {{-1, 0}, {0, 0}, {1, 0}};
  const Run idx = run({"index", write_temp("planar.json", planar)});
  CHECK(idx.code == cli::kExitOk);
  CHECK(json::parse(idx.out)["result"]["index"]["morse_index"] == 1);

  const Run ident = run({"verify-identity", write_temp("census_id.json", three_body())});
  CHECK(ident.code == cli::kExitOk);
  CHECK(json::parse(ident.out)["result"]["passed"] == 5);

  planar["configuration"] = {{-1, 0}, {0.2, 0}, {1, 0}};
  CHECK(run({"index", write_temp("noncentral.json", planar)}).code == cli::kExitVerification);
}

TEST_CASE("find-cc, find-re, property-check and dynamics commands") {
  json p = three_body();
  CHECK(run({"find-cc", write_temp("noseed.json", p)}).code == cli::kExitSchema);
  p["seed"] = {{1, 0}, {-0.4, 0.8}, {-0.3, -0.9}};
  CHECK(run({"find-cc", write_temp("seed.json", p)}).code == cli::kExitOk);
  p["dynamics"] = {{"kind", "cc"}, {"steps", 4000}};
  const Run dyn = run({"dynamics", write_temp("dyn.json", p)});
  CHECK(dyn.code == cli::kExitOk);
  CHECK(json::parse(dyn.out)["result"]["dynamics"]["drift"].get<double>() <= 1e-5);

  json re = {{"n", 3}, {"d", 3}, {"masses", {1, 2, 3}}, {"seed", {{1, 0, 0.2}, {-0.4, 0.8, 0}, {-0.3, -0.9, -0.1}}}};
  const Run fre = run({"find-re", write_temp("re.json", re)});
  CHECK(fre.code == cli::kExitOk);
  CHECK(json::parse(fre.out)["result"]["planar"] == true);

  json pc = {{"n", 4}, {"d", 3}, {"masses", {1, 2, 3, 4}}};
  const Run prop = run({"property-check", write_temp("pc.json", pc), "--samples", "200"});
  CHECK(prop.code == cli::kExitOk);
  CHECK(json::parse(prop.out)["result"]["violations"] == 0);
}

TEST_CASE("argument errors") {
  CHECK(run({}).code == cli::kExitSchema);
  CHECK(run({"census"}).code == cli::kExitSchema);
  CHECK(run({"census", "/nonexistent/problem.json"}).code == cli::kExitSchema);
  CHECK(run({"--help"}).code == cli::kExitOk);
}
