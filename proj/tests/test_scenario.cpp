#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "hyperflux/scenario.hpp"

using namespace hyperflux;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kSource = HYPERFLUX_SOURCE_DIR;
const std::string kCli = HYPERFLUX_CLI_PATH;

int run_cli(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("hyperflux_test_" + tag);
    std::filesystem::remove_all(dir);
    return dir;
}

const char* kMinimalDoc = R"json({
  "name": "mini", "m": 2,
  "exprs": {"one": "1"},
  "maps": {"polar": ["x1*cos(x2)", "x1*sin(x2)"]},
  "domains": {
    "rect": {"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 6.283185307179586]},
    "disk": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0}
  },
  "checks": [
    {"kind": "cov", "f": "one", "map": "polar", "omega": "rect", "target": "disk"}
  ]
})json";

}  // namespace

TEST_CASE("a minimal document loads with defaults applied") {
    const Scenario s = load_scenario(kMinimalDoc);
    CHECK(s.name == "mini");
    CHECK(s.m == 2);
    CHECK(s.quad.gauss_order == 16);
    CHECK(s.quad.subdivisions == 4);
    REQUIRE(s.checks.size() == 1);
    CHECK(s.checks[0].kind == CheckKind::cov);
    CHECK(s.checks[0].name == "cov#1");  // auto-named from kind and position
    CHECK_FALSE(s.checks[0].tol.has_value());
}

TEST_CASE("validation failures name the offending key") {
    const auto expect = [](const std::string& doc, const std::string& fragment) {
        CHECK_THROWS_WITH(load_scenario(doc), ContainsSubstring(fragment));
    };

    expect("{", "invalid JSON");
    expect(R"({"m": 2, "checks": []})", "name");
    expect(R"({"name": "x", "m": 2.5, "checks": []})", "m");
    expect(R"({"name": "x", "m": 99, "checks": []})", "m");
    expect(R"({"name": "x", "m": 2})", "checks");
    expect(R"({"name": "x", "m": 2, "exprs": {"f": "x1 +"}, "checks": []})", "exprs.f");
    expect(R"({"name": "x", "m": 2, "maps": {"g": ["x1"]}, "checks": []})",
           "maps.g");
    expect(R"({"name": "x", "m": 2, "domains": {"d": {"kind": "cone"}}, "checks": []})",
           "domains.d.kind");
    expect(R"({"name": "x", "m": 2, "domains": {"d": {"kind": "box", "lo": [0], "hi": [1, 2]}},
              "checks": []})",
           "domains.d.lo");
    expect(R"({"name": "x", "m": 2,
              "domains": {"d": {"kind": "graph", "axis": 3, "base": {"lo": [0], "hi": [1]},
                                "lower": "0", "upper": "1"}},
              "checks": []})",
           "domains.d.axis");
    expect(R"({"name": "x", "m": 2, "checks": [{"kind": "warp"}]})", "checks[0].kind");
    expect(R"({"name": "x", "m": 2, "maps": {"g": ["x1", "x2"]},
              "checks": [{"kind": "hadamard", "map": "g", "point": [1]}]})",
           "checks[0].point");
    expect(R"({"name": "x", "m": 2, "maps": {"g": ["x1", "x2"]},
              "checks": [{"kind": "hadamard", "map": "g", "point": [1, 2], "tol": -1}]})",
           "checks[0].tol");
    expect(R"({"name": "x", "m": 2, "quad": {"gauss_order": 0}, "checks": []})", "quad");

    // undefined references name both the key and the missing definition
    try {
        load_scenario(R"({"name": "x", "m": 2, "exprs": {"one": "1"},
                          "domains": {"d": {"kind": "ball", "center": [0,0], "radius": 1}},
                          "checks": [{"kind": "cov", "f": "one", "map": "phi9",
                                      "omega": "d", "target": "d"}]})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK_THAT(e.what(), ContainsSubstring("phi9"));
        CHECK_THAT(e.what(), ContainsSubstring("checks[0].map"));
    }
}

TEST_CASE("graph domains use the remaining coordinate names for their bounds") {
    const Scenario s = load_scenario(R"({
        "name": "g", "m": 3,
        "domains": {"hump": {"kind": "graph", "axis": 2,
                             "base": {"lo": [0, 0], "hi": [1, 1]},
                             "lower": "0", "upper": "x1 + x3"}},
        "checks": []
    })");
    // axis 2 removes x2; bounds see (x1, x3)
    const Domain& d = s.domains.at("hump");
    const double inside[] = {0.5, 0.2, 0.5};
    const double above[] = {0.5, 1.2, 0.5};
    CHECK(d.contains(inside));
    CHECK_FALSE(d.contains(above));
}

TEST_CASE("in-process execution keeps scenario order and captures errors") {
    // second check throws (the identity is not an admissible candidate);
    // first and third succeed regardless of scheduling
    const Scenario s = load_scenario(R"json({
        "name": "mixed", "m": 2,
        "exprs": {"one": "1"},
        "maps": {"polar": ["x1*cos(x2)", "x1*sin(x2)"], "ident": ["x1", "x2"]},
        "domains": {
            "rect": {"kind": "box", "lo": [0, 0], "hi": [1, 6.283185307179586]},
            "disk": {"kind": "ball", "center": [0, 0], "radius": 1}
        },
        "checks": [
            {"kind": "cov", "name": "ok1", "f": "one", "map": "polar", "omega": "rect", "target": "disk"},
            {"kind": "nonretraction", "name": "boom", "map": "ident"},
            {"kind": "divergence", "name": "ok2", "field": "ident", "domain": "disk"}
        ]
    })json");
    const auto outcomes = run_checks(s);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].report.name == "ok1");
    CHECK(outcomes[0].ok());
    CHECK(outcomes[1].report.name == "boom");
    CHECK_FALSE(outcomes[1].ok());
    CHECK_THAT(outcomes[1].error, ContainsSubstring("deviation"));
    CHECK(outcomes[2].report.name == "ok2");
    CHECK(outcomes[2].ok());

    const std::string csv = report_csv(s, outcomes);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "scenario,check,lhs,rhs,residual,rel_residual,tol,pass");
    std::getline(lines, line);
    CHECK_THAT(line, ContainsSubstring("mixed,ok1,"));
    std::getline(lines, line);
    CHECK_THAT(line, ContainsSubstring("nan,nan,nan,nan"));
    CHECK_THAT(line, ContainsSubstring("false"));

    const ordered_json j = report_json(s, outcomes, true, "unused");
    CHECK(j["generated_at"] == "fixed");
    CHECK(j["checks"][1].contains("error"));
    CHECK(j["checks"][1]["pass"] == false);
    CHECK(j["checks"][0]["pass"] == true);
}

TEST_CASE("cli exit codes: pass, fail, invalid") {
    const auto out = fresh_dir("exit");
    CHECK(run_cli("run " + kSource + "/tests/fixtures/pass.json --out " + (out / "p").string()) == 0);
    CHECK(run_cli("run " + kSource + "/tests/fixtures/fail.json --out " + (out / "f").string()) == 1);
    CHECK(run_cli("run " + kSource + "/tests/fixtures/invalid.json --out " + (out / "i").string()) == 2);
    CHECK(run_cli("run " + kSource + "/does_not_exist.json") == 2);

    // the fail run still records its report with pass=false
    const std::string csv = slurp(out / "f" / "report.csv");
    CHECK_THAT(csv, ContainsSubstring("false"));
}

TEST_CASE("cli validation errors reach stderr with the offending name") {
    const auto out = fresh_dir("stderr");
    std::filesystem::create_directories(out);
    const std::string cmd = kCli + " run " + kSource + "/tests/fixtures/invalid.json 2> " +
                            (out / "err.txt").string() + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    CHECK(WEXITSTATUS(rc) == 2);
    CHECK_THAT(slurp(out / "err.txt"), ContainsSubstring("phi9"));
}

TEST_CASE("fixed-clock reruns are byte-identical") {
    const auto out = fresh_dir("determinism");
    const std::string scenario = kSource + "/scenarios/polar_disk.json";
    REQUIRE(run_cli("run " + scenario + " --fixed-clock --out " + (out / "a").string()) == 0);
    REQUIRE(run_cli("run " + scenario + " --fixed-clock --out " + (out / "b").string()) == 0);
    CHECK(slurp(out / "a" / "report.json") == slurp(out / "b" / "report.json"));
    CHECK(slurp(out / "a" / "report.csv") == slurp(out / "b" / "report.csv"));
}

TEST_CASE("cli overrides reach the quadrature scheme") {
    const auto out = fresh_dir("override");
    // two nodes on a full circle cannot resolve the trigonometric flux
    // integrands, so at least one ball check must now miss 1e-6
    CHECK(run_cli("run " + kSource + "/scenarios/divergence_2d.json --gauss-order 2 --subdivisions 1 --out " +
                  (out / "coarse").string()) == 1);
    const std::string json = slurp(out / "coarse" / "report.json");
    CHECK_THAT(json, ContainsSubstring("\"gauss_order\": 2"));
}

TEST_CASE("list-builtins names the vocabulary") {
    const auto out = fresh_dir("builtins");
    std::filesystem::create_directories(out);
    const std::string cmd = kCli + " list-builtins > " + (out / "b.txt").string();
    REQUIRE(std::system(cmd.c_str()) != -1);
    const std::string text = slurp(out / "b.txt");
    CHECK_THAT(text, ContainsSubstring("check_divergence"));
    CHECK_THAT(text, ContainsSubstring("ball"));
    CHECK_THAT(text, ContainsSubstring("gauss_order 16"));
    CHECK_THAT(text, ContainsSubstring("piecewise"));
}
