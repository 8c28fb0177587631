// hyperflux CLI: run scenario files and emit report.json / report.csv, or
// list the built-in vocabulary.  Exit codes: 0 all checks pass, 1 any check
// fails or throws, 2 the scenario is invalid.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hyperflux/scenario.hpp"

namespace {

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

void print_builtins() {
    std::cout << "expression grammar:\n"
              << "  infix + - * / ^ with unary minus; ^ binds tighter than unary minus\n"
              << "  constants: pi, e\n"
              << "  functions:";
    for (const auto& b : hyperflux::builtin_table)
        std::cout << ' ' << b.name << '/' << b.arity;
    std::cout << "\n  piecewise(c, a, b) = a when c > 0, else b; NaN condition stays NaN\n\n";
    std::cout << "domain kinds: box, ball, graph\n\n";
    std::cout << "check kinds (scenario \"kind\" / library verifier):\n"
              << "  divergence      check_divergence      {field, domain}\n"
              << "  cov             check_cov             {f, map, omega, target}\n"
              << "  cov_signed      check_cov_singly      {f, map, omega (ball), target}\n"
              << "  hadamard        check_hadamard        {map, point}\n"
              << "  cofactor_flux   check_cofactor_flux   {f, map, point, half_width}\n"
              << "  nonretraction   check_nonretraction   {map}\n"
              << "  ball_exhaustion ball_exhaustion_check {f, map, omega, target, balls}\n\n";
    hyperflux::QuadScheme q;
    std::cout << "quad defaults: gauss_order " << q.gauss_order << ", subdivisions "
              << q.subdivisions << ", rel_tol " << q.rel_tol << ", mc_seed " << q.mc_seed << "\n";
    std::cout << "environment: HYPERFLUX_THREADS caps worker threads\n";
}

int run_scenario(const std::string& path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, std::optional<int> gauss_order,
                 std::optional<int> subdivisions, bool fixed_clock) {
    hyperflux::Scenario s;
    try {
        s = hyperflux::load_scenario_file(path);
        if (seed) s.quad.mc_seed = *seed;
        if (gauss_order) s.quad.gauss_order = *gauss_order;
        if (subdivisions) s.quad.subdivisions = *subdivisions;
        s.quad.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const auto outcomes = hyperflux::run_checks(s);

    std::filesystem::create_directories(out_dir);
    const auto json = hyperflux::report_json(s, outcomes, fixed_clock, now_iso8601());
    write_file(std::filesystem::path(out_dir) / "report.json", json.dump(2) + "\n");
    write_file(std::filesystem::path(out_dir) / "report.csv",
               hyperflux::report_csv(s, outcomes));

    std::size_t passed = 0;
    std::size_t name_w = 5;
    for (const auto& o : outcomes) name_w = std::max(name_w, o.report.name.size());
    std::printf("scenario %s (m=%d, %zu checks)\n", s.name.c_str(), s.m, outcomes.size());
    for (const auto& o : outcomes) {
        if (!o.error.empty()) {
            std::printf("  %-*s  ERROR %s\n", static_cast<int>(name_w), o.report.name.c_str(),
                        o.error.c_str());
            continue;
        }
        std::printf("  %-*s  %s  rel_residual=%.3e  tol=%.1e\n", static_cast<int>(name_w),
                    o.report.name.c_str(), o.report.pass ? "pass" : "FAIL",
                    o.report.rel_residual, o.report.tol);
        if (o.report.pass) ++passed;
    }
    std::printf("%zu/%zu checks passed; reports in %s\n", passed, outcomes.size(),
                out_dir.c_str());
    return passed == outcomes.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numeric verification of volume, surface, and change-of-variables identities"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> gauss_order;
    std::optional<int> subdivisions;
    bool fixed_clock = false;

    auto* run = app.add_subcommand("run", "run every check in a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "directory for report.json and report.csv");
    run->add_option("--seed", seed, "override the scenario's mc_seed");
    run->add_option("--gauss-order", gauss_order, "override nodes per axis per cell");
    run->add_option("--subdivisions", subdivisions, "override cells per axis");
    run->add_flag("--fixed-clock", fixed_clock, "write a constant timestamp for byte-stable output");

    auto* list = app.add_subcommand("list-builtins", "print functions, domain and check kinds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            print_builtins();
            return 0;
        }
        return run_scenario(scenario_path, out_dir, seed, gauss_order, subdivisions, fixed_clock);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
