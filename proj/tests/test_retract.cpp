#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "hyperflux/quad.hpp"
#include "hyperflux/retract.hpp"

using namespace hyperflux;
using Catch::Matchers::ContainsSubstring;

namespace {

double diag(const VerifyReport& r, const std::string& key) {
    for (const auto& [k, v] : r.diagnostics)
        if (k == key) return v;
    FAIL("missing diagnostic " << key);
    return 0.0;
}

MapExpr radial_candidate() {
    return parse_map({"x1/max(sqrt(x1^2 + x2^2), 1e-6)", "x2/max(sqrt(x1^2 + x2^2), 1e-6)"},
                     {"x1", "x2"});
}

}  // namespace

TEST_CASE("bump profile values and support") {
    const FieldExpr b2 = bump_field(2);
    const double center[] = {0.0, 0.0};
    const double mid[] = {0.45, 0.0};
    const double rim[] = {0.5, 0.0};
    const double outside[] = {0.6, 0.3};
    CHECK(b2(center) == 1.0);
    CHECK(b2(mid) == Catch::Approx(1.0 - 4.0 * 0.2025));
    CHECK(b2(rim) == 0.0);
    CHECK(b2(outside) == 0.0);
    CHECK_THROWS_AS(bump_field(1), std::invalid_argument);
}

TEST_CASE("bump integrals match their closed forms") {
    CHECK(bump_integral_closed_form(2) == Catch::Approx(M_PI / 8.0).epsilon(1e-14));
    CHECK(bump_integral_closed_form(3) == Catch::Approx(M_PI / 15.0).epsilon(1e-14));

    QuadScheme q;
    const double n2 = integrate_volume(bump_field(2), Domain::ball({0.0, 0.0}, 1.0), q);
    CHECK(n2 == Catch::Approx(M_PI / 8.0).epsilon(1e-6));
    const double n3 = integrate_volume(bump_field(3), Domain::ball({0.0, 0.0, 0.0}, 1.0), q);
    CHECK(n3 == Catch::Approx(M_PI / 15.0).epsilon(1e-6));
}

TEST_CASE("candidate screening measures sphere and boundary deviations") {
    const RetractionCandidate radial(radial_candidate());
    CHECK(radial.admissible());
    CHECK(radial.sphere_deviation() <= 1e-8);
    CHECK(radial.boundary_deviation() <= 1e-8);

    // the identity fixes the boundary but does not map into the sphere
    const RetractionCandidate ident(parse_map({"x1", "x2"}, {"x1", "x2"}));
    CHECK_FALSE(ident.admissible());
    CHECK(ident.boundary_deviation() <= 1e-12);
    CHECK(ident.sphere_deviation() > 0.5);

    // mapping into the sphere alone is not enough: the boundary must be fixed
    const RetractionCandidate askew(parse_map({"1", "0"}, {"x1", "x2"}));
    CHECK(askew.sphere_deviation() <= 1e-12);
    CHECK_FALSE(askew.admissible());

    CHECK_THROWS_AS(RetractionCandidate(parse_map({"x1", "x2", "x1"}, {"x1", "x2"})),
                    std::invalid_argument);
}

TEST_CASE("the retraction integral contradiction is exhibited numerically") {
    QuadScheme q;
    const VerifyReport r = check_nonretraction(RetractionCandidate(radial_candidate()), q);
    CHECK(r.pass);
    CHECK(std::abs(r.lhs) <= 1e-10);                      // pushforward integral vanishes
    CHECK(diag(r, "bump_integral") > 0.39);               // but the volume integral does not
    CHECK(diag(r, "bump_integral") == Catch::Approx(M_PI / 8.0).epsilon(1e-6));
    CHECK(diag(r, "contradiction") == 1.0);

    CHECK_THROWS_WITH(
        check_nonretraction(RetractionCandidate(parse_map({"x1", "x2"}, {"x1", "x2"})), q),
        ContainsSubstring("deviation"));
}

TEST_CASE("fixed point search on maps of the unit ball") {
    // a constant map's fixed-point equation is solved exactly by the grid
    const MapExpr constant = parse_map({"0.4", "-0.2"}, {"x1", "x2"});
    const auto p = fixed_point_search(constant, 24, 60);
    CHECK(p[0] == Catch::Approx(0.4).margin(1e-9));
    CHECK(p[1] == Catch::Approx(-0.2).margin(1e-9));

    // a contraction converges to its unique fixed point x = (g stays in ball)
    const MapExpr contraction = parse_map({"0.5*x1 + 0.25", "0.5*x2 - 0.1"}, {"x1", "x2"});
    const auto c = fixed_point_search(contraction, 24, 80);
    CHECK(c[0] == Catch::Approx(0.5).margin(1e-6));
    CHECK(c[1] == Catch::Approx(-0.2).margin(1e-6));

    CHECK_THROWS_WITH(fixed_point_search(parse_map({"2*x1 + 2", "x2"}, {"x1", "x2"}), 8, 8),
                      ContainsSubstring("unit ball"));
}

TEST_CASE("random smooth contractions all admit numerical fixed points") {
    // property sweep: affine contractions x -> A x + b with |A| + |b| < 1
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const auto coef = [&](std::uint64_t k) {
            return 0.3 * (2.0 * uniform01(900 + rep, k) - 1.0);
        };
        const double a11 = coef(0), a12 = coef(1), a21 = coef(2), a22 = coef(3);
        const double b1 = coef(4) * 0.5, b2 = coef(5) * 0.5;
        const auto num = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        const MapExpr g = parse_map({num(a11) + "*x1 + " + num(a12) + "*x2 + " + num(b1),
                                     num(a21) + "*x1 + " + num(a22) + "*x2 + " + num(b2)},
                                    {"x1", "x2"});
        const auto p = fixed_point_search(g, 16, 100);
        const auto gp = g(p);
        const double res = std::hypot(gp[0] - p[0], gp[1] - p[1]);
        INFO("rep " << rep);
        CHECK(res <= 1e-6);
    }
}
