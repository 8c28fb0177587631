#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hyperflux/theorems.hpp"

using namespace hyperflux;
using Catch::Matchers::ContainsSubstring;

namespace {

double diag(const VerifyReport& r, const std::string& key) {
    for (const auto& [k, v] : r.diagnostics)
        if (k == key) return v;
    FAIL("missing diagnostic " << key);
    return 0.0;
}

const std::vector<std::string> xy = {"x1", "x2"};

}  // namespace

TEST_CASE("volume of divergence equals boundary flux on all domain kinds") {
    QuadScheme q;

    const MapExpr field2 = parse_map({"x1 + x2^2", "0"}, xy);
    const VerifyReport box_r =
        check_divergence(field2, Domain::box({0.0, 0.0}, {1.0, 1.0}), q);
    CHECK(box_r.pass);
    CHECK(box_r.lhs == Catch::Approx(1.0).epsilon(1e-9));

    const MapExpr rot = parse_map({"x2", "-x1"}, xy);
    const VerifyReport ball_r = check_divergence(rot, Domain::ball({0.3, -0.2}, 1.1), q);
    CHECK(ball_r.pass);
    CHECK(std::abs(ball_r.lhs) < 1e-9);  // divergence-free
    CHECK(std::abs(ball_r.rhs) < 1e-8);

    const Domain slab = Domain::graph(1, BoxSpec{{0.0}, {1.0}},
                                      parse_scalar("0", {"x1"}), parse_scalar("1", {"x1"}));
    const MapExpr axis1 = parse_map({"x1*x2 + 1", "0"}, xy);
    const VerifyReport graph_r = check_divergence(axis1, slab, q);
    CHECK(graph_r.pass);

    CHECK_THROWS_AS(check_divergence(parse_map({"x1"}, {"x1"}),
                                     Domain::box({0.0, 0.0}, {1.0, 1.0}), q),
                    std::invalid_argument);
}

TEST_CASE("side walls carry no flux for a field aligned with the graph axis") {
    QuadScheme q;
    // graph sandwiches along axis 2; the field has only an x2 component
    const Domain wedge = Domain::graph(1, BoxSpec{{0.0}, {1.0}},
                                       parse_scalar("0", {"x1"}), parse_scalar("x1", {"x1"}));
    const MapExpr f = parse_map({"0", "sin(x1) + x2"}, xy);
    const VerifyReport r = check_divergence(f, wedge, q);
    CHECK(r.pass);
    CHECK(diag(r, "sigma0_flux_abs_total") <= 1e-12);
}

TEST_CASE("potential integrates the first coordinate and differentiates back") {
    QuadScheme q;
    const double a = 1.0;

    const PotentialQ q1 = potential_Q(parse_scalar("1", xy), a, q);
    const double p1[] = {0.5, 0.2};
    CHECK(q1(p1) == Catch::Approx(1.5).epsilon(1e-12));  // y1 + a

    const PotentialQ q2 = potential_Q(parse_scalar("x1*x2", xy), a, q);
    const double p2[] = {0.5, -0.6};
    // int_{-1}^{0.5} t dt * (-0.6) = (0.125 - 0.5)(-0.6)
    CHECK(q2(p2) == Catch::Approx(0.225).epsilon(1e-10));

    // numeric d/dy1 of Q recovers the integrand on an interior grid
    const FieldExpr f = parse_scalar("sin(x1) + x2^2", xy);
    const PotentialQ qq = potential_Q(f, a, q);
    DiffConfig cfg;
    cfg.lo = {-a, -a};
    cfg.hi = {a, a};
    for (double y1 = -0.75; y1 <= 0.76; y1 += 0.5)
        for (double y2 = -0.75; y2 <= 0.76; y2 += 0.5) {
            const double p[] = {y1, y2};
            const double dq = gradient_fn([&](std::span<const double> y) { return qq(y); }, p, cfg)[0];
            CHECK(dq == Catch::Approx(f(p)).margin(1e-6));
        }

    const double outside[] = {1.5, 0.0};
    CHECK_THROWS_AS(q1(outside), std::domain_error);
}

TEST_CASE("cofactor columns of smooth square maps are divergence free") {
    QuadScheme q;
    const MapExpr linear = parse_map({"2*x1 + x2", "x1 - 3*x2"}, xy);
    const double pt[] = {0.3, -0.7};
    const VerifyReport lin_r = check_hadamard(linear, pt, q.diff, 1e-10);
    CHECK(lin_r.pass);

    const std::vector<std::string> xyz = {"x1", "x2", "x3"};
    const MapExpr cubic = parse_map(
        {"x1*x2*x3", "x1^2 + x3", "x2 - x3^2"}, xyz);
    const double pt3[] = {0.4, 0.2, -0.5};
    const VerifyReport cubic_r = check_hadamard(cubic, pt3, q.diff, 1e-4);
    CHECK(cubic_r.pass);

    CHECK_THROWS_AS(check_hadamard(parse_map({"x1", "x2", "x1"}, xy), pt, q.diff, 1e-4),
                    std::invalid_argument);
}

TEST_CASE("flux form of the pullback potential reproduces f(phi) J_phi") {
    QuadScheme q;
    const FieldExpr f = parse_scalar("x1 + x2^2", xy);
    const MapExpr curved = parse_map({"x1*x2", "x1 + x2"}, xy);
    const double pt[] = {0.4, 0.2};
    const VerifyReport r = check_cofactor_flux(f, curved, pt, 2.0, q, 1e-4);
    CHECK(r.pass);
    // rhs carries the analytic Jacobian det of (x1 x2, x1 + x2): x2 - x1
    CHECK(diag(r, "jacobian") == Catch::Approx(0.2 - 0.4).margin(1e-6));

    // a potential cube too small to contain the image must be detected
    const MapExpr shifted = parse_map({"x1 + 10", "x2"}, xy);
    CHECK_THROWS_AS(check_cofactor_flux(f, shifted, pt, 2.0, q, 1e-4), std::domain_error);
}

TEST_CASE("unsigned substitution rule on the polar chart") {
    QuadScheme q;
    const MapExpr polar = parse_map({"x1*cos(x2)", "x1*sin(x2)"}, xy);
    const Domain rect = Domain::box({0.0, 0.0}, {1.0, 2.0 * M_PI});
    const Domain disk = Domain::ball({0.0, 0.0}, 1.0);
    const VerifyReport r = check_cov(parse_scalar("1", xy), polar, rect, disk, q);
    CHECK(r.pass);
    CHECK(r.lhs == Catch::Approx(M_PI).epsilon(1e-9));
    CHECK(r.rhs == Catch::Approx(M_PI).epsilon(1e-9));

    CHECK_THROWS_AS(check_cov(parse_scalar("1", {"x1"}), polar, rect, disk, q),
                    std::invalid_argument);
}

TEST_CASE("signed substitution tracks the orientation of the map") {
    QuadScheme q;
    const Domain disk = Domain::ball({0.0, 0.0}, 1.0);
    const FieldExpr f = parse_scalar("x1 + x2^2 + 1", xy);

    const MapExpr reflect = parse_map({"x1", "-x2"}, xy);
    const VerifyReport neg = check_cov_singly(f, reflect, disk, disk, q);
    CHECK(neg.pass);
    CHECK(diag(neg, "sign") == -1.0);
    CHECK(diag(neg, "census_positive") == 0.0);
    CHECK(diag(neg, "census_negative") == 100.0);

    const MapExpr rotate = parse_map(
        {"cos(pi/3)*x1 - sin(pi/3)*x2", "sin(pi/3)*x1 + cos(pi/3)*x2"}, xy);
    const VerifyReport pos = check_cov_singly(f, rotate, disk, disk, q);
    CHECK(pos.pass);
    CHECK(diag(pos, "sign") == 1.0);

    // orientation-preserving case agrees with the unsigned rule
    const VerifyReport unsigned_r = check_cov(f, rotate, disk, disk, q);
    CHECK(std::abs(pos.rhs - unsigned_r.rhs) <= 1e-9 * std::abs(unsigned_r.rhs));

    // a map singular at the screening center is rejected, not misreported
    const MapExpr pinched = parse_map({"x1^2", "x2"}, xy);
    CHECK_THROWS_WITH(check_cov_singly(f, pinched, disk, disk, q),
                      ContainsSubstring("inconclusive"));
}

TEST_CASE("disjoint pulled-back balls never exceed the target integral") {
    QuadScheme q;
    const MapExpr polar = parse_map({"x1*cos(x2)", "x1*sin(x2)"}, xy);
    const Domain rect = Domain::box({0.0, 0.0}, {1.0, 2.0 * M_PI});
    const Domain disk = Domain::ball({0.0, 0.0}, 1.0);
    const FieldExpr one = parse_scalar("1", xy);
    const std::vector<BallSpec> balls = {
        {{0.3, 1.0}, 0.2}, {{0.7, 3.0}, 0.25}, {{0.5, 5.0}, 0.3}};
    const VerifyReport r = ball_exhaustion_check(one, polar, rect, disk, balls, q);
    CHECK(r.pass);
    CHECK(r.lhs == 0.0);  // no violation of the inequality
    CHECK(diag(r, "ball_count") == 3.0);
    // each pulled-back ball integral is radius^2 pi times the center radius
    CHECK(diag(r, "ball1") == Catch::Approx(0.04 * M_PI * 0.3).epsilon(1e-9));
    CHECK(diag(r, "ball2") == Catch::Approx(0.0625 * M_PI * 0.7).epsilon(1e-9));
    CHECK(diag(r, "ball3") == Catch::Approx(0.09 * M_PI * 0.5).epsilon(1e-9));
    CHECK(diag(r, "gap") ==
          Catch::Approx(M_PI - (0.04 * 0.3 + 0.0625 * 0.7 + 0.09 * 0.5) * M_PI).epsilon(1e-8));

    SECTION("overlapping balls are rejected") {
        const std::vector<BallSpec> overlap = {{{0.3, 1.0}, 0.2}, {{0.35, 1.0}, 0.2}};
        CHECK_THROWS_WITH(ball_exhaustion_check(one, polar, rect, disk, overlap, q),
                          ContainsSubstring("overlap"));
    }
    SECTION("balls must sit inside omega") {
        const std::vector<BallSpec> outside = {{{0.95, 1.0}, 0.2}};
        CHECK_THROWS_WITH(ball_exhaustion_check(one, polar, rect, disk, outside, q),
                          ContainsSubstring("escapes"));
    }
}

TEST_CASE("reports expose the residual arithmetic") {
    const VerifyReport r = make_report("demo", 2.0, 2.0 + 1e-9, 1e-7, {});
    CHECK(r.residual == Catch::Approx(1e-9));
    CHECK(r.rel_residual == Catch::Approx(0.5e-9));
    CHECK(r.pass);
    const VerifyReport tight = make_report("demo", 2.0, 2.0 + 1e-9, 1e-10, {});
    CHECK_FALSE(tight.pass);
    // small numbers are judged on absolute scale (denominator floors at 1)
    const VerifyReport small = make_report("demo", 1e-12, 0.0, 1e-10, {});
    CHECK(small.pass);
}
