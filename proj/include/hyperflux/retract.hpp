#pragma once

// The non-retraction obstruction, made numerical: a continuous bump f that is
// positive at the origin and vanishes outside the half-ball has a positive
// integral over the unit ball B, yet the pulled-back signed integral of any
// admissible sphere-valued candidate T (|T| = 1 on B, T = id on the sphere)
// is zero because f vanishes identically on T's image.  Exhibiting L > 0
// against R = 0 is the contradiction that rules out such retractions.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperflux/diff.hpp"
#include "hyperflux/expr.hpp"
#include "hyperflux/geom.hpp"
#include "hyperflux/quad.hpp"
#include "hyperflux/theorems.hpp"

namespace hyperflux {

/// The bump 1 - 4|y|^2 inside the half-ball, 0 outside; continuous, equal to
/// 1 at the origin.
inline FieldExpr bump_field(int m) {
    if (m < 2) throw std::invalid_argument("bump_field: dimension must be >= 2");
    std::vector<std::string> vars;
    for (int i = 1; i <= m; ++i) vars.push_back("x" + std::to_string(i));
    NodePtr sumsq = make_binary(Node::Kind::pow, make_variable(0), make_number(2.0));
    for (int i = 1; i < m; ++i)
        sumsq = make_binary(Node::Kind::add, std::move(sumsq),
                            make_binary(Node::Kind::pow, make_variable(i), make_number(2.0)));
    NodePtr cond = make_binary(Node::Kind::sub, make_number(0.25), sumsq);
    NodePtr inside = make_binary(Node::Kind::sub, make_number(1.0),
                                 make_binary(Node::Kind::mul, make_number(4.0), sumsq));
    return FieldExpr(make_call(Builtin::piecewise, {std::move(cond), std::move(inside), make_number(0.0)}),
                     std::move(vars));
}

/// Closed form of the bump's integral over the unit ball:
/// |S^(m-1)| * ((1/2)^m / m - 4 (1/2)^(m+2) / (m+2)); pi/8 for m=2, pi/15
/// for m=3.
inline double bump_integral_closed_form(int m) {
    const double sphere = 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
    const double radial =
        std::pow(0.5, m) / m - 4.0 * std::pow(0.5, m + 2) / (m + 2);
    return sphere * radial;
}

namespace detail {

// deterministic unit directions: uniform angles in the plane, a Fibonacci
// lattice on the 2-sphere
inline std::vector<std::vector<double>> unit_directions(int m, int n) {
    std::vector<std::vector<double>> dirs;
    dirs.reserve(static_cast<std::size_t>(n));
    if (m == 2) {
        for (int k = 0; k < n; ++k) {
            const double t = 2.0 * std::numbers::pi * k / n;
            dirs.push_back({std::cos(t), std::sin(t)});
        }
    } else if (m == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < n; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / n;
            const double r = std::sqrt(std::fmax(0.0, 1.0 - z * z));
            const double t = golden * k;
            dirs.push_back({r * std::cos(t), r * std::sin(t), z});
        }
    } else {
        throw std::invalid_argument("unit_directions: only dimensions 2 and 3 are supported");
    }
    return dirs;
}

}  // namespace detail

/// A would-be retraction of the unit ball onto its sphere, with its two
/// defining claims measured on declared grids at construction: radii
/// 0.1,...,1.0 times 64 uniform angles (m=2) or 256 Fibonacci directions
/// (m=3) for sphere-valuedness, the unit-radius ring of the same directions
/// for boundary identity.  Admissible when both deviations are <= 1e-8.
class RetractionCandidate {
public:
    explicit RetractionCandidate(MapExpr map) : map_(std::move(map)) {
        const int m = map_.dim_out();
        if (m != map_.arity_in())
            throw std::invalid_argument("RetractionCandidate: map is not square");
        const auto dirs = detail::unit_directions(m, m == 2 ? 64 : 256);
        std::vector<double> x(static_cast<std::size_t>(m)), t(static_cast<std::size_t>(m));
        for (int ri = 1; ri <= 10; ++ri) {
            const double r = ri / 10.0;
            for (const auto& dir : dirs) {
                for (int i = 0; i < m; ++i)
                    x[static_cast<std::size_t>(i)] = r * dir[static_cast<std::size_t>(i)];
                map_.eval_into(x, t);
                sphere_deviation_ = std::fmax(sphere_deviation_, std::abs(norm2(t) - 1.0));
                if (ri == 10) {
                    double dev = 0.0;
                    for (int i = 0; i < m; ++i)
                        dev = std::fmax(dev, std::abs(t[static_cast<std::size_t>(i)] -
                                                      x[static_cast<std::size_t>(i)]));
                    boundary_deviation_ = std::fmax(boundary_deviation_, dev);
                }
            }
        }
    }

    const MapExpr& map() const { return map_; }
    int dim() const { return map_.dim_out(); }
    double sphere_deviation() const { return sphere_deviation_; }
    double boundary_deviation() const { return boundary_deviation_; }
    bool admissible() const { return sphere_deviation_ <= 1e-8 && boundary_deviation_ <= 1e-8; }

private:
    MapExpr map_;
    double sphere_deviation_ = 0.0;
    double boundary_deviation_ = 0.0;
};

/// L = integral of the bump over the unit ball (positive; sanity-gated
/// against its closed form) versus R = the signed pulled-back integral,
/// which vanishes wherever |T| = 1 makes the bump's support unreachable.
/// The report's lhs is R against rhs = 0; L and the contradiction flag are
/// diagnostics.
inline VerifyReport check_nonretraction(const RetractionCandidate& cand, const QuadScheme& q,
                                        double tol = 1e-10) {
    if (!cand.admissible())
        throw std::invalid_argument(
            "check_nonretraction: inadmissible candidate (sphere deviation " +
            std::to_string(cand.sphere_deviation()) + ", boundary deviation " +
            std::to_string(cand.boundary_deviation()) + ")");
    const int m = cand.dim();
    const FieldExpr f = bump_field(m);
    const Domain ball = Domain::ball(std::vector<double>(static_cast<std::size_t>(m), 0.0), 1.0);
    const double closed = bump_integral_closed_form(m);
    const double L = integrate_volume(f, ball, q);
    if (!(L > 0.1 * closed))
        throw std::runtime_error("check_nonretraction: bump integral " + std::to_string(L) +
                                 " lost mass versus closed form " + std::to_string(closed) +
                                 " (quadrature failure)");
    std::vector<double> t(static_cast<std::size_t>(m));
    const double R = integrate_volume_fn(
        [&](std::span<const double> x) {
            const double j = jacobian_det(cand.map(), x, q.diff);
            cand.map().eval_into(x, t);
            return f(t) * j;
        },
        ball, q);
    VerifyReport r = make_report("nonretraction", R, 0.0, tol,
                                 {{"bump_integral", L},
                                  {"bump_closed_form", closed},
                                  {"sphere_deviation", cand.sphere_deviation()},
                                  {"boundary_deviation", cand.boundary_deviation()}});
    r.diagnostics.emplace_back("contradiction", (L > 0.0 && r.pass) ? 1.0 : 0.0);
    return r;
}

/// Best-effort fixed-point locator for a map of the closed unit ball into
/// itself: screens the self-map claim on a radial grid, seeds from the best
/// grid point, then follows the iteration x -> g(x), returning the point
/// with the smallest step |g(x) - x| seen.  Demonstration-grade only.
inline std::vector<double> fixed_point_search(const MapExpr& g, int grid_n, int iters) {
    const int m = g.dim_out();
    if (m != g.arity_in()) throw std::invalid_argument("fixed_point_search: map is not square");
    if (grid_n < 1 || iters < 0) throw std::invalid_argument("fixed_point_search: bad budget");
    const auto dirs = detail::unit_directions(m, m == 2 ? std::max(8, grid_n) : std::max(32, grid_n));
    std::vector<double> x(static_cast<std::size_t>(m), 0.0), gx(static_cast<std::size_t>(m));
    std::vector<double> best_x(static_cast<std::size_t>(m), 0.0);
    double best = std::numeric_limits<double>::infinity();

    const auto consider = [&](std::span<const double> p) {
        g.eval_into(p, gx);
        if (norm2(gx) > 1.0 + 1e-8)
            throw std::runtime_error("fixed_point_search: map leaves the unit ball");
        double d = 0.0;
        for (int i = 0; i < m; ++i) {
            const double e = gx[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)];
            d += e * e;
        }
        d = std::sqrt(d);
        if (d < best) {
            best = d;
            best_x.assign(p.begin(), p.end());
        }
    };

    consider(x);  // center
    for (int ri = 1; ri <= grid_n; ++ri) {
        const double r = static_cast<double>(ri) / grid_n;
        for (const auto& dir : dirs) {
            for (int i = 0; i < m; ++i) x[static_cast<std::size_t>(i)] = r * dir[static_cast<std::size_t>(i)];
            consider(x);
        }
    }
    x = best_x;
    for (int it = 0; it < iters; ++it) {
        g.eval_into(x, gx);
        x = gx;
        consider(x);
    }
    return best_x;
}

}  // namespace hyperflux
