#pragma once

// Geometry layer: parametrized hypersurface pieces, volume domains (box, ball,
// graph-bounded), boundary decomposition with outward orientation.
//
// A surface piece is a chart U -> R^m over a box U in R^(m-1); its normal is
// the vector of signed maximal Jacobian minors (see normal_from_minors).  The
// outward sign of each boundary piece is decided by probing against a known
// interior point of the domain.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hyperflux/diff.hpp"
#include "hyperflux/expr.hpp"
#include "hyperflux/linalg.hpp"

namespace hyperflux {

struct BoxSpec {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double center(int axis) const {
        return 0.5 * (lo[static_cast<std::size_t>(axis)] + hi[static_cast<std::size_t>(axis)]);
    }
    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }
};

struct BallSpec {
    std::vector<double> center;
    double radius = 0.0;

    int dim() const { return static_cast<int>(center.size()); }
};

/// Region between two graphs along one axis: points x with
/// x' = (x with `axis` removed) in `base` and lower(x') <= x_axis <= upper(x').
struct GraphSpec {
    int axis = 0;  // 0-based ambient axis
    BoxSpec base;
    FieldExpr lower, upper;
};

/// One C^1 chart over a parameter box, with the sign that makes its minor
/// normal point out of the domain it bounds.
struct ParamSurface {
    MapExpr chart;  // R^(m-1) -> R^m
    std::vector<double> param_lo, param_hi;
    int orientation_sign = +1;
    std::string label;

    int ambient_dim() const { return chart.dim_out(); }
    int param_dim() const { return chart.arity_in(); }
};

struct PiecewiseSurface {
    std::vector<ParamSurface> pieces;
};

namespace detail {

inline std::vector<std::string> param_names(int k) {
    std::vector<std::string> v;
    v.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) v.push_back("u" + std::to_string(i));
    return v;
}

// x' = x with coordinate `axis` removed
inline std::vector<double> drop_axis(std::span<const double> x, int axis) {
    std::vector<double> out;
    out.reserve(x.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (static_cast<int>(i) != axis) out.push_back(x[i]);
    return out;
}

// interior sample positions in (0,1), endpoints excluded
inline std::vector<double> interior_fractions(int n) {
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = (i + 0.5) / n;
    return f;
}

}  // namespace detail

class Domain {
public:
    enum class Kind { box, ball, graph };

    static Domain box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.empty() || lo.size() != hi.size())
            throw std::invalid_argument("Domain::box: lo/hi size mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i]))
                throw std::invalid_argument("Domain::box: needs lo < hi on axis " +
                                            std::to_string(i + 1));
        return Domain(BoxSpec{std::move(lo), std::move(hi)});
    }

    static Domain ball(std::vector<double> center, double radius) {
        if (center.empty()) throw std::invalid_argument("Domain::ball: empty center");
        if (!(radius > 0.0)) throw std::invalid_argument("Domain::ball: needs radius > 0");
        return Domain(BallSpec{std::move(center), radius});
    }

    /// `axis` is 0-based; lower/upper take the remaining coordinates in
    /// increasing axis order.  Validates lower < upper on an interior grid.
    static Domain graph(int axis, BoxSpec base, FieldExpr lower, FieldExpr upper) {
        const int m = base.dim() + 1;
        if (axis < 0 || axis >= m) throw std::invalid_argument("Domain::graph: axis out of range");
        if (lower.arity_in() != base.dim() || upper.arity_in() != base.dim())
            throw std::invalid_argument("Domain::graph: bound arity must match base dimension");
        for (int i = 0; i < base.dim(); ++i)
            if (!(base.lo[static_cast<std::size_t>(i)] < base.hi[static_cast<std::size_t>(i)]))
                throw std::invalid_argument("Domain::graph: base box needs lo < hi");
        // interior sample grid: the bounds may touch on the base boundary
        const auto fr = detail::interior_fractions(5);
        std::vector<double> x(static_cast<std::size_t>(base.dim()));
        std::vector<int> idx(static_cast<std::size_t>(base.dim()), 0);
        for (;;) {
            for (int i = 0; i < base.dim(); ++i)
                x[static_cast<std::size_t>(i)] =
                    base.lo[static_cast<std::size_t>(i)] +
                    fr[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] *
                        (base.hi[static_cast<std::size_t>(i)] - base.lo[static_cast<std::size_t>(i)]);
            if (!(lower(x) < upper(x)))
                throw std::invalid_argument("Domain::graph: lower bound not below upper bound on sample grid");
            int carry = 0;
            while (carry < base.dim() && ++idx[static_cast<std::size_t>(carry)] == 5) {
                idx[static_cast<std::size_t>(carry)] = 0;
                ++carry;
            }
            if (carry == base.dim()) break;
        }
        return Domain(GraphSpec{axis, std::move(base), std::move(lower), std::move(upper)});
    }

    Kind kind() const { return static_cast<Kind>(spec_.index()); }
    int dim() const {
        switch (kind()) {
            case Kind::box: return as_box().dim();
            case Kind::ball: return as_ball().dim();
            case Kind::graph: return as_graph().base.dim() + 1;
        }
        return 0;
    }

    const BoxSpec& as_box() const { return std::get<BoxSpec>(spec_); }
    const BallSpec& as_ball() const { return std::get<BallSpec>(spec_); }
    const GraphSpec& as_graph() const { return std::get<GraphSpec>(spec_); }

    bool contains(std::span<const double> x) const {
        switch (kind()) {
            case Kind::box: {
                const auto& b = as_box();
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i] < b.lo[i] || x[i] > b.hi[i]) return false;
                return true;
            }
            case Kind::ball: {
                const auto& b = as_ball();
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double d = x[i] - b.center[i];
                    s += d * d;
                }
                return s <= b.radius * b.radius;
            }
            case Kind::graph: {
                const auto& g = as_graph();
                const auto xp = detail::drop_axis(x, g.axis);
                for (std::size_t i = 0; i < xp.size(); ++i)
                    if (xp[i] < g.base.lo[i] || xp[i] > g.base.hi[i]) return false;
                const double t = x[static_cast<std::size_t>(g.axis)];
                return g.lower(xp) <= t && t <= g.upper(xp);
            }
        }
        return false;
    }

    /// Axis-aligned box covering the closure.  Exact for box/ball; for graph
    /// domains the axis range is estimated on a dense grid and padded by 5%
    /// of the span (adequate for the smooth bounds shipped here).
    BoxSpec bounding_box() const {
        switch (kind()) {
            case Kind::box: return as_box();
            case Kind::ball: {
                const auto& b = as_ball();
                BoxSpec out;
                out.lo.resize(b.center.size());
                out.hi.resize(b.center.size());
                for (std::size_t i = 0; i < b.center.size(); ++i) {
                    out.lo[i] = b.center[i] - b.radius;
                    out.hi[i] = b.center[i] + b.radius;
                }
                return out;
            }
            case Kind::graph: {
                const auto& g = as_graph();
                const int d = g.base.dim();
                double tmin = std::numeric_limits<double>::infinity();
                double tmax = -tmin;
                const int n = 33;
                std::vector<double> x(static_cast<std::size_t>(d));
                std::vector<int> idx(static_cast<std::size_t>(d), 0);
                for (;;) {
                    for (int i = 0; i < d; ++i)
                        x[static_cast<std::size_t>(i)] =
                            g.base.lo[static_cast<std::size_t>(i)] +
                            (g.base.hi[static_cast<std::size_t>(i)] - g.base.lo[static_cast<std::size_t>(i)]) *
                                idx[static_cast<std::size_t>(i)] / (n - 1.0);
                    tmin = std::fmin(tmin, g.lower(x));
                    tmax = std::fmax(tmax, g.upper(x));
                    int carry = 0;
                    while (carry < d && ++idx[static_cast<std::size_t>(carry)] == n) {
                        idx[static_cast<std::size_t>(carry)] = 0;
                        ++carry;
                    }
                    if (carry == d) break;
                }
                const double pad = 0.05 * std::fmax(tmax - tmin, 1e-12);
                BoxSpec out;
                out.lo.resize(static_cast<std::size_t>(d) + 1);
                out.hi.resize(static_cast<std::size_t>(d) + 1);
                for (int a = 0, s = 0; a < d + 1; ++a) {
                    if (a == g.axis) {
                        out.lo[static_cast<std::size_t>(a)] = tmin - pad;
                        out.hi[static_cast<std::size_t>(a)] = tmax + pad;
                    } else {
                        out.lo[static_cast<std::size_t>(a)] = g.base.lo[static_cast<std::size_t>(s)];
                        out.hi[static_cast<std::size_t>(a)] = g.base.hi[static_cast<std::size_t>(s)];
                        ++s;
                    }
                }
                return out;
            }
        }
        throw std::logic_error("Domain::bounding_box: unreachable");
    }

    /// A point strictly inside the domain, used as the orientation probe.
    std::vector<double> interior_probe() const {
        switch (kind()) {
            case Kind::box: {
                const auto& b = as_box();
                std::vector<double> c(b.lo.size());
                for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (b.lo[i] + b.hi[i]);
                return c;
            }
            case Kind::ball:
                return as_ball().center;
            case Kind::graph: {
                const auto& g = as_graph();
                std::vector<double> xp(static_cast<std::size_t>(g.base.dim()));
                for (int i = 0; i < g.base.dim(); ++i)
                    xp[static_cast<std::size_t>(i)] = g.base.center(i);
                const double t = 0.5 * (g.lower(xp) + g.upper(xp));
                std::vector<double> c;
                c.reserve(xp.size() + 1);
                for (int a = 0, s = 0; a < g.base.dim() + 1; ++a)
                    c.push_back(a == g.axis ? t : xp[static_cast<std::size_t>(s++)]);
                return c;
            }
        }
        throw std::logic_error("Domain::interior_probe: unreachable");
    }

private:
    template <class S>
    explicit Domain(S&& s) : spec_(std::forward<S>(s)) {}

    std::variant<BoxSpec, BallSpec, GraphSpec> spec_;
};

struct SurfaceNormal {
    std::vector<double> raw;   // minor vector N(u)
    std::vector<double> unit;  // orientation_sign * N/|N|
};

/// Minor normal of a chart at parameter u, plus the oriented unit normal.
/// Throws when |N| is below the rank tolerance of the chart Jacobian.
inline SurfaceNormal surface_normal(const ParamSurface& s, std::span<const double> u,
                                    const DiffConfig& cfg) {
    const Matrix j = jacobian(s.chart, u, cfg);
    std::vector<double> n = normal_from_minors(j);
    const double len = norm2(n);
    if (!(len > rank_tolerance(j)))
        throw std::runtime_error("surface_normal: degenerate parametrization (|N| below rank tolerance) on piece '" +
                                 s.label + "'");
    std::vector<double> unit(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) unit[i] = s.orientation_sign * n[i] / len;
    return {std::move(n), std::move(unit)};
}

/// +1 or -1 so that the oriented normal at the chart's parameter-box center
/// points away from the domain's interior probe point.  Throws when the test
/// is inconclusive (probe nearly tangent), with a hint to probe elsewhere.
inline int orient_outward(const ParamSurface& s, const Domain& d) {
    DiffConfig cfg;
    const std::vector<double> c = d.interior_probe();
    const std::size_t k = static_cast<std::size_t>(s.param_dim());
    double n_max = 0.0;
    // 0 = inconclusive at this parameter point
    const auto probe = [&](const std::vector<double>& u) -> int {
        const Matrix j = jacobian(s.chart, u, cfg);
        const std::vector<double> n = normal_from_minors(j);
        n_max = std::max(n_max, norm2(n));
        const std::vector<double> x0 = s.chart(u);
        std::vector<double> dx(x0.size());
        for (std::size_t i = 0; i < x0.size(); ++i) dx[i] = x0[i] - c[i];
        const double sgn = dot(n, dx);
        if (!(std::abs(sgn) > 1e-9 * norm2(n) * norm2(dx))) return 0;
        return sgn > 0.0 ? +1 : -1;
    };

    std::vector<double> u(k);
    for (std::size_t i = 0; i < k; ++i) u[i] = 0.5 * (s.param_lo[i] + s.param_hi[i]);
    if (const int r = probe(u)) return r;
    // center was inconclusive: sweep interior grids away from symmetry points
    for (const double frac : {0.25, 0.125}) {
        std::vector<int> odo(k, 0);
        for (;;) {
            for (std::size_t i = 0; i < k; ++i) {
                const double t = odo[i] ? 1.0 - frac : frac;
                u[i] = s.param_lo[i] + t * (s.param_hi[i] - s.param_lo[i]);
            }
            if (const int r = probe(u)) return r;
            std::size_t carry = 0;
            while (carry < k && ++odo[carry] == 2) odo[carry++] = 0;
            if (carry == k) break;
        }
    }
    // a piece whose normal vanishes everywhere sampled is collapsed (zero
    // surface measure); its orientation never influences any integral
    if (n_max <= 1e-12) return +1;
    throw std::runtime_error("orient_outward: inconclusive probe on piece '" + s.label +
                             "'; use a different probe point");
}

namespace detail {

// chart for one box face: coordinate `axis` pinned to `value`, the rest swept
// by the parameters in increasing axis order
inline ParamSurface box_face(const BoxSpec& b, int axis, bool upper_side) {
    const int m = b.dim();
    const double value = upper_side ? b.hi[static_cast<std::size_t>(axis)]
                                    : b.lo[static_cast<std::size_t>(axis)];
    const auto names = param_names(m - 1);
    std::vector<FieldExpr> comps;
    std::vector<double> plo, phi;
    comps.reserve(static_cast<std::size_t>(m));
    for (int a = 0, slot = 0; a < m; ++a) {
        if (a == axis) {
            comps.emplace_back(make_number(value), names);
        } else {
            comps.emplace_back(make_variable(slot), names);
            plo.push_back(b.lo[static_cast<std::size_t>(a)]);
            phi.push_back(b.hi[static_cast<std::size_t>(a)]);
            ++slot;
        }
    }
    ParamSurface s{MapExpr(std::move(comps)), std::move(plo), std::move(phi), +1,
                   "face[x" + std::to_string(axis + 1) + (upper_side ? "=hi]" : "=lo]")};
    return s;
}

inline NodePtr product(NodePtr a, NodePtr b) { return make_binary(Node::Kind::mul, std::move(a), std::move(b)); }

// direction component d_j(u) of the standard hyperspherical chart:
//   d_1 = cos(u_{m-1}) * prod_{k=1}^{m-2} sin(u_k)
//   d_2 = sin(u_{m-1}) * prod_{k=1}^{m-2} sin(u_k)
//   d_j = cos(u_{m-j+1}) * prod_{k=1}^{m-j} sin(u_k)      (3 <= j <= m)
// with u_1..u_{m-2} in [0,pi] and u_{m-1} in [0,2pi].
inline NodePtr sphere_direction(int m, int j) {
    const auto sin_u = [](int k) { return make_call(Builtin::sin, {make_variable(k)}); };
    const auto cos_u = [](int k) { return make_call(Builtin::cos, {make_variable(k)}); };
    NodePtr node;
    int sin_count;
    if (j == 0) {
        node = cos_u(m - 2);
        sin_count = m - 2;
    } else if (j == 1) {
        node = sin_u(m - 2);
        sin_count = m - 2;
    } else {
        node = cos_u(m - j - 1);
        sin_count = m - j - 1;
    }
    for (int k = 0; k < sin_count; ++k) node = product(sin_u(k), std::move(node));
    return node;
}

}  // namespace detail

/// Chart of the sphere of radius r about `center` (m >= 2), parameter box
/// [0,pi]^(m-2) x [0,2pi].  The chart is rank-deficient exactly at the poles
/// u_k in {0,pi}, which interior quadrature nodes never hit.
inline ParamSurface sphere_chart(const std::vector<double>& center, double radius) {
    const int m = static_cast<int>(center.size());
    if (m < 2) throw std::invalid_argument("sphere_chart: ambient dimension must be >= 2");
    const auto names = detail::param_names(m - 1);
    std::vector<FieldExpr> comps;
    comps.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        NodePtr scaled = detail::product(make_number(radius), detail::sphere_direction(m, j));
        comps.emplace_back(make_binary(Node::Kind::add, make_number(center[static_cast<std::size_t>(j)]),
                                       std::move(scaled)),
                           names);
    }
    std::vector<double> plo(static_cast<std::size_t>(m - 1), 0.0);
    std::vector<double> phi(static_cast<std::size_t>(m - 1), std::numbers::pi);
    phi.back() = 2.0 * std::numbers::pi;
    return {MapExpr(std::move(comps)), std::move(plo), std::move(phi), +1, "sphere"};
}

namespace detail {

// Sigma+/Sigma- graph pieces: parameters sweep the base box, the pinned axis
// follows the bound function.
inline ParamSurface graph_cap(const GraphSpec& g, bool upper_side) {
    const int m = g.base.dim() + 1;
    const auto names = param_names(m - 1);
    const FieldExpr& bound = upper_side ? g.upper : g.lower;
    std::vector<FieldExpr> comps;
    comps.reserve(static_cast<std::size_t>(m));
    for (int a = 0, slot = 0; a < m; ++a) {
        if (a == g.axis)
            comps.emplace_back(bound.root(), names);
        else
            comps.emplace_back(make_variable(slot++), names);
    }
    return {MapExpr(std::move(comps)), g.base.lo, g.base.hi, +1, upper_side ? "sigma+" : "sigma-"};
}

// Sigma0 side wall over one facet of the base box: the wall coordinate along
// g.axis is blended as lower + t*(upper - lower), t in [0,1], so the
// parameter domain stays a box.  The resulting normal has exactly zero
// component along g.axis (the t-column of the chart Jacobian is that axis).
inline ParamSurface graph_wall(const GraphSpec& g, int facet_slot, bool upper_side) {
    const int d = g.base.dim();          // base dimension = m-1
    const int m = d + 1;
    const double facet_value = upper_side ? g.base.hi[static_cast<std::size_t>(facet_slot)]
                                          : g.base.lo[static_cast<std::size_t>(facet_slot)];
    const auto names = param_names(m - 1);  // m-2 facet params + trailing t

    // substitution of base variables: pinned slot -> constant, the rest ->
    // wall parameters 0..d-2 in order
    std::vector<NodePtr> repl(static_cast<std::size_t>(d));
    for (int b = 0, pos = 0; b < d; ++b)
        repl[static_cast<std::size_t>(b)] =
            (b == facet_slot) ? make_number(facet_value) : make_variable(pos++);

    NodePtr lo_sub = substitute_vars(g.lower.root(), repl);
    NodePtr hi_sub = substitute_vars(g.upper.root(), repl);
    NodePtr t = make_variable(d - 1);  // last parameter
    NodePtr blend = make_binary(
        Node::Kind::add, lo_sub,
        product(std::move(t), make_binary(Node::Kind::sub, std::move(hi_sub), lo_sub)));

    std::vector<FieldExpr> comps;
    std::vector<double> plo, phi;
    comps.reserve(static_cast<std::size_t>(m));
    for (int a = 0, b = 0; a < m; ++a) {
        if (a == g.axis) {
            comps.emplace_back(blend, names);
            continue;
        }
        if (b == facet_slot)
            comps.emplace_back(make_number(facet_value), names);
        else {
            const int pos = b < facet_slot ? b : b - 1;
            comps.emplace_back(make_variable(pos), names);
            plo.push_back(g.base.lo[static_cast<std::size_t>(b)]);
            phi.push_back(g.base.hi[static_cast<std::size_t>(b)]);
        }
        ++b;
    }
    plo.push_back(0.0);
    phi.push_back(1.0);

    // label names the pinned ambient axis
    int ambient = 0;
    for (int a = 0, b = 0; a < m; ++a) {
        if (a == g.axis) continue;
        if (b == facet_slot) ambient = a;
        ++b;
    }
    return {MapExpr(std::move(comps)), std::move(plo), std::move(phi), +1,
            "sigma0[x" + std::to_string(ambient + 1) + (upper_side ? "=hi]" : "=lo]")};
}

}  // namespace detail

/// Outward-oriented boundary decomposition.
///   Box   -> 2m face charts.
///   Ball  -> one spherical chart.
///   Graph -> upper/lower graph caps plus 2(m-1) side walls over the base
///            box's facets.
inline PiecewiseSurface boundary(const Domain& d) {
    if (d.dim() < 2) throw std::invalid_argument("boundary: ambient dimension must be >= 2");
    PiecewiseSurface out;
    switch (d.kind()) {
        case Domain::Kind::box: {
            const auto& b = d.as_box();
            for (int a = 0; a < b.dim(); ++a)
                for (int side = 0; side < 2; ++side)
                    out.pieces.push_back(detail::box_face(b, a, side == 1));
            break;
        }
        case Domain::Kind::ball: {
            const auto& b = d.as_ball();
            out.pieces.push_back(sphere_chart(b.center, b.radius));
            break;
        }
        case Domain::Kind::graph: {
            const auto& g = d.as_graph();
            out.pieces.push_back(detail::graph_cap(g, true));
            out.pieces.push_back(detail::graph_cap(g, false));
            for (int slot = 0; slot < g.base.dim(); ++slot)
                for (int side = 0; side < 2; ++side)
                    out.pieces.push_back(detail::graph_wall(g, slot, side == 1));
            break;
        }
    }
    for (auto& piece : out.pieces) piece.orientation_sign = orient_outward(piece, d);
    return out;
}

}  // namespace hyperflux
