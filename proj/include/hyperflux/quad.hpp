#pragma once

// Quadrature: composite tensor-product Gauss-Legendre rules over boxes, the
// volume integrators for the three domain kinds, surface integrals and flux
// through oriented piecewise surfaces, mollifier smoothing, and a seeded
// Monte-Carlo estimator used as an independent oracle.
//
// Accumulation is fixed-order pairwise summation over a node buffer laid out
// lexicographically, so results are bit-identical no matter how evaluation is
// scheduled.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hyperflux/diff.hpp"
#include "hyperflux/expr.hpp"
#include "hyperflux/geom.hpp"
#include "hyperflux/linalg.hpp"

namespace hyperflux {

struct QuadScheme {
    int gauss_order = 16;     // points per axis per cell
    int subdivisions = 4;     // cells per axis
    double rel_tol = 1e-8;    // default verification tolerance (integral class)
    DiffConfig diff{};        // differentiation settings for derived integrands
    std::uint64_t mc_seed = 1;

    void validate() const {
        if (gauss_order < 2) throw std::invalid_argument("QuadScheme: gauss_order must be >= 2");
        if (subdivisions < 1) throw std::invalid_argument("QuadScheme: subdivisions must be >= 1");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadScheme: rel_tol must be > 0");
    }
};

struct GaussRule {
    std::vector<double> nodes;    // ascending, on [-1,1]
    std::vector<double> weights;  // positive, sum 2
};

/// Gauss-Legendre rule with n points: Newton iteration on the Legendre
/// recurrence.  Exact for polynomials of degree <= 2n-1.
inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    GaussRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Tricomi-style initial guess for root i (descending order)
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // evaluate P_n and P_n' by the three-term recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

/// Fixed-order pairwise (cascade) summation.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

namespace detail {

// composite 1-dim rule on [lo, hi]: subdivisions cells, gauss_order points each
struct Axis1D {
    std::vector<double> coord, weight;
};

inline Axis1D make_axis(double lo, double hi, const QuadScheme& q) {
    const GaussRule g = gauss_legendre(q.gauss_order);
    Axis1D a;
    const std::size_t total = static_cast<std::size_t>(q.subdivisions) * g.nodes.size();
    a.coord.reserve(total);
    a.weight.reserve(total);
    const double cell = (hi - lo) / q.subdivisions;
    for (int c = 0; c < q.subdivisions; ++c) {
        const double mid = lo + (c + 0.5) * cell;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            a.coord.push_back(mid + 0.5 * cell * g.nodes[i]);
            a.weight.push_back(0.5 * cell * g.weights[i]);
        }
    }
    return a;
}

// unit composite rule on [0,1], for intervals whose endpoints vary per node
inline Axis1D make_unit_axis(const QuadScheme& q) { return make_axis(0.0, 1.0, q); }

inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("HYPERFLUX_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v <= 1024) n = static_cast<int>(v);
    }
    return n;
}

}  // namespace detail

/// Composite Gauss product over a box; fn takes the evaluation point.
template <class Fn>
double integrate_box_fn(Fn&& fn, const BoxSpec& box, const QuadScheme& q) {
    q.validate();
    const int d = box.dim();
    std::vector<detail::Axis1D> axes;
    axes.reserve(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) {
        axes.push_back(detail::make_axis(box.lo[static_cast<std::size_t>(k)],
                                         box.hi[static_cast<std::size_t>(k)], q));
        total *= axes.back().coord.size();
    }
    std::vector<double> values(total);
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t L = 0; L < total; ++L) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            x[static_cast<std::size_t>(k)] = axes[static_cast<std::size_t>(k)].coord[idx[static_cast<std::size_t>(k)]];
            w *= axes[static_cast<std::size_t>(k)].weight[idx[static_cast<std::size_t>(k)]];
        }
        const double v = fn(std::span<const double>(x));
        if (!std::isfinite(v))
            throw std::runtime_error("integrate: non-finite integrand sample");
        values[L] = w * v;
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < axes[static_cast<std::size_t>(k)].coord.size()) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return pairwise_sum(values);
}

namespace detail {

// hyperspherical direction for angles ang[0..m-2] (numeric mirror of the
// sphere_chart components)
inline void sphere_direction_value(std::span<const double> ang, std::span<double> out) {
    const int m = static_cast<int>(out.size());
    // prefix[k] = product of sin(ang[0..k-1])
    std::vector<double> prefix(static_cast<std::size_t>(m - 1));
    double pre = 1.0;
    for (int k = 0; k < m - 1; ++k) {
        prefix[static_cast<std::size_t>(k)] = pre;
        pre *= std::sin(ang[static_cast<std::size_t>(k)]);
    }
    out[0] = prefix[static_cast<std::size_t>(m - 2)] * std::cos(ang[static_cast<std::size_t>(m - 2)]);
    out[1] = prefix[static_cast<std::size_t>(m - 2)] * std::sin(ang[static_cast<std::size_t>(m - 2)]);
    for (int j = 2; j < m; ++j)
        out[static_cast<std::size_t>(j)] =
            prefix[static_cast<std::size_t>(m - j - 1)] * std::cos(ang[static_cast<std::size_t>(m - j - 1)]);
}

// volume element of the spherical coordinates: r^(m-1) * prod sin^(m-2-k)(ang_k)
inline double sphere_volume_jacobian(double r, std::span<const double> ang, int m) {
    double j = 1.0;
    for (int k = 1; k < m; ++k) j *= r;
    for (int k = 0; k <= m - 3; ++k) {
        const double s = std::sin(ang[static_cast<std::size_t>(k)]);
        for (int e = 0; e < m - 2 - k; ++e) j *= s;
    }
    return j;
}

}  // namespace detail

/// Volume integral over a domain.
///   Box:   composite Gauss product.
///   Ball:  fixed internal spherical coordinates with the analytic volume
///          element (deliberately independent of any change-of-variables
///          machinery under test).
///   Graph: Fubini — outer product rule over the base box, inner composite
///          rule over [lower(x'), upper(x')] along the graph axis.
template <class Fn>
double integrate_volume_fn(Fn&& fn, const Domain& d, const QuadScheme& q) {
    q.validate();
    switch (d.kind()) {
        case Domain::Kind::box:
            return integrate_box_fn(std::forward<Fn>(fn), d.as_box(), q);
        case Domain::Kind::ball: {
            const auto& b = d.as_ball();
            const int m = b.dim();
            if (m < 2) throw std::invalid_argument("integrate_volume: ball dimension must be >= 2");
            BoxSpec pbox;
            pbox.lo.assign(static_cast<std::size_t>(m), 0.0);
            pbox.hi.assign(static_cast<std::size_t>(m), std::numbers::pi);
            pbox.hi[0] = b.radius;
            pbox.hi[static_cast<std::size_t>(m - 1)] = 2.0 * std::numbers::pi;
            std::vector<double> x(static_cast<std::size_t>(m));
            return integrate_box_fn(
                [&](std::span<const double> p) {
                    const double r = p[0];
                    const auto ang = p.subspan(1);
                    detail::sphere_direction_value(ang, x);
                    for (int i = 0; i < m; ++i)
                        x[static_cast<std::size_t>(i)] =
                            b.center[static_cast<std::size_t>(i)] + r * x[static_cast<std::size_t>(i)];
                    return fn(std::span<const double>(x)) * detail::sphere_volume_jacobian(r, ang, m);
                },
                pbox, q);
        }
        case Domain::Kind::graph: {
            const auto& g = d.as_graph();
            const int db = g.base.dim();
            const int m = db + 1;
            std::vector<detail::Axis1D> axes;
            axes.reserve(static_cast<std::size_t>(db));
            std::size_t outer_total = 1;
            for (int k = 0; k < db; ++k) {
                axes.push_back(detail::make_axis(g.base.lo[static_cast<std::size_t>(k)],
                                                 g.base.hi[static_cast<std::size_t>(k)], q));
                outer_total *= axes.back().coord.size();
            }
            const detail::Axis1D unit = detail::make_unit_axis(q);
            const std::size_t inner_total = unit.coord.size();
            std::vector<double> values(outer_total * inner_total);
            std::vector<std::size_t> idx(static_cast<std::size_t>(db), 0);
            std::vector<double> xp(static_cast<std::size_t>(db)), x(static_cast<std::size_t>(m));
            for (std::size_t L = 0; L < outer_total; ++L) {
                double w = 1.0;
                for (int k = 0; k < db; ++k) {
                    xp[static_cast<std::size_t>(k)] = axes[static_cast<std::size_t>(k)].coord[idx[static_cast<std::size_t>(k)]];
                    w *= axes[static_cast<std::size_t>(k)].weight[idx[static_cast<std::size_t>(k)]];
                }
                const double a = g.lower(xp);
                const double b = g.upper(xp);
                for (int i = 0, s = 0; i < m; ++i)
                    if (i != g.axis) x[static_cast<std::size_t>(i)] = xp[static_cast<std::size_t>(s++)];
                for (std::size_t t = 0; t < inner_total; ++t) {
                    x[static_cast<std::size_t>(g.axis)] = a + unit.coord[t] * (b - a);
                    const double v = fn(std::span<const double>(x));
                    if (!std::isfinite(v))
                        throw std::runtime_error("integrate: non-finite integrand sample");
                    values[L * inner_total + t] = w * unit.weight[t] * (b - a) * v;
                }
                for (int k = db - 1; k >= 0; --k) {
                    if (++idx[static_cast<std::size_t>(k)] < axes[static_cast<std::size_t>(k)].coord.size()) break;
                    idx[static_cast<std::size_t>(k)] = 0;
                }
            }
            return pairwise_sum(values);
        }
    }
    throw std::logic_error("integrate_volume: unreachable");
}

inline double integrate_volume(const FieldExpr& f, const Domain& d, const QuadScheme& q) {
    if (f.arity_in() != d.dim())
        throw std::invalid_argument("integrate_volume: integrand arity does not match domain dimension");
    return integrate_volume_fn([&f](std::span<const double> x) { return f(x); }, d, q);
}

/// Quadrature over one chart; g receives the ambient point and the raw minor
/// normal N(u) and returns the integrand value (|N| and orientation are the
/// caller's business).  Degenerate nodes (|N| under the rank tolerance) throw.
template <class G>
double integrate_piece_fn(const ParamSurface& s, const QuadScheme& q, G&& g) {
    q.validate();
    const int d = s.param_dim();
    std::vector<detail::Axis1D> axes;
    axes.reserve(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) {
        axes.push_back(detail::make_axis(s.param_lo[static_cast<std::size_t>(k)],
                                         s.param_hi[static_cast<std::size_t>(k)], q));
        total *= axes.back().coord.size();
    }
    std::vector<double> values(total);
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> u(static_cast<std::size_t>(d));
    std::vector<double> x(static_cast<std::size_t>(s.ambient_dim()));
    for (std::size_t L = 0; L < total; ++L) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            u[static_cast<std::size_t>(k)] = axes[static_cast<std::size_t>(k)].coord[idx[static_cast<std::size_t>(k)]];
            w *= axes[static_cast<std::size_t>(k)].weight[idx[static_cast<std::size_t>(k)]];
        }
        const Matrix j = jacobian(s.chart, u, q.diff);
        std::vector<double> n = normal_from_minors(j);
        // zero columns (a collapsed piece) carry zero measure and integrate to
        // zero; only a normal small relative to a nonzero chart scale is a
        // genuine rank failure
        if (norm2(n) < rank_tolerance(j))
            throw std::runtime_error("surface quadrature: degenerate parametrization at a node of piece '" +
                                     s.label + "'");
        s.chart.eval_into(u, x);
        const double v = g(std::span<const double>(x), std::span<const double>(n));
        if (!std::isfinite(v))
            throw std::runtime_error("integrate_surface: non-finite integrand sample on piece '" +
                                     s.label + "'");
        values[L] = w * v;
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < axes[static_cast<std::size_t>(k)].coord.size()) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return pairwise_sum(values);
}

/// Surface integral: sum over pieces of the chart-pulled-back f times |N(u)|.
template <class Fn>
double integrate_surface_fn(Fn&& f, const PiecewiseSurface& sigma, const QuadScheme& q) {
    double total = 0.0;
    for (const auto& piece : sigma.pieces)
        total += integrate_piece_fn(piece, q, [&](std::span<const double> x, std::span<const double> n) {
            return f(x) * norm2(n);
        });
    return total;
}

inline double integrate_surface(const FieldExpr& f, const PiecewiseSurface& sigma,
                                const QuadScheme& q) {
    for (const auto& piece : sigma.pieces)
        if (f.arity_in() != piece.ambient_dim())
            throw std::invalid_argument("integrate_surface: integrand arity does not match ambient dimension");
    return integrate_surface_fn([&f](std::span<const double> x) { return f(x); }, sigma, q);
}

/// Oriented flux of a vector field through one chart: F(x(u)) . N(u) times
/// the orientation sign (the |N| factors of measure and unit normal cancel).
template <class Fn>
double flux_piece_fn(Fn&& field, const ParamSurface& piece, const QuadScheme& q) {
    std::vector<double> fval(static_cast<std::size_t>(piece.ambient_dim()));
    return integrate_piece_fn(piece, q, [&](std::span<const double> x, std::span<const double> n) {
        field(x, std::span<double>(fval));
        return piece.orientation_sign * dot(fval, n);
    });
}

template <class Fn>
double flux_fn(Fn&& field, const PiecewiseSurface& sigma, const QuadScheme& q) {
    double total = 0.0;
    for (const auto& piece : sigma.pieces) total += flux_piece_fn(field, piece, q);
    return total;
}

inline double flux(const MapExpr& field, const PiecewiseSurface& sigma, const QuadScheme& q) {
    for (const auto& piece : sigma.pieces)
        if (field.dim_out() != piece.ambient_dim() || field.arity_in() != piece.ambient_dim())
            throw std::invalid_argument("flux: field shape does not match ambient dimension");
    return flux_fn([&field](std::span<const double> x, std::span<double> out) { field.eval_into(x, out); },
                   sigma, q);
}

/// Radial bump kernel of radius epsilon with unit mass: the profile
/// exp(1/(|y|^2/eps^2 - 1)) inside the epsilon-ball, zero outside, scaled by
/// a numerically computed normalization.  Construction re-integrates the
/// profile with a refined scheme and rejects normalizations that disagree by
/// more than 1e-6 relative.
class Mollifier {
public:
    Mollifier(int dim, double epsilon, const QuadScheme& q) : dim_(dim), eps_(epsilon) {
        if (dim < 1) throw std::invalid_argument("Mollifier: dimension must be >= 1");
        if (!(epsilon > 0.0)) throw std::invalid_argument("Mollifier: epsilon must be > 0");
        BoxSpec box;
        box.lo.assign(static_cast<std::size_t>(dim), -epsilon);
        box.hi.assign(static_cast<std::size_t>(dim), epsilon);
        const auto profile = [this](std::span<const double> y) { return raw_profile(y); };
        norm_ = integrate_box_fn(profile, box, q);
        QuadScheme refined = q;
        refined.subdivisions += 2;
        const double check = integrate_box_fn(profile, box, refined);
        if (!(norm_ > 0.0) || std::abs(check - norm_) > 1e-6 * std::abs(check))
            throw std::runtime_error("Mollifier: normalization did not converge to 1e-6 (mass " +
                                     std::to_string(norm_) + " vs refined " + std::to_string(check) + ")");
    }

    int dim() const { return dim_; }
    double epsilon() const { return eps_; }

    double operator()(std::span<const double> y) const { return raw_profile(y) / norm_; }

private:
    double raw_profile(std::span<const double> y) const {
        double t = 0.0;
        for (double v : y) t += v * v;
        t /= eps_ * eps_;
        if (t >= 1.0) return 0.0;
        return std::exp(1.0 / (t - 1.0));
    }

    int dim_;
    double eps_;
    double norm_ = 0.0;
};

using Evaluator = std::function<double(std::span<const double>)>;

/// Convolution with the mollifier: returns y -> integral of f(y-z) eta(z) dz
/// over the kernel's support box, by the same composite Gauss rule.
template <class Fn>
Evaluator mollify(Fn f, const Mollifier& kernel, const QuadScheme& q) {
    const int m = kernel.dim();
    BoxSpec box;
    box.lo.assign(static_cast<std::size_t>(m), -kernel.epsilon());
    box.hi.assign(static_cast<std::size_t>(m), kernel.epsilon());
    return [f = std::move(f), kernel, box, q, m](std::span<const double> y) {
        std::vector<double> shifted(static_cast<std::size_t>(m));
        return integrate_box_fn(
            [&](std::span<const double> z) {
                const double k = kernel(z);
                if (k == 0.0) return 0.0;
                for (int i = 0; i < m; ++i)
                    shifted[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(i)];
                return f(std::span<const double>(shifted)) * k;
            },
            box, q);
    };
}

inline Evaluator mollify(const FieldExpr& f, const Mollifier& kernel, const QuadScheme& q) {
    if (f.arity_in() != kernel.dim())
        throw std::invalid_argument("mollify: field arity does not match kernel dimension");
    return mollify([f](std::span<const double> x) { return f(x); }, kernel, q);
}

/// Continuous extension by clamping the evaluation point to a box (the
/// domain's bounding box, in practice).
template <class Fn>
Evaluator clamp_to_box(Fn f, BoxSpec box) {
    return [f = std::move(f), box = std::move(box)](std::span<const double> x) {
        std::vector<double> c(x.begin(), x.end());
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = std::fmin(std::fmax(c[i], box.lo[i]), box.hi[i]);
        return f(std::span<const double>(c));
    };
}

inline Evaluator clamp_to_box(const FieldExpr& f, BoxSpec box) {
    return clamp_to_box([f](std::span<const double> x) { return f(x); }, std::move(box));
}

// --- seeded counter-based sampling ------------------------------------------

/// SplitMix64-style stateless mix: the k-th variate of a stream is a pure
/// function of (seed, k), so parallel generation is deterministic.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + counter * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0,1) from the counter stream.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(mix64(seed, counter) >> 11) * 0x1.0p-53;
}

struct McResult {
    double mean = 0.0;       // estimate of the integral over the domain
    double std_error = 0.0;  // standard error of the estimate
    std::int64_t accepted = 0;
};

/// Monte-Carlo estimate of the integral of fn over d: uniform sampling in the
/// bounding box, zero contribution outside the domain.  Deterministic for a
/// fixed seed regardless of worker count (counter-based streams, fixed-order
/// pairwise reduction).  Throws if no sample lands inside the domain.
template <class Fn>
McResult mc_estimate_fn(Fn&& fn, const Domain& d, std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw std::invalid_argument("mc_estimate: needs at least 1000 samples");
    const BoxSpec box = d.bounding_box();
    const int m = box.dim();
    const double vol = box.volume();
    std::vector<double> g(static_cast<std::size_t>(n_samples));

    const auto run_chunk = [&](std::int64_t begin, std::int64_t end) -> std::int64_t {
        std::vector<double> x(static_cast<std::size_t>(m));
        std::int64_t acc = 0;
        for (std::int64_t k = begin; k < end; ++k) {
            for (int j = 0; j < m; ++j) {
                const double u = uniform01(seed, static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(m) +
                                                     static_cast<std::uint64_t>(j));
                x[static_cast<std::size_t>(j)] =
                    box.lo[static_cast<std::size_t>(j)] +
                    u * (box.hi[static_cast<std::size_t>(j)] - box.lo[static_cast<std::size_t>(j)]);
            }
            if (d.contains(x)) {
                g[static_cast<std::size_t>(k)] = fn(std::span<const double>(x));
                ++acc;
            } else {
                g[static_cast<std::size_t>(k)] = 0.0;
            }
        }
        return acc;
    };

    std::int64_t accepted = 0;
    const int workers = n_samples >= 100000 ? detail::worker_count() : 1;
    if (workers <= 1) {
        accepted = run_chunk(0, n_samples);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::int64_t> acc(static_cast<std::size_t>(workers), 0);
        const std::int64_t chunk = (n_samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                const std::int64_t b = w * chunk;
                const std::int64_t e = std::min<std::int64_t>(n_samples, b + chunk);
                if (b < e) acc[static_cast<std::size_t>(w)] = run_chunk(b, e);
            });
        for (auto& t : pool) t.join();
        for (auto a : acc) accepted += a;
    }
    if (accepted == 0) throw std::runtime_error("mc_estimate: no sample landed in the domain (degenerate?)");

    const double mean_g = pairwise_sum(g) / static_cast<double>(n_samples);
    for (auto& v : g) v = (v - mean_g) * (v - mean_g);
    const double var_g = pairwise_sum(g) / static_cast<double>(n_samples - 1);
    McResult r;
    r.mean = vol * mean_g;
    r.std_error = vol * std::sqrt(var_g / static_cast<double>(n_samples));
    r.accepted = accepted;
    return r;
}

inline McResult mc_estimate(const FieldExpr& f, const Domain& d, std::int64_t n_samples,
                            std::uint64_t seed) {
    if (f.arity_in() != d.dim())
        throw std::invalid_argument("mc_estimate: integrand arity does not match domain dimension");
    return mc_estimate_fn([&f](std::span<const double> x) { return f(x); }, d, n_samples, seed);
}

}  // namespace hyperflux
