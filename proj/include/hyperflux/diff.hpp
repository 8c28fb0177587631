#pragma once

// Numerical differentiation: Jacobians, Jacobian determinants, divergence and
// gradients by central finite differences.  Works on parsed expressions and on
// arbitrary callables (the identity verifiers differentiate composite fields
// that only exist as evaluators).

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperflux/expr.hpp"
#include "hyperflux/linalg.hpp"

namespace hyperflux {

/// Step policy and stencil selection for finite differences.
///
/// Per axis i the step is h = step_scale * max(1, |x_i|), unless fixed_step
/// is positive, in which case that absolute step is used on every axis
/// (nested differentiation wants one frozen step so inner and outer
/// perturbations stay commensurate).  `order` selects the central stencil:
/// 2 (three points, the default) or 4 (five points; exact on quartics, used
/// where second-order truncation would drown the identity being checked).
/// Optional per-axis bounds mark where the function stops being defined;
/// axes whose central stencil would step outside fall back to one-sided
/// second-order stencils.
struct DiffConfig {
    double step_scale = 6.055454452393343e-06;  // cbrt(machine epsilon)
    double fixed_step = 0.0;                    // > 0 overrides step_scale
    int order = 2;                              // 2 or 4
    std::vector<double> lo, hi;                 // optional bounds, empty = none

    double step_for(double xi) const {
        if (fixed_step > 0.0) return fixed_step;
        return step_scale * std::fmax(1.0, std::abs(xi));
    }
};

namespace detail {

struct AxisStencil {
    // offsets[k]*h added to the axis coordinate, value weighted by
    // weights[k]/h; count is 2 (central-2), 4 (central-4), or 3 (one-sided).
    double offsets[4];
    double weights[4];
    int count;
    double h;
};

inline AxisStencil make_stencil(const DiffConfig& cfg, std::span<const double> x, int axis) {
    const double xi = x[static_cast<std::size_t>(axis)];
    double h = cfg.step_for(xi);
    if (!(h > 0.0)) throw std::invalid_argument("diff: nonpositive step");
    {   // snap h so that xi + h - xi is exact
        volatile double tmp = xi + h;
        h = tmp - xi;
    }
    const double lo = cfg.lo.empty() ? -std::numeric_limits<double>::infinity()
                                     : cfg.lo[static_cast<std::size_t>(axis)];
    const double hi = cfg.hi.empty() ? std::numeric_limits<double>::infinity()
                                     : cfg.hi[static_cast<std::size_t>(axis)];
    const double reach = cfg.order == 4 ? 2.0 * h : h;
    if (xi - reach >= lo && xi + reach <= hi) {
        if (cfg.order == 4)
            return {{-2.0, -1.0, 1.0, 2.0}, {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0}, 4, h};
        return {{-1.0, 1.0, 0, 0}, {-0.5, 0.5, 0, 0}, 2, h};
    }
    // one-sided second order: f' = (-3 f(x) + 4 f(x+h) - f(x+2h)) / (2h)
    if (xi + 2.0 * h <= hi)
        return {{0.0, 1.0, 2.0, 0}, {-1.5, 2.0, -0.5, 0}, 3, h};
    if (xi - 2.0 * h >= lo)
        return {{0.0, -1.0, -2.0, 0}, {1.5, -2.0, 0.5, 0}, 3, h};
    throw std::runtime_error("diff: axis " + std::to_string(axis + 1) +
                             " interval too narrow for the step");
}

[[noreturn]] inline void throw_nonfinite(int axis) {
    throw std::runtime_error("diff: non-finite evaluation near point while differentiating axis " +
                             std::to_string(axis + 1));
}

}  // namespace detail

/// Jacobian of a vector-valued callable fn: R^k -> R^dim_out, where fn has
/// signature fn(span<const double> x, span<double> out).
template <class Fn>
Matrix jacobian_fn(Fn&& fn, int dim_out, std::span<const double> point, const DiffConfig& cfg) {
    const int k = static_cast<int>(point.size());
    Matrix j(dim_out, k);
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> val(static_cast<std::size_t>(dim_out));
    for (int axis = 0; axis < k; ++axis) {
        const auto st = detail::make_stencil(cfg, point, axis);
        const double xi = x[static_cast<std::size_t>(axis)];
        for (int s = 0; s < st.count; ++s) {
            const double w = st.weights[s] / st.h;
            if (w == 0.0) continue;
            x[static_cast<std::size_t>(axis)] = xi + st.offsets[s] * st.h;
            fn(std::span<const double>(x), std::span<double>(val));
            for (int i = 0; i < dim_out; ++i) {
                if (!std::isfinite(val[static_cast<std::size_t>(i)])) detail::throw_nonfinite(axis);
                j(i, axis) += w * val[static_cast<std::size_t>(i)];
            }
        }
        x[static_cast<std::size_t>(axis)] = xi;
    }
    return j;
}

/// Entry (i,j) approximates the partial of component i along axis j.
inline Matrix jacobian(const MapExpr& map, std::span<const double> point, const DiffConfig& cfg) {
    if (static_cast<int>(point.size()) != map.arity_in())
        throw std::invalid_argument("jacobian: point dimension mismatch");
    return jacobian_fn([&map](std::span<const double> x, std::span<double> out) { map.eval_into(x, out); },
                       map.dim_out(), point, cfg);
}

template <class Fn>
double jacobian_det_fn(Fn&& fn, std::span<const double> point, const DiffConfig& cfg) {
    return det(jacobian_fn(std::forward<Fn>(fn), static_cast<int>(point.size()), point, cfg));
}

inline double jacobian_det(const MapExpr& map, std::span<const double> point, const DiffConfig& cfg) {
    if (map.dim_out() != map.arity_in())
        throw std::invalid_argument("jacobian_det: map is not square");
    return det(jacobian(map, point, cfg));
}

/// Derivative of a scalar callable along one axis.
template <class Fn>
double partial_fn(Fn&& fn, std::span<const double> point, int axis, const DiffConfig& cfg) {
    const auto st = detail::make_stencil(cfg, point, axis);
    std::vector<double> x(point.begin(), point.end());
    const double xi = x[static_cast<std::size_t>(axis)];
    double acc = 0.0;
    for (int s = 0; s < st.count; ++s) {
        const double w = st.weights[s] / st.h;
        if (w == 0.0) continue;
        x[static_cast<std::size_t>(axis)] = xi + st.offsets[s] * st.h;
        const double v = fn(std::span<const double>(x));
        if (!std::isfinite(v)) detail::throw_nonfinite(axis);
        acc += w * v;
    }
    return acc;
}

template <class Fn>
std::vector<double> gradient_fn(Fn&& fn, std::span<const double> point, const DiffConfig& cfg) {
    std::vector<double> g(point.size());
    for (std::size_t axis = 0; axis < point.size(); ++axis)
        g[axis] = partial_fn(fn, point, static_cast<int>(axis), cfg);
    return g;
}

inline std::vector<double> gradient(const FieldExpr& f, std::span<const double> point,
                                    const DiffConfig& cfg) {
    if (static_cast<int>(point.size()) != f.arity_in())
        throw std::invalid_argument("gradient: point dimension mismatch");
    return gradient_fn([&f](std::span<const double> x) { return f(x); }, point, cfg);
}

/// Divergence of a vector-valued callable fn: R^m -> R^m; only the diagonal
/// Jacobian entries are formed.
template <class Fn>
double divergence_fn(Fn&& fn, std::span<const double> point, const DiffConfig& cfg) {
    const int m = static_cast<int>(point.size());
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> val(static_cast<std::size_t>(m));
    double div = 0.0;
    for (int axis = 0; axis < m; ++axis) {
        const auto st = detail::make_stencil(cfg, point, axis);
        const double xi = x[static_cast<std::size_t>(axis)];
        for (int s = 0; s < st.count; ++s) {
            const double w = st.weights[s] / st.h;
            if (w == 0.0) continue;
            x[static_cast<std::size_t>(axis)] = xi + st.offsets[s] * st.h;
            fn(std::span<const double>(x), std::span<double>(val));
            const double v = val[static_cast<std::size_t>(axis)];
            if (!std::isfinite(v)) detail::throw_nonfinite(axis);
            div += w * v;
        }
        x[static_cast<std::size_t>(axis)] = xi;
    }
    return div;
}

inline double divergence(const MapExpr& vfield, std::span<const double> point,
                         const DiffConfig& cfg) {
    if (vfield.dim_out() != vfield.arity_in())
        throw std::invalid_argument("divergence: field is not square");
    if (static_cast<int>(point.size()) != vfield.arity_in())
        throw std::invalid_argument("divergence: point dimension mismatch");
    return divergence_fn(
        [&vfield](std::span<const double> x, std::span<double> out) { vfield.eval_into(x, out); },
        point, cfg);
}

}  // namespace hyperflux
