#pragma once

// Executable verifiers: each check computes two independently obtained values
// (or a value and an identity's zero) and reports them with a residual and a
// declared tolerance.  Tolerances come in two classes: integral-level
// (1e-6..1e-8, quadrature-dominated) and nested-finite-difference-level
// (1e-4, differentiation-noise-dominated); every verifier's default states
// its class.
//
// The report invariant is exact: pass <=> rel_residual <= tol with
// rel_residual = |lhs - rhs| / max(1, |lhs|, |rhs|).  Verifiers whose claim
// is an inequality encode the violation amount as lhs against rhs = 0 and
// put the raw quantities in diagnostics.

#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hyperflux/cofactor.hpp"
#include "hyperflux/diff.hpp"
#include "hyperflux/expr.hpp"
#include "hyperflux/geom.hpp"
#include "hyperflux/quad.hpp"

namespace hyperflux {

struct VerifyReport {
    std::string name;
    double lhs = 0.0, rhs = 0.0;
    double residual = 0.0, rel_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::vector<std::pair<std::string, double>> diagnostics;
};

inline VerifyReport make_report(std::string name, double lhs, double rhs, double tol,
                                std::vector<std::pair<std::string, double>> diagnostics = {}) {
    VerifyReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual = std::abs(lhs - rhs);
    r.rel_residual = r.residual / std::fmax(1.0, std::fmax(std::abs(lhs), std::abs(rhs)));
    r.tol = tol;
    r.pass = r.rel_residual <= tol;
    r.diagnostics = std::move(diagnostics);
    return r;
}

/// Step policy for verifiers that differentiate a field that is itself a
/// finite difference (nested differentiation).  The default relative step is
/// far too small there: the inner noise, divided by the outer step, drowns
/// identities that hold to machine precision.  Unless the caller pinned a
/// step explicitly, both nesting levels use fourth-order stencils with one
/// frozen absolute step 2^-6 * max(1, |x|_inf).
inline DiffConfig nested_fd_policy(const DiffConfig& base, std::span<const double> x) {
    if (base.fixed_step > 0.0) return base;
    DiffConfig cfg = base;
    cfg.order = 4;
    cfg.fixed_step = 0.015625 * std::fmax(1.0, norm_inf(x));
    return cfg;
}

/// Divergence theorem on one domain: volume integral of div F against the
/// outward flux through the boundary decomposition.  Integral-class default
/// tolerance.  Diagnostics carry each piece's flux; for graph domains the
/// summed side-wall |flux| is reported separately (it is the term that
/// vanishes for fields aligned with the graph axis).
inline VerifyReport check_divergence(const MapExpr& field, const Domain& d, const QuadScheme& q,
                                     double tol = 1e-6) {
    if (field.dim_out() != d.dim() || field.arity_in() != d.dim())
        throw std::invalid_argument("check_divergence: field shape does not match domain");
    const double lhs = integrate_volume_fn(
        [&](std::span<const double> x) { return divergence(field, x, q.diff); }, d, q);
    const PiecewiseSurface bd = boundary(d);
    std::vector<std::pair<std::string, double>> diag;
    double rhs = 0.0;
    double sigma0_abs = 0.0;
    for (const auto& piece : bd.pieces) {
        const double f = flux_piece_fn(
            [&](std::span<const double> x, std::span<double> out) { field.eval_into(x, out); }, piece,
            q);
        diag.emplace_back("flux " + piece.label, f);
        rhs += f;
        if (piece.label.rfind("sigma0", 0) == 0) sigma0_abs += std::abs(f);
    }
    if (d.kind() == Domain::Kind::graph) diag.emplace_back("sigma0_flux_abs_total", sigma0_abs);
    return make_report("divergence", lhs, rhs, tol, std::move(diag));
}

/// Partial antiderivative along the first coordinate:
///   Q(y) = integral of f(t, y_2, ..., y_m) for t from -a to y_1,
/// computed by the composite Gauss rule.  Defined on the open cube (-a, a)^m.
class PotentialQ {
public:
    PotentialQ(FieldExpr f, double a, const QuadScheme& q)
        : f_(std::move(f)), a_(a), q_(q) {
        if (!(a > 0.0)) throw std::invalid_argument("potential_Q: half-width must be > 0");
        q_.validate();
    }

    double half_width() const { return a_; }

    double operator()(std::span<const double> y) const {
        for (double v : y)
            if (!(std::abs(v) < a_))
                throw std::domain_error("potential_Q: point outside the open cube (-a, a)^m");
        const detail::Axis1D axis = detail::make_axis(-a_, y[0], q_);
        std::vector<double> pt(y.begin(), y.end());
        std::vector<double> vals(axis.coord.size());
        for (std::size_t i = 0; i < axis.coord.size(); ++i) {
            pt[0] = axis.coord[i];
            vals[i] = axis.weight[i] * f_(pt);
        }
        return pairwise_sum(vals);
    }

private:
    FieldExpr f_;
    double a_;
    QuadScheme q_;
};

inline PotentialQ potential_Q(const FieldExpr& f, double a, const QuadScheme& q) {
    return PotentialQ(f, a, q);
}

/// Divergence of the first-row cofactor field is zero for C^2 maps.
/// Nested-FD-class tolerance; see nested_fd_policy for the step choice.
inline VerifyReport check_hadamard(const MapExpr& phi, std::span<const double> x,
                                   const DiffConfig& cfg, double tol = 1e-4) {
    if (phi.dim_out() != phi.arity_in())
        throw std::invalid_argument("check_hadamard: map is not square");
    const DiffConfig nested = nested_fd_policy(cfg, x);
    const double lhs = divergence_fn(
        [&](std::span<const double> z, std::span<double> out) {
            const CofactorVector a = cofactor_field(phi, z, nested);
            for (int i = 0; i < a.dim(); ++i) out[static_cast<std::size_t>(i)] = a[i];
        },
        x, nested);
    return make_report("hadamard", lhs, 0.0, tol, {{"step", nested.fixed_step}});
}

/// div( (Q o phi) * A ) = f(phi(x)) * J_phi(x): the pointwise identity that
/// turns the change-of-variables integrand into a divergence.  Nested-FD
/// class.  The cube half-width `a` must contain the phi-image of the stencil
/// neighborhood of x.
inline VerifyReport check_cofactor_flux(const FieldExpr& f, const MapExpr& phi,
                                        std::span<const double> x, double a, const QuadScheme& q,
                                        double tol = 1e-4) {
    if (phi.dim_out() != phi.arity_in())
        throw std::invalid_argument("check_cofactor_flux: map is not square");
    if (f.arity_in() != phi.dim_out())
        throw std::invalid_argument("check_cofactor_flux: f arity does not match map output");
    const PotentialQ Q = potential_Q(f, a, q);
    const DiffConfig nested = nested_fd_policy(q.diff, x);
    const int m = phi.dim_out();
    const double lhs = divergence_fn(
        [&](std::span<const double> z, std::span<double> out) {
            std::vector<double> y(static_cast<std::size_t>(m));
            phi.eval_into(z, y);
            const double qv = Q(y);
            const CofactorVector av = cofactor_field(phi, z, nested);
            for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = qv * av[i];
        },
        x, nested);
    const std::vector<double> y0 = phi(x);
    const double jac = det(jacobian(phi, x, nested));
    const double rhs = f(y0) * jac;
    return make_report("cofactor_flux", lhs, rhs, tol,
                       {{"jacobian", jac}, {"f_at_image", f(y0)}, {"step", nested.fixed_step}});
}

namespace detail {

// |J_phi| screen shared by the unsigned and signed transport integrals: a
// vanishing Jacobian on the grid voids the diffeomorphism precondition.
inline void screen_jacobian(double j, const char* who) {
    if (std::abs(j) < 1e-12)
        throw std::runtime_error(std::string(who) +
                                 ": Jacobian vanishes on the quadrature grid (not a diffeomorphism?)");
}

}  // namespace detail

/// Unsigned change of variables: integral of f over D against the integral
/// of f(phi(x)) |J_phi(x)| over Omega.  Integral-class default tolerance.
inline VerifyReport check_cov(const FieldExpr& f, const MapExpr& phi, const Domain& omega,
                              const Domain& d, const QuadScheme& q, double tol = 1e-7) {
    if (phi.arity_in() != omega.dim() || phi.dim_out() != d.dim())
        throw std::invalid_argument("check_cov: map shape does not match domains");
    if (f.arity_in() != d.dim())
        throw std::invalid_argument("check_cov: f arity does not match target domain");
    const double lhs = integrate_volume(f, d, q);
    std::vector<double> y(static_cast<std::size_t>(phi.dim_out()));
    const double rhs = integrate_volume_fn(
        [&](std::span<const double> x) {
            const double j = jacobian_det(phi, x, q.diff);
            detail::screen_jacobian(j, "check_cov");
            phi.eval_into(x, y);
            return f(y) * std::abs(j);
        },
        omega, q);
    return make_report("cov", lhs, rhs, tol);
}

/// Signed change of variables on a ball (whose boundary is a single chart):
/// the orientation sign is resolved as sign(J_phi) at the ball's center, and
/// a deterministic census of J_phi signs at sampled interior points is
/// reported so callers can confirm the constant-sign hypothesis.
inline VerifyReport check_cov_singly(const FieldExpr& f, const MapExpr& phi, const Domain& omega,
                                     const Domain& d, const QuadScheme& q, double tol = 1e-7) {
    if (omega.kind() != Domain::Kind::ball)
        throw std::invalid_argument("check_cov_singly: omega must be a ball");
    if (phi.arity_in() != omega.dim() || phi.dim_out() != d.dim())
        throw std::invalid_argument("check_cov_singly: map shape does not match domains");
    if (f.arity_in() != d.dim())
        throw std::invalid_argument("check_cov_singly: f arity does not match target domain");
    const BallSpec& ball = omega.as_ball();
    const double j_center = jacobian_det(phi, ball.center, q.diff);
    if (std::abs(j_center) < 1e-12)
        throw std::runtime_error("check_cov_singly: sign probe inconclusive (|J| < 1e-12 at center)");
    const double sign = j_center > 0.0 ? 1.0 : -1.0;

    // deterministic interior census of the Jacobian sign
    const BoxSpec bbox = omega.bounding_box();
    const int m = omega.dim();
    int positive = 0, negative = 0;
    std::vector<double> x(static_cast<std::size_t>(m));
    std::uint64_t counter = 0;
    for (int found = 0; found < 100;) {
        if (counter > 10000000)
            throw std::runtime_error("check_cov_singly: census sampling failed to hit the ball");
        for (int i = 0; i < m; ++i)
            x[static_cast<std::size_t>(i)] =
                bbox.lo[static_cast<std::size_t>(i)] +
                uniform01(q.mc_seed, counter++) *
                    (bbox.hi[static_cast<std::size_t>(i)] - bbox.lo[static_cast<std::size_t>(i)]);
        if (!omega.contains(x)) continue;
        ++found;
        (jacobian_det(phi, x, q.diff) > 0.0 ? positive : negative)++;
    }

    const double lhs = integrate_volume(f, d, q);
    std::vector<double> y(static_cast<std::size_t>(phi.dim_out()));
    const double transported = integrate_volume_fn(
        [&](std::span<const double> xx) {
            const double j = jacobian_det(phi, xx, q.diff);
            detail::screen_jacobian(j, "check_cov_singly");
            phi.eval_into(xx, y);
            return f(y) * j;
        },
        omega, q);
    const double rhs = sign * transported;
    return make_report("cov_signed", lhs, rhs, tol,
                       {{"sign", sign},
                        {"jacobian_at_center", j_center},
                        {"census_positive", static_cast<double>(positive)},
                        {"census_negative", static_cast<double>(negative)}});
}

/// Exhaustion inequality: for f >= 0 and disjoint balls inside Omega, the
/// transported integrals over the balls cannot exceed the integral of f over
/// D.  The report's lhs is the violation max(0, sum - integral_D) against
/// rhs = 0; the gap, both raw values, and every per-ball integral are in the
/// diagnostics.  Overlapping or escaping balls are errors, not failures.
inline VerifyReport ball_exhaustion_check(const FieldExpr& f, const MapExpr& phi,
                                          const Domain& omega, const Domain& d,
                                          const std::vector<BallSpec>& balls, const QuadScheme& q,
                                          double tol = 1e-7) {
    if (phi.arity_in() != omega.dim() || phi.dim_out() != d.dim())
        throw std::invalid_argument("ball_exhaustion_check: map shape does not match domains");
    const int m = omega.dim();
    for (std::size_t k = 0; k < balls.size(); ++k) {
        const auto& b = balls[k];
        if (b.dim() != m || !(b.radius > 0.0))
            throw std::invalid_argument("ball_exhaustion_check: ball " + std::to_string(k + 1) +
                                        " malformed");
        bool inside = true;
        switch (omega.kind()) {
            case Domain::Kind::box: {
                const auto& box = omega.as_box();
                for (int i = 0; i < m && inside; ++i)
                    inside = b.center[static_cast<std::size_t>(i)] - b.radius >=
                                 box.lo[static_cast<std::size_t>(i)] - 1e-12 &&
                             b.center[static_cast<std::size_t>(i)] + b.radius <=
                                 box.hi[static_cast<std::size_t>(i)] + 1e-12;
                break;
            }
            case Domain::Kind::ball: {
                const auto& host = omega.as_ball();
                std::vector<double> dc(static_cast<std::size_t>(m));
                for (int i = 0; i < m; ++i)
                    dc[static_cast<std::size_t>(i)] =
                        b.center[static_cast<std::size_t>(i)] - host.center[static_cast<std::size_t>(i)];
                inside = norm2(dc) + b.radius <= host.radius + 1e-12;
                break;
            }
            case Domain::Kind::graph: {
                // probe containment of the center and the axis-extreme points
                inside = omega.contains(b.center);
                for (int i = 0; i < m && inside; ++i)
                    for (int s = -1; s <= 1 && inside; s += 2) {
                        std::vector<double> p = b.center;
                        p[static_cast<std::size_t>(i)] += s * b.radius;
                        inside = omega.contains(p);
                    }
                break;
            }
        }
        if (!inside)
            throw std::invalid_argument("ball_exhaustion_check: ball " + std::to_string(k + 1) +
                                        " escapes omega");
        for (std::size_t l = 0; l < k; ++l) {
            std::vector<double> dc(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i)
                dc[static_cast<std::size_t>(i)] = balls[k].center[static_cast<std::size_t>(i)] -
                                                  balls[l].center[static_cast<std::size_t>(i)];
            if (norm2(dc) < balls[k].radius + balls[l].radius - 1e-12)
                throw std::invalid_argument("ball_exhaustion_check: balls " + std::to_string(l + 1) +
                                            " and " + std::to_string(k + 1) + " overlap");
        }
    }

    const double domain_integral = integrate_volume(f, d, q);

    std::vector<double> per_ball(balls.size(), 0.0);
    std::exception_ptr worker_error;
    std::mutex error_mutex;
    const auto run_range = [&](std::size_t begin, std::size_t end) {
        try {
            std::vector<double> y(static_cast<std::size_t>(m));
            for (std::size_t k = begin; k < end; ++k) {
                per_ball[k] = integrate_volume_fn(
                    [&](std::span<const double> x) {
                        const double j = jacobian_det(phi, x, q.diff);
                        phi.eval_into(x, y);
                        return f(y) * std::abs(j);
                    },
                    Domain::ball(balls[k].center, balls[k].radius), q);
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!worker_error) worker_error = std::current_exception();
        }
    };
    const int workers = std::min<int>(detail::worker_count(), static_cast<int>(balls.size()));
    if (workers <= 1 || balls.size() < 8) {
        run_range(0, balls.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (balls.size() + workers - 1) / static_cast<std::size_t>(workers);
        for (int w = 0; w < workers; ++w) {
            const std::size_t b = static_cast<std::size_t>(w) * chunk;
            const std::size_t e = std::min(balls.size(), b + chunk);
            if (b < e) pool.emplace_back(run_range, b, e);
        }
        for (auto& t : pool) t.join();
    }
    if (worker_error) std::rethrow_exception(worker_error);

    const double sum_balls = pairwise_sum(per_ball);
    std::vector<std::pair<std::string, double>> diag;
    diag.emplace_back("sum_balls", sum_balls);
    diag.emplace_back("domain_integral", domain_integral);
    diag.emplace_back("gap", domain_integral - sum_balls);
    diag.emplace_back("ball_count", static_cast<double>(balls.size()));
    for (std::size_t k = 0; k < per_ball.size(); ++k)
        diag.emplace_back("ball" + std::to_string(k + 1), per_ball[k]);
    const double violation = std::fmax(0.0, sum_balls - domain_integral);
    return make_report("ball_exhaustion", violation, 0.0, tol, std::move(diag));
}

}  // namespace hyperflux
