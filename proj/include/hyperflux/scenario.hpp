#pragma once

// Scenario files: one JSON document declaring named scalar expressions,
// maps, domains, quadrature settings, and an ordered list of checks.  This
// header owns loading + validation (every error names the offending key),
// execution with a capped worker pool, and the two report writers.
//
// Schema:
// {
//   "name": "polar_disk", "m": 2,
//   "exprs": {"one": "1"},                          // scalar fields over x1..xm
//   "maps":  {"polar": ["x1*cos(x2)", "x1*sin(x2)"]},  // m components over x1..xm
//   "domains": {
//     "rect": {"kind": "box",  "lo": [0,0], "hi": [1, 6.28]},
//     "disk": {"kind": "ball", "center": [0,0], "radius": 1.0},
//     "wedge":{"kind": "graph","axis": 2, "base": {"lo": [0], "hi": [1]},
//              "lower": "0", "upper": "x1"}         // bounds over the non-axis names
//   },
//   "quad": {"gauss_order": 16, "subdivisions": 4, "rel_tol": 1e-8, "mc_seed": 1},
//   "checks": [ {"kind": "cov", "name": "area", "f": "one", "map": "polar",
//                "omega": "rect", "target": "disk", "tol": 1e-7}, ... ]
// }
//
// Check kinds and their bindings:
//   divergence     {field, domain}
//   cov            {f, map, omega, target}
//   cov_signed     {f, map, omega (ball), target}
//   hadamard       {map, point}
//   cofactor_flux  {f, map, point, half_width}
//   nonretraction  {map}
//   ball_exhaustion{f, map, omega, target, balls: [{center, radius}...]}
// Every check takes an optional "tol" and an optional "name".

#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hyperflux/expr.hpp"
#include "hyperflux/geom.hpp"
#include "hyperflux/quad.hpp"
#include "hyperflux/retract.hpp"
#include "hyperflux/theorems.hpp"

namespace hyperflux {

using ordered_json = nlohmann::ordered_json;

/// Scenario rejected before execution; the message names the offending key.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CheckKind {
    divergence,
    cov,
    cov_signed,
    hadamard,
    cofactor_flux,
    nonretraction,
    ball_exhaustion,
};

inline const char* check_kind_name(CheckKind k) {
    switch (k) {
        case CheckKind::divergence: return "divergence";
        case CheckKind::cov: return "cov";
        case CheckKind::cov_signed: return "cov_signed";
        case CheckKind::hadamard: return "hadamard";
        case CheckKind::cofactor_flux: return "cofactor_flux";
        case CheckKind::nonretraction: return "nonretraction";
        case CheckKind::ball_exhaustion: return "ball_exhaustion";
    }
    return "?";
}

struct CheckSpec {
    CheckKind kind;
    std::string name;           // explicit or "<kind>#<index>"
    std::string f, map, field;  // expression / map references (kind-dependent)
    std::string omega, target, domain;
    std::vector<double> point;
    double half_width = 0.0;
    std::vector<BallSpec> balls;
    std::optional<double> tol;
};

struct Scenario {
    std::string name;
    int m = 0;
    std::map<std::string, FieldExpr> exprs;
    std::map<std::string, MapExpr> maps;
    std::map<std::string, Domain> domains;
    QuadScheme quad;
    std::vector<CheckSpec> checks;
};

struct CheckOutcome {
    VerifyReport report;
    std::string kind;
    std::string error;  // nonempty when the check threw instead of reporting

    bool ok() const { return error.empty() && report.pass; }
};

namespace detail {

inline std::vector<std::string> ambient_names(int m) {
    std::vector<std::string> v;
    for (int i = 1; i <= m; ++i) v.push_back("x" + std::to_string(i));
    return v;
}

inline std::vector<std::string> base_names(int m, int axis0) {
    std::vector<std::string> v;
    for (int i = 0; i < m; ++i)
        if (i != axis0) v.push_back("x" + std::to_string(i + 1));
    return v;
}

inline const ordered_json& need(const ordered_json& j, const std::string& key,
                                const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError("missing key '" + where + "'");
    return *it;
}

inline double need_number(const ordered_json& j, const std::string& key, const std::string& where) {
    const auto& v = need(j, key, where);
    if (!v.is_number()) throw ValidationError("key '" + where + "' must be a number");
    return v.get<double>();
}

inline std::string need_string(const ordered_json& j, const std::string& key,
                               const std::string& where) {
    const auto& v = need(j, key, where);
    if (!v.is_string()) throw ValidationError("key '" + where + "' must be a string");
    return v.get<std::string>();
}

inline std::vector<double> need_vector(const ordered_json& j, const std::string& key,
                                       const std::string& where, std::size_t len) {
    const auto& v = need(j, key, where);
    if (!v.is_array()) throw ValidationError("key '" + where + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ValidationError("key '" + where + "' must contain numbers");
        out.push_back(e.get<double>());
    }
    if (len != 0 && out.size() != len)
        throw ValidationError("key '" + where + "' must have length " + std::to_string(len));
    return out;
}

inline FieldExpr parse_field_checked(const std::string& src, std::vector<std::string> vars,
                                     const std::string& where) {
    try {
        return parse_scalar(src, std::move(vars));
    } catch (const std::exception& e) {
        throw ValidationError("key '" + where + "': " + e.what());
    }
}

inline Domain parse_domain(const ordered_json& j, int m, const std::string& where) {
    const std::string kind = need_string(j, "kind", where + ".kind");
    try {
        if (kind == "box") {
            return Domain::box(need_vector(j, "lo", where + ".lo", static_cast<std::size_t>(m)),
                               need_vector(j, "hi", where + ".hi", static_cast<std::size_t>(m)));
        }
        if (kind == "ball") {
            return Domain::ball(
                need_vector(j, "center", where + ".center", static_cast<std::size_t>(m)),
                need_number(j, "radius", where + ".radius"));
        }
        if (kind == "graph") {
            const double axis_num = need_number(j, "axis", where + ".axis");
            const int axis1 = static_cast<int>(axis_num);
            if (axis1 < 1 || axis1 > m)
                throw ValidationError("key '" + where + ".axis' must be in 1.." + std::to_string(m));
            const auto& base = need(j, "base", where + ".base");
            BoxSpec bs{need_vector(base, "lo", where + ".base.lo", static_cast<std::size_t>(m - 1)),
                       need_vector(base, "hi", where + ".base.hi", static_cast<std::size_t>(m - 1))};
            const auto names = base_names(m, axis1 - 1);
            FieldExpr lower =
                parse_field_checked(need_string(j, "lower", where + ".lower"), names, where + ".lower");
            FieldExpr upper =
                parse_field_checked(need_string(j, "upper", where + ".upper"), names, where + ".upper");
            return Domain::graph(axis1 - 1, std::move(bs), std::move(lower), std::move(upper));
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError("key '" + where + "': " + e.what());
    }
    throw ValidationError("key '" + where + ".kind' must be box, ball, or graph");
}

}  // namespace detail

/// Parse and validate a scenario document.  Throws ValidationError with the
/// offending key in the message on any structural, reference, or dimension
/// problem.
inline Scenario load_scenario(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("scenario root must be an object");

    Scenario s;
    s.name = detail::need_string(j, "name", "name");
    const double m_num = detail::need_number(j, "m", "m");
    s.m = static_cast<int>(m_num);
    if (s.m < 1 || s.m > max_dim || s.m != m_num)
        throw ValidationError("key 'm' must be an integer in 1.." + std::to_string(max_dim));
    const auto ambient = detail::ambient_names(s.m);

    if (auto it = j.find("exprs"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("key 'exprs' must be an object");
        for (const auto& [key, val] : it->items()) {
            if (!val.is_string())
                throw ValidationError("key 'exprs." + key + "' must be a string");
            s.exprs.emplace(key, detail::parse_field_checked(val.get<std::string>(), ambient,
                                                             "exprs." + key));
        }
    }
    if (auto it = j.find("maps"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("key 'maps' must be an object");
        for (const auto& [key, val] : it->items()) {
            if (!val.is_array() || val.empty())
                throw ValidationError("key 'maps." + key + "' must be a nonempty array of strings");
            std::vector<std::string> comps;
            for (const auto& c : val) {
                if (!c.is_string())
                    throw ValidationError("key 'maps." + key + "' must contain strings");
                comps.push_back(c.get<std::string>());
            }
            if (static_cast<int>(comps.size()) != s.m)
                throw ValidationError("key 'maps." + key + "' must have exactly " +
                                      std::to_string(s.m) + " components");
            try {
                s.maps.emplace(key, parse_map(comps, ambient));
            } catch (const std::exception& e) {
                throw ValidationError("key 'maps." + key + "': " + e.what());
            }
        }
    }
    if (auto it = j.find("domains"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("key 'domains' must be an object");
        for (const auto& [key, val] : it->items())
            s.domains.emplace(key, detail::parse_domain(val, s.m, "domains." + key));
    }
    if (auto it = j.find("quad"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("key 'quad' must be an object");
        if (auto f = it->find("gauss_order"); f != it->end()) s.quad.gauss_order = f->get<int>();
        if (auto f = it->find("subdivisions"); f != it->end()) s.quad.subdivisions = f->get<int>();
        if (auto f = it->find("rel_tol"); f != it->end()) s.quad.rel_tol = f->get<double>();
        if (auto f = it->find("mc_seed"); f != it->end()) s.quad.mc_seed = f->get<std::uint64_t>();
        try {
            s.quad.validate();
        } catch (const std::exception& e) {
            throw ValidationError(std::string("key 'quad': ") + e.what());
        }
    }

    const auto& checks = detail::need(j, "checks", "checks");
    if (!checks.is_array()) throw ValidationError("key 'checks' must be an array");

    const auto expr_ref = [&](const ordered_json& c, const char* key, const std::string& where) {
        const std::string n = detail::need_string(c, key, where);
        if (!s.exprs.count(n))
            throw ValidationError("key '" + where + "' references undefined expression '" + n + "'");
        return n;
    };
    const auto map_ref = [&](const ordered_json& c, const char* key, const std::string& where) {
        const std::string n = detail::need_string(c, key, where);
        if (!s.maps.count(n))
            throw ValidationError("key '" + where + "' references undefined map '" + n + "'");
        return n;
    };
    const auto domain_ref = [&](const ordered_json& c, const char* key, const std::string& where) {
        const std::string n = detail::need_string(c, key, where);
        if (!s.domains.count(n))
            throw ValidationError("key '" + where + "' references undefined domain '" + n + "'");
        return n;
    };

    int index = 0;
    for (const auto& c : checks) {
        ++index;
        const std::string where = "checks[" + std::to_string(index - 1) + "]";
        if (!c.is_object()) throw ValidationError("key '" + where + "' must be an object");
        const std::string kind = detail::need_string(c, "kind", where + ".kind");
        CheckSpec spec;
        if (kind == "divergence") {
            spec.kind = CheckKind::divergence;
            spec.field = map_ref(c, "field", where + ".field");
            spec.domain = domain_ref(c, "domain", where + ".domain");
        } else if (kind == "cov" || kind == "cov_signed") {
            spec.kind = kind == "cov" ? CheckKind::cov : CheckKind::cov_signed;
            spec.f = expr_ref(c, "f", where + ".f");
            spec.map = map_ref(c, "map", where + ".map");
            spec.omega = domain_ref(c, "omega", where + ".omega");
            spec.target = domain_ref(c, "target", where + ".target");
            if (spec.kind == CheckKind::cov_signed &&
                s.domains.at(spec.omega).kind() != Domain::Kind::ball)
                throw ValidationError("key '" + where + ".omega' must name a ball domain");
        } else if (kind == "hadamard") {
            spec.kind = CheckKind::hadamard;
            spec.map = map_ref(c, "map", where + ".map");
            spec.point = detail::need_vector(c, "point", where + ".point",
                                             static_cast<std::size_t>(s.m));
        } else if (kind == "cofactor_flux") {
            spec.kind = CheckKind::cofactor_flux;
            spec.f = expr_ref(c, "f", where + ".f");
            spec.map = map_ref(c, "map", where + ".map");
            spec.point = detail::need_vector(c, "point", where + ".point",
                                             static_cast<std::size_t>(s.m));
            spec.half_width = detail::need_number(c, "half_width", where + ".half_width");
            if (!(spec.half_width > 0.0))
                throw ValidationError("key '" + where + ".half_width' must be > 0");
        } else if (kind == "nonretraction") {
            spec.kind = CheckKind::nonretraction;
            spec.map = map_ref(c, "map", where + ".map");
        } else if (kind == "ball_exhaustion") {
            spec.kind = CheckKind::ball_exhaustion;
            spec.f = expr_ref(c, "f", where + ".f");
            spec.map = map_ref(c, "map", where + ".map");
            spec.omega = domain_ref(c, "omega", where + ".omega");
            spec.target = domain_ref(c, "target", where + ".target");
            const auto& balls = detail::need(c, "balls", where + ".balls");
            if (!balls.is_array() || balls.empty())
                throw ValidationError("key '" + where + ".balls' must be a nonempty array");
            int bi = 0;
            for (const auto& b : balls) {
                const std::string bw = where + ".balls[" + std::to_string(bi++) + "]";
                BallSpec bs{detail::need_vector(b, "center", bw + ".center",
                                                static_cast<std::size_t>(s.m)),
                            detail::need_number(b, "radius", bw + ".radius")};
                if (!(bs.radius > 0.0))
                    throw ValidationError("key '" + bw + ".radius' must be > 0");
                spec.balls.push_back(std::move(bs));
            }
        } else {
            throw ValidationError("key '" + where + ".kind' names an unknown check kind '" + kind +
                                  "'");
        }
        if (auto t = c.find("tol"); t != c.end()) {
            if (!t->is_number() || !(t->get<double>() > 0.0))
                throw ValidationError("key '" + where + ".tol' must be a positive number");
            spec.tol = t->get<double>();
        }
        spec.name = c.contains("name") ? detail::need_string(c, "name", where + ".name")
                                       : std::string(check_kind_name(spec.kind)) + "#" +
                                             std::to_string(index);
        s.checks.push_back(std::move(spec));
    }
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

namespace detail {

inline CheckOutcome run_one_check(const Scenario& s, const CheckSpec& c) {
    CheckOutcome out;
    out.kind = check_kind_name(c.kind);
    try {
        VerifyReport r;
        switch (c.kind) {
            case CheckKind::divergence:
                r = check_divergence(s.maps.at(c.field), s.domains.at(c.domain), s.quad,
                                     c.tol.value_or(1e-6));
                break;
            case CheckKind::cov:
                r = check_cov(s.exprs.at(c.f), s.maps.at(c.map), s.domains.at(c.omega),
                              s.domains.at(c.target), s.quad, c.tol.value_or(1e-7));
                break;
            case CheckKind::cov_signed:
                r = check_cov_singly(s.exprs.at(c.f), s.maps.at(c.map), s.domains.at(c.omega),
                                     s.domains.at(c.target), s.quad, c.tol.value_or(1e-7));
                break;
            case CheckKind::hadamard:
                r = check_hadamard(s.maps.at(c.map), c.point, s.quad.diff, c.tol.value_or(1e-4));
                break;
            case CheckKind::cofactor_flux:
                r = check_cofactor_flux(s.exprs.at(c.f), s.maps.at(c.map), c.point, c.half_width,
                                        s.quad, c.tol.value_or(1e-4));
                break;
            case CheckKind::nonretraction:
                r = check_nonretraction(RetractionCandidate(s.maps.at(c.map)), s.quad,
                                        c.tol.value_or(1e-10));
                break;
            case CheckKind::ball_exhaustion:
                r = ball_exhaustion_check(s.exprs.at(c.f), s.maps.at(c.map), s.domains.at(c.omega),
                                          s.domains.at(c.target), c.balls, s.quad,
                                          c.tol.value_or(1e-7));
                break;
        }
        r.name = c.name;
        out.report = std::move(r);
    } catch (const std::exception& e) {
        out.report.name = c.name;
        out.report.tol = c.tol.value_or(0.0);
        out.report.pass = false;
        out.error = e.what();
    }
    return out;
}

}  // namespace detail

/// Execute every check; results are ordered like the scenario regardless of
/// scheduling.  Worker count is capped by HYPERFLUX_THREADS.
inline std::vector<CheckOutcome> run_checks(const Scenario& s) {
    std::vector<CheckOutcome> outcomes(s.checks.size());
    const int workers =
        std::max(1, std::min(detail::worker_count(), static_cast<int>(s.checks.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < s.checks.size(); ++i)
            outcomes[i] = detail::run_one_check(s, s.checks[i]);
        return outcomes;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= s.checks.size()) return;
                outcomes[i] = detail::run_one_check(s, s.checks[i]);
            }
        });
    for (auto& t : pool) t.join();
    return outcomes;
}

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace detail

/// Machine-readable report: one object per check, scenario order, stable key
/// order; numbers serialized shortest-round-trip so identical runs are
/// byte-identical.  The timestamp collapses to a constant under fixed_clock.
inline ordered_json report_json(const Scenario& s, const std::vector<CheckOutcome>& outcomes,
                                bool fixed_clock, const std::string& timestamp) {
    ordered_json root;
    root["scenario"] = s.name;
    root["m"] = s.m;
    root["quad"] = {{"gauss_order", s.quad.gauss_order},
                    {"subdivisions", s.quad.subdivisions},
                    {"rel_tol", s.quad.rel_tol},
                    {"mc_seed", s.quad.mc_seed}};
    root["generated_at"] = fixed_clock ? "fixed" : timestamp;
    ordered_json checks = ordered_json::array();
    for (const auto& o : outcomes) {
        ordered_json c;
        c["name"] = o.report.name;
        c["kind"] = o.kind;
        if (!o.error.empty()) {
            c["error"] = o.error;
            c["pass"] = false;
        } else {
            c["lhs"] = o.report.lhs;
            c["rhs"] = o.report.rhs;
            c["residual"] = o.report.residual;
            c["rel_residual"] = o.report.rel_residual;
            c["tol"] = o.report.tol;
            c["pass"] = o.report.pass;
            ordered_json diag = ordered_json::object();
            for (const auto& [k, v] : o.report.diagnostics) diag[k] = v;
            c["diagnostics"] = std::move(diag);
        }
        checks.push_back(std::move(c));
    }
    root["checks"] = std::move(checks);
    return root;
}

/// CSV rows in scenario order with the fixed column set
/// scenario,check,lhs,rhs,residual,rel_residual,tol,pass.
inline std::string report_csv(const Scenario& s, const std::vector<CheckOutcome>& outcomes) {
    std::string out = "scenario,check,lhs,rhs,residual,rel_residual,tol,pass\n";
    for (const auto& o : outcomes) {
        out += s.name;
        out += ',';
        out += o.report.name;
        out += ',';
        if (o.error.empty()) {
            out += detail::format_double(o.report.lhs);
            out += ',';
            out += detail::format_double(o.report.rhs);
            out += ',';
            out += detail::format_double(o.report.residual);
            out += ',';
            out += detail::format_double(o.report.rel_residual);
        } else {
            out += "nan,nan,nan,nan";
        }
        out += ',';
        out += detail::format_double(o.report.tol);
        out += ',';
        out += o.report.pass ? "true" : "false";
        out += '\n';
    }
    return out;
}

}  // namespace hyperflux
