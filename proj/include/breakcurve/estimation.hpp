#pragma once

// Box-constrained, derivative-free least-squares fitting of breakthrough models.
//
// Parameters are optimized in a transformed space (log x, or log(x - 1) for
// Clark's n) so positivity never has to be enforced explicitly. Each fit runs
// the simplex from a fixed schedule of five starts, so results are
// reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "breakcurve/curve.hpp"
#include "breakcurve/error.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/objective.hpp"
#include "breakcurve/simplex.hpp"

namespace breakcurve {

/// Relative distance to a bound (as a fraction of the box width) below which
/// the bound is reported active.
inline constexpr double active_bound_tolerance = 1e-3;

/// Which model to fit, and which of its parameters are held fixed.
struct ModelSpec {
    ModelKind model = ModelKind::thomas;
    std::vector<std::optional<double>> pinned;  // empty, or one entry per parameter
    std::optional<std::size_t> hfe_parameter_count;  // defaults to the model's full parameter count

    static ModelSpec of(ModelKind kind) { return {kind, {}, std::nullopt}; }

    std::size_t parameter_count() const { return parameter_info(model).size(); }
    bool is_pinned(std::size_t i) const { return i < pinned.size() && pinned[i].has_value(); }
};

/// Lower/upper limits, one entry per model parameter (entries of pinned parameters are ignored).
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// A box of +-fraction around `center`, e.g. fraction = 0.3 for +-30%.
inline Bounds box_around(const ParameterSet& center, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) invalid("bound fraction must lie in (0, 1)");
    Bounds b;
    for (double v : center.values) {
        b.lower.push_back(v * (1.0 - fraction));
        b.upper.push_back(v * (1.0 + fraction));
    }
    return b;
}

struct FitResult {
    ParameterSet params;
    std::vector<bool> pinned;
    double rsse = 0.0;
    std::optional<double> hfe;  // percent; absent when n <= p
    std::size_t hfe_parameter_count = 0;
    std::optional<double> r_squared;  // absent for a constant experimental series
    std::size_t n_points_used = 0;
    std::size_t excluded_points = 0;
    std::optional<Bounds> bounds;
    std::vector<bool> active_bounds;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;

    ModelKind model() const { return params.model; }
};

struct FitOptions {
    std::size_t starts = 5;
    SimplexOptions simplex{};
};

namespace detail {

inline double to_free(double x, Domain d) { return d == Domain::positive ? std::log(x) : std::log(x - 1.0); }
inline double from_free(double u, Domain d) { return d == Domain::positive ? std::exp(u) : 1.0 + std::exp(u); }

struct Range {
    double lo;
    double hi;
};

/// Start ranges used when no bounds are given.
inline std::vector<Range> default_start_ranges(ModelKind kind, const BreakthroughCurve& curve) {
    const double t_max = curve.max_time();
    switch (kind) {
        case ModelKind::thomas: return {{1e1, 1e4}, {1e-2, 1e0}};
        case ModelKind::yoon_nelson: return {{0.1 / t_max, 100.0 / t_max}, {0.05 * t_max, 5.0 * t_max}};
        case ModelKind::clark: return {{1e-1, 1e3}, {0.1 / t_max, 100.0 / t_max}, {1.1, 5.0}};
        case ModelKind::wolborska: return {{1e0, 1e4}, {1e-3, 1e1}};
    }
    return {};
}

inline void validate_domain(double v, Domain d, const std::string& what) {
    if (!std::isfinite(v) || (d == Domain::positive ? !(v > 0.0) : !(v > 1.0))) {
        invalid(what + " outside the parameter domain");
    }
}

}  // namespace detail

/// Statistics of a given parameter set against a curve (no optimization).
inline FitResult evaluate_fit(const BreakthroughCurve& curve, const ParameterSet& params,
                              std::size_t hfe_parameter_count) {
    const auto& c = curve.conditions();
    const auto times = curve.times();
    const auto exp = curve.ratios();
    const auto calc = evaluate(params, c, times);

    FitResult r;
    r.params = params;
    r.pinned.assign(params.values.size(), false);
    const auto obj = rsse(calc, exp);
    r.rsse = obj.value;
    r.n_points_used = obj.used;
    r.excluded_points = obj.excluded;
    r.hfe_parameter_count = hfe_parameter_count;
    if (obj.used > hfe_parameter_count) r.hfe = hfe(calc, exp, hfe_parameter_count).value;
    try {
        r.r_squared = r_squared(calc, exp);
    } catch (const Error&) {
        r.r_squared.reset();
    }
    r.active_bounds.assign(params.values.size(), false);
    r.converged = true;
    return r;
}

/// Minimizes the relative squared error of `spec.model` against `curve`.
inline FitResult fit(const BreakthroughCurve& curve, const ModelSpec& spec,
                     const std::optional<ParameterSet>& init = std::nullopt,
                     const std::optional<Bounds>& bounds = std::nullopt, const FitOptions& options = {}) {
    const auto info = parameter_info(spec.model);
    const std::size_t np = info.size();
    if (!spec.pinned.empty() && spec.pinned.size() != np) invalid("pinned list does not match parameter count");

    std::vector<std::size_t> free_index;
    for (std::size_t i = 0; i < np; ++i) {
        if (spec.is_pinned(i)) {
            detail::validate_domain(*spec.pinned[i], info[i].domain, "pinned " + std::string(info[i].key));
        } else {
            free_index.push_back(i);
        }
    }
    if (free_index.empty()) invalid("all parameters are pinned; nothing to fit");

    if (bounds) {
        if (bounds->lower.size() != np || bounds->upper.size() != np) invalid("bounds do not match parameter count");
        for (std::size_t i : free_index) {
            const std::string key(info[i].key);
            detail::validate_domain(bounds->lower[i], info[i].domain, "lower bound of " + key);
            detail::validate_domain(bounds->upper[i], info[i].domain, "upper bound of " + key);
            if (!(bounds->lower[i] < bounds->upper[i])) invalid("lower bound must be below upper bound for " + key);
        }
    }
    if (init) {
        if (init->model != spec.model || init->values.size() != np) {
            fail(ErrorCode::model_mismatch, "initial parameters are for another model");
        }
        for (std::size_t i : free_index) {
            const std::string key(info[i].key);
            detail::validate_domain(init->values[i], info[i].domain, "initial " + key);
            if (bounds && (init->values[i] < bounds->lower[i] || init->values[i] > bounds->upper[i])) {
                invalid("initial " + key + " lies outside its bounds");
            }
        }
    }

    const std::size_t nf = free_index.size();
    std::vector<double> lower, upper;
    if (bounds) {
        for (std::size_t i : free_index) {
            lower.push_back(detail::to_free(bounds->lower[i], info[i].domain));
            upper.push_back(detail::to_free(bounds->upper[i], info[i].domain));
        }
    }

    const auto& conditions = curve.conditions();
    if (spec.model == ModelKind::wolborska) bed_transit_hr(conditions);  // requires Z and U0
    const auto times = curve.times();
    const auto exp = curve.ratios();
    // Every relative residual would be exactly 1, whatever the parameters.
    if (curve.zero_points() == curve.size()) {
        fail(ErrorCode::objective_undefined, "objective undefined on this curve: no breakthrough observed");
    }

    auto expand = [&](std::span<const double> u) {
        ParameterSet ps{spec.model, std::vector<double>(np)};
        std::size_t k = 0;
        for (std::size_t i = 0; i < np; ++i) {
            ps.values[i] = spec.is_pinned(i) ? *spec.pinned[i] : detail::from_free(u[k++], info[i].domain);
        }
        return ps;
    };

    std::vector<double> calc(times.size());
    auto objective = [&](std::span<const double> u) {
        const auto ps = expand(u);
        for (double v : ps.values) {
            if (!std::isfinite(v) || v <= 0.0) return std::numeric_limits<double>::infinity();
        }
        try {
            visit_model(spec.model, [&]<class P>(const P&) {
                const P p = model_traits<P>::from(ps.values);
                for (std::size_t i = 0; i < times.size(); ++i) {
                    calc[i] = model_traits<P>::forward(p, conditions, times[i]);
                }
            });
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();  // e.g. Clark n rounded down to 1
        }
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < calc.size(); ++i) {
            if (!(calc[i] >= objective_epsilon)) continue;
            const double rel = (calc[i] - exp[i]) / calc[i];
            sum += rel * rel;
            ++used;
        }
        return used == 0 ? std::numeric_limits<double>::infinity() : sum;
    };

    // Start schedule: start s takes, for free parameter j, the log-spaced
    // fraction ((s * (j + 1)) mod N + 1/2) / N of its range.
    std::vector<detail::Range> ranges;
    if (bounds) {
        for (std::size_t i : free_index) {
            ranges.push_back({detail::to_free(bounds->lower[i], info[i].domain),
                              detail::to_free(bounds->upper[i], info[i].domain)});
        }
    } else {
        const auto defaults = detail::default_start_ranges(spec.model, curve);
        for (std::size_t i : free_index) {
            ranges.push_back({detail::to_free(defaults[i].lo, info[i].domain),
                              detail::to_free(defaults[i].hi, info[i].domain)});
        }
    }
    std::vector<std::vector<double>> starts;
    if (init) {
        std::vector<double> u;
        for (std::size_t i : free_index) u.push_back(detail::to_free(init->values[i], info[i].domain));
        starts.push_back(std::move(u));
    }
    const std::size_t n_starts = std::max<std::size_t>(options.starts, 1);
    for (std::size_t s = 0; s < n_starts; ++s) {
        std::vector<double> u(nf);
        for (std::size_t j = 0; j < nf; ++j) {
            const std::size_t slot = (s * (j + 1)) % n_starts;
            const double frac = (static_cast<double>(slot) + 0.5) / static_cast<double>(n_starts);
            u[j] = ranges[j].lo + frac * (ranges[j].hi - ranges[j].lo);
        }
        starts.push_back(std::move(u));
    }

    SimplexResult best;
    std::size_t iterations = 0, evaluations = 0;
    for (const auto& start : starts) {
        auto r = minimize_simplex(objective, start, lower, upper, options.simplex);
        iterations += r.iterations;
        evaluations += r.evaluations;
        if (best.x.empty() || r.f < best.f) best = std::move(r);
    }

    if (!std::isfinite(best.f)) fail(ErrorCode::objective_undefined, "objective undefined on this curve");
    auto params = expand(best.x);
    if (bounds) {
        // exp(log(bound)) can land one ulp outside the box.
        for (std::size_t i : free_index) {
            params.values[i] = std::clamp(params.values[i], bounds->lower[i], bounds->upper[i]);
        }
    }
    const std::size_t p_count = spec.hfe_parameter_count.value_or(np);
    FitResult result = evaluate_fit(curve, params, p_count);
    for (std::size_t i = 0; i < np; ++i) result.pinned[i] = spec.is_pinned(i);
    result.bounds = bounds;
    if (bounds) {
        for (std::size_t i : free_index) {
            const double width = bounds->upper[i] - bounds->lower[i];
            const double v = params.values[i];
            result.active_bounds[i] = std::abs(v - bounds->lower[i]) / width < active_bound_tolerance ||
                                      std::abs(v - bounds->upper[i]) / width < active_bound_tolerance;
        }
    }
    result.converged = best.converged && std::isfinite(best.f);
    result.iterations = iterations;
    result.evaluations = evaluations;
    return result;
}

/// Thomas fit with q_m held at a known value; only K_T varies. HFE still
/// counts both parameters unless `hfe_parameter_count` says otherwise.
inline FitResult fit_fixed_qm(const BreakthroughCurve& curve, double q_m, std::size_t hfe_parameter_count = 2,
                              const std::optional<Bounds>& bounds = std::nullopt, const FitOptions& options = {}) {
    if (!(q_m > 0.0)) invalid("fixed q_m must be positive");
    ModelSpec spec{ModelKind::thomas, {std::nullopt, q_m}, hfe_parameter_count};
    return fit(curve, spec, std::nullopt, bounds, options);
}

}  // namespace breakcurve
