#pragma once

// Forward evaluation of the four fixed-bed breakthrough models, the
// log-linearized Thomas form and closed-form breakthrough times.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "breakcurve/curve.hpp"
#include "breakcurve/error.hpp"
#include "breakcurve/units.hpp"

namespace breakcurve {

/// |exponent| beyond which the logistic is returned as exactly 0 or 1.
inline constexpr double saturation_exponent = 700.0;

/// 1 / (exp(z) + 1), saturating for large |z|.
inline double logistic_of_exponent(double z) {
    if (z > saturation_exponent) return 0.0;
    if (z < -saturation_exponent) return 1.0;
    return 1.0 / (std::exp(z) + 1.0);
}

/// exp(z) / (1 + exp(z))^2, written in a form that cannot overflow.
inline double logistic_slope(double z) {
    if (std::abs(z) > 2.0 * saturation_exponent) return 0.0;
    const double c = std::cosh(0.5 * z);
    return 0.25 / (c * c);
}

struct ThomasParams {
    double k_t = 0.0;  // L/(g*hr)
    double q_m = 0.0;  // g/L resin (or g/kg with the mass basis)

    ThomasParams() = default;
    ThomasParams(double k_t_, double q_m_) : k_t(k_t_), q_m(q_m_) {
        if (!(k_t > 0.0) || !(q_m > 0.0)) invalid("Thomas parameters must be positive");
    }
    friend bool operator==(const ThomasParams&, const ThomasParams&) = default;
};

struct YoonNelsonParams {
    double k_yn = 0.0;   // 1/hr
    double tau_hr = 0.0;

    YoonNelsonParams() = default;
    YoonNelsonParams(double k_yn_, double tau_hr_) : k_yn(k_yn_), tau_hr(tau_hr_) {
        if (!(k_yn > 0.0) || !(tau_hr > 0.0)) invalid("Yoon-Nelson parameters must be positive");
    }
    friend bool operator==(const YoonNelsonParams&, const YoonNelsonParams&) = default;
};

struct ClarkParams {
    double a = 0.0;
    double r_per_hr = 0.0;
    double n = 0.0;  // Freundlich exponent, > 1

    ClarkParams() = default;
    ClarkParams(double a_, double r_, double n_) : a(a_), r_per_hr(r_), n(n_) {
        if (!(a > 0.0) || !(r_per_hr > 0.0)) invalid("Clark A and r must be positive");
        if (!(n > 1.0)) invalid("Clark n must exceed 1");
    }
    friend bool operator==(const ClarkParams&, const ClarkParams&) = default;
};

struct WolborskaParams {
    double beta_a = 0.0;  // 1/hr
    double n0 = 0.0;      // g/L

    WolborskaParams() = default;
    WolborskaParams(double beta_a_, double n0_) : beta_a(beta_a_), n0(n0_) {
        if (!(beta_a > 0.0) || !(n0 > 0.0)) invalid("Wolborska parameters must be positive");
    }
    friend bool operator==(const WolborskaParams&, const WolborskaParams&) = default;
};

/// Whether q_m is per litre of resin (loading time V/Q) or per kg (M/Q).
enum class CapacityBasis { volume, mass };

/// V/Q (= contact time) or M/Q, the term multiplying K_T * q_m.
inline double loading_term(const ExperimentConditions& c, CapacityBasis basis) {
    if (basis == CapacityBasis::volume) return c.ct_hr;
    if (!c.m_kg) invalid("resin_mass is required for the mass form of the Thomas model");
    return *c.m_kg / c.q_l_per_hr;
}

inline double thomas_exponent(const ThomasParams& p, const ExperimentConditions& c, double t_hr,
                              CapacityBasis basis = CapacityBasis::volume) {
    return p.k_t * p.q_m * loading_term(c, basis) - p.k_t * c.c0_g_per_l * t_hr;
}

inline double thomas_forward(const ThomasParams& p, const ExperimentConditions& c, double t_hr,
                             CapacityBasis basis = CapacityBasis::volume) {
    return logistic_of_exponent(thomas_exponent(p, c, t_hr, basis));
}

/// Time at which the Thomas curve passes 0.5.
inline double thomas_t50(const ThomasParams& p, const ExperimentConditions& c,
                         CapacityBasis basis = CapacityBasis::volume) {
    return p.q_m * loading_term(c, basis) / c.c0_g_per_l;
}

inline YoonNelsonParams to_yoon_nelson(const ThomasParams& p, const ExperimentConditions& c,
                                       CapacityBasis basis = CapacityBasis::volume) {
    return {p.k_t * c.c0_g_per_l, thomas_t50(p, c, basis)};
}

inline ThomasParams to_thomas(const YoonNelsonParams& p, const ExperimentConditions& c,
                              CapacityBasis basis = CapacityBasis::volume) {
    return {p.k_yn / c.c0_g_per_l, p.tau_hr * c.c0_g_per_l / loading_term(c, basis)};
}

inline double yoon_nelson_forward(const YoonNelsonParams& p, double t_hr) {
    // exp(w) / (1 + exp(w)) with w = K_YN * (t - tau)
    return logistic_of_exponent(p.k_yn * p.tau_hr - p.k_yn * t_hr);
}

inline double clark_forward(const ClarkParams& p, double t_hr) {
    return std::exp(-std::log1p(p.a * std::exp(-p.r_per_hr * t_hr)) / (p.n - 1.0));
}

/// Low-ratio model; the output is clamped at 1 once the exponent turns positive.
inline double wolborska_forward(const WolborskaParams& p, const ExperimentConditions& c, double t_hr) {
    const double exponent = p.beta_a * c.c0_g_per_l / p.n0 * t_hr - p.beta_a * bed_transit_hr(c);
    return exponent >= 0.0 ? 1.0 : std::exp(exponent);
}

struct LinearizedPoint {
    double t_hr;
    double value;  // ln(C0/C - 1)
};

struct LinearizedCurve {
    std::vector<LinearizedPoint> points;
    std::size_t excluded = 0;  // ratios at exactly 0 or 1
};

/// ln(C0/C - 1) against t; slope is -K_T*C0 and intercept K_T*q_m*CT.
inline LinearizedCurve thomas_linearized(const BreakthroughCurve& curve) {
    LinearizedCurve out;
    for (const auto& p : curve.points()) {
        if (p.ratio <= 0.0 || p.ratio >= 1.0) {
            ++out.excluded;
            continue;
        }
        out.points.push_back({p.t_hr, std::log(1.0 / p.ratio - 1.0)});
    }
    if (out.points.size() < 2) invalid("no linearizable points (need at least 2 with 0 < C/C0 < 1)");
    return out;
}

/// Thomas parameters from an ordinary least-squares line through the linearized curve.
inline ThomasParams thomas_linear_estimate(const BreakthroughCurve& curve) {
    const auto lin = thomas_linearized(curve);
    double mt = 0.0, mv = 0.0;
    for (const auto& p : lin.points) {
        mt += p.t_hr;
        mv += p.value;
    }
    mt /= static_cast<double>(lin.points.size());
    mv /= static_cast<double>(lin.points.size());
    double stt = 0.0, stv = 0.0;
    for (const auto& p : lin.points) {
        stt += (p.t_hr - mt) * (p.t_hr - mt);
        stv += (p.t_hr - mt) * (p.value - mv);
    }
    const double slope = stv / stt;
    const double intercept = mv - slope * mt;
    if (!(slope < 0.0) || !(intercept > 0.0)) invalid("linearized curve does not have Thomas shape");
    const auto& c = curve.conditions();
    const double k_t = -slope / c.c0_g_per_l;
    return {k_t, intercept / (k_t * c.ct_hr)};
}

struct BreakthroughTime {
    double t_hr = 0.0;
    bool before_start = false;  // curve already past target at t = 0
};

/// Closed-form inverse of thomas_forward.
inline BreakthroughTime breakthrough_time(const ThomasParams& p, const ExperimentConditions& c, double target_ratio,
                                          CapacityBasis basis = CapacityBasis::volume) {
    if (!(target_ratio > 0.0 && target_ratio < 1.0)) invalid("target ratio must lie in (0, 1)");
    const double t = (p.q_m * loading_term(c, basis) - std::log(1.0 / target_ratio - 1.0) / p.k_t) / c.c0_g_per_l;
    return {t, t < 0.0};
}

// ---------------------------------------------------------------------------
// Generic model description used by the estimator and the file formats.

enum class ModelKind { thomas, yoon_nelson, clark, wolborska };

inline constexpr std::array<ModelKind, 4> all_models{ModelKind::thomas, ModelKind::yoon_nelson, ModelKind::clark,
                                                     ModelKind::wolborska};

inline std::string_view model_name(ModelKind k) {
    switch (k) {
        case ModelKind::thomas: return "thomas";
        case ModelKind::yoon_nelson: return "yoon-nelson";
        case ModelKind::clark: return "clark";
        case ModelKind::wolborska: return "wolborska";
    }
    return "unknown";
}

inline ModelKind parse_model(std::string_view name) {
    for (auto k : all_models) {
        if (model_name(k) == name) return k;
    }
    invalid("unknown model '" + std::string(name) + "' (expected thomas, yoon-nelson, clark or wolborska)");
}

/// Domain of a parameter; decides the unconstrained transform used when fitting.
enum class Domain { positive, above_one };

struct ParameterInfo {
    std::string_view key;  // file key, carries the unit
    Domain domain;
};

template <class Params>
struct model_traits;

template <>
struct model_traits<ThomasParams> {
    static constexpr ModelKind kind = ModelKind::thomas;
    static constexpr std::array<ParameterInfo, 2> parameters{{{"kt_l_per_g_hr", Domain::positive},
                                                              {"qm_g_per_l", Domain::positive}}};
    static ThomasParams from(std::span<const double> v) { return {v[0], v[1]}; }
    static std::array<double, 2> values(const ThomasParams& p) { return {p.k_t, p.q_m}; }
    static double forward(const ThomasParams& p, const ExperimentConditions& c, double t) {
        return thomas_forward(p, c, t);
    }
};

template <>
struct model_traits<YoonNelsonParams> {
    static constexpr ModelKind kind = ModelKind::yoon_nelson;
    static constexpr std::array<ParameterInfo, 2> parameters{{{"kyn_per_hr", Domain::positive},
                                                              {"tau_hr", Domain::positive}}};
    static YoonNelsonParams from(std::span<const double> v) { return {v[0], v[1]}; }
    static std::array<double, 2> values(const YoonNelsonParams& p) { return {p.k_yn, p.tau_hr}; }
    static double forward(const YoonNelsonParams& p, const ExperimentConditions&, double t) {
        return yoon_nelson_forward(p, t);
    }
};

template <>
struct model_traits<ClarkParams> {
    static constexpr ModelKind kind = ModelKind::clark;
    static constexpr std::array<ParameterInfo, 3> parameters{
        {{"a", Domain::positive}, {"r_per_hr", Domain::positive}, {"n", Domain::above_one}}};
    static ClarkParams from(std::span<const double> v) { return {v[0], v[1], v[2]}; }
    static std::array<double, 3> values(const ClarkParams& p) { return {p.a, p.r_per_hr, p.n}; }
    static double forward(const ClarkParams& p, const ExperimentConditions&, double t) { return clark_forward(p, t); }
};

template <>
struct model_traits<WolborskaParams> {
    static constexpr ModelKind kind = ModelKind::wolborska;
    static constexpr std::array<ParameterInfo, 2> parameters{{{"beta_a_per_hr", Domain::positive},
                                                              {"n0_g_per_l", Domain::positive}}};
    static WolborskaParams from(std::span<const double> v) { return {v[0], v[1]}; }
    static std::array<double, 2> values(const WolborskaParams& p) { return {p.beta_a, p.n0}; }
    static double forward(const WolborskaParams& p, const ExperimentConditions& c, double t) {
        return wolborska_forward(p, c, t);
    }
};

/// Calls `f` with a value-initialized parameter struct of the given model.
template <class F>
decltype(auto) visit_model(ModelKind kind, F&& f) {
    switch (kind) {
        case ModelKind::thomas: return f(ThomasParams{});
        case ModelKind::yoon_nelson: return f(YoonNelsonParams{});
        case ModelKind::clark: return f(ClarkParams{});
        case ModelKind::wolborska: return f(WolborskaParams{});
    }
    invalid("unknown model kind");
}

inline std::vector<ParameterInfo> parameter_info(ModelKind kind) {
    return visit_model(kind, []<class P>(const P&) {
        const auto& ps = model_traits<P>::parameters;
        return std::vector<ParameterInfo>(ps.begin(), ps.end());
    });
}

/// Parameter values of one model, ordered as in model_traits<...>::parameters.
struct ParameterSet {
    ModelKind model = ModelKind::thomas;
    std::vector<double> values;

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

template <class Params>
ParameterSet to_parameter_set(const Params& p) {
    const auto v = model_traits<Params>::values(p);
    return {model_traits<Params>::kind, std::vector<double>(v.begin(), v.end())};
}

template <class Params>
Params from_parameter_set(const ParameterSet& ps) {
    if (ps.model != model_traits<Params>::kind) fail(ErrorCode::model_mismatch, "parameter set is for another model");
    if (ps.values.size() != model_traits<Params>::parameters.size()) invalid("wrong number of parameters");
    return model_traits<Params>::from(ps.values);
}

/// Runtime-dispatched forward evaluation.
inline double evaluate(const ParameterSet& ps, const ExperimentConditions& c, double t_hr) {
    return visit_model(ps.model, [&]<class P>(const P&) {
        return model_traits<P>::forward(from_parameter_set<P>(ps), c, t_hr);
    });
}

inline std::vector<double> evaluate(const ParameterSet& ps, const ExperimentConditions& c,
                                    std::span<const double> times) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(evaluate(ps, c, t));
    return out;
}

}  // namespace breakcurve
