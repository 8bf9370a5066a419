#pragma once

// Analytic parameter sensitivities of the Thomas model, with a built-in
// central finite-difference cross-check.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "breakcurve/error.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/units.hpp"

namespace breakcurve {

/// dY/dK_T in g*hr/L.
inline double sensitivity_kt(const ThomasParams& p, const ExperimentConditions& c, double t_hr) {
    const double z = thomas_exponent(p, c, t_hr);
    return (c.c0_g_per_l * t_hr - p.q_m * c.ct_hr) * logistic_slope(z);
}

/// dY/dq_m in L/g; never positive.
inline double sensitivity_qm(const ThomasParams& p, const ExperimentConditions& c, double t_hr) {
    const double z = thomas_exponent(p, c, t_hr);
    return -p.k_t * c.ct_hr * logistic_slope(z);
}

inline constexpr double fd_relative_step = 1e-4;
inline constexpr double fd_tolerance = 1e-5;
/// Points with (1 + e^z)^2 at or above this are left out of the cross-check.
inline constexpr double fd_denominator_limit = 1e12;

struct SensitivityProfile {
    std::vector<double> times;
    std::vector<double> dy_dkt;
    std::vector<double> dy_dqm;
    double fd_check = 0.0;  // max relative deviation, analytic vs central difference
};

namespace detail {

/// Y when z >= 0, otherwise 1 - Y; both are computed without cancellation.
inline double thomas_smaller_tail(const ThomasParams& p, const ExperimentConditions& c, double t, bool upper) {
    const double z = thomas_exponent(p, c, t);
    return upper ? logistic_of_exponent(-z) : logistic_of_exponent(z);
}

inline double central_difference(const ThomasParams& p, const ExperimentConditions& c, double t, bool wrt_kt) {
    const bool upper = thomas_exponent(p, c, t) < 0.0;
    const double h = fd_relative_step * (wrt_kt ? p.k_t : p.q_m);
    ThomasParams plus = p, minus = p;
    (wrt_kt ? plus.k_t : plus.q_m) += h;
    (wrt_kt ? minus.k_t : minus.q_m) -= h;
    const double d = (thomas_smaller_tail(plus, c, t, upper) - thomas_smaller_tail(minus, c, t, upper)) / (2.0 * h);
    return upper ? -d : d;
}

inline double max_relative_deviation(std::span<const double> analytic, std::span<const double> numeric,
                                     std::span<const char> usable) {
    double scale = 0.0;
    for (double a : analytic) scale = std::max(scale, std::abs(a));
    // Near t50, dY/dK_T passes through zero; relative error is measured
    // against a floor tied to the profile's magnitude there.
    const double floor = 1e-6 * scale;
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        if (!usable[i]) continue;
        const double denom = std::max(std::abs(analytic[i]), floor);
        if (denom == 0.0) continue;
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

}  // namespace detail

/// Sensitivities on a time grid. Throws if the finite-difference check fails.
inline SensitivityProfile sensitivity_profile(const ThomasParams& p, const ExperimentConditions& c,
                                              std::span<const double> times) {
    SensitivityProfile out;
    out.times.assign(times.begin(), times.end());
    std::vector<double> fd_kt, fd_qm;
    std::vector<char> usable;
    for (double t : times) {
        out.dy_dkt.push_back(sensitivity_kt(p, c, t));
        out.dy_dqm.push_back(sensitivity_qm(p, c, t));
        fd_kt.push_back(detail::central_difference(p, c, t, true));
        fd_qm.push_back(detail::central_difference(p, c, t, false));
        const double z = thomas_exponent(p, c, t);
        // (1 + e^z)^2 < limit  <=>  z < log(sqrt(limit) - 1)
        usable.push_back(z < std::log(std::sqrt(fd_denominator_limit) - 1.0));
    }
    out.fd_check = std::max(detail::max_relative_deviation(out.dy_dkt, fd_kt, usable),
                            detail::max_relative_deviation(out.dy_dqm, fd_qm, usable));
    if (!(out.fd_check < fd_tolerance)) {
        fail(ErrorCode::objective_undefined, "sensitivity finite-difference check failed");
    }
    return out;
}

}  // namespace breakcurve
