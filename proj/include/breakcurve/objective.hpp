#pragma once

// Goodness-of-fit statistics on aligned ratio series.

#include <cstddef>
#include <span>
#include <string>

#include "breakcurve/error.hpp"

namespace breakcurve {

/// Calculated ratios below this are left out of the relative-error sums.
inline constexpr double objective_epsilon = 1e-6;

struct ObjectiveValue {
    double value = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
};

namespace detail {

inline void check_aligned(std::span<const double> calc, std::span<const double> exp) {
    if (calc.size() != exp.size()) invalid("calculated and experimental series differ in length");
    if (calc.empty()) invalid("empty series");
}

}  // namespace detail

/// Sum of squared relative residuals, ((calc - exp) / calc)^2.
inline ObjectiveValue rsse(std::span<const double> calc, std::span<const double> exp) {
    detail::check_aligned(calc, exp);
    ObjectiveValue out;
    for (std::size_t i = 0; i < calc.size(); ++i) {
        if (calc[i] < objective_epsilon) {
            ++out.excluded;
            continue;
        }
        const double rel = (calc[i] - exp[i]) / calc[i];
        out.value += rel * rel;
        ++out.used;
    }
    if (out.used == 0) fail(ErrorCode::objective_undefined, "objective undefined on this curve");
    return out;
}

/// Hybrid fractional error in percent, (100 / (n - p)) * sum (calc - exp)^2 / calc.
/// `n` counts the points that survive the epsilon exclusion.
inline ObjectiveValue hfe(std::span<const double> calc, std::span<const double> exp, std::size_t parameter_count) {
    detail::check_aligned(calc, exp);
    ObjectiveValue out;
    double sum = 0.0;
    for (std::size_t i = 0; i < calc.size(); ++i) {
        if (calc[i] < objective_epsilon) {
            ++out.excluded;
            continue;
        }
        const double d = calc[i] - exp[i];
        sum += d * d / calc[i];
        ++out.used;
    }
    if (out.used == 0) fail(ErrorCode::objective_undefined, "objective undefined on this curve");
    if (out.used <= parameter_count) {
        invalid("HFE needs more points than parameters (n = " + std::to_string(out.used) +
                ", p = " + std::to_string(parameter_count) + ")");
    }
    out.value = 100.0 / static_cast<double>(out.used - parameter_count) * sum;
    return out;
}

/// Coefficient of determination 1 - SS_res / SS_tot on the ratio series.
inline double r_squared(std::span<const double> calc, std::span<const double> exp) {
    detail::check_aligned(calc, exp);
    if (exp.size() < 2) invalid("R² needs at least two points");
    double mean = 0.0;
    for (double y : exp) mean += y;
    mean /= static_cast<double>(exp.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < exp.size(); ++i) {
        ss_res += (exp[i] - calc[i]) * (exp[i] - calc[i]);
        ss_tot += (exp[i] - mean) * (exp[i] - mean);
    }
    if (ss_tot == 0.0) invalid("R² undefined for a constant experimental series");
    return 1.0 - ss_res / ss_tot;
}

}  // namespace breakcurve
