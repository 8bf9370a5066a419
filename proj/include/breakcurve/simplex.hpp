#pragma once

// Nelder-Mead simplex minimization with optional box clamping.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace breakcurve {

struct SimplexOptions {
    std::size_t max_evaluations = 6000;
    double initial_step = 0.5;
    double x_tolerance = 1e-10;       // simplex diameter, max-norm
    double f_tolerance_rel = 1e-12;
    double f_tolerance_abs = 1e-24;
    std::size_t restarts = 2;         // fresh simplices around the best point after convergence
};

struct SimplexResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimizes `f` starting from `x0`. Every trial point is clamped into
/// [lower, upper] (pass empty spans for an unbounded problem).
template <class F>
SimplexResult minimize_simplex(F&& f, std::vector<double> x0, std::span<const double> lower = {},
                               std::span<const double> upper = {}, const SimplexOptions& opt = {}) {
    const std::size_t dim = x0.size();
    const bool boxed = !lower.empty();

    auto clamp = [&](std::vector<double>& x) {
        if (!boxed) return;
        for (std::size_t i = 0; i < dim; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    };

    SimplexResult result;
    auto eval = [&](std::vector<double>& x) {
        clamp(x);
        ++result.evaluations;
        const double v = f(std::span<const double>(x));
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    clamp(x0);
    std::vector<double> best_x = x0;
    double best_f = eval(best_x);

    for (std::size_t round = 0; round <= opt.restarts; ++round) {
        std::vector<std::vector<double>> pts(dim + 1, best_x);
        std::vector<double> vals(dim + 1, best_f);
        for (std::size_t i = 0; i < dim; ++i) {
            double step = opt.initial_step;
            if (boxed && best_x[i] + step > upper[i]) step = -step;
            pts[i + 1][i] += step;
            vals[i + 1] = eval(pts[i + 1]);
        }

        std::vector<std::size_t> order(dim + 1);
        bool converged = false;
        while (result.evaluations < opt.max_evaluations) {
            ++result.iterations;
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
            const std::size_t lo = order.front(), hi = order.back(), next_hi = order[dim - 1];

            double diameter = 0.0;
            for (std::size_t k = 0; k <= dim; ++k) {
                for (std::size_t i = 0; i < dim; ++i) diameter = std::max(diameter, std::abs(pts[k][i] - pts[lo][i]));
            }
            const double spread = vals[hi] - vals[lo];
            if (diameter <= opt.x_tolerance &&
                spread <= opt.f_tolerance_abs + opt.f_tolerance_rel * std::abs(vals[lo])) {
                converged = true;
                break;
            }
            if (diameter <= opt.x_tolerance * 1e-3) {
                // Collapsed onto a plateau (for example a saturated region).
                converged = true;
                break;
            }

            std::vector<double> centroid(dim, 0.0);
            for (std::size_t k = 0; k <= dim; ++k) {
                if (k == hi) continue;
                for (std::size_t i = 0; i < dim; ++i) centroid[i] += pts[k][i] / static_cast<double>(dim);
            }
            auto along = [&](double coef) {
                std::vector<double> x(dim);
                for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + coef * (pts[hi][i] - centroid[i]);
                return x;
            };

            auto reflected = along(-1.0);
            const double fr = eval(reflected);
            if (fr < vals[lo]) {
                auto expanded = along(-2.0);
                const double fe = eval(expanded);
                if (fe < fr) {
                    pts[hi] = std::move(expanded);
                    vals[hi] = fe;
                } else {
                    pts[hi] = std::move(reflected);
                    vals[hi] = fr;
                }
                continue;
            }
            if (fr < vals[next_hi]) {
                pts[hi] = std::move(reflected);
                vals[hi] = fr;
                continue;
            }
            const bool outside = fr < vals[hi];
            auto contracted = along(outside ? -0.5 : 0.5);
            const double fc = eval(contracted);
            if (fc < (outside ? fr : vals[hi])) {
                pts[hi] = std::move(contracted);
                vals[hi] = fc;
                continue;
            }
            for (std::size_t k = 0; k <= dim; ++k) {
                if (k == lo) continue;
                for (std::size_t i = 0; i < dim; ++i) pts[k][i] = pts[lo][i] + 0.5 * (pts[k][i] - pts[lo][i]);
                vals[k] = eval(pts[k]);
            }
        }

        const auto it = std::min_element(vals.begin(), vals.end());
        const std::size_t lo = static_cast<std::size_t>(it - vals.begin());
        const double previous = best_f;
        if (vals[lo] <= best_f) {
            best_f = vals[lo];
            best_x = pts[lo];
        }
        result.converged = converged;
        if (!converged) break;
        const double gain = previous - best_f;
        if (round > 0 && gain <= opt.f_tolerance_abs + opt.f_tolerance_rel * std::abs(best_f)) break;
    }

    result.x = std::move(best_x);
    result.f = best_f;
    return result;
}

}  // namespace breakcurve
