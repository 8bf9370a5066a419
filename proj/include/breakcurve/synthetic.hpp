#pragma once

// Time grids and synthetic breakthrough curves.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "breakcurve/curve.hpp"
#include "breakcurve/error.hpp"
#include "breakcurve/models.hpp"

namespace breakcurve {

/// `count` evenly spaced values from `lo` to `hi` inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count < 2) invalid("grid needs at least 2 points");
    std::vector<double> out(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

struct NoiseSpec {
    double relative_sd = 0.0;  // multiplicative Gaussian noise, e.g. 0.02
    std::uint64_t seed = 1;
};

/// Samples a model on `times`, optionally with multiplicative noise clipped to [0, 1].
inline BreakthroughCurve synthesize_curve(const ParameterSet& params, const ExperimentConditions& conditions,
                                          const std::vector<double>& times, NoiseSpec noise = {},
                                          std::string label = "synthetic") {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<CurvePoint> points;
    points.reserve(times.size());
    for (double t : times) {
        double y = evaluate(params, conditions, t);
        if (noise.relative_sd > 0.0) y = std::clamp(y * (1.0 + noise.relative_sd * gauss(rng)), 0.0, 1.0);
        points.push_back({t, y});
    }
    return BreakthroughCurve(std::move(points), conditions, std::move(label));
}

}  // namespace breakcurve
