#pragma once

// Fixed-capacity Thomas scheme: q_m is averaged over a resin's experiments
// and pinned, K_T is refit per experiment and regressed linearly on contact
// time and inlet concentration, and the regression predicts curves at new
// operating conditions.
//
// Coefficients are kept in min and ppb, the units the correlation is
// reported in; conversion to canonical units happens at prediction time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "breakcurve/error.hpp"
#include "breakcurve/estimation.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/units.hpp"

namespace breakcurve {

struct SourceExperiment {
    double ct_min = 0.0;
    double c0_ppb = 0.0;
    double k_t = 0.0;

    friend bool operator==(const SourceExperiment&, const SourceExperiment&) = default;
};

struct PlaneCoefficients {
    double a_per_min = 0.0;
    double b_per_ppb = 0.0;
    double c = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// K_T = a * CT[min] + b * C0[ppb] + c, with q_m pinned.
struct CorrelationModel {
    double q_m_fixed = 0.0;
    double a_per_min = 0.0;
    double b_per_ppb = 0.0;
    double c = 0.0;
    std::string resin_id;
    std::vector<SourceExperiment> sources;

    friend bool operator==(const CorrelationModel&, const CorrelationModel&) = default;
};

/// Mean fitted q_m over Thomas fits of one resin.
inline double average_qm(std::span<const FitResult> fits) {
    if (fits.empty()) invalid("no fits to average");
    double sum = 0.0;
    for (const auto& f : fits) {
        if (f.model() != ModelKind::thomas) fail(ErrorCode::model_mismatch, "q_m averaging needs Thomas fits");
        sum += from_parameter_set<ThomasParams>(f.params).q_m;
    }
    return sum / static_cast<double>(fits.size());
}

/// Least-squares plane through (CT, C0, K_T) triples via the normal equations
/// of the mean-centred design.
inline PlaneCoefficients fit_plane(std::span<const SourceExperiment> triples) {
    if (triples.size() < 3) fail(ErrorCode::degenerate_design, "plane fit needs at least 3 experiments");
    const auto varies = [&](auto field) {
        return std::any_of(triples.begin(), triples.end(),
                           [&](const SourceExperiment& s) { return s.*field != triples.front().*field; });
    };
    if (!varies(&SourceExperiment::ct_min)) fail(ErrorCode::degenerate_design, "contact time not varied");
    if (!varies(&SourceExperiment::c0_ppb)) fail(ErrorCode::degenerate_design, "inlet concentration not varied");

    const double n = static_cast<double>(triples.size());
    double m1 = 0.0, m2 = 0.0, my = 0.0;
    for (const auto& s : triples) {
        m1 += s.ct_min;
        m2 += s.c0_ppb;
        my += s.k_t;
    }
    m1 /= n;
    m2 /= n;
    my /= n;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, s1y = 0.0, s2y = 0.0;
    for (const auto& s : triples) {
        const double x1 = s.ct_min - m1, x2 = s.c0_ppb - m2, y = s.k_t - my;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(det > 1e-12 * s11 * s22)) {
        fail(ErrorCode::degenerate_design, "contact time and inlet concentration are collinear");
    }
    PlaneCoefficients out;
    out.a_per_min = (s22 * s1y - s12 * s2y) / det;
    out.b_per_ppb = (s11 * s2y - s12 * s1y) / det;
    out.c = my - out.a_per_min * m1 - out.b_per_ppb * m2;
    return out;
}

/// Ordinary least-squares line through (x, K_T) pairs.
inline LineFit fit_line(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) fail(ErrorCode::degenerate_design, "line fit needs at least 2 points");
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) fail(ErrorCode::degenerate_design, "all x values are equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

enum class LineAxis { contact_time, inlet_concentration };

/// Single-variable correlation; the unused coefficient is zero.
inline PlaneCoefficients fit_line(std::span<const SourceExperiment> sources, LineAxis axis) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& s : sources) {
        pairs.emplace_back(axis == LineAxis::contact_time ? s.ct_min : s.c0_ppb, s.k_t);
    }
    const auto line = fit_line(pairs);
    if (axis == LineAxis::contact_time) return {line.slope, 0.0, line.intercept};
    return {0.0, line.slope, line.intercept};
}

namespace detail {

struct Point2 {
    double x, y;
};

inline double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

/// Convex hull, counter-clockwise, collinear points dropped.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace detail

/// Whether (CT, C0) lies in the convex hull of the model's source experiments.
/// Empty when the model records no sources.
inline std::optional<bool> within_source_hull(const CorrelationModel& m, double ct_min, double c0_ppb) {
    if (m.sources.empty()) return std::nullopt;
    double lo_x = m.sources[0].ct_min, hi_x = lo_x, lo_y = m.sources[0].c0_ppb, hi_y = lo_y;
    for (const auto& s : m.sources) {
        lo_x = std::min(lo_x, s.ct_min);
        hi_x = std::max(hi_x, s.ct_min);
        lo_y = std::min(lo_y, s.c0_ppb);
        hi_y = std::max(hi_y, s.c0_ppb);
    }
    const double sx = hi_x > lo_x ? hi_x - lo_x : 1.0;
    const double sy = hi_y > lo_y ? hi_y - lo_y : 1.0;
    auto scaled = [&](double x, double y) { return detail::Point2{(x - lo_x) / sx, (y - lo_y) / sy}; };

    std::vector<detail::Point2> pts;
    for (const auto& s : m.sources) pts.push_back(scaled(s.ct_min, s.c0_ppb));
    const auto hull = detail::convex_hull(pts);
    const auto q = scaled(ct_min, c0_ppb);
    constexpr double tol = 1e-9;

    if (hull.size() == 1) return std::abs(q.x - hull[0].x) <= tol && std::abs(q.y - hull[0].y) <= tol;
    if (hull.size() == 2) {
        const auto a = hull[0], b = hull[1];
        const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
        const double along = ((q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y)) / len2;
        return std::abs(detail::cross(a, b, q)) <= tol && along >= -tol && along <= 1.0 + tol;
    }
    for (std::size_t i = 0; i < hull.size(); ++i) {
        if (detail::cross(hull[i], hull[(i + 1) % hull.size()], q) < -tol) return false;
    }
    return true;
}

/// K_T in L/(g*hr) at contact time `ct_min` and inlet concentration `c0_ppb`.
inline double predict_kt(const CorrelationModel& m, double ct_min, double c0_ppb,
                         std::vector<std::string>* warnings = nullptr) {
    if (!(ct_min > 0.0) || !(c0_ppb > 0.0)) invalid("contact time and inlet concentration must be positive");
    const double k_t = m.a_per_min * ct_min + m.b_per_ppb * c0_ppb + m.c;
    if (warnings && within_source_hull(m, ct_min, c0_ppb) == false) {
        warnings->push_back("conditions lie outside the source experiments of the correlation");
    }
    if (!(k_t > 0.0)) fail(ErrorCode::extrapolation, "correlation extrapolated past validity");
    return k_t;
}

/// Thomas parameters the correlation assigns to `cond`.
inline ThomasParams predicted_params(const CorrelationModel& m, const ExperimentConditions& cond,
                                     std::vector<std::string>* warnings = nullptr) {
    if (!(m.q_m_fixed > 0.0)) invalid("correlation model has no positive fixed q_m");
    return {predict_kt(m, cond.ct_min(), cond.c0_ppb(), warnings), m.q_m_fixed};
}

inline std::vector<double> predict_curve(const CorrelationModel& m, const ExperimentConditions& cond,
                                         std::span<const double> times,
                                         std::vector<std::string>* warnings = nullptr) {
    const auto p = predicted_params(m, cond, warnings);
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(thomas_forward(p, cond, t));
    return out;
}

}  // namespace breakcurve
