#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "breakcurve/error.hpp"
#include "breakcurve/units.hpp"

namespace breakcurve {

struct CurvePoint {
    double t_hr = 0.0;
    double ratio = 0.0;  // C/C0

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Validated effluent time series. Construction enforces strictly increasing
/// non-negative times, ratios in [0, 1] and at least three points.
class BreakthroughCurve {
public:
    static constexpr std::size_t min_points = 3;

    BreakthroughCurve(std::vector<CurvePoint> points, ExperimentConditions conditions, std::string label = {})
        : points_(std::move(points)), conditions_(std::move(conditions)), label_(std::move(label)) {
        if (points_.size() < min_points) {
            invalid("curve needs at least " + std::to_string(min_points) + " points, got " +
                    std::to_string(points_.size()));
        }
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const auto& p = points_[i];
            const std::string row = std::to_string(i + 1);
            if (!std::isfinite(p.t_hr) || p.t_hr < 0.0) invalid("negative or non-finite time at row " + row);
            if (i > 0 && !(p.t_hr > points_[i - 1].t_hr)) invalid("time not increasing at row " + row);
            if (!(p.ratio >= 0.0 && p.ratio <= 1.0)) invalid("ratio outside [0, 1] at row " + row);
        }
    }

    const std::vector<CurvePoint>& points() const { return points_; }
    const ExperimentConditions& conditions() const { return conditions_; }
    const std::string& label() const { return label_; }
    std::size_t size() const { return points_.size(); }

    std::vector<double> times() const {
        std::vector<double> out;
        out.reserve(points_.size());
        for (const auto& p : points_) out.push_back(p.t_hr);
        return out;
    }

    std::vector<double> ratios() const {
        std::vector<double> out;
        out.reserve(points_.size());
        for (const auto& p : points_) out.push_back(p.ratio);
        return out;
    }

    /// Points whose ratio is exactly zero; kept, but unusable for the log form.
    std::size_t zero_points() const {
        return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(),
                                                      [](const CurvePoint& p) { return p.ratio == 0.0; }));
    }

    double max_time() const { return points_.back().t_hr; }

private:
    std::vector<CurvePoint> points_;
    ExperimentConditions conditions_;
    std::string label_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, std::size_t line_no) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        invalid("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace detail

/// Reads the curve CSV format:
///
///     # comment
///     t_hr,ratio        (or t_hr,c_ppb)
///     0,0.0
///     100,0.1
///
/// In `c_ppb` mode each concentration is divided by the inlet concentration.
inline BreakthroughCurve ingest_curve(std::istream& in, const ExperimentConditions& conditions,
                                      std::string label = {}) {
    enum class Column { none, ratio, c_ppb } column = Column::none;
    std::vector<CurvePoint> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
            invalid("line " + std::to_string(line_no) + ": expected two comma-separated fields");
        }
        const auto first = detail::trim(text.substr(0, comma));
        const auto second = detail::trim(text.substr(comma + 1));
        if (column == Column::none) {
            if (first != "t_hr" || (second != "ratio" && second != "c_ppb")) {
                invalid("line " + std::to_string(line_no) + ": header must be 't_hr,ratio' or 't_hr,c_ppb'");
            }
            column = second == "ratio" ? Column::ratio : Column::c_ppb;
            continue;
        }
        const double t = detail::parse_number(first, line_no);
        double y = detail::parse_number(second, line_no);
        if (column == Column::c_ppb) y /= conditions.c0_ppb();
        points.push_back({t, y});
    }
    if (column == Column::none) invalid("curve file has no header");
    return BreakthroughCurve(std::move(points), conditions, std::move(label));
}

}  // namespace breakcurve
