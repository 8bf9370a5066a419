#pragma once

// Canonical unit system and experiment-condition records.
//
// Internally every quantity is held in g/L, L, hr and L/hr so that the Thomas
// exponent K_T * C0 * t is dimensionless with K_T in L/(g*hr). Optional column
// geometry stays in cm and cm/min, the units it is reported in.

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breakcurve/error.hpp"

namespace breakcurve {

namespace units {

inline constexpr double g_per_l_per_ppb = 1e-6;
inline constexpr double minutes_per_hour = 60.0;
inline constexpr double ml_per_l = 1000.0;

inline constexpr double ppb_to_g_per_l(double ppb) { return ppb * g_per_l_per_ppb; }
inline constexpr double g_per_l_to_ppb(double g_per_l) { return g_per_l / g_per_l_per_ppb; }
inline constexpr double min_to_hr(double minutes) { return minutes / minutes_per_hour; }
inline constexpr double hr_to_min(double hours) { return hours * minutes_per_hour; }
inline constexpr double ml_to_l(double ml) { return ml / ml_per_l; }
inline constexpr double l_to_ml(double l) { return l * ml_per_l; }

}  // namespace units

/// Relative tolerance between a declared contact time and V/Q.
inline constexpr double contact_time_tolerance = 0.05;
/// Relative tolerance between V and Z * pi * (d/2)^2.
inline constexpr double geometry_tolerance = 0.10;

/// A value tagged with the unit it was declared in.
struct Quantity {
    double value = 0.0;
    std::string unit;
};

/// Conditions as read from a file or typed by a user, before unit conversion.
struct RawConditions {
    Quantity inlet_concentration;           // ppb | ug/L | g/L
    Quantity flow_rate;                     // L/hr
    Quantity resin_volume;                  // mL | L
    std::optional<Quantity> contact_time;   // min | hr
    std::optional<Quantity> resin_mass;     // kg | g
    std::optional<Quantity> linear_velocity;  // cm/min
    std::optional<Quantity> bed_depth;        // cm
    std::optional<Quantity> column_diameter;  // cm
    std::string resin_id;
};

/// One fixed-bed run, canonical units.
struct ExperimentConditions {
    double c0_g_per_l = 0.0;
    double q_l_per_hr = 0.0;
    double v_l = 0.0;
    double ct_hr = 0.0;
    std::optional<double> m_kg;
    std::optional<double> u0_cm_per_min;
    std::optional<double> z_cm;
    std::optional<double> d_cm;
    std::string resin_id;

    double c0_ppb() const { return units::g_per_l_to_ppb(c0_g_per_l); }
    double ct_min() const { return units::hr_to_min(ct_hr); }
    double v_ml() const { return units::l_to_ml(v_l); }

    friend bool operator==(const ExperimentConditions&, const ExperimentConditions&) = default;
};

namespace detail {

struct UnitFactor {
    std::string_view unit;
    double factor;
};

inline double convert(const Quantity& q, std::string_view field, std::initializer_list<UnitFactor> accepted) {
    for (const auto& u : accepted) {
        if (q.unit == u.unit) return q.value * u.factor;
    }
    std::string list;
    for (const auto& u : accepted) {
        if (!list.empty()) list += ", ";
        list += u.unit;
    }
    invalid("unknown unit '" + q.unit + "' for field " + std::string(field) + " (accepted: " + list + ")");
}

inline double require_positive(double v, std::string_view field) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(std::string(field) + " must be positive and finite");
    return v;
}

inline std::optional<double> convert_optional(const std::optional<Quantity>& q, std::string_view field,
                                              std::initializer_list<UnitFactor> accepted) {
    if (!q) return std::nullopt;
    return require_positive(convert(*q, field, accepted), field);
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace detail

/// Converts declared units to the canonical system and validates the record.
///
/// A declared contact time that disagrees with V/Q by more than 5% is replaced
/// by V/Q and a warning is appended to `warnings` (when given). A missing
/// contact time is computed as V/Q.
inline ExperimentConditions to_canonical(const RawConditions& raw, std::vector<std::string>* warnings = nullptr) {
    using detail::convert;
    using detail::require_positive;

    ExperimentConditions c;
    c.c0_g_per_l = require_positive(
        convert(raw.inlet_concentration, "inlet_concentration",
                {{"ppb", units::g_per_l_per_ppb}, {"ug/L", units::g_per_l_per_ppb}, {"g/L", 1.0}}),
        "inlet_concentration");
    c.q_l_per_hr = require_positive(convert(raw.flow_rate, "flow_rate", {{"L/hr", 1.0}}), "flow_rate");
    c.v_l = require_positive(convert(raw.resin_volume, "resin_volume", {{"mL", 1.0 / units::ml_per_l}, {"L", 1.0}}),
                             "resin_volume");

    const double ct_from_flow = c.v_l / c.q_l_per_hr;
    if (raw.contact_time) {
        const double declared = require_positive(
            convert(*raw.contact_time, "contact_time", {{"min", 1.0 / units::minutes_per_hour}, {"hr", 1.0}}),
            "contact_time");
        if (detail::relative_gap(declared, ct_from_flow) > contact_time_tolerance) {
            if (warnings) {
                char buf[200];
                std::snprintf(buf, sizeof buf,
                              "declared contact time %.4g min disagrees with V/Q = %.4g min; using V/Q",
                              units::hr_to_min(declared), units::hr_to_min(ct_from_flow));
                warnings->emplace_back(buf);
            }
            c.ct_hr = ct_from_flow;
        } else {
            c.ct_hr = declared;
        }
    } else {
        c.ct_hr = ct_from_flow;
    }

    c.m_kg = detail::convert_optional(raw.resin_mass, "resin_mass", {{"kg", 1.0}, {"g", 1e-3}});
    c.u0_cm_per_min = detail::convert_optional(raw.linear_velocity, "linear_velocity", {{"cm/min", 1.0}});
    c.z_cm = detail::convert_optional(raw.bed_depth, "bed_depth", {{"cm", 1.0}});
    c.d_cm = detail::convert_optional(raw.column_diameter, "column_diameter", {{"cm", 1.0}});
    c.resin_id = raw.resin_id;

    if (c.z_cm && c.d_cm) {
        const double bed_ml = *c.z_cm * std::numbers::pi * (*c.d_cm / 2.0) * (*c.d_cm / 2.0);
        if (detail::relative_gap(bed_ml, c.v_ml()) > geometry_tolerance) {
            invalid("bed geometry inconsistent: Z * pi * (d/2)^2 differs from resin volume by more than 10%");
        }
    }
    return c;
}

/// Expresses canonical conditions as a raw record in canonical units.
inline RawConditions as_raw(const ExperimentConditions& c) {
    RawConditions r;
    r.inlet_concentration = {c.c0_g_per_l, "g/L"};
    r.flow_rate = {c.q_l_per_hr, "L/hr"};
    r.resin_volume = {c.v_l, "L"};
    r.contact_time = Quantity{c.ct_hr, "hr"};
    if (c.m_kg) r.resin_mass = Quantity{*c.m_kg, "kg"};
    if (c.u0_cm_per_min) r.linear_velocity = Quantity{*c.u0_cm_per_min, "cm/min"};
    if (c.z_cm) r.bed_depth = Quantity{*c.z_cm, "cm"};
    if (c.d_cm) r.column_diameter = Quantity{*c.d_cm, "cm"};
    r.resin_id = c.resin_id;
    return r;
}

/// Shorthand for the units conditions are usually reported in.
inline ExperimentConditions make_conditions(double c0_ppb, double q_l_per_hr, double v_ml,
                                            std::optional<double> ct_min = std::nullopt,
                                            std::string resin_id = {},
                                            std::vector<std::string>* warnings = nullptr) {
    RawConditions r;
    r.inlet_concentration = {c0_ppb, "ppb"};
    r.flow_rate = {q_l_per_hr, "L/hr"};
    r.resin_volume = {v_ml, "mL"};
    if (ct_min) r.contact_time = Quantity{*ct_min, "min"};
    r.resin_id = std::move(resin_id);
    return to_canonical(r, warnings);
}

/// Bed depth in cm, taken from Z or derived from V and the column diameter.
inline double bed_depth_cm(const ExperimentConditions& c) {
    if (c.z_cm) return *c.z_cm;
    if (c.d_cm) return c.v_ml() / (std::numbers::pi * (*c.d_cm / 2.0) * (*c.d_cm / 2.0));
    invalid("bed_depth (z_cm) is required, directly or via column diameter (d_cm)");
}

/// Z / U0 converted to hours.
inline double bed_transit_hr(const ExperimentConditions& c) {
    if (!c.u0_cm_per_min) invalid("linear_velocity (u0_cm_per_min) is required");
    return units::min_to_hr(bed_depth_cm(c) / *c.u0_cm_per_min);
}

/// Effluent ratio C/C0 at which the bed is declared exhausted for a leakage limit.
inline double breakthrough_ratio(double limit_ppb, double c0_ppb) {
    if (!(limit_ppb > 0.0)) invalid("limit must be positive");
    if (!(c0_ppb > 0.0)) invalid("inlet concentration must be positive");
    if (limit_ppb >= c0_ppb) invalid("inlet already below limit");
    return limit_ppb / c0_ppb;
}

}  // namespace breakcurve
