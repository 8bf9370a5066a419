#pragma once

// Published experiment conditions, fitted parameters and correlations for
// chromate removal on Purolite A600E and A520E.

#include <array>
#include <utility>
#include <vector>
#include <optional>
#include <string>

#include "breakcurve/correlation.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/units.hpp"

namespace breakcurve::reference {

struct ExperimentRow {
    int number;
    const char* resin;
    double c0_ppb;
    double q_l_per_hr;
    double u0_cm_per_min;
    double ct_min;  // as declared
    double v_ml;
    double d_cm;
};

inline constexpr std::array<ExperimentRow, 8> experiments{{
    {1, "A600E", 14.73, 0.85, 8, 0.75, 10.6, 1.5},
    {2, "A600E", 14.73, 457, 22, 0.75, 5712, 21},
    {3, "A600E", 14.73, 0.85, 8, 0.5, 7.1, 1.5},
    {4, "A600E", 44.47, 0.85, 8, 0.75, 10.6, 1.5},
    {5, "A600E", 44.47, 0.85, 8, 0.5, 7.1, 1.5},
    {6, "A600E", 20.65, 40.80, 21, 0.75, 510, 6.4},
    {7, "A520E", 14.73, 0.85, 8, 0.75, 10.6, 1.5},
    // Declares 1.5 min, but V/Q is 0.50 min; canonicalization keeps V/Q.
    {8, "A520E", 14.73, 0.85, 8, 1.5, 7.1, 1.5},
}};

inline RawConditions raw_conditions(const ExperimentRow& row) {
    RawConditions r;
    r.inlet_concentration = {row.c0_ppb, "ppb"};
    r.flow_rate = {row.q_l_per_hr, "L/hr"};
    r.resin_volume = {row.v_ml, "mL"};
    r.contact_time = Quantity{row.ct_min, "min"};
    r.linear_velocity = Quantity{row.u0_cm_per_min, "cm/min"};
    r.column_diameter = Quantity{row.d_cm, "cm"};
    r.resin_id = row.resin;
    return r;
}

/// Canonical conditions of experiment `number` (1-based).
inline ExperimentConditions conditions(int number, std::vector<std::string>* warnings = nullptr) {
    if (number < 1 || number > static_cast<int>(experiments.size())) invalid("no such reference experiment");
    return to_canonical(raw_conditions(experiments[static_cast<std::size_t>(number - 1)]), warnings);
}

/// Unconstrained RSSE fits, A600E experiments 1-5.
inline constexpr std::array<std::pair<double, double>, 5> thomas_fits{{
    {502, 0.3828},
    {434, 0.3964},
    {1264, 0.2549},
    {1612, 0.2091},
    {2548, 0.1687},
}};

inline ThomasParams thomas_fit(int number) {
    const auto& [k_t, q_m] = thomas_fits.at(static_cast<std::size_t>(number - 1));
    return {k_t, q_m};
}

/// K_T refit with q_m pinned at 0.254 g/L, A600E experiments 1-5.
inline constexpr std::array<double, 5> fixed_qm_kt{769, 653, 1269, 1080, 1146};
inline constexpr double a600e_qm_fixed = 0.254;
inline constexpr double a520e_qm_fixed = 0.1886;

/// Published A600E correlation, K_T = -264 CT + 10.45 C0 + 1247.
inline CorrelationModel a600e_correlation() {
    CorrelationModel m;
    m.q_m_fixed = a600e_qm_fixed;
    m.a_per_min = -264.0;
    m.b_per_ppb = 10.45;
    m.c = 1247.0;
    m.resin_id = "A600E";
    for (int n : {1, 3, 4, 5}) {
        const auto& row = experiments[static_cast<std::size_t>(n - 1)];
        m.sources.push_back({row.ct_min, row.c0_ppb, fixed_qm_kt[static_cast<std::size_t>(n - 1)]});
    }
    return m;
}

/// Published A520E correlation, K_T = -724.4 CT + 1603.3 (contact time only).
/// The per-experiment K_T values behind it are not published, so no sources.
inline CorrelationModel a520e_correlation() {
    CorrelationModel m;
    m.q_m_fixed = a520e_qm_fixed;
    m.a_per_min = -724.4;
    m.b_per_ppb = 0.0;
    m.c = 1603.3;
    m.resin_id = "A520E";
    return m;
}

inline std::optional<CorrelationModel> bundled_correlation(const std::string& resin_id) {
    if (resin_id == "A600E") return a600e_correlation();
    if (resin_id == "A520E") return a520e_correlation();
    return std::nullopt;
}

}  // namespace breakcurve::reference
