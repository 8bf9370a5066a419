#pragma once

// File formats: conditions JSON, fit JSON, correlation JSON and CSV helpers.
//
// JSON documents keep a fixed field order and store numbers rounded to ten
// significant digits so identical inputs give byte-identical files. Keys
// carry their unit.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "breakcurve/correlation.hpp"
#include "breakcurve/error.hpp"
#include "breakcurve/estimation.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/units.hpp"

namespace breakcurve {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view tool_version = "0.1.0";
inline constexpr int json_significant_digits = 10;

/// `v` rounded to `digits` significant decimal digits.
inline double round_significant(double v, int digits = json_significant_digits) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::strtod(buf, nullptr);
}

inline Json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round_significant(v);
}

inline Json json_number(const std::optional<double>& v) { return v ? json_number(*v) : Json(nullptr); }

/// Shortest text that reads back as exactly `v`.
inline std::string exact_number(double v) {
    char buf[40];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) invalid("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        invalid(what + ": " + e.what());
    }
}

namespace detail {

inline double json_double(const Json& obj, const char* key, const std::string& what) {
    const auto it = obj.find(key);
    if (it == obj.end()) invalid(what + ": missing key '" + key + "'");
    if (!it->is_number()) invalid(what + ": key '" + std::string(key) + "' must be a number");
    return it->get<double>();
}

inline std::optional<double> json_optional_double(const Json& obj, const char* key, const std::string& what) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) invalid(what + ": key '" + std::string(key) + "' must be a number");
    return it->get<double>();
}

inline std::string json_string(const Json& obj, const char* key, const std::string& what) {
    const auto it = obj.find(key);
    if (it == obj.end()) invalid(what + ": missing key '" + key + "'");
    if (!it->is_string()) invalid(what + ": key '" + std::string(key) + "' must be a string");
    return it->get<std::string>();
}

inline void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> known, const std::string& what) {
    if (!obj.is_object()) invalid(what + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) invalid(what + ": unknown key '" + key + "'");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Conditions

inline ExperimentConditions conditions_from_json(const Json& j, std::vector<std::string>* warnings = nullptr,
                                                 const std::string& what = "conditions") {
    detail::reject_unknown_keys(
        j, {"c0_ppb", "q_l_per_hr", "v_ml", "ct_min", "u0_cm_per_min", "z_cm", "d_cm", "m_kg", "resin_id"}, what);
    RawConditions r;
    r.inlet_concentration = {detail::json_double(j, "c0_ppb", what), "ppb"};
    r.flow_rate = {detail::json_double(j, "q_l_per_hr", what), "L/hr"};
    r.resin_volume = {detail::json_double(j, "v_ml", what), "mL"};
    auto optional_quantity = [&](const char* key, const char* unit) -> std::optional<Quantity> {
        if (auto v = detail::json_optional_double(j, key, what)) return Quantity{*v, unit};
        return std::nullopt;
    };
    r.contact_time = optional_quantity("ct_min", "min");
    r.linear_velocity = optional_quantity("u0_cm_per_min", "cm/min");
    r.bed_depth = optional_quantity("z_cm", "cm");
    r.column_diameter = optional_quantity("d_cm", "cm");
    r.resin_mass = optional_quantity("m_kg", "kg");
    r.resin_id = detail::json_string(j, "resin_id", what);
    return to_canonical(r, warnings);
}

inline ExperimentConditions load_conditions(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    return conditions_from_json(parse_json(read_file(path), path), warnings, path);
}

/// Conditions in the conditions-file schema (readable by conditions_from_json).
inline Json conditions_to_json(const ExperimentConditions& c) {
    Json j;
    j["c0_ppb"] = json_number(c.c0_ppb());
    j["q_l_per_hr"] = json_number(c.q_l_per_hr);
    j["v_ml"] = json_number(c.v_ml());
    j["ct_min"] = json_number(c.ct_min());
    if (c.u0_cm_per_min) j["u0_cm_per_min"] = json_number(*c.u0_cm_per_min);
    if (c.z_cm) j["z_cm"] = json_number(*c.z_cm);
    if (c.d_cm) j["d_cm"] = json_number(*c.d_cm);
    if (c.m_kg) j["m_kg"] = json_number(*c.m_kg);
    j["resin_id"] = c.resin_id;
    return j;
}

// ---------------------------------------------------------------------------
// Fits

/// A fit together with the run it describes.
struct StoredFit {
    FitResult fit;
    ExperimentConditions conditions;
    std::string label;
    std::string curve_file;  // empty when unknown
};

/// Copy of `fit` with parameters rounded the way they are persisted.
inline FitResult persisted(FitResult fit) {
    for (double& v : fit.params.values) v = round_significant(v);
    return fit;
}

inline Json fit_to_json(const StoredFit& s) {
    const auto& f = s.fit;
    const auto info = parameter_info(f.model());
    Json j;
    j["tool_version"] = tool_version;
    j["model"] = model_name(f.model());
    j["label"] = s.label;
    j["curve_file"] = s.curve_file;
    j["resin_id"] = s.conditions.resin_id;
    j["conditions"] = conditions_to_json(s.conditions);
    j["canonical"] = {{"c0_g_per_l", json_number(s.conditions.c0_g_per_l)},
                      {"ct_hr", json_number(s.conditions.ct_hr)},
                      {"v_l", json_number(s.conditions.v_l)}};
    Json params = Json::object(), pinned = Json::array(), active = Json::object();
    for (std::size_t i = 0; i < info.size(); ++i) {
        const std::string key(info[i].key);
        params[key] = json_number(f.params.values[i]);
        if (i < f.pinned.size() && f.pinned[i]) pinned.push_back(key);
        active[key] = i < f.active_bounds.size() && f.active_bounds[i];
    }
    j["params"] = params;
    j["pinned"] = pinned;
    j["statistics"] = {{"rsse", json_number(f.rsse)},
                       {"hfe_percent", json_number(f.hfe)},
                       {"hfe_parameter_count", f.hfe_parameter_count},
                       {"r_squared", json_number(f.r_squared)},
                       {"n_points_used", f.n_points_used},
                       {"excluded_points", f.excluded_points}};
    if (f.bounds) {
        Json b = Json::object();
        for (std::size_t i = 0; i < info.size(); ++i) {
            b[std::string(info[i].key)] = {json_number(f.bounds->lower[i]), json_number(f.bounds->upper[i])};
        }
        j["bounds"] = b;
    } else {
        j["bounds"] = nullptr;
    }
    j["active_bounds"] = active;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["evaluations"] = f.evaluations;
    return j;
}

inline StoredFit fit_from_json(const Json& j, const std::string& what = "fit") {
    if (!j.is_object()) invalid(what + ": expected a JSON object");
    StoredFit s;
    const auto model = parse_model(detail::json_string(j, "model", what));
    const auto info = parameter_info(model);
    s.label = j.value("label", "");
    s.curve_file = j.value("curve_file", "");
    if (!j.contains("conditions")) invalid(what + ": missing key 'conditions'");
    s.conditions = conditions_from_json(j.at("conditions"), nullptr, what + " conditions");
    if (!j.contains("params") || !j.at("params").is_object()) invalid(what + ": missing object 'params'");
    const auto& params = j.at("params");
    s.fit.params.model = model;
    for (const auto& p : info) s.fit.params.values.push_back(detail::json_double(params, std::string(p.key).c_str(), what));
    s.fit.pinned.assign(info.size(), false);
    s.fit.active_bounds.assign(info.size(), false);
    if (j.contains("pinned")) {
        for (const auto& k : j.at("pinned")) {
            for (std::size_t i = 0; i < info.size(); ++i) {
                if (k.is_string() && k.get<std::string>() == info[i].key) s.fit.pinned[i] = true;
            }
        }
    }
    if (j.contains("statistics")) {
        const auto& st = j.at("statistics");
        s.fit.rsse = detail::json_optional_double(st, "rsse", what).value_or(0.0);
        s.fit.hfe = detail::json_optional_double(st, "hfe_percent", what);
        s.fit.hfe_parameter_count = st.value("hfe_parameter_count", info.size());
        s.fit.r_squared = detail::json_optional_double(st, "r_squared", what);
        s.fit.n_points_used = st.value("n_points_used", std::size_t{0});
        s.fit.excluded_points = st.value("excluded_points", std::size_t{0});
    }
    if (j.contains("bounds") && j.at("bounds").is_object()) {
        Bounds b;
        for (const auto& p : info) {
            const auto& pair = j.at("bounds").at(std::string(p.key));
            b.lower.push_back(pair.at(0).get<double>());
            b.upper.push_back(pair.at(1).get<double>());
        }
        s.fit.bounds = b;
    }
    if (j.contains("active_bounds")) {
        for (std::size_t i = 0; i < info.size(); ++i) {
            s.fit.active_bounds[i] = j.at("active_bounds").value(std::string(info[i].key), false);
        }
    }
    s.fit.converged = j.value("converged", false);
    s.fit.iterations = j.value("iterations", std::size_t{0});
    s.fit.evaluations = j.value("evaluations", std::size_t{0});
    return s;
}

inline StoredFit load_fit(const std::string& path) { return fit_from_json(parse_json(read_file(path), path), path); }

// ---------------------------------------------------------------------------
// Correlation models

inline Json correlation_to_json(const CorrelationModel& m) {
    Json j;
    j["resin_id"] = m.resin_id;
    j["qm_fixed_g_per_l"] = json_number(m.q_m_fixed);
    j["a_per_min"] = json_number(m.a_per_min);
    j["b_per_ppb"] = json_number(m.b_per_ppb);
    j["c"] = json_number(m.c);
    Json sources = Json::array();
    for (const auto& s : m.sources) {
        Json e;
        e["ct_min"] = json_number(s.ct_min);
        e["c0_ppb"] = json_number(s.c0_ppb);
        e["kt_l_per_g_hr"] = json_number(s.k_t);
        sources.push_back(e);
    }
    j["sources"] = sources;
    return j;
}

inline CorrelationModel correlation_from_json(const Json& j, const std::string& what = "correlation") {
    detail::reject_unknown_keys(j, {"resin_id", "qm_fixed_g_per_l", "a_per_min", "b_per_ppb", "c", "sources"}, what);
    CorrelationModel m;
    m.resin_id = detail::json_string(j, "resin_id", what);
    m.q_m_fixed = detail::json_double(j, "qm_fixed_g_per_l", what);
    m.a_per_min = detail::json_double(j, "a_per_min", what);
    m.b_per_ppb = detail::json_double(j, "b_per_ppb", what);
    m.c = detail::json_double(j, "c", what);
    if (!(m.q_m_fixed > 0.0)) invalid(what + ": qm_fixed_g_per_l must be positive");
    if (j.contains("sources")) {
        for (const auto& e : j.at("sources")) {
            m.sources.push_back({detail::json_double(e, "ct_min", what), detail::json_double(e, "c0_ppb", what),
                                 detail::json_double(e, "kt_l_per_g_hr", what)});
        }
    }
    return m;
}

inline CorrelationModel load_correlation(const std::string& path) {
    return correlation_from_json(parse_json(read_file(path), path), path);
}

/// Writes `text` to `path`, failing loudly.
inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) invalid("cannot write " + path);
    out << text;
    if (!out) invalid("write failed for " + path);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace breakcurve
