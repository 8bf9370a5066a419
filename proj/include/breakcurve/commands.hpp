#pragma once

// The analyst workflow behind the `breakcurve` CLI. Each command reads its
// inputs, writes its outputs into an output directory and returns the list
// of files written; the CLI then records a run manifest with write_manifest().

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "breakcurve/correlation.hpp"
#include "breakcurve/curve.hpp"
#include "breakcurve/error.hpp"
#include "breakcurve/estimation.hpp"
#include "breakcurve/io.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/reference_data.hpp"
#include "breakcurve/sensitivity.hpp"
#include "breakcurve/synthetic.hpp"

#ifndef BREAKCURVE_DEFAULT_DATA_DIR
#define BREAKCURVE_DEFAULT_DATA_DIR "data"
#endif

namespace breakcurve {

namespace fs = std::filesystem;

inline constexpr std::size_t model_curve_points = 200;
inline constexpr double model_curve_span = 1.2;  // x max data time
inline constexpr double band_fraction = 0.05;
inline constexpr double default_limit_ppb = 10.0;

/// Bundled reference-data directory; BREAKCURVE_DATA overrides it.
inline fs::path data_dir() {
    if (const char* env = std::getenv("BREAKCURVE_DATA"); env && *env) return env;
    return BREAKCURVE_DEFAULT_DATA_DIR;
}

struct CommandResult {
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Shared pieces

inline BreakthroughCurve load_curve(const std::string& path, const ExperimentConditions& conditions) {
    std::ifstream in(path);
    if (!in) invalid("cannot open " + path);
    try {
        return ingest_curve(in, conditions, fs::path(path).stem().string());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

inline std::string default_name(const std::string& path) {
    auto stem = fs::path(path).filename().string();
    for (const char* suffix : {".fit.json", ".json", ".csv"}) {
        const std::string s(suffix);
        if (stem.size() > s.size() && stem.compare(stem.size() - s.size(), s.size(), s) == 0) {
            return stem.substr(0, stem.size() - s.size());
        }
    }
    return stem;
}

inline std::string output_path(const std::string& out_dir, const std::string& file) {
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / file).string();
}

struct Band {
    std::vector<double> nominal;
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Pointwise min/max over the curves obtained by moving each parameter by
/// +-fraction in turn (nominal curve included).
inline Band parameter_band(const ParameterSet& params, const ExperimentConditions& c, std::span<const double> times,
                           double fraction = band_fraction) {
    Band b;
    b.nominal = evaluate(params, c, times);
    b.lower = b.nominal;
    b.upper = b.nominal;
    const auto info = parameter_info(params.model);
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
            ParameterSet moved = params;
            moved.values[i] *= 1.0 + sign * fraction;
            if (info[i].domain == Domain::above_one && !(moved.values[i] > 1.0)) continue;
            const auto y = evaluate(moved, c, times);
            for (std::size_t k = 0; k < times.size(); ++k) {
                b.lower[k] = std::min(b.lower[k], y[k]);
                b.upper[k] = std::max(b.upper[k], y[k]);
            }
        }
    }
    return b;
}

/// "kind,t_hr,ratio" CSV: the model sampled on 200 points over [0, 1.2 * max data
/// time], followed by the data rows. Model values are written exactly.
inline std::string model_curve_csv(const ParameterSet& params, const BreakthroughCurve& curve) {
    std::ostringstream out;
    out << "kind,t_hr,ratio\n";
    const auto times = linspace(0.0, model_curve_span * curve.max_time(), model_curve_points);
    for (double t : times) out << "model," << exact_number(t) << ',' << exact_number(evaluate(params, curve.conditions(), t)) << '\n';
    for (const auto& p : curve.points()) out << "data," << exact_number(p.t_hr) << ',' << exact_number(p.ratio) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// fit

struct FitCommand {
    std::string curve_path;
    std::string conditions_path;
    ModelKind model = ModelKind::thomas;
    std::optional<double> bounds_pct;  // box of +-pct % around init (or the unbounded optimum)
    std::optional<ParameterSet> init;
    std::optional<double> pin_qm;
    std::optional<double> pin_n;
    std::optional<std::size_t> hfe_parameter_count;
    std::string out_dir = ".";
    std::string name;  // defaults to the curve file stem
};

inline ModelSpec model_spec(ModelKind model, std::optional<double> pin_qm, std::optional<double> pin_n,
                            std::optional<std::size_t> hfe_parameter_count) {
    ModelSpec spec = ModelSpec::of(model);
    spec.hfe_parameter_count = hfe_parameter_count;
    if (pin_qm) {
        if (model != ModelKind::thomas) fail(ErrorCode::model_mismatch, "--pin-qm applies to the Thomas model only");
        spec.pinned = {std::nullopt, *pin_qm};
    }
    if (pin_n) {
        if (model != ModelKind::clark) fail(ErrorCode::model_mismatch, "--pin-n applies to the Clark model only");
        spec.pinned = {std::nullopt, std::nullopt, *pin_n};
    }
    return spec;
}

inline FitResult fit_with_box(const BreakthroughCurve& curve, const ModelSpec& spec,
                              const std::optional<ParameterSet>& init, std::optional<double> bounds_pct) {
    if (!bounds_pct) return fit(curve, spec, init);
    ParameterSet center = init ? *init : fit(curve, spec).params;
    for (std::size_t i = 0; i < center.values.size(); ++i) {
        if (spec.is_pinned(i)) center.values[i] = *spec.pinned[i];
    }
    return fit(curve, spec, init, box_around(center, *bounds_pct / 100.0));
}

inline CommandResult cmd_fit(const FitCommand& cmd) {
    CommandResult result;
    const auto conditions = load_conditions(cmd.conditions_path, &result.warnings);
    const auto curve = load_curve(cmd.curve_path, conditions);
    const auto spec = model_spec(cmd.model, cmd.pin_qm, cmd.pin_n, cmd.hfe_parameter_count);
    const auto fitted = persisted(fit_with_box(curve, spec, cmd.init, cmd.bounds_pct));
    if (!fitted.converged) result.warnings.push_back("optimizer did not converge; best parameters reported");

    const std::string name = cmd.name.empty() ? default_name(cmd.curve_path) : cmd.name;
    const auto fit_path = output_path(cmd.out_dir, name + ".fit.json");
    write_file(fit_path, dump(fit_to_json({fitted, conditions, curve.label(), cmd.curve_path})));
    const auto csv_path = output_path(cmd.out_dir, name + ".curve.csv");
    write_file(csv_path, model_curve_csv(fitted.params, curve));
    result.outputs = {fit_path, csv_path};
    return result;
}

// ---------------------------------------------------------------------------
// compare

struct ModelOutcome {
    ModelKind model;
    std::optional<FitResult> fit;
    std::string error;
};

struct ComparisonReport {
    std::vector<ModelOutcome> outcomes;  // declared order
    std::optional<ModelKind> best_model;
    std::string wolborska_note;
};

namespace detail {

inline bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 + 1e-9 * std::max(std::abs(a), std::abs(b));
}

/// Lowest RSSE wins; near-equal RSSE falls back to HFE, then to declared order.
inline bool ranks_before(const FitResult& a, const FitResult& b) {
    if (!nearly_equal(a.rsse, b.rsse)) return a.rsse < b.rsse;
    const double ha = a.hfe.value_or(std::numeric_limits<double>::infinity());
    const double hb = b.hfe.value_or(std::numeric_limits<double>::infinity());
    if (!nearly_equal(ha, hb)) return ha < hb;
    return false;
}

}  // namespace detail

/// Fits all four models (concurrently) and ranks them.
inline ComparisonReport compare_models(const BreakthroughCurve& curve) {
    std::vector<std::future<ModelOutcome>> jobs;
    for (auto kind : all_models) {
        jobs.push_back(std::async(std::launch::async, [&curve, kind] {
            ModelOutcome o{kind, std::nullopt, {}};
            try {
                o.fit = fit(curve, ModelSpec::of(kind));
            } catch (const Error& e) {
                o.error = e.what();
            }
            return o;
        }));
    }
    ComparisonReport report;
    for (auto& j : jobs) report.outcomes.push_back(j.get());

    const FitResult* best = nullptr;
    for (const auto& o : report.outcomes) {
        if (!o.fit || !o.fit->converged) continue;
        if (!best || detail::ranks_before(*o.fit, *best)) {
            best = &*o.fit;
            report.best_model = o.model;
        }
    }
    if (!best) {
        // Nothing converged; fall back to any finished fit.
        for (const auto& o : report.outcomes) {
            if (o.fit && (!best || detail::ranks_before(*o.fit, *best))) {
                best = &*o.fit;
                report.best_model = o.model;
            }
        }
    }

    const auto ratios = curve.ratios();
    const double max_ratio = *std::max_element(ratios.begin(), ratios.end());
    const auto& wolborska = report.outcomes[3];
    if (!wolborska.fit) {
        report.wolborska_note = "not fitted: " + wolborska.error;
    } else if (max_ratio <= 0.5) {
        report.wolborska_note = "low-concentration regime: data stay below C/C0 = 0.5, where Wolborska applies";
    } else {
        const auto p = from_parameter_set<WolborskaParams>(wolborska.fit->params);
        const double ceiling_t =
            bed_transit_hr(curve.conditions()) * p.n0 / curve.conditions().c0_g_per_l;  // exponent reaches 0
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "Wolborska describes the low-ratio region only; its curve reaches the ceiling C/C0 = 1 at "
                      "t = %.4g hr",
                      ceiling_t);
        report.wolborska_note = buf;
    }
    return report;
}

struct CompareCommand {
    std::string curve_path;
    std::string conditions_path;
    std::string out_dir = ".";
    std::string name;
};

inline CommandResult cmd_compare(const CompareCommand& cmd) {
    CommandResult result;
    const auto conditions = load_conditions(cmd.conditions_path, &result.warnings);
    const auto curve = load_curve(cmd.curve_path, conditions);
    auto report = compare_models(curve);

    Json models = Json::array();
    for (auto& o : report.outcomes) {
        Json m;
        m["model"] = model_name(o.model);
        if (o.fit) {
            o.fit = persisted(*o.fit);
            const auto full = fit_to_json({*o.fit, conditions, curve.label(), cmd.curve_path});
            m["params"] = full["params"];
            m["statistics"] = full["statistics"];
            m["converged"] = o.fit->converged;
            m["error"] = nullptr;
        } else {
            m["params"] = nullptr;
            m["statistics"] = nullptr;
            m["converged"] = false;
            m["error"] = o.error;
        }
        models.push_back(m);
    }
    std::vector<const ModelOutcome*> ranked;
    for (const auto& o : report.outcomes) {
        if (o.fit) ranked.push_back(&o);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const ModelOutcome* a, const ModelOutcome* b) { return detail::ranks_before(*a->fit, *b->fit); });
    Json ranking = Json::array();
    for (const auto* o : ranked) ranking.push_back(model_name(o->model));

    const std::string name = cmd.name.empty() ? default_name(cmd.curve_path) : cmd.name;
    Json j;
    j["tool_version"] = tool_version;
    j["label"] = curve.label();
    j["conditions"] = conditions_to_json(conditions);
    j["models"] = models;
    j["ranking"] = ranking;
    j["best_model"] = report.best_model ? Json(model_name(*report.best_model)) : Json(nullptr);
    j["wolborska_note"] = report.wolborska_note;
    j["band"] = {{"description",
                  "pointwise min/max over the best model's curves with each parameter moved by +-5% in turn"},
                 {"file", name + ".band.csv"}};
    result.outputs.push_back(output_path(cmd.out_dir, name + ".compare.json"));

    if (report.best_model) {
        const auto& best = *report.outcomes[static_cast<std::size_t>(*report.best_model)].fit;
        const auto times = linspace(0.0, model_curve_span * curve.max_time(), model_curve_points);
        const auto band = parameter_band(best.params, conditions, times);
        std::ostringstream csv;
        csv << "# band: pointwise min/max over the " << model_name(*report.best_model)
            << " fit with each parameter moved by +-5% in turn\n";
        csv << "t_hr,ratio,band_lower,band_upper\n";
        for (std::size_t k = 0; k < times.size(); ++k) {
            csv << exact_number(times[k]) << ',' << exact_number(band.nominal[k]) << ','
                << exact_number(band.lower[k]) << ',' << exact_number(band.upper[k]) << '\n';
        }
        const auto band_path = output_path(cmd.out_dir, name + ".band.csv");
        write_file(band_path, csv.str());
        result.outputs.push_back(band_path);
    } else {
        j["band"] = nullptr;
        result.warnings.push_back("no model could be fitted");
    }
    write_file(result.outputs.front(), dump(j));
    return result;
}

// ---------------------------------------------------------------------------
// correlate

enum class CorrelationMode { plane, line_ct, line_c0 };

struct CorrelateCommand {
    std::vector<std::string> fit_paths;
    std::vector<std::string> curve_paths;  // optional; refit K_T with q_m fixed when given
    CorrelationMode mode = CorrelationMode::plane;
    std::optional<double> pin_qm;  // overrides the average
    std::string out_dir = ".";
    std::string name = "correlation";
};

/// Builds a correlation model from stored Thomas fits.
inline CorrelationModel correlate_fits(const std::vector<StoredFit>& fits, CorrelationMode mode,
                                       std::optional<double> pin_qm,
                                       const std::vector<std::optional<BreakthroughCurve>>& curves = {}) {
    const std::size_t needed = mode == CorrelationMode::plane ? 3 : 2;
    for (const auto& f : fits) {
        if (f.fit.model() != ModelKind::thomas) fail(ErrorCode::model_mismatch, "correlation needs Thomas fits");
        if (f.conditions.resin_id != fits.front().conditions.resin_id) {
            fail(ErrorCode::model_mismatch, "fits mix resins '" + fits.front().conditions.resin_id + "' and '" +
                                                f.conditions.resin_id + "'");
        }
    }
    if (fits.size() < needed) {
        fail(ErrorCode::degenerate_design, "need at least " + std::to_string(needed) + " fits, got " +
                                               std::to_string(fits.size()));
    }

    CorrelationModel m;
    m.resin_id = fits.front().conditions.resin_id;
    if (pin_qm) {
        if (!(*pin_qm > 0.0)) invalid("--pin-qm must be positive");
        m.q_m_fixed = *pin_qm;
    } else {
        std::vector<FitResult> results;
        for (const auto& f : fits) results.push_back(f.fit);
        m.q_m_fixed = average_qm(results);
    }
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        double k_t = from_parameter_set<ThomasParams>(f.fit.params).k_t;
        if (i < curves.size() && curves[i]) k_t = fit_fixed_qm(*curves[i], m.q_m_fixed).params.values[0];
        m.sources.push_back({round_significant(f.conditions.ct_min()), round_significant(f.conditions.c0_ppb()),
                             round_significant(k_t)});
    }
    PlaneCoefficients coef;
    switch (mode) {
        case CorrelationMode::plane: coef = fit_plane(m.sources); break;
        case CorrelationMode::line_ct: coef = fit_line(m.sources, LineAxis::contact_time); break;
        case CorrelationMode::line_c0: coef = fit_line(m.sources, LineAxis::inlet_concentration); break;
    }
    m.a_per_min = coef.a_per_min;
    m.b_per_ppb = coef.b_per_ppb;
    m.c = coef.c;
    return m;
}

inline CommandResult cmd_correlate(const CorrelateCommand& cmd) {
    CommandResult result;
    if (!cmd.curve_paths.empty() && cmd.curve_paths.size() != cmd.fit_paths.size()) {
        invalid("give one curve per fit, in the same order");
    }
    std::vector<StoredFit> fits;
    std::vector<std::optional<BreakthroughCurve>> curves;
    for (std::size_t i = 0; i < cmd.fit_paths.size(); ++i) {
        fits.push_back(load_fit(cmd.fit_paths[i]));
        if (!cmd.curve_paths.empty()) curves.emplace_back(load_curve(cmd.curve_paths[i], fits.back().conditions));
    }
    const auto model = correlate_fits(fits, cmd.mode, cmd.pin_qm, curves);
    if (cmd.curve_paths.empty()) {
        for (const auto& f : fits) {
            if (f.fit.pinned.size() < 2 || !f.fit.pinned[1]) {
                result.warnings.push_back(f.label + ": K_T taken from a fit with free q_m; pass the curves to refit "
                                                    "it at the fixed q_m");
            }
        }
    }
    const auto path = output_path(cmd.out_dir, cmd.name + ".correlation.json");
    write_file(path, dump(correlation_to_json(model)));
    result.outputs.push_back(path);
    return result;
}

// ---------------------------------------------------------------------------
// predict

struct PredictCommand {
    std::string correlation;  // file path, or the id of a bundled model (A600E, A520E)
    std::string conditions_path;
    double limit_ppb = default_limit_ppb;
    std::optional<std::string> measured_curve_path;
    std::size_t hfe_parameter_count = 2;
    std::string out_dir = ".";
    std::string name;  // defaults to the conditions file stem
};

/// Loads a correlation file, or a bundled model by resin id.
inline CorrelationModel resolve_correlation(const std::string& ref) {
    if (fs::exists(ref)) return load_correlation(ref);
    const auto bundled_file = data_dir() / "correlations" / (ref + ".json");
    if (fs::exists(bundled_file)) return load_correlation(bundled_file.string());
    if (auto m = reference::bundled_correlation(ref)) return *m;
    invalid("no correlation file or bundled model named '" + ref + "'");
}

struct Prediction {
    ThomasParams params;
    double t50_hr = 0.0;
    BreakthroughTime t10;
    double limit_ratio = 0.0;
    BreakthroughTime t_limit;
    std::optional<bool> within_hull;
};

inline Prediction predict(const CorrelationModel& m, const ExperimentConditions& c, double limit_ppb,
                          std::vector<std::string>* warnings = nullptr) {
    Prediction p;
    p.limit_ratio = breakthrough_ratio(limit_ppb, c.c0_ppb());
    p.params = predicted_params(m, c, warnings);
    p.t50_hr = thomas_t50(p.params, c);
    p.t10 = breakthrough_time(p.params, c, 0.1);
    p.t_limit = breakthrough_time(p.params, c, p.limit_ratio);
    p.within_hull = within_source_hull(m, c.ct_min(), c.c0_ppb());
    return p;
}

inline CommandResult cmd_predict(const PredictCommand& cmd) {
    CommandResult result;
    const auto model = resolve_correlation(cmd.correlation);
    const auto conditions = load_conditions(cmd.conditions_path, &result.warnings);
    const auto p = predict(model, conditions, cmd.limit_ppb, &result.warnings);
    const ParameterSet params = to_parameter_set(p.params);

    Json j;
    j["tool_version"] = tool_version;
    j["resin_id"] = model.resin_id;
    j["correlation"] = correlation_to_json(model);
    j["conditions"] = conditions_to_json(conditions);
    j["kt_l_per_g_hr"] = json_number(p.params.k_t);
    j["qm_g_per_l"] = json_number(p.params.q_m);
    j["t50_hr"] = json_number(p.t50_hr);
    j["t10_hr"] = json_number(p.t10.t_hr);
    j["limit"] = {{"limit_ppb", json_number(cmd.limit_ppb)},
                  {"target_ratio", json_number(p.limit_ratio)},
                  {"t_hr", json_number(p.t_limit.t_hr)},
                  {"before_start", p.t_limit.before_start}};
    j["within_source_hull"] = p.within_hull ? Json(*p.within_hull) : Json(nullptr);

    std::vector<double> times;
    std::optional<BreakthroughCurve> measured;
    if (cmd.measured_curve_path) {
        measured.emplace(load_curve(*cmd.measured_curve_path, conditions));
        const auto calc = evaluate(params, conditions, measured->times());
        const auto exp = measured->ratios();
        const auto h = hfe(calc, exp, cmd.hfe_parameter_count);
        j["measured"] = {{"file", *cmd.measured_curve_path},
                         {"hfe_percent", json_number(h.value)},
                         {"rsse", json_number(rsse(calc, exp).value)},
                         {"n_points_used", h.used},
                         {"excluded_points", h.excluded}};
    } else {
        j["measured"] = nullptr;
    }
    j["warnings"] = result.warnings;

    const std::string name = cmd.name.empty() ? default_name(cmd.conditions_path) : cmd.name;
    const auto json_path = output_path(cmd.out_dir, name + ".prediction.json");
    write_file(json_path, dump(j));

    std::ostringstream csv;
    csv << "kind,t_hr,ratio\n";
    const double t_end = measured ? model_curve_span * measured->max_time() : 3.0 * p.t50_hr;
    for (double t : linspace(0.0, t_end, model_curve_points)) {
        csv << "model," << exact_number(t) << ',' << exact_number(thomas_forward(p.params, conditions, t)) << '\n';
    }
    if (measured) {
        for (const auto& pt : measured->points()) csv << "data," << exact_number(pt.t_hr) << ',' << exact_number(pt.ratio) << '\n';
    }
    const auto csv_path = output_path(cmd.out_dir, name + ".curve.csv");
    write_file(csv_path, csv.str());
    result.outputs = {json_path, csv_path};
    return result;
}

// ---------------------------------------------------------------------------
// sensitivity

struct SensitivityCommand {
    std::string fit_path;
    std::string conditions_path;
    std::optional<double> t_max_hr;  // defaults to 3 * t50
    std::size_t points = model_curve_points;
    std::string out_dir = ".";
    std::string name;
};

inline CommandResult cmd_sensitivity(const SensitivityCommand& cmd) {
    CommandResult result;
    const auto stored = load_fit(cmd.fit_path);
    if (stored.fit.model() != ModelKind::thomas) {
        fail(ErrorCode::model_mismatch, "sensitivity analysis needs a Thomas fit");
    }
    const auto conditions = load_conditions(cmd.conditions_path, &result.warnings);
    const auto p = from_parameter_set<ThomasParams>(stored.fit.params);
    const double t_max = cmd.t_max_hr.value_or(3.0 * thomas_t50(p, conditions));
    if (!(t_max > 0.0)) invalid("--t-max must be positive");
    const auto times = linspace(0.0, t_max, cmd.points);
    const auto profile = sensitivity_profile(p, conditions, times);

    auto curve_with = [&](double k_scale, double q_scale) {
        const ThomasParams moved{p.k_t * k_scale, p.q_m * q_scale};
        std::vector<double> y;
        for (double t : times) y.push_back(thomas_forward(moved, conditions, t));
        return y;
    };
    const auto nominal = curve_with(1.0, 1.0);
    const auto kt_lo = curve_with(1.0 - band_fraction, 1.0), kt_hi = curve_with(1.0 + band_fraction, 1.0);
    const auto qm_lo = curve_with(1.0, 1.0 - band_fraction), qm_hi = curve_with(1.0, 1.0 + band_fraction);

    std::ostringstream csv;
    csv << "# thomas kt_l_per_g_hr=" << exact_number(p.k_t) << " qm_g_per_l=" << exact_number(p.q_m) << '\n';
    csv << "# fd_check=" << exact_number(round_significant(profile.fd_check, 3)) << '\n';
    csv << "t_hr,ratio,dy_dkt_g_hr_per_l,dy_dqm_l_per_g,ratio_kt_minus5,ratio_kt_plus5,ratio_qm_minus5,"
           "ratio_qm_plus5,envelope_lower,envelope_upper\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double lo = std::min({nominal[k], kt_lo[k], kt_hi[k], qm_lo[k], qm_hi[k]});
        const double hi = std::max({nominal[k], kt_lo[k], kt_hi[k], qm_lo[k], qm_hi[k]});
        csv << exact_number(times[k]) << ',' << exact_number(nominal[k]) << ',' << exact_number(profile.dy_dkt[k])
            << ',' << exact_number(profile.dy_dqm[k]) << ',' << exact_number(kt_lo[k]) << ','
            << exact_number(kt_hi[k]) << ',' << exact_number(qm_lo[k]) << ',' << exact_number(qm_hi[k]) << ','
            << exact_number(lo) << ',' << exact_number(hi) << '\n';
    }
    const std::string name = cmd.name.empty() ? default_name(cmd.fit_path) : cmd.name;
    const auto path = output_path(cmd.out_dir, name + ".sensitivity.csv");
    write_file(path, csv.str());
    result.outputs.push_back(path);
    return result;
}

// ---------------------------------------------------------------------------
// report: bundled reference data and the published-vs-refit correlation

struct ReportCommand {
    std::string out_dir = ".";
    std::string name = "reference";
};

inline Json reference_report() {
    Json experiments = Json::array();
    for (const auto& row : reference::experiments) {
        std::vector<std::string> warnings;
        const auto c = to_canonical(reference::raw_conditions(row), &warnings);
        Json e;
        e["experiment"] = row.number;
        e["resin_id"] = row.resin;
        e["declared_ct_min"] = json_number(row.ct_min);
        e["v_over_q_min"] = json_number(units::hr_to_min(c.v_l / c.q_l_per_hr));
        e["conditions"] = conditions_to_json(c);
        e["warnings"] = warnings;
        experiments.push_back(e);
    }

    Json thomas = Json::array();
    std::vector<FitResult> fits_1345;
    for (int n = 1; n <= 5; ++n) {
        const auto p = reference::thomas_fit(n);
        thomas.push_back({{"experiment", n},
                          {"kt_l_per_g_hr", json_number(p.k_t)},
                          {"qm_g_per_l", json_number(p.q_m)},
                          {"fixed_qm_kt_l_per_g_hr", json_number(reference::fixed_qm_kt[static_cast<std::size_t>(n - 1)])}});
        if (n != 2) {
            FitResult f;
            f.params = to_parameter_set(p);
            fits_1345.push_back(f);
        }
    }

    const auto published = reference::a600e_correlation();
    const auto refit = fit_plane(published.sources);
    CorrelationModel ols = published;
    ols.a_per_min = refit.a_per_min;
    ols.b_per_ppb = refit.b_per_ppb;
    ols.c = refit.c;
    Json divergence = Json::array();
    for (const auto& s : published.sources) {
        divergence.push_back({{"ct_min", json_number(s.ct_min)},
                              {"c0_ppb", json_number(s.c0_ppb)},
                              {"kt_fixed_qm", json_number(s.k_t)},
                              {"kt_published_plane", json_number(predict_kt(published, s.ct_min, s.c0_ppb))},
                              {"kt_ols_plane", json_number(predict_kt(ols, s.ct_min, s.c0_ppb))}});
    }

    Json j;
    j["tool_version"] = tool_version;
    j["experiments"] = experiments;
    j["thomas_fits"] = thomas;
    j["mean_qm_experiments_1_3_4_5"] = json_number(average_qm(fits_1345));
    j["a600e_published"] = correlation_to_json(published);
    j["a600e_ols_refit"] = correlation_to_json(ols);
    j["a600e_plane_divergence"] = divergence;
    j["a600e_plane_note"] =
        "the published plane does not reproduce the fixed-q_m K_T values it was derived from; the OLS refit "
        "through the same four points is given for comparison";
    j["a520e_published"] = correlation_to_json(reference::a520e_correlation());
    return j;
}

inline CommandResult cmd_report(const ReportCommand& cmd) {
    CommandResult result;
    const auto path = output_path(cmd.out_dir, cmd.name + ".report.json");
    write_file(path, dump(reference_report()));
    result.outputs.push_back(path);
    return result;
}

// ---------------------------------------------------------------------------
// synth: synthetic curves for testing and demonstrations

struct SynthCommand {
    std::string conditions_path;
    ParameterSet params;
    std::size_t points = 30;
    std::optional<double> t_max_hr;  // defaults to 2 * t50 for Thomas/Yoon-Nelson, else required
    NoiseSpec noise{};
    std::string out_path;
};

inline CommandResult cmd_synth(const SynthCommand& cmd) {
    CommandResult result;
    const auto conditions = load_conditions(cmd.conditions_path, &result.warnings);
    double t_max = 0.0;
    if (cmd.t_max_hr) {
        t_max = *cmd.t_max_hr;
    } else if (cmd.params.model == ModelKind::thomas) {
        t_max = 2.0 * thomas_t50(from_parameter_set<ThomasParams>(cmd.params), conditions);
    } else if (cmd.params.model == ModelKind::yoon_nelson) {
        t_max = 2.0 * from_parameter_set<YoonNelsonParams>(cmd.params).tau_hr;
    } else {
        invalid("--t-max is required for this model");
    }
    const auto curve = synthesize_curve(cmd.params, conditions, linspace(0.0, t_max, cmd.points), cmd.noise);
    std::ostringstream csv;
    csv << "# synthetic " << model_name(cmd.params.model);
    const auto info = parameter_info(cmd.params.model);
    for (std::size_t i = 0; i < info.size(); ++i) csv << ' ' << info[i].key << '=' << exact_number(cmd.params.values[i]);
    if (cmd.noise.relative_sd > 0.0) {
        csv << " noise=" << exact_number(cmd.noise.relative_sd) << " seed=" << cmd.noise.seed;
    }
    csv << "\nt_hr,ratio\n";
    for (const auto& p : curve.points()) csv << exact_number(p.t_hr) << ',' << exact_number(p.ratio) << '\n';
    if (auto parent = fs::path(cmd.out_path).parent_path(); !parent.empty()) fs::create_directories(parent);
    write_file(cmd.out_path, csv.str());
    result.outputs.push_back(cmd.out_path);
    return result;
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    Json options = Json::object();
    std::vector<std::string> outputs;
    std::string timestamp;
    std::string tool_version{breakcurve::tool_version};
};

/// UTC time as ISO 8601; SOURCE_DATE_EPOCH pins it for reproducible runs.
inline std::string manifest_timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) now = std::strtoll(epoch, nullptr, 10);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Checks the outputs and writes `<out_dir>/<name>.<command>.manifest.json` as the final step.
inline std::string write_manifest(const std::string& out_dir, const std::string& name, RunManifest manifest) {
    for (const auto& f : manifest.outputs) {
        if (!fs::exists(f) || fs::file_size(f) == 0) invalid("output " + f + " missing or empty");
    }
    if (manifest.timestamp.empty()) manifest.timestamp = manifest_timestamp();
    Json j;
    j["command"] = manifest.command;
    j["inputs"] = manifest.inputs;
    j["options"] = manifest.options;
    j["outputs"] = manifest.outputs;
    j["timestamp"] = manifest.timestamp;
    j["tool_version"] = manifest.tool_version;
    const auto path = output_path(out_dir, name + "." + manifest.command + ".manifest.json");
    const auto tmp = path + ".tmp";
    write_file(tmp, dump(j));
    fs::rename(tmp, path);
    return path;
}

}  // namespace breakcurve
