// breakcurve: fit, compare and predict fixed-bed breakthrough curves.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "breakcurve/breakcurve.hpp"

namespace {

using namespace breakcurve;

/// Parses "key=value,key=value" (or repeated key=value options) into a parameter set.
ParameterSet parse_assignments(ModelKind model, const std::vector<std::string>& items) {
    std::map<std::string, double> given;
    for (const auto& item : items) {
        std::size_t start = 0;
        while (start <= item.size()) {
            const auto end = std::min(item.find(',', start), item.size());
            const auto part = item.substr(start, end - start);
            const auto eq = part.find('=');
            if (eq == std::string::npos) invalid("expected key=value, got '" + part + "'");
            try {
                given[part.substr(0, eq)] = std::stod(part.substr(eq + 1));
            } catch (const std::exception&) {
                invalid("cannot parse value in '" + part + "'");
            }
            start = end + 1;
        }
    }
    ParameterSet ps{model, {}};
    for (const auto& p : parameter_info(model)) {
        const auto it = given.find(std::string(p.key));
        if (it == given.end()) invalid("missing parameter " + std::string(p.key));
        ps.values.push_back(it->second);
        given.erase(it);
    }
    if (!given.empty()) invalid("unknown parameter " + given.begin()->first + " for model " + std::string(model_name(model)));
    return ps;
}

void report(const std::string& command, const std::string& out_dir, const std::string& name,
            std::vector<std::string> inputs, Json options, const CommandResult& r) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : r.outputs) std::cout << f << '\n';
    RunManifest m;
    m.command = command;
    m.inputs = std::move(inputs);
    m.options = std::move(options);
    m.outputs = r.outputs;
    std::cout << write_manifest(out_dir, name, m) << '\n';
}

template <class T>
Json opt_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-bed ion-exchange breakthrough modelling"};
    app.require_subcommand(1);

    // fit
    FitCommand fit_cmd;
    std::string fit_model = "thomas";
    std::vector<std::string> fit_init;
    auto* fit = app.add_subcommand("fit", "Fit one model to a breakthrough curve");
    fit->add_option("--curve", fit_cmd.curve_path, "Curve CSV (t_hr,ratio or t_hr,c_ppb)")->required();
    fit->add_option("--conditions", fit_cmd.conditions_path, "Conditions JSON")->required();
    fit->add_option("--model", fit_model, "thomas | yoon-nelson | clark | wolborska");
    fit->add_option("--bounds-pct", fit_cmd.bounds_pct, "Box of +-pct % around --init (or the unbounded optimum)");
    fit->add_option("--init", fit_init, "Initial parameters, key=value[,key=value]");
    fit->add_option("--pin-qm", fit_cmd.pin_qm, "Hold Thomas q_m at this value (g/L)");
    fit->add_option("--pin-n", fit_cmd.pin_n, "Hold Clark n at this value");
    fit->add_option("--hfe-p", fit_cmd.hfe_parameter_count, "Parameter count used in the HFE denominator");
    fit->add_option("--out", fit_cmd.out_dir, "Output directory");
    fit->add_option("--name", fit_cmd.name, "Output file stem");

    // compare
    CompareCommand compare_cmd;
    auto* compare = app.add_subcommand("compare", "Fit all four models and rank them");
    compare->add_option("--curve", compare_cmd.curve_path)->required();
    compare->add_option("--conditions", compare_cmd.conditions_path)->required();
    compare->add_option("--out", compare_cmd.out_dir);
    compare->add_option("--name", compare_cmd.name);

    // correlate
    CorrelateCommand correlate_cmd;
    bool line_ct = false, line_c0 = false;
    auto* correlate = app.add_subcommand("correlate", "Correlate K_T with contact time and inlet concentration");
    correlate->add_option("fits", correlate_cmd.fit_paths, "Thomas fit JSON files")->required();
    correlate->add_option("--curve", correlate_cmd.curve_paths, "Curves, one per fit, to refit K_T at fixed q_m");
    correlate->add_flag("--line-ct", line_ct, "Regress K_T on contact time only");
    correlate->add_flag("--line-c0", line_c0, "Regress K_T on inlet concentration only");
    correlate->add_option("--pin-qm", correlate_cmd.pin_qm, "Fixed q_m (default: mean of the fits)");
    correlate->add_option("--out", correlate_cmd.out_dir);
    correlate->add_option("--name", correlate_cmd.name);

    // predict
    PredictCommand predict_cmd;
    auto* predict = app.add_subcommand("predict", "Predict breakthrough at new conditions from a correlation");
    predict->add_option("--correlation", predict_cmd.correlation, "Correlation JSON, or A600E / A520E")->required();
    predict->add_option("--conditions", predict_cmd.conditions_path)->required();
    predict->add_option("--limit-ppb", predict_cmd.limit_ppb, "Regulatory leakage limit");
    predict->add_option("--curve", predict_cmd.measured_curve_path, "Measured curve to score the prediction against");
    predict->add_option("--hfe-p", predict_cmd.hfe_parameter_count);
    predict->add_option("--out", predict_cmd.out_dir);
    predict->add_option("--name", predict_cmd.name);

    // sensitivity
    SensitivityCommand sens_cmd;
    auto* sensitivity = app.add_subcommand("sensitivity", "Thomas parameter sensitivities and +-5% envelopes");
    sensitivity->add_option("--fit", sens_cmd.fit_path)->required();
    sensitivity->add_option("--conditions", sens_cmd.conditions_path)->required();
    sensitivity->add_option("--t-max", sens_cmd.t_max_hr, "Grid end in hours (default 3 x t50)");
    sensitivity->add_option("--points", sens_cmd.points, "Grid points")->check(CLI::Range(2, 1000000));
    sensitivity->add_option("--out", sens_cmd.out_dir);
    sensitivity->add_option("--name", sens_cmd.name);

    // report
    ReportCommand report_cmd;
    auto* reference = app.add_subcommand("report", "Write the bundled reference-data report");
    reference->add_option("--out", report_cmd.out_dir);

    // synth
    SynthCommand synth_cmd;
    std::string synth_model = "thomas";
    std::vector<std::string> synth_params;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic curve from model parameters");
    synth->add_option("--conditions", synth_cmd.conditions_path)->required();
    synth->add_option("--model", synth_model);
    synth->add_option("--param", synth_params, "key=value[,key=value]")->required();
    synth->add_option("--points", synth_cmd.points)->check(CLI::Range(3, 1000000));
    synth->add_option("--t-max", synth_cmd.t_max_hr);
    synth->add_option("--noise", synth_cmd.noise.relative_sd, "Relative Gaussian noise, e.g. 0.02");
    synth->add_option("--seed", synth_cmd.noise.seed);
    synth->add_option("--output", synth_cmd.out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorCode::invalid_input);
    }

    try {
        if (*fit) {
            fit_cmd.model = parse_model(fit_model);
            if (!fit_init.empty()) fit_cmd.init = parse_assignments(fit_cmd.model, fit_init);
            const auto r = cmd_fit(fit_cmd);
            const auto name = fit_cmd.name.empty() ? default_name(fit_cmd.curve_path) : fit_cmd.name;
            report("fit", fit_cmd.out_dir, name, {fit_cmd.curve_path, fit_cmd.conditions_path},
                   {{"model", fit_model},
                    {"bounds_pct", opt_json(fit_cmd.bounds_pct)},
                    {"init", fit_init},
                    {"pin_qm", opt_json(fit_cmd.pin_qm)},
                    {"pin_n", opt_json(fit_cmd.pin_n)},
                    {"hfe_p", opt_json(fit_cmd.hfe_parameter_count)}},
                   r);
        } else if (*compare) {
            const auto r = cmd_compare(compare_cmd);
            const auto name = compare_cmd.name.empty() ? default_name(compare_cmd.curve_path) : compare_cmd.name;
            report("compare", compare_cmd.out_dir, name, {compare_cmd.curve_path, compare_cmd.conditions_path},
                   Json::object(), r);
        } else if (*correlate) {
            if (line_ct && line_c0) invalid("--line-ct and --line-c0 are exclusive");
            correlate_cmd.mode = line_ct   ? CorrelationMode::line_ct
                                 : line_c0 ? CorrelationMode::line_c0
                                           : CorrelationMode::plane;
            const auto r = cmd_correlate(correlate_cmd);
            auto inputs = correlate_cmd.fit_paths;
            inputs.insert(inputs.end(), correlate_cmd.curve_paths.begin(), correlate_cmd.curve_paths.end());
            report("correlate", correlate_cmd.out_dir, correlate_cmd.name, inputs,
                   {{"line_ct", line_ct}, {"line_c0", line_c0}, {"pin_qm", opt_json(correlate_cmd.pin_qm)}}, r);
        } else if (*predict) {
            const auto r = cmd_predict(predict_cmd);
            const auto name = predict_cmd.name.empty() ? default_name(predict_cmd.conditions_path) : predict_cmd.name;
            std::vector<std::string> inputs{predict_cmd.correlation, predict_cmd.conditions_path};
            if (predict_cmd.measured_curve_path) inputs.push_back(*predict_cmd.measured_curve_path);
            report("predict", predict_cmd.out_dir, name, inputs,
                   {{"limit_ppb", predict_cmd.limit_ppb}, {"hfe_p", predict_cmd.hfe_parameter_count}}, r);
        } else if (*sensitivity) {
            const auto r = cmd_sensitivity(sens_cmd);
            const auto name = sens_cmd.name.empty() ? default_name(sens_cmd.fit_path) : sens_cmd.name;
            report("sensitivity", sens_cmd.out_dir, name, {sens_cmd.fit_path, sens_cmd.conditions_path},
                   {{"t_max_hr", opt_json(sens_cmd.t_max_hr)}, {"points", sens_cmd.points}}, r);
        } else if (*reference) {
            const auto r = cmd_report(report_cmd);
            report("report", report_cmd.out_dir, report_cmd.name, {}, Json::object(), r);
        } else if (*synth) {
            synth_cmd.params = parse_assignments(parse_model(synth_model), synth_params);
            const auto r = cmd_synth(synth_cmd);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            for (const auto& f : r.outputs) std::cout << f << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
