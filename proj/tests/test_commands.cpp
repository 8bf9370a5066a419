#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace breakcurve;
using test_support::TempDir;

namespace {

struct Workspace {
    TempDir dir;
    std::string conditions(int n) {
        const auto path = dir.file("exp" + std::to_string(n) + ".json");
        test_support::write_conditions(path, reference::conditions(n));
        return path;
    }
    std::string curve(int n, NoiseSpec noise = {}) {
        const auto path = dir.file("exp" + std::to_string(n) + ".csv");
        test_support::write_curve(path, test_support::thomas_curve(reference::thomas_fit(n), reference::conditions(n), 30, noise));
        return path;
    }
    std::string out() const { return dir.file("out"); }
};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode{};
}

}  // namespace

TEST(Commands, FitWritesJsonAndCurve) {
    Workspace w;
    FitCommand cmd;
    cmd.curve_path = w.curve(1);
    cmd.conditions_path = w.conditions(1);
    cmd.out_dir = w.out();
    const auto r = cmd_fit(cmd);
    ASSERT_EQ(r.outputs.size(), 2u);
    const auto stored = load_fit(r.outputs[0]);
    EXPECT_NEAR(stored.fit.params.values[0], 502, 502e-6);
    const auto csv = test_support::read_text(r.outputs[1]);
    EXPECT_EQ(csv.rfind("kind,t_hr,ratio\n", 0), 0u);
    EXPECT_NE(csv.find("\ndata,"), std::string::npos);
}

TEST(Commands, FitOptionsMapToSpec) {
    EXPECT_EQ(code_of([] { model_spec(ModelKind::clark, 0.25, std::nullopt, std::nullopt); }),
              ErrorCode::model_mismatch);
    EXPECT_EQ(code_of([] { model_spec(ModelKind::thomas, std::nullopt, 2.0, std::nullopt); }),
              ErrorCode::model_mismatch);
    const auto s = model_spec(ModelKind::clark, std::nullopt, 2.0, std::nullopt);
    EXPECT_TRUE(s.is_pinned(2));
    const auto t = model_spec(ModelKind::thomas, 0.254, std::nullopt, std::nullopt);
    EXPECT_EQ(*t.pinned[1], 0.254);
}

TEST(Commands, BoundsPercentWithoutInitCentresOnOptimum) {
    Workspace w;
    FitCommand cmd;
    cmd.curve_path = w.curve(3);
    cmd.conditions_path = w.conditions(3);
    cmd.out_dir = w.out();
    cmd.bounds_pct = 30;
    const auto stored = load_fit(cmd_fit(cmd).outputs[0]);
    ASSERT_TRUE(stored.fit.bounds);
    EXPECT_NEAR(stored.fit.bounds->lower[0], 0.7 * 1264, 1e-3);
    EXPECT_FALSE(stored.fit.active_bounds[0]);
}

TEST(Commands, CompareRanksModels) {
    Workspace w;
    const auto c = reference::conditions(4);
    const auto curve = test_support::thomas_curve(reference::thomas_fit(4), c, 30, {0.02, 4});
    const auto report = compare_models(curve);
    ASSERT_EQ(report.outcomes.size(), 4u);
    ASSERT_TRUE(report.best_model);
    EXPECT_NE(*report.best_model, ModelKind::wolborska);
    EXPECT_FALSE(report.wolborska_note.empty());

    CompareCommand cmd{w.curve(4), w.conditions(4), w.out(), ""};
    const auto r = cmd_compare(cmd);
    const auto j = parse_json(test_support::read_text(r.outputs[0]), "compare");
    EXPECT_EQ(j["ranking"].size(), 4u);
    EXPECT_EQ(j["ranking"][0], j["best_model"]);
}

TEST(Commands, RankingTieBreaks) {
    FitResult a, b;
    a.rsse = b.rsse = 0.5;
    a.hfe = 1.0;
    b.hfe = 2.0;
    EXPECT_TRUE(detail::ranks_before(a, b));
    EXPECT_FALSE(detail::ranks_before(b, a));
    b.hfe = 1.0;
    EXPECT_FALSE(detail::ranks_before(a, b));
    EXPECT_FALSE(detail::ranks_before(b, a));
    b.rsse = 0.4;
    EXPECT_TRUE(detail::ranks_before(b, a));
}

TEST(Commands, CorrelateRefitsAtFixedQm) {
    Workspace w;
    CorrelateCommand cmd;
    for (int n : {1, 3, 4, 5}) {
        FitCommand f;
        f.curve_path = w.curve(n);
        f.conditions_path = w.conditions(n);
        f.out_dir = w.out();
        cmd.fit_paths.push_back(cmd_fit(f).outputs[0]);
        cmd.curve_paths.push_back(f.curve_path);
    }
    cmd.out_dir = w.out();
    const auto m = load_correlation(cmd_correlate(cmd).outputs[0]);
    EXPECT_NEAR(m.q_m_fixed, 0.253875, 1e-6);
    EXPECT_EQ(m.sources.size(), 4u);
    EXPECT_EQ(m.resin_id, "A600E");

    cmd.curve_paths.clear();
    cmd.mode = CorrelationMode::line_ct;
    const auto r = cmd_correlate(cmd);
    EXPECT_EQ(r.warnings.size(), 4u);
    EXPECT_EQ(load_correlation(r.outputs[0]).b_per_ppb, 0.0);
}

TEST(Commands, CorrelateRejectsMixedOrShortInput) {
    Workspace w;
    auto fit_of = [&](int n) {
        FitCommand f;
        f.curve_path = w.curve(n);
        f.conditions_path = w.conditions(n);
        f.out_dir = w.out();
        return cmd_fit(f).outputs[0];
    };
    std::vector<StoredFit> two{load_fit(fit_of(1)), load_fit(fit_of(3))};
    EXPECT_EQ(code_of([&] { correlate_fits(two, CorrelationMode::plane, std::nullopt); }),
              ErrorCode::degenerate_design);
    auto mixed = two;
    mixed.push_back(mixed[0]);
    mixed[2].conditions.resin_id = "A520E";
    EXPECT_EQ(code_of([&] { correlate_fits(mixed, CorrelationMode::plane, std::nullopt); }),
              ErrorCode::model_mismatch);
}

TEST(Commands, PredictExperiment6) {
    Workspace w;
    PredictCommand cmd;
    cmd.correlation = "A600E";
    cmd.conditions_path = w.conditions(6);
    cmd.out_dir = w.out();
    const auto r = cmd_predict(cmd);
    const auto j = parse_json(test_support::read_text(r.outputs[0]), "prediction");
    EXPECT_NEAR(j["kt_l_per_g_hr"].get<double>(), 1264.7925, 1e-6);
    EXPECT_NEAR(j["t50_hr"].get<double>(), 153.753, 1e-3);
    EXPECT_NEAR(j["limit"]["t_hr"].get<double>(), 151.3419, 1e-3);
    EXPECT_EQ(j["within_source_hull"], true);
}

TEST(Commands, PredictBelowLimitAndExtrapolation) {
    Workspace w;
    const auto path = w.dir.file("low.json");
    test_support::write_conditions(path, make_conditions(8.0, 0.85, 10.6, 0.75, "A600E"));
    PredictCommand cmd;
    cmd.correlation = "A600E";
    cmd.conditions_path = path;
    cmd.out_dir = w.out();
    EXPECT_EQ(code_of([&] { cmd_predict(cmd); }), ErrorCode::invalid_input);

    test_support::write_conditions(path, make_conditions(14.73, 0.085, 10.6, std::nullopt, "A600E"));
    EXPECT_EQ(code_of([&] { cmd_predict(cmd); }), ErrorCode::extrapolation);
}

TEST(Commands, DataDirectoryOverride) {
    TempDir d;
    std::filesystem::create_directories(d.path() / "correlations");
    auto m = reference::a600e_correlation();
    m.c = 1300.0;
    write_file((d.path() / "correlations/A600E.json").string(), dump(correlation_to_json(m)));
    ::setenv("BREAKCURVE_DATA", d.path().c_str(), 1);
    EXPECT_EQ(resolve_correlation("A600E").c, 1300.0);
    ::unsetenv("BREAKCURVE_DATA");
    EXPECT_EQ(resolve_correlation("A600E").c, 1247.0);
    EXPECT_THROW(resolve_correlation("XYZ"), Error);
}

TEST(Commands, SensitivityNeedsThomas) {
    Workspace w;
    const auto c = reference::conditions(1);
    const auto f = evaluate_fit(test_support::thomas_curve({502, 0.3828}, c), to_parameter_set(ClarkParams{3, 0.01, 2}), 3);
    const auto path = w.dir.file("clark.fit.json");
    write_file(path, dump(fit_to_json({f, c, "c", ""})));
    SensitivityCommand cmd{path, w.conditions(1), std::nullopt, 50, w.out(), ""};
    EXPECT_EQ(code_of([&] { cmd_sensitivity(cmd); }), ErrorCode::model_mismatch);
}

TEST(Commands, SensitivityCsv) {
    Workspace w;
    FitCommand f;
    f.curve_path = w.curve(1);
    f.conditions_path = w.conditions(1);
    f.out_dir = w.out();
    const auto fit_path = cmd_fit(f).outputs[0];
    SensitivityCommand cmd{fit_path, f.conditions_path, std::nullopt, 20, w.out(), ""};
    const auto csv = test_support::read_text(cmd_sensitivity(cmd).outputs[0]);
    EXPECT_NE(csv.find("# fd_check="), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 23);
}

TEST(Commands, ReportDocumentsPlaneDivergence) {
    const auto j = reference_report();
    EXPECT_NEAR(j["mean_qm_experiments_1_3_4_5"].get<double>(), 0.253875, 1e-9);
    EXPECT_NEAR(j["a600e_ols_refit"]["a_per_min"].get<double>(), -1132.0, 1e-6);
    EXPECT_TRUE(j.contains("a600e_plane_divergence"));
    EXPECT_EQ(j["experiments"].size(), 8u);
}

TEST(Commands, ManifestChecksOutputs) {
    TempDir d;
    RunManifest m;
    m.command = "fit";
    m.outputs = {d.file("missing.json")};
    EXPECT_THROW(write_manifest(d.path().string(), "x", m), Error);
    write_file(d.file("present.json"), "{}\n");
    m.outputs = {d.file("present.json")};
    m.timestamp = "2026-01-01T00:00:00Z";
    const auto path = write_manifest(d.path().string(), "x", m);
    const auto j = parse_json(test_support::read_text(path), "manifest");
    EXPECT_EQ(j["command"], "fit");
    EXPECT_EQ(std::filesystem::path(path).filename(), "x.fit.manifest.json");
    EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST(Commands, SynthIsReproducible) {
    Workspace w;
    SynthCommand cmd;
    cmd.conditions_path = w.conditions(2);
    cmd.params = to_parameter_set(reference::thomas_fit(2));
    cmd.noise = {0.02, 42};
    cmd.out_path = w.dir.file("a.csv");
    cmd_synth(cmd);
    cmd.out_path = w.dir.file("b.csv");
    cmd_synth(cmd);
    EXPECT_EQ(test_support::read_text(w.dir.file("a.csv")), test_support::read_text(w.dir.file("b.csv")));
    cmd.params = to_parameter_set(ClarkParams{3, 0.01, 2});
    EXPECT_THROW(cmd_synth(cmd), Error);
}

TEST(Commands, CurveCsvReevaluatesExactly) {
    Workspace w;
    FitCommand cmd;
    cmd.curve_path = w.curve(2, {0.02, 2});
    cmd.conditions_path = w.conditions(2);
    cmd.out_dir = w.out();
    const auto r = cmd_fit(cmd);
    const auto stored = load_fit(r.outputs[0]);
    const auto p = from_parameter_set<ThomasParams>(stored.fit.params);
    std::istringstream csv(test_support::read_text(r.outputs[1]));
    std::string line;
    std::getline(csv, line);
    std::size_t model_rows = 0;
    while (std::getline(csv, line)) {
        if (line.rfind("model,", 0) != 0) continue;
        const auto comma = line.find(',', 6);
        const double t = std::strtod(line.c_str() + 6, nullptr);
        const double y = std::strtod(line.c_str() + comma + 1, nullptr);
        ASSERT_EQ(y, thomas_forward(p, stored.conditions, t)) << line;
        ++model_rows;
    }
    EXPECT_EQ(model_rows, 200u);
}

TEST(Commands, CompareTiesGoToThomas) {
    const auto c = reference::conditions(1);
    const auto report = compare_models(test_support::thomas_curve(reference::thomas_fit(1), c));
    ASSERT_TRUE(report.best_model);
    EXPECT_EQ(*report.best_model, ModelKind::thomas);
}

TEST(Commands, CompareNotesLowRegime) {
    const auto c = reference::conditions(1);
    const WolborskaParams w{300.0, 0.5};
    std::vector<double> times;
    for (double t : linspace(0.0, 2000.0, 400)) {
        if (wolborska_forward(w, c, t) < 0.2) times.push_back(t);
    }
    times.resize(std::min<std::size_t>(times.size(), 30));
    const auto curve = synthesize_curve(to_parameter_set(w), c, times);
    const auto report = compare_models(curve);
    EXPECT_NE(report.wolborska_note.find("low-concentration regime"), std::string::npos);
    ASSERT_TRUE(report.outcomes[3].fit);
    EXPECT_LT(report.outcomes[3].fit->rsse, 1e-8);
}

TEST(Commands, EnvelopeBracketsNominal) {
    const auto c = reference::conditions(1);
    const auto params = to_parameter_set(reference::thomas_fit(1));
    const auto times = linspace(0.0, 700.0, 50);
    const auto band = parameter_band(params, c, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        EXPECT_LE(band.lower[i], band.nominal[i]);
        EXPECT_GE(band.upper[i], band.nominal[i]);
    }
}
