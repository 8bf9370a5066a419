// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.
//
// Usage: acceptance <path-to-breakcurve-cli>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include "../support.hpp"

using namespace breakcurve;
using test_support::rel_diff;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(const char* id, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class F>
void guarded(const char* id, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        verdict(id, false, std::string("exception: ") + e.what());
    }
}

/// Plain bisection on the Thomas curve, no closed form.
double bisect_t50(const ThomasParams& p, const ExperimentConditions& c) {
    double lo = 0.0, hi = 1.0;
    while (thomas_forward(p, c, hi) < 0.5) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (thomas_forward(p, c, mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void ac1() {
    const auto m = reference::a600e_correlation();
    const auto t0 = Clock::now();
    const double k = predict_kt(m, 0.75, 20.65);
    const double elapsed = seconds_since(t0);
    verdict("AC1", std::abs(k - 1265.0) <= 1.0 && elapsed < 1e-3,
            fmt("K_T(0.75 min, 20.65 ppb) = %.4f vs 1265 +-1, %.1f us", k, elapsed * 1e6));
}

void ac2() {
    const double k = predict_kt(reference::a600e_correlation(), 0.5, 14.73);
    verdict("AC2", std::abs(k - 1269.0) <= 1.0, fmt("K_T(0.5 min, 14.73 ppb) = %.4f vs 1269 +-1", k));
}

void ac3() {
    std::vector<FitResult> fits;
    for (int n : {1, 3, 4, 5}) {
        FitResult f;
        f.params = to_parameter_set(reference::thomas_fit(n));
        fits.push_back(f);
    }
    const double q = average_qm(fits);
    verdict("AC3", std::abs(q - 0.254) <= 0.001, fmt("mean q_m = %.6f vs 0.254 +-0.001", q));
}

void ac4() {
    std::mt19937_64 rng(4);
    auto lu = [&](double lo, double hi) {
        return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
    };
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto c = reference::conditions(1 + static_cast<int>(rng() % 6));
        const ThomasParams p{lu(50, 5000), lu(0.05, 1.0)};
        const auto yn = to_yoon_nelson(p, c);
        for (double t : linspace(0.0, 3.0 * thomas_t50(p, c), 1000)) {
            const double a = thomas_forward(p, c, t), b = yoon_nelson_forward(yn, t);
            if (a > 0.0) worst = std::max(worst, std::abs(a - b) / a);
            else if (b != 0.0) worst = 1.0;
        }
    }
    const double elapsed = seconds_since(t0);
    verdict("AC4", worst <= 1e-12 && elapsed < 1.0,
            fmt("max relative gap %.3g (limit 1e-12), 100 sets x 1000 points in %.3f s", worst, elapsed));
}

void ac5() {
    double worst = 0.0;
    for (int n = 1; n <= 5; ++n) {
        const auto c = reference::conditions(n);
        const auto p = reference::thomas_fit(n);
        for (double y : {0.01, 0.1, 0.5, 0.9}) {
            worst = std::max(worst, std::abs(thomas_forward(p, c, breakthrough_time(p, c, y).t_hr) - y));
        }
    }
    const auto c1 = reference::conditions(1);
    const auto p1 = reference::thomas_fit(1);
    const double t50 = thomas_t50(p1, c1), oracle = bisect_t50(p1, c1);
    const double gap = rel_diff(t50, oracle);
    verdict("AC5", worst <= 1e-9 && gap <= 1e-9 && std::abs(t50 - 324.85) < 0.005,
            fmt("round-trip error %.3g; exp-1 t50 = %.6f hr, bisection %.6f hr, gap %.3g", worst, t50, oracle, gap));
}

void ac6() {
    double fd = 0.0, at_t50 = 0.0, max_qm = -1e300;
    for (int n = 1; n <= 5; ++n) {
        const auto c = reference::conditions(n);
        const auto p = reference::thomas_fit(n);
        const double t50 = thomas_t50(p, c);
        const auto prof = sensitivity_profile(p, c, linspace(0.0, 3.0 * t50, 20));
        fd = std::max(fd, prof.fd_check);
        at_t50 = std::max(at_t50, std::abs(sensitivity_kt(p, c, t50)));
        for (double t : linspace(0.0, 3.0 * t50, 1000)) max_qm = std::max(max_qm, sensitivity_qm(p, c, t));
    }
    verdict("AC6", fd < 1e-5 && at_t50 <= 1e-12 && max_qm <= 0.0,
            fmt("fd deviation %.3g (limit 1e-5); |dY/dK_T(t50)| %.3g; max dY/dq_m %.3g", fd, at_t50, max_qm));
}

void ac7() {
    const auto t0 = Clock::now();
    double clean = 0.0, noisy = 0.0;
    for (int n = 1; n <= 5; ++n) {
        const auto c = reference::conditions(n);
        const auto truth = reference::thomas_fit(n);
        for (bool with_noise : {false, true}) {
            const NoiseSpec noise = with_noise ? NoiseSpec{0.02, static_cast<std::uint64_t>(n)} : NoiseSpec{};
            const auto r = fit(test_support::thomas_curve(truth, c, 30, noise), ModelSpec::of(ModelKind::thomas));
            const auto p = from_parameter_set<ThomasParams>(r.params);
            const double e = std::max(rel_diff(p.k_t, truth.k_t), rel_diff(p.q_m, truth.q_m));
            (with_noise ? noisy : clean) = std::max(with_noise ? noisy : clean, e);
        }
    }
    const double elapsed = seconds_since(t0);
    verdict("AC7", clean <= 1e-3 && noisy <= 0.10 && elapsed < 10.0,
            fmt("noiseless max rel error %.3g (limit 1e-3); 2%% noise %.3g (limit 0.1); %.2f s", clean, noisy,
                elapsed));
}

void ac8() {
    const auto c = reference::conditions(4);
    const auto curve = test_support::thomas_curve(reference::thomas_fit(4), c);
    const auto center = to_parameter_set(reference::thomas_fit(1));
    const auto r = fit(curve, ModelSpec::of(ModelKind::thomas), center, box_around(center, 0.3));
    const bool any = r.active_bounds[0] || r.active_bounds[1];
    verdict("AC8", any,
            fmt("exp-4 data in +-30%% box around exp-1: K_T %.1f%s, q_m %.4f%s", r.params.values[0],
                r.active_bounds[0] ? " (active)" : "", r.params.values[1], r.active_bounds[1] ? " (active)" : ""));
}

void ac9() {
    std::vector<SourceExperiment> coplanar, fixed_qm;
    for (int n : {1, 3, 4, 5}) {
        const auto& row = reference::experiments[static_cast<std::size_t>(n - 1)];
        coplanar.push_back({row.ct_min, row.c0_ppb, -264.0 * row.ct_min + 10.45 * row.c0_ppb + 1247.0});
        fixed_qm.push_back({row.ct_min, row.c0_ppb, reference::fixed_qm_kt[static_cast<std::size_t>(n - 1)]});
    }
    const auto p = fit_plane(coplanar);
    const double e1 = std::max({std::abs(p.a_per_min + 264.0), std::abs(p.b_per_ppb - 10.45), std::abs(p.c - 1247.0)});
    // Exact rational solution of the same normal equations, solved offline.
    const auto q = fit_plane(fixed_qm);
    const double a_oracle = -1132.0, b_oracle = 4700.0 / 1487.0, c_oracle = 4996149.0 / 2974.0;
    const double e2 = std::max({rel_diff(q.a_per_min, a_oracle), rel_diff(q.b_per_ppb, b_oracle), rel_diff(q.c, c_oracle)});
    const auto report = reference_report();
    const bool documented = report.contains("a600e_plane_divergence") && report.contains("a600e_ols_refit");
    verdict("AC9", e1 <= 1e-9 && e2 <= 1e-9 && documented,
            fmt("coplanar recovery error %.3g; fixed-q_m plane (%.4f, %.6f, %.4f) vs oracle, rel gap %.3g; report %s",
                e1, q.a_per_min, q.b_per_ppb, q.c, e2, documented ? "documents divergence" : "missing divergence"));
}

void ac10() {
    const auto c1 = reference::conditions(1), c2 = reference::conditions(2);
    const auto truth = reference::thomas_fit(1);
    const auto times = linspace(0.0, 2.0 * thomas_t50(truth, c1), 30);
    const auto ps = to_parameter_set(truth);
    const auto f1 = fit(synthesize_curve(ps, c1, times, {0.02, 10}), ModelSpec::of(ModelKind::thomas));
    const auto f2 = fit(synthesize_curve(ps, c2, times, {0.02, 10}), ModelSpec::of(ModelKind::thomas));
    const double gap = std::max(rel_diff(f1.params.values[0], f2.params.values[0]),
                                rel_diff(f1.params.values[1], f2.params.values[1]));
    verdict("AC10", gap <= 1e-9,
            fmt("exp-1 vs exp-2 scaled (V, Q): K_T %.6f / %.6f, q_m %.8f / %.8f, rel gap %.3g",
                f1.params.values[0], f2.params.values[0], f1.params.values[1], f2.params.values[1], gap));
}

void ac11(const std::string& cli) {
    test_support::TempDir dir;
    const auto cond = dir.file("exp4.json");
    const auto curve = dir.file("exp4.csv");
    test_support::write_conditions(cond, reference::conditions(4));
    test_support::write_curve(curve, test_support::thomas_curve(reference::thomas_fit(4), reference::conditions(4), 30,
                                                                {0.02, 7}));
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
        const auto out = dir.file("run" + std::to_string(run));
        const std::string cmd = "\"" + cli + "\" fit --model thomas --bounds-pct 30 --init kt_l_per_g_hr=1612,qm_g_per_l=0.2091"
                                " --curve \"" + curve + "\" --conditions \"" + cond + "\" --out \"" + out +
                                "\" --name exp4 > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            verdict("AC11", false, "CLI fit exited non-zero");
            return;
        }
        outputs[run] = test_support::read_text(out + "/exp4.fit.json");
    }
    verdict("AC11", !outputs[0].empty() && outputs[0] == outputs[1],
            fmt("two CLI fit runs: %zu and %zu bytes, %s", outputs[0].size(), outputs[1].size(),
                outputs[0] == outputs[1] ? "identical" : "different"));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <breakcurve-cli>\n");
        return 2;
    }
    guarded("AC1", ac1);
    guarded("AC2", ac2);
    guarded("AC3", ac3);
    guarded("AC4", ac4);
    guarded("AC5", ac5);
    guarded("AC6", ac6);
    guarded("AC7", ac7);
    guarded("AC8", ac8);
    guarded("AC9", ac9);
    guarded("AC10", ac10);
    guarded("AC11", [&] { ac11(argv[1]); });
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
