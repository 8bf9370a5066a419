#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "breakcurve/breakcurve.hpp"

namespace test_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("breakcurve_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::string& path) { return breakcurve::read_file(path); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Noiseless Thomas curve on [0, 2 t50] in the shape used by the round-trip checks.
inline breakcurve::BreakthroughCurve thomas_curve(const breakcurve::ThomasParams& p,
                                                  const breakcurve::ExperimentConditions& c, std::size_t points = 30,
                                                  breakcurve::NoiseSpec noise = {}) {
    const double t50 = breakcurve::thomas_t50(p, c);
    return breakcurve::synthesize_curve(breakcurve::to_parameter_set(p), c, breakcurve::linspace(0.0, 2.0 * t50, points),
                                        noise);
}

/// Writes a curve as t_hr,ratio CSV.
inline void write_curve(const std::string& path, const breakcurve::BreakthroughCurve& curve) {
    std::string text = "t_hr,ratio\n";
    for (const auto& p : curve.points()) {
        text += breakcurve::exact_number(p.t_hr) + "," + breakcurve::exact_number(p.ratio) + "\n";
    }
    write_text(path, text);
}

inline void write_conditions(const std::string& path, const breakcurve::ExperimentConditions& c) {
    write_text(path, breakcurve::dump(breakcurve::conditions_to_json(c)));
}

}  // namespace test_support
