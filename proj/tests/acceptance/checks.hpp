#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace ofmf::checks {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct CheckOptions {
    // Raw electricity table (semicolon separated, decimal comma, 15-minute
    // rows). When empty or missing, the synthetic surrogate is used.
    std::filesystem::path electricity_path;
    std::filesystem::path work_dir = std::filesystem::temp_directory_path();
};

struct CheckInfo {
    int id;
    const char* name;
    std::function<CheckResult(const CheckOptions&)> run;
};

const std::vector<CheckInfo>& all_checks();

/// Runs the listed checks (all when `ids` is empty). Exceptions become failures.
std::vector<CheckResult> run_checks(const CheckOptions& options, const std::vector<int>& ids = {});

/// "[PASS] 3 zt-interpolation (0.41 s): ..." style line.
std::string format_result(const CheckResult& result);

}  // namespace ofmf::checks
