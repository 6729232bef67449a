#include "checks.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    ofmf::checks::CheckOptions options;
    if (const char* path = std::getenv("OFMF_ELECTRICITY")) options.electricity_path = path;
    if (argc > 1) options.electricity_path = argv[1];
    options.work_dir = std::filesystem::temp_directory_path() / "ofmf_acceptance";

    int failed = 0;
    for (const auto& r : ofmf::checks::run_checks(options)) {
        std::cout << ofmf::checks::format_result(r) << std::endl;
        if (!r.pass) ++failed;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
