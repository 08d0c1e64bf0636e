#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sda/dataset.hpp"

namespace sda {

// Parsed command-line configuration, echoed into every output file.
// `workers` is execution detail and never changes numeric output, so it is
// reported separately from the reproducibility metadata.
struct RunConfig {
    std::string command;  // test | simulate | screen
    std::string input_path;
    OutcomeSpec outcome;
    char delimiter = ',';
    std::string stat = "cvm";  // ks | cvm | both
    std::optional<int> h;
    int l_draws = 0;  // 0: 1000, or 10000 when fdr_q is set
    double alpha = 0.05;
    std::optional<double> fdr_q;
    std::optional<int> screen_keep;
    std::optional<std::string> gamma;  // numeric or "auto" = (n-2)/(n-1)
    std::uint64_t seed = 1;
    int workers = 0;
    std::string out_prefix = "sda_out";
    bool dump_fits = false;
    bool dump_slices = false;
    bool scale = false;
    std::string scenario;  // simulate: builtin name or JSON file
};

// Exit codes: 0 success, 2 configuration error, 3 data error.
int run_test(const RunConfig& cfg);
int run_simulate(const RunConfig& cfg);
int run_screen(const RunConfig& cfg);

int dispatch(const RunConfig& cfg);

}  // namespace sda
