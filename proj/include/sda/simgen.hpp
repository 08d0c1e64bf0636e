#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sda/dataset.hpp"

namespace sda {

struct PrecisionSpec {
    enum class Kind { block_diagonal, small_world };
    Kind kind = Kind::block_diagonal;
    int p = 100;
    int block_size = 5;       // q, block-diagonal
    int neighbors = 5;        // e, small-world ring radius
    double rewire_prob = 0.25;
    double weight_min = 0.5;  // |theta_jk| sampled from (weight_min, weight_max)
    double weight_max = 1.0;
    double pd_floor = 0.1;    // tau: minimum eigenvalue after repair
};

enum class CoefSetting { s1, s2, none };  // none: b = 0 (global null)
enum class RegressionModel { r1, r2, r3, r4 };

// Block-diagonal precision: unit diagonal, 0.5 within-block off-diagonal.
Eigen::MatrixXd block_precision(int p, int q);

// Watts-Strogatz ring lattice with `neighbors`-radius connections, each edge
// rewired with probability `rewire_prob` to a uniform non-neighbor. Edge
// weights are uniform on (-max,-min) u (min,max), sign by fair coin; the
// diagonal is 1 and the matrix is shifted by delta*I to reach pd_floor.
// The applied shift is reported through `shift_out`.
Eigen::MatrixXd smallworld_precision(const PrecisionSpec& spec, std::uint64_t seed,
                                     double* shift_out = nullptr);

// n iid rows from N(0, theta^{-1}) via Cholesky of theta and back
// substitution on standard-normal draws.
Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& theta, int n, std::uint64_t seed);

// S1: five signals at columns 0, q, 2q, 3q, 4q with values
// (0.2, -0.4, 0.6, -0.8, 1.0); S2: columns 0..5q-1 with each value repeated
// q times; none: all zeros.
Eigen::VectorXd generate_coefficients(CoefSetting setting, int q, int p);

// R1: y = x'b + e; R2: exp(x'b) + e; R3: sin(x'b)exp(x'b) + e;
// R4: exp(x'b + e); e ~ N(0,1) drawn once per call from `seed`.
Eigen::VectorXd generate_response(const Eigen::MatrixXd& x, const Eigen::VectorXd& b,
                                  RegressionModel model, std::uint64_t seed);

struct ScenarioConfig {
    std::string name = "custom";
    int n = 200;
    int p = 100;
    PrecisionSpec precision;
    CoefSetting setting = CoefSetting::none;
    int q = 5;  // coefficient pattern spacing
    RegressionModel regression = RegressionModel::r1;
    int replicates = 200;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::optional<int> h_override;
    int l_draws = 1000;
    int max_test_covariates = 100;
    // When set, test exactly these columns instead of the first
    // min(max_test_covariates, p).
    std::vector<int> test_indices;
    int workers = 0;  // 0: hardware concurrency
};

struct GroupRate {
    double beta = 0.0;      // true coefficient value of the group
    int member_count = 0;   // tested variables per replicate in the group
    double ks_rate = 0.0;
    double cvm_rate = 0.0;
    double ks_se = 0.0;     // MC standard error over replicates
    double cvm_se = 0.0;
};

struct PowerReport {
    ScenarioConfig config;
    int tested_covariates = 0;
    std::vector<GroupRate> groups;
    // per tested variable, rejection rate across replicates
    std::vector<double> ks_variable_rates;
    std::vector<double> cvm_variable_rates;
    std::vector<double> delta_repairs;  // small-world PD shifts, one per replicate
    double runtime_seconds = 0.0;
};

// Monte-Carlo harness: per replicate (seed^replicate), draw covariates and
// response, center, and test the first min(max_test_covariates, p) columns
// with both statistics; tabulate rejection rates by true coefficient group.
// Replicates run in parallel; output is identical to a serial run.
PowerReport run_scenario(const ScenarioConfig& cfg);

// Bundled desk-scale scenario by name (s1_q5_r1_desk, ..., null_desk);
// throws ConfigError for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

}  // namespace sda
