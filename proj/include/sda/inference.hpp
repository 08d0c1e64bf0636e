#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sda/association.hpp"
#include "sda/dataset.hpp"
#include "sda/lasso.hpp"
#include "sda/rng.hpp"
#include "sda/slicing.hpp"

namespace sda {

enum class StatKind { ks, cvm };

std::string to_string(StatKind kind);

struct BootstrapDraws {
    std::vector<double> statistics;  // per-draw reduced |z^u|, length L
    std::uint64_t seed = 0;
};

struct TestOutcome {
    int target_index = -1;
    StatKind kind = StatKind::ks;
    double statistic = 0.0;
    double p_value = 1.0;
    double critical_value = 0.0;
    double alpha = 0.05;
    bool rejected = false;
    int bootstrap_draws = 0;  // L
    std::uint64_t seed = 0;
    int h_count = 0;
    std::vector<int> degenerate_slices;

    // diagnostics from the nodewise fit (when one was run)
    double lasso_lambda = 0.0;
    double lasso_l1_norm = 0.0;
    int lasso_active = 0;
    int conditioning_size = 0;
    bool exact_fit = false;
};

// max_h |z_h| over non-degenerate slices.
double ks_statistic(const Eigen::VectorXd& z, const std::vector<int>& degenerate = {});

// (1/H) * sum_h |z_h|; degenerate slices contribute 0 but stay in the divisor.
double cvm_statistic(const Eigen::VectorXd& z);

// One multiplier-bootstrap process phi^u = n^{-1/2} sum_j U_j psi_j with the
// n multipliers drawn from `rng` in row order. Returns the raw H-vector.
Eigen::VectorXd simulated_process(const Eigen::MatrixXd& psi, Rng& rng);

// L simulated processes; draw l uses the substream derive_seed(seed, l), so
// draws can be computed in any order (or in parallel) with identical output.
// The influence matrix is fixed: no refitting per draw.
BootstrapDraws multiplier_bootstrap(const Eigen::MatrixXd& psi, const Eigen::VectorXd& omega_diag,
                                    StatKind kind, int l_draws, std::uint64_t seed,
                                    const std::vector<int>& degenerate = {});

// Both reductions from one set of shared draws.
std::pair<BootstrapDraws, BootstrapDraws> multiplier_bootstrap_both(
    const Eigen::MatrixXd& psi, const Eigen::VectorXd& omega_diag, int l_draws,
    std::uint64_t seed, const std::vector<int>& degenerate = {});

// Add-one estimator (1 + #{draws >= statistic}) / (L + 1); never 0.
double p_value(double statistic, const BootstrapDraws& draws);

// The ceil((1-alpha)*L)-th order statistic of the draws.
double critical_value(const BootstrapDraws& draws, double alpha);

// Pipeline from precomputed residuals (e.g. an oracle fit): slice plan ->
// nu/omega/z -> statistics -> bootstrap -> decision. Bootstrap substream is
// derive_seed(seed, 1).
std::pair<TestOutcome, TestOutcome> test_with_residuals(const Eigen::VectorXd& residuals,
                                                        const SlicePlan& plan, int l_draws,
                                                        double alpha, std::uint64_t seed);

// Full per-variable test: slice, nodewise LASSO (CV lambda), association
// summary, multiplier bootstrap, rejection decision. Deterministic given
// `seed`; variable i owns the substream seed^i, so results do not depend on
// which other variables are tested.
std::pair<TestOutcome, TestOutcome> test_variable_both(
    const Dataset& d, int i, int h, int l_draws, double alpha,
    const std::optional<std::vector<int>>& screen = std::nullopt, std::uint64_t seed = 0,
    int folds = 10);

TestOutcome test_variable(const Dataset& d, int i, StatKind kind, int h, int l_draws, double alpha,
                          const std::optional<std::vector<int>>& screen = std::nullopt,
                          std::uint64_t seed = 0, int folds = 10);

}  // namespace sda
