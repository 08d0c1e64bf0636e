#include "sda/inference.hpp"

#include <algorithm>
#include <cmath>

namespace sda {

std::string to_string(StatKind kind) { return kind == StatKind::ks ? "ks" : "cvm"; }

double ks_statistic(const Eigen::VectorXd& z, const std::vector<int>& degenerate) {
    const int h_count = static_cast<int>(z.size());
    if (h_count < 1) throw std::invalid_argument("ks_statistic: empty z");
    std::vector<char> skip(h_count, 0);
    for (int h : degenerate) skip[h] = 1;
    double best = -1.0;
    for (int h = 0; h < h_count; ++h)
        if (!skip[h]) best = std::max(best, std::abs(z(h)));
    if (best < 0.0) throw std::runtime_error("ks_statistic: every slice is degenerate");
    return best;
}

double cvm_statistic(const Eigen::VectorXd& z) {
    if (z.size() < 1) throw std::invalid_argument("cvm_statistic: empty z");
    return z.cwiseAbs().sum() / z.size();
}

Eigen::VectorXd simulated_process(const Eigen::MatrixXd& psi, Rng& rng) {
    const int n = static_cast<int>(psi.rows());
    std::normal_distribution<double> normal;
    Eigen::VectorXd u(n);
    for (int j = 0; j < n; ++j) u(j) = normal(rng);
    return (psi.transpose() * u) / std::sqrt(static_cast<double>(n));
}

namespace {

// Standardize one raw process and reduce it both ways.
void reduce_process(const Eigen::VectorXd& phi, const Eigen::VectorXd& inv_sd,
                    const std::vector<char>& live, double& ks_out, double& cvm_out) {
    const int h_count = static_cast<int>(phi.size());
    double mx = 0.0, sum = 0.0;
    for (int h = 0; h < h_count; ++h) {
        if (!live[h]) continue;
        const double a = std::abs(phi(h) * inv_sd(h));
        mx = std::max(mx, a);
        sum += a;
    }
    ks_out = mx;
    cvm_out = sum / h_count;
}

std::vector<char> live_mask(int h_count, const std::vector<int>& degenerate) {
    std::vector<char> live(h_count, 1);
    for (int h : degenerate) live[h] = 0;
    if (std::count(live.begin(), live.end(), char(1)) == 0)
        throw std::runtime_error("multiplier_bootstrap: every slice is degenerate");
    return live;
}

}  // namespace

std::pair<BootstrapDraws, BootstrapDraws> multiplier_bootstrap_both(
    const Eigen::MatrixXd& psi, const Eigen::VectorXd& omega_diag, int l_draws,
    std::uint64_t seed, const std::vector<int>& degenerate) {
    const int h_count = static_cast<int>(psi.cols());
    if (omega_diag.size() != h_count)
        throw std::invalid_argument("multiplier_bootstrap: omega_diag mismatch");
    if (l_draws < 1) throw std::invalid_argument("multiplier_bootstrap: need l_draws >= 1");

    const std::vector<char> live = live_mask(h_count, degenerate);
    Eigen::VectorXd inv_sd = Eigen::VectorXd::Zero(h_count);
    for (int h = 0; h < h_count; ++h)
        if (live[h]) inv_sd(h) = 1.0 / std::sqrt(omega_diag(h));

    BootstrapDraws ks_draws, cvm_draws;
    ks_draws.seed = cvm_draws.seed = seed;
    ks_draws.statistics.resize(l_draws);
    cvm_draws.statistics.resize(l_draws);
    for (int l = 0; l < l_draws; ++l) {
        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
        const Eigen::VectorXd phi = simulated_process(psi, rng);
        reduce_process(phi, inv_sd, live, ks_draws.statistics[l], cvm_draws.statistics[l]);
    }
    return {std::move(ks_draws), std::move(cvm_draws)};
}

BootstrapDraws multiplier_bootstrap(const Eigen::MatrixXd& psi, const Eigen::VectorXd& omega_diag,
                                    StatKind kind, int l_draws, std::uint64_t seed,
                                    const std::vector<int>& degenerate) {
    auto [ks_draws, cvm_draws] = multiplier_bootstrap_both(psi, omega_diag, l_draws, seed, degenerate);
    return kind == StatKind::ks ? std::move(ks_draws) : std::move(cvm_draws);
}

double p_value(double statistic, const BootstrapDraws& draws) {
    const int l = static_cast<int>(draws.statistics.size());
    if (l < 1) throw std::invalid_argument("p_value: need at least one draw");
    int count = 0;
    for (double d : draws.statistics)
        if (d >= statistic) ++count;
    return (1.0 + count) / (l + 1.0);
}

double critical_value(const BootstrapDraws& draws, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("critical_value: alpha must be in (0,1)");
    const int l = static_cast<int>(draws.statistics.size());
    if (l < 1) throw std::invalid_argument("critical_value: need at least one draw");
    std::vector<double> sorted = draws.statistics;
    std::sort(sorted.begin(), sorted.end());
    const int rank = static_cast<int>(std::ceil((1.0 - alpha) * l));  // 1-based
    return sorted[std::max(rank, 1) - 1];
}

namespace {

TestOutcome assemble_outcome(StatKind kind, double statistic, const BootstrapDraws& draws,
                             double alpha, const SdaResult& sda, std::uint64_t seed) {
    TestOutcome out;
    out.kind = kind;
    out.statistic = statistic;
    out.p_value = p_value(statistic, draws);
    out.critical_value = critical_value(draws, alpha);
    out.alpha = alpha;
    // T > c or p < alpha; with these estimators the p-value branch never
    // fires alone, so the flag also equals (statistic > critical_value).
    out.rejected = statistic > out.critical_value || out.p_value < alpha;
    out.bootstrap_draws = static_cast<int>(draws.statistics.size());
    out.seed = seed;
    out.h_count = sda.h_count;
    out.degenerate_slices = sda.degenerate_slices;
    return out;
}

}  // namespace

std::pair<TestOutcome, TestOutcome> test_with_residuals(const Eigen::VectorXd& residuals,
                                                        const SlicePlan& plan, int l_draws,
                                                        double alpha, std::uint64_t seed) {
    SdaResult sda;
    sda.n = static_cast<int>(residuals.size());
    sda.h_count = plan.h_count;
    sda.nu_hat = estimate_sda(residuals, plan);
    const Eigen::MatrixXd psi = influence_matrix(residuals, plan, sda.nu_hat);
    sda.omega_hat = variance_estimate(psi);
    sda.z_scores = z_scores(sda.nu_hat, sda.omega_hat, sda.n, &sda.degenerate_slices);
    const Eigen::VectorXd omega_diag = sda.omega_hat.diagonal();

    const double t_ks = ks_statistic(sda.z_scores, sda.degenerate_slices);
    const double t_cvm = cvm_statistic(sda.z_scores);

    auto [ks_draws, cvm_draws] = multiplier_bootstrap_both(psi, omega_diag, l_draws,
                                                           derive_seed(seed, 1),
                                                           sda.degenerate_slices);
    return {assemble_outcome(StatKind::ks, t_ks, ks_draws, alpha, sda, seed),
            assemble_outcome(StatKind::cvm, t_cvm, cvm_draws, alpha, sda, seed)};
}

std::pair<TestOutcome, TestOutcome> test_variable_both(
    const Dataset& d, int i, int h, int l_draws, double alpha,
    const std::optional<std::vector<int>>& screen, std::uint64_t seed, int folds) {
    if (!d.centered) throw std::invalid_argument("test_variable: dataset must be centered");
    if (i < 0 || i >= d.p()) throw std::invalid_argument("test_variable: index out of range");

    const SlicePlan plan = make_slices(d.y, h);
    const LassoFit fit = nodewise_fit(d, i, screen, folds, seed);
    const std::uint64_t var_seed = seed ^ static_cast<std::uint64_t>(i);
    auto [ks, cvm] = test_with_residuals(fit.residuals, plan, l_draws, alpha, var_seed);

    for (TestOutcome* out : {&ks, &cvm}) {
        out->target_index = i;
        out->seed = seed;
        out->lasso_lambda = fit.lambda;
        out->lasso_l1_norm = fit.l1_norm;
        out->lasso_active = static_cast<int>(fit.active_set.size());
        out->conditioning_size = static_cast<int>(fit.conditioning.size());
        out->exact_fit = fit.exact_fit;
    }
    return {ks, cvm};
}

TestOutcome test_variable(const Dataset& d, int i, StatKind kind, int h, int l_draws, double alpha,
                          const std::optional<std::vector<int>>& screen, std::uint64_t seed,
                          int folds) {
    auto [ks, cvm] = test_variable_both(d, i, h, l_draws, alpha, screen, seed, folds);
    return kind == StatKind::ks ? ks : cvm;
}

}  // namespace sda
