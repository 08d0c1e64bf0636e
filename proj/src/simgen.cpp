#include "sda/simgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "sda/inference.hpp"
#include "sda/parallel.hpp"
#include "sda/rng.hpp"
#include "sda/slicing.hpp"

namespace sda {

Eigen::MatrixXd block_precision(int p, int q) {
    if (q < 1 || p < 1 || p % q != 0)
        throw std::invalid_argument("block_precision: q must divide p");
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
    for (int b = 0; b < p / q; ++b)
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) theta(b * q + i, b * q + j) = i == j ? 1.0 : 0.5;
    return theta;
}

Eigen::MatrixXd smallworld_precision(const PrecisionSpec& spec, std::uint64_t seed,
                                     double* shift_out) {
    const int p = spec.p, e = spec.neighbors;
    if (e < 1) throw std::invalid_argument("smallworld_precision: need e >= 1");
    if (p <= 2 * e) throw std::invalid_argument("smallworld_precision: need p > 2e");

    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::set<int>> adj(p);
    auto connect = [&](int a, int b) { adj[a].insert(b); adj[b].insert(a); };
    auto disconnect = [&](int a, int b) { adj[a].erase(b); adj[b].erase(a); };
    for (int d = 1; d <= e; ++d)
        for (int j = 0; j < p; ++j) connect(j, (j + d) % p);

    // Watts-Strogatz rewiring: visit lattice edges in construction order,
    // keep the source endpoint, retarget uniformly among non-neighbors.
    std::uniform_int_distribution<int> node(0, p - 1);
    for (int d = 1; d <= e; ++d) {
        for (int j = 0; j < p; ++j) {
            const int old_target = (j + d) % p;
            if (unit(rng) >= spec.rewire_prob) continue;
            if (!adj[j].count(old_target)) continue;  // already moved by an earlier rewire
            if (static_cast<int>(adj[j].size()) >= p - 1) continue;  // fully connected
            int t;
            do {
                t = node(rng);
            } while (t == j || adj[j].count(t));
            disconnect(j, old_target);
            connect(j, t);
        }
    }

    Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(p, p);
    std::uniform_real_distribution<double> magnitude(spec.weight_min, spec.weight_max);
    for (int j = 0; j < p; ++j) {
        for (int k : adj[j]) {
            if (k <= j) continue;  // canonical order: each edge weighted once
            double w = magnitude(rng);
            if (unit(rng) < 0.5) w = -w;
            theta(j, k) = theta(k, j) = w;
        }
    }

    const double lambda_min =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(theta, Eigen::EigenvaluesOnly)
            .eigenvalues()(0);
    const double shift = std::max(0.0, spec.pd_floor - lambda_min);
    if (shift > 0.0) theta += shift * Eigen::MatrixXd::Identity(p, p);
    if (shift_out) *shift_out = shift;
    return theta;
}

Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& theta, int n, std::uint64_t seed) {
    const int p = static_cast<int>(theta.rows());
    if (theta.cols() != p) throw std::invalid_argument("sample_gaussian: theta not square");
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("sample_gaussian: precision matrix is not positive definite");

    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd z(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) z(i, j) = normal(rng);

    // theta = L L'; solving L' x = z gives Cov(x) = theta^{-1}
    return llt.matrixU().solve(z.transpose()).transpose();
}

Eigen::VectorXd generate_coefficients(CoefSetting setting, int q, int p) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    if (setting == CoefSetting::none) return b;
    if (q < 1 || p < 5 * q) throw std::invalid_argument("generate_coefficients: need p >= 5q");
    const double values[5] = {0.2, -0.4, 0.6, -0.8, 1.0};
    if (setting == CoefSetting::s1) {
        for (int k = 0; k < 5; ++k) b(k * q) = values[k];
    } else {
        for (int k = 0; k < 5; ++k)
            for (int r = 0; r < q; ++r) b(k * q + r) = values[k];
    }
    return b;
}

Eigen::VectorXd generate_response(const Eigen::MatrixXd& x, const Eigen::VectorXd& b,
                                  RegressionModel model, std::uint64_t seed) {
    if (x.cols() != b.size()) throw std::invalid_argument("generate_response: dimension mismatch");
    const int n = static_cast<int>(x.rows());
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) eps(i) = normal(rng);

    const Eigen::VectorXd linear = x * b;
    switch (model) {
        case RegressionModel::r1: return linear + eps;
        case RegressionModel::r2: return linear.array().exp().matrix() + eps;
        case RegressionModel::r3:
            return (linear.array().sin() * linear.array().exp()).matrix() + eps;
        case RegressionModel::r4: return (linear + eps).array().exp();
    }
    throw std::invalid_argument("generate_response: unknown model");
}

PowerReport run_scenario(const ScenarioConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.replicates < 1) throw std::invalid_argument("run_scenario: need replicates >= 1");
    if (cfg.precision.p != cfg.p) throw std::invalid_argument("run_scenario: precision p mismatch");

    const Eigen::VectorXd b = generate_coefficients(cfg.setting, cfg.q, cfg.p);
    std::vector<int> tested = cfg.test_indices;
    if (tested.empty()) {
        tested.resize(std::min(cfg.max_test_covariates, cfg.p));
        std::iota(tested.begin(), tested.end(), 0);
    }
    for (int i : tested)
        if (i < 0 || i >= cfg.p) throw std::invalid_argument("run_scenario: test index out of range");
    const int m = static_cast<int>(tested.size());
    const int h = cfg.h_override ? *cfg.h_override : default_h(cfg.n);

    // Block precision is deterministic; build it once and share read-only.
    Eigen::MatrixXd fixed_theta;
    if (cfg.precision.kind == PrecisionSpec::Kind::block_diagonal)
        fixed_theta = block_precision(cfg.p, cfg.precision.block_size);

    const int r_count = cfg.replicates;
    std::vector<std::uint8_t> ks_reject(static_cast<std::size_t>(r_count) * m, 0);
    std::vector<std::uint8_t> cvm_reject(static_cast<std::size_t>(r_count) * m, 0);
    std::vector<double> deltas(r_count, 0.0);

    parallel_for(r_count, cfg.workers, [&](int r) {
        const std::uint64_t rep_seed = cfg.seed ^ static_cast<std::uint64_t>(r);

        Eigen::MatrixXd theta;
        if (cfg.precision.kind == PrecisionSpec::Kind::small_world)
            theta = smallworld_precision(cfg.precision, derive_seed(rep_seed, 101), &deltas[r]);

        const Eigen::MatrixXd& theta_ref =
            cfg.precision.kind == PrecisionSpec::Kind::block_diagonal ? fixed_theta : theta;

        Dataset d;
        d.x = sample_gaussian(theta_ref, cfg.n, derive_seed(rep_seed, 102));
        d.y.kind = OutcomeKind::continuous;
        d.y.values = generate_response(d.x, b, cfg.regression, derive_seed(rep_seed, 103));
        d.column_means = Eigen::VectorXd::Zero(cfg.p);
        d = center_columns(d);

        const std::uint64_t test_seed = derive_seed(rep_seed, 104);
        for (int k = 0; k < m; ++k) {
            auto [ks, cvm] =
                test_variable_both(d, tested[k], h, cfg.l_draws, cfg.alpha, std::nullopt,
                                   test_seed);
            ks_reject[static_cast<std::size_t>(r) * m + k] = ks.rejected ? 1 : 0;
            cvm_reject[static_cast<std::size_t>(r) * m + k] = cvm.rejected ? 1 : 0;
        }
    });

    PowerReport report;
    report.config = cfg;
    report.tested_covariates = m;
    if (cfg.precision.kind == PrecisionSpec::Kind::small_world) report.delta_repairs = deltas;

    report.ks_variable_rates.assign(m, 0.0);
    report.cvm_variable_rates.assign(m, 0.0);
    for (int r = 0; r < r_count; ++r)
        for (int i = 0; i < m; ++i) {
            report.ks_variable_rates[i] += ks_reject[static_cast<std::size_t>(r) * m + i];
            report.cvm_variable_rates[i] += cvm_reject[static_cast<std::size_t>(r) * m + i];
        }
    for (int i = 0; i < m; ++i) {
        report.ks_variable_rates[i] /= r_count;
        report.cvm_variable_rates[i] /= r_count;
    }

    // Group tested variables by true coefficient value, in table order.
    const double group_order[6] = {0.2, -0.4, 0.6, -0.8, 1.0, 0.0};
    for (double beta : group_order) {
        std::vector<int> members;  // positions into `tested`
        for (int k = 0; k < m; ++k)
            if (b(tested[k]) == beta) members.push_back(k);
        if (members.empty()) continue;

        GroupRate g;
        g.beta = beta;
        g.member_count = static_cast<int>(members.size());
        double ks_sum = 0, cvm_sum = 0, ks_sq = 0, cvm_sq = 0;
        for (int r = 0; r < r_count; ++r) {
            double kr = 0, cr = 0;
            for (int i : members) {
                kr += ks_reject[static_cast<std::size_t>(r) * m + i];
                cr += cvm_reject[static_cast<std::size_t>(r) * m + i];
            }
            kr /= members.size();
            cr /= members.size();
            ks_sum += kr;
            cvm_sum += cr;
            ks_sq += kr * kr;
            cvm_sq += cr * cr;
        }
        g.ks_rate = ks_sum / r_count;
        g.cvm_rate = cvm_sum / r_count;
        if (r_count > 1) {
            g.ks_se = std::sqrt(std::max(0.0, ks_sq / r_count - g.ks_rate * g.ks_rate) /
                                (r_count - 1));
            g.cvm_se = std::sqrt(std::max(0.0, cvm_sq / r_count - g.cvm_rate * g.cvm_rate) /
                                 (r_count - 1));
        }
        report.groups.push_back(g);
    }

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace {

ScenarioConfig desk_scenario(const std::string& name, CoefSetting setting,
                             RegressionModel model) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.n = 400;
    cfg.p = 200;
    cfg.precision.kind = PrecisionSpec::Kind::block_diagonal;
    cfg.precision.p = cfg.p;
    cfg.precision.block_size = 5;
    cfg.setting = setting;
    cfg.q = 5;
    cfg.regression = model;
    cfg.replicates = 200;
    cfg.l_draws = 1000;
    return cfg;
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& name) {
    if (name == "null_desk") {
        ScenarioConfig cfg = desk_scenario(name, CoefSetting::none, RegressionModel::r1);
        cfg.n = 200;
        cfg.p = 100;
        cfg.precision.p = 100;
        cfg.replicates = 500;
        return cfg;
    }
    if (name == "s1_q5_r1_desk") return desk_scenario(name, CoefSetting::s1, RegressionModel::r1);
    if (name == "s1_q5_r3_desk") return desk_scenario(name, CoefSetting::s1, RegressionModel::r3);
    if (name == "s1_q5_r4_desk") return desk_scenario(name, CoefSetting::s1, RegressionModel::r4);
    if (name == "s2_q5_r1_desk") return desk_scenario(name, CoefSetting::s2, RegressionModel::r1);
    if (name == "s2_q5_r3_desk") return desk_scenario(name, CoefSetting::s2, RegressionModel::r3);
    throw ConfigError("unknown scenario: " + name);
}

std::vector<std::string> builtin_scenario_names() {
    return {"null_desk",    "s1_q5_r1_desk", "s1_q5_r3_desk",
            "s1_q5_r4_desk", "s2_q5_r1_desk", "s2_q5_r3_desk"};
}

}  // namespace sda
