#include <doctest.h>

#include <cmath>

#include "sda/inference.hpp"
#include "sda/simgen.hpp"
#include "support/oracles.hpp"

using namespace sda;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.begin(), v.size());
}

BootstrapDraws draws_of(std::vector<double> values) {
    BootstrapDraws d;
    d.statistics = std::move(values);
    return d;
}

// Null dataset with iid standard-normal predictors and noise outcome.
Dataset null_dataset(int n, int p, std::uint64_t seed) {
    Dataset d;
    d.x = sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, seed);
    d.y.kind = OutcomeKind::continuous;
    Rng rng = make_rng(derive_seed(seed, 7));
    std::normal_distribution<double> normal;
    d.y.values.resize(n);
    for (int i = 0; i < n; ++i) d.y.values(i) = normal(rng);
    return center_columns(d);
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("ks statistic is the max absolute z over live slices") {
    CHECK(ks_statistic(vec({1.0, -2.5, 0.3})) == 2.5);
    CHECK(ks_statistic(vec({0, 0, 0})) == 0.0);
    CHECK(ks_statistic(vec({1.0, -2.5, 0.3}), {1}) == 1.0);  // degenerate slice excluded
    CHECK_THROWS_AS(ks_statistic(vec({1.0}), {0}), std::runtime_error);
}

TEST_CASE("cvm statistic is the mean absolute z over the full slice count") {
    CHECK(cvm_statistic(vec({1.0, -2.5, 0.3})) == doctest::Approx(3.8 / 3).epsilon(1e-15));
    CHECK(cvm_statistic(vec({0.7, 0.7, 0.7})) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(cvm_statistic(vec({-0.7})) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("cvm never exceeds ks") {
    Rng rng = make_rng(31);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 200; ++rep) {
        const int h = 1 + static_cast<int>(rng() % 8);
        Eigen::VectorXd z(h);
        for (int k = 0; k < h; ++k) z(k) = 3 * normal(rng);
        CHECK(cvm_statistic(z) <= ks_statistic(z) + 1e-15);
    }
    // equality iff all |z| equal
    CHECK(cvm_statistic(vec({2, -2, 2})) == ks_statistic(vec({2, -2, 2})));
}

TEST_CASE("zero influence matrix gives all-zero draws") {
    const Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(10, 3);
    const Eigen::VectorXd omega_diag = Eigen::VectorXd::Ones(3);
    const BootstrapDraws d = multiplier_bootstrap(psi, omega_diag, StatKind::ks, 50, 99);
    for (double s : d.statistics) CHECK(s == 0.0);
}

TEST_CASE("bootstrap draws are deterministic given the seed") {
    Rng rng = make_rng(32);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd psi(20, 3);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 3; ++j) psi(i, j) = normal(rng);
    const Eigen::VectorXd omega_diag = (psi.transpose() * psi).diagonal() / 20;

    const BootstrapDraws a = multiplier_bootstrap(psi, omega_diag, StatKind::ks, 100, 1234);
    const BootstrapDraws b = multiplier_bootstrap(psi, omega_diag, StatKind::ks, 100, 1234);
    CHECK(a.statistics == b.statistics);
    const BootstrapDraws c = multiplier_bootstrap(psi, omega_diag, StatKind::ks, 100, 1235);
    CHECK(a.statistics != c.statistics);
}

TEST_CASE("raw simulated processes reproduce omega (small-scale covariance check)") {
    Rng rng = make_rng(33);
    std::normal_distribution<double> normal;
    const int n = 40, h = 3, l_draws = 20000;
    std::vector<int> assignment(n);
    for (int j = 0; j < n; ++j) assignment[j] = j % h;
    SlicePlan plan;
    plan.h_count = h;
    plan.assignment = assignment;
    plan.counts.assign(h, 0);
    for (int a : assignment) ++plan.counts[a];

    Eigen::VectorXd z(n);
    for (int j = 0; j < n; ++j) z(j) = normal(rng) + 0.5;
    const Eigen::VectorXd nu = estimate_sda(z, plan);
    const Eigen::MatrixXd psi = influence_matrix(z, plan, nu);
    const Eigen::MatrixXd omega = variance_estimate(psi);

    Eigen::MatrixXd mean_outer = Eigen::MatrixXd::Zero(h, h);
    for (int l = 0; l < l_draws; ++l) {
        Rng draw_rng = make_rng(derive_seed(77, l));
        const Eigen::VectorXd phi = simulated_process(psi, draw_rng);
        mean_outer += phi * phi.transpose();
    }
    mean_outer /= l_draws;

    for (int a = 0; a < h; ++a)
        for (int b = 0; b < h; ++b) {
            const double se = std::sqrt(
                (omega(a, a) * omega(b, b) + omega(a, b) * omega(a, b)) / l_draws);
            CHECK(std::abs(mean_outer(a, b) - omega(a, b)) <= 4 * se);
        }
}

TEST_CASE("p-value uses the add-one estimator") {
    std::vector<double> draws(999);
    for (int i = 0; i < 999; ++i) draws[i] = i + 1;
    const BootstrapDraws d = draws_of(draws);
    CHECK(p_value(1000.0, d) == doctest::Approx(1.0 / 1000).epsilon(1e-15));
    CHECK(p_value(0.0, d) == 1.0);
    const double mid = p_value(500.0, d);
    CHECK(mid >= 0.49);
    CHECK(mid <= 0.52);
}

TEST_CASE("p-value is monotone non-increasing in the statistic") {
    Rng rng = make_rng(34);
    std::uniform_real_distribution<double> unif(0, 5);
    std::vector<double> values(200);
    for (auto& v : values) v = unif(rng);
    const BootstrapDraws d = draws_of(values);
    double prev = 2.0;
    for (double s = 0.0; s <= 5.0; s += 0.05) {
        const double p = p_value(s, d);
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
}

TEST_CASE("critical value is the ceil((1-alpha)L) order statistic") {
    std::vector<double> draws(100);
    for (int i = 0; i < 100; ++i) draws[i] = i + 1;
    CHECK(critical_value(draws_of(draws), 0.05) == 95.0);
    CHECK(critical_value(draws_of(std::vector<double>(37, 3.25)), 0.10) == 3.25);

    // alpha = 0.5 on symmetric draws sits at the median
    std::vector<double> sym;
    for (int i = -50; i <= 50; ++i) sym.push_back(10.0 + i * 0.01);
    CHECK(critical_value(draws_of(sym), 0.5) == doctest::Approx(10.0).epsilon(1e-12));

    CHECK_THROWS_AS(critical_value(draws_of(draws), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(critical_value(draws_of(draws), 1.0), std::invalid_argument);
}

TEST_CASE("rejection consistency between statistic, critical value, and p-value") {
    Rng rng = make_rng(35);
    std::uniform_real_distribution<double> unif(0, 1);
    for (int rep = 0; rep < 50; ++rep) {
        const int l = 20 + static_cast<int>(rng() % 500);
        std::vector<double> values(l);
        for (auto& v : values) v = unif(rng);
        const BootstrapDraws d = draws_of(values);
        const double alpha = 0.01 + 0.2 * unif(rng);
        const double cv = critical_value(d, alpha);
        for (double s : {0.0, 0.3, cv, cv + 1e-9, 0.99, 2.0}) {
            if (s > cv) CHECK(p_value(s, d) <= alpha + 1.0 / (l + 1));
            if (p_value(s, d) < alpha) CHECK(s > cv);
        }
    }
}

TEST_CASE("residual-level pipeline matches the straight-line reimplementation") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng = make_rng(seed * 100);
        std::normal_distribution<double> normal;
        const int n = 50, h = 4, l_draws = 500;
        const double alpha = 0.05;

        std::vector<int> assignment(n);
        for (int j = 0; j < n; ++j) assignment[j] = j % h;
        SlicePlan plan;
        plan.h_count = h;
        plan.assignment = assignment;
        plan.counts.assign(h, 0);
        for (int a : assignment) ++plan.counts[a];

        Eigen::VectorXd z(n);
        for (int j = 0; j < n; ++j) z(j) = normal(rng) + 0.4;

        const auto [ks, cvm] = test_with_residuals(z, plan, l_draws, alpha, seed);
        const auto naive = oracle::naive_pipeline(std::vector<double>(z.data(), z.data() + n),
                                                  assignment, h, l_draws, alpha, seed);

        CHECK(ks.statistic == doctest::Approx(naive.t_ks).epsilon(1e-12));
        CHECK(cvm.statistic == doctest::Approx(naive.t_cvm).epsilon(1e-12));
        CHECK(ks.critical_value == doctest::Approx(naive.ks_critical).epsilon(1e-10));
        CHECK(cvm.critical_value == doctest::Approx(naive.cvm_critical).epsilon(1e-10));
        CHECK(ks.p_value == naive.ks_p);
        CHECK(cvm.p_value == naive.cvm_p);

        // the p-value branch of the rejection rule never fires on its own
        CHECK(ks.rejected == (ks.statistic > ks.critical_value));
        CHECK(cvm.rejected == (cvm.statistic > cvm.critical_value));
    }
}

TEST_CASE("test_variable is deterministic and isolated per variable") {
    const Dataset d = null_dataset(80, 6, 42);
    const TestOutcome a = test_variable(d, 2, StatKind::cvm, 4, 200, 0.05, std::nullopt, 9);
    const TestOutcome b = test_variable(d, 2, StatKind::cvm, 4, 200, 0.05, std::nullopt, 9);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
    CHECK(a.critical_value == b.critical_value);

    // outcome for variable 2 does not depend on testing other variables first
    test_variable(d, 5, StatKind::cvm, 4, 200, 0.05, std::nullopt, 9);
    const TestOutcome c = test_variable(d, 2, StatKind::cvm, 4, 200, 0.05, std::nullopt, 9);
    CHECK(a.statistic == c.statistic);
    CHECK(a.p_value == c.p_value);

    // ks component of the combined call equals the single-kind call
    const auto [ks, cvm] = test_variable_both(d, 2, 4, 200, 0.05, std::nullopt, 9);
    const TestOutcome ks_only = test_variable(d, 2, StatKind::ks, 4, 200, 0.05, std::nullopt, 9);
    CHECK(ks.statistic == ks_only.statistic);
    CHECK(ks.p_value == ks_only.p_value);
    CHECK(cvm.statistic == a.statistic);
}

TEST_CASE("null calibration holds at alpha = 0.05") {
    int ks_rejections = 0, cvm_rejections = 0;
    const int replicates = 500;
    for (int rep = 0; rep < replicates; ++rep) {
        const Dataset d = null_dataset(100, 5, 5000 + rep);
        const auto [ks, cvm] =
            test_variable_both(d, 0, default_h(100), 1000, 0.05, std::nullopt, rep);
        ks_rejections += ks.rejected;
        cvm_rejections += cvm.rejected;
    }
    CHECK(static_cast<double>(ks_rejections) / replicates <= 0.07);
    CHECK(static_cast<double>(cvm_rejections) / replicates <= 0.07);
}

TEST_CASE("strong linear signal is detected") {
    int rejections = 0;
    const int replicates = 40;
    for (int rep = 0; rep < replicates; ++rep) {
        const std::uint64_t seed = 9000 + rep;
        Dataset d;
        d.x = sample_gaussian(block_precision(20, 5), 400, seed);
        Rng rng = make_rng(derive_seed(seed, 3));
        std::normal_distribution<double> normal;
        d.y.kind = OutcomeKind::continuous;
        d.y.values.resize(400);
        for (int i = 0; i < 400; ++i) d.y.values(i) = d.x(i, 0) + normal(rng);
        d = center_columns(d);

        const TestOutcome cvm =
            test_variable(d, 0, StatKind::cvm, default_h(400), 500, 0.05, std::nullopt, seed);
        rejections += cvm.rejected;
    }
    CHECK(static_cast<double>(rejections) / replicates >= 0.9);
}

TEST_CASE("survival and categorical outcomes flow through the full test") {
    Rng rng = make_rng(37);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0, 1);
    const int n = 120, p = 6;

    Dataset surv;
    surv.x = sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 88);
    surv.y.kind = OutcomeKind::survival;
    surv.y.values.resize(n);
    surv.y.events.resize(n);
    for (int i = 0; i < n; ++i) {
        surv.y.values(i) = std::exp(surv.x(i, 1) + 0.5 * normal(rng));
        surv.y.events(i) = unif(rng) < 0.3 ? 0 : 1;
    }
    surv = center_columns(surv);
    const auto [sks, scvm] = test_variable_both(surv, 1, 4, 300, 0.05, std::nullopt, 11);
    CHECK(scvm.p_value > 0.0);
    CHECK(scvm.h_count == 4);
    CHECK(scvm.rejected);  // strong signal on column 1

    Dataset cat;
    cat.x = sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 89);
    cat.y.kind = OutcomeKind::categorical;
    for (int i = 0; i < n; ++i)
        cat.y.labels.push_back(cat.x(i, 2) > 0 ? "high" : "low");
    cat = center_columns(cat);
    const auto [cks, ccvm] = test_variable_both(cat, 2, 2, 300, 0.05, std::nullopt, 12);
    CHECK(ccvm.rejected);
    const auto [nks, ncvm] = test_variable_both(cat, 3, 2, 300, 0.05, std::nullopt, 13);
    CHECK(ncvm.p_value > 0.05);  // null column
}

TEST_CASE("degenerate variance raises a hard error") {
    Dataset d;
    d.x.resize(20, 2);
    Rng rng = make_rng(36);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 20; ++i) d.x(i, 0) = normal(rng);
    d.x.col(1) = 2.0 * d.x.col(0);  // perfectly collinear pair
    d.y.kind = OutcomeKind::continuous;
    d.y.values.resize(20);
    for (int i = 0; i < 20; ++i) d.y.values(i) = normal(rng);
    d = center_columns(d);
    CHECK_THROWS_AS(test_variable(d, 1, StatKind::ks, 2, 50, 0.05, std::nullopt, 1),
                    std::runtime_error);
}

}  // TEST_SUITE
