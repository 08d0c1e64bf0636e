#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sda/inference.hpp"
#include "sda/screening.hpp"
#include "sda/simgen.hpp"

using namespace sda;

namespace {

Dataset dataset_from(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Dataset d;
    d.x = x;
    d.y.kind = OutcomeKind::continuous;
    d.y.values = y;
    d.column_means = Eigen::VectorXd::Zero(x.cols());
    return d;
}

}  // namespace

TEST_SUITE("screening") {

TEST_CASE("sis keeps everything when the quota covers p-1") {
    const int n = 40, p = 5;
    Dataset d = dataset_from(sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 1),
                             Eigen::VectorXd::Zero(n));
    const ScreenSet s = sis_screen(d, 2, 0.9, CorrMethod::pearson);  // floor(0.9*39)=35 >= 4
    CHECK(s.kept.size() == 4);
    const std::set<int> kept(s.kept.begin(), s.kept.end());
    CHECK(kept == std::set<int>{0, 1, 3, 4});
    CHECK(std::is_sorted(s.correlations.rbegin(), s.correlations.rend()));
}

TEST_CASE("gamma (n-2)/(n-1) keeps n-2 columns") {
    const int n = 30, p = 200;
    Dataset d = dataset_from(sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 2),
                             Eigen::VectorXd::Zero(n));
    const double gamma = static_cast<double>(n - 2) / (n - 1);
    const ScreenSet s = sis_screen(d, 0, gamma, CorrMethod::pearson);
    CHECK(s.kept.size() == n - 2);
}

TEST_CASE("sis ranking matches a brute-force double loop") {
    // planted correlations with column 0: strong, medium, weak, none, none
    const int n = 30;
    Eigen::MatrixXd base = sample_gaussian(Eigen::MatrixXd::Identity(6, 6), n, 3);
    Eigen::MatrixXd x = base;
    x.col(1) = 0.9 * base.col(0) + std::sqrt(1 - 0.81) * base.col(1);
    x.col(2) = 0.5 * base.col(0) + std::sqrt(1 - 0.25) * base.col(2);
    x.col(3) = 0.1 * base.col(0) + std::sqrt(1 - 0.01) * base.col(3);
    Dataset d = dataset_from(x, Eigen::VectorXd::Zero(n));

    const ScreenSet s = sis_screen(d, 0, 0.2, CorrMethod::pearson);  // keep floor(0.2*29)=5
    REQUIRE(s.kept.size() == 5);

    // brute-force ranking
    std::vector<std::pair<double, int>> ranked;
    for (int j = 1; j < 6; ++j) {
        double c = std::abs(correlation(x.col(0), x.col(j), CorrMethod::pearson));
        ranked.emplace_back(-c, j);
    }
    std::sort(ranked.begin(), ranked.end());
    for (int k = 0; k < 5; ++k) CHECK(s.kept[k] == ranked[k].second);
    CHECK(s.kept[0] == 1);
    CHECK(s.kept[1] == 2);
}

TEST_CASE("pearson is affine invariant, spearman is monotone invariant") {
    const int n = 50;
    Eigen::MatrixXd x = sample_gaussian(Eigen::MatrixXd::Identity(3, 3), n, 4);
    const Eigen::VectorXd a = x.col(0), b = x.col(1);

    const double base = correlation(a, b, CorrMethod::pearson);
    CHECK(correlation(a, (2.5 * b.array() - 7).matrix(), CorrMethod::pearson) ==
          doctest::Approx(base).epsilon(1e-12));

    const double rho = correlation(a, b, CorrMethod::spearman);
    CHECK(correlation(a, b.array().exp().matrix(), CorrMethod::spearman) ==
          doctest::Approx(rho).epsilon(1e-12));
}

TEST_CASE("outcome screen finds a perfectly correlated column first") {
    const int n = 25, p = 7;
    Eigen::MatrixXd x = sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 5);
    Dataset d = dataset_from(x, x.col(2));

    const auto kept = outcome_screen(d, 3, CorrMethod::pearson);
    CHECK(kept[0] == 2);

    const auto all = outcome_screen(d, p, CorrMethod::pearson);
    std::set<int> unique(all.begin(), all.end());
    CHECK(unique.size() == p);

    // spearman ranking unchanged under a monotone transform of the outcome
    Dataset warped = d;
    warped.y.values = d.y.values.array().exp();
    CHECK(outcome_screen(d, p, CorrMethod::spearman) ==
          outcome_screen(warped, p, CorrMethod::spearman));
}

TEST_CASE("constant target column is an error") {
    const int n = 20;
    Eigen::MatrixXd x = sample_gaussian(Eigen::MatrixXd::Identity(3, 3), n, 6);
    x.col(1).setConstant(4.0);
    Dataset d = dataset_from(x, Eigen::VectorXd::Zero(n));
    CHECK_THROWS_AS(sis_screen(d, 1, 0.5, CorrMethod::pearson), DataError);
}

TEST_CASE("bh step-up matches the hand example") {
    const FdrReport r = bh_adjust({0.001, 0.02, 0.03, 0.5}, 0.1);
    CHECK(r.threshold_rank == 3);
    CHECK(r.rejected == std::vector<int>{0, 1, 2});
    CHECK(r.adjusted[0] == doctest::Approx(0.004));
    // adjusted p for the second: min(4*0.02/2, 4*0.03/3, 4*0.5/4)... cumulative min
    CHECK(r.adjusted[1] == doctest::Approx(0.04));
    CHECK(r.adjusted[2] == doctest::Approx(0.04));
    CHECK(r.adjusted[3] == doctest::Approx(0.5));
}

TEST_CASE("bh rejects nothing when every p is 1 and reduces to a fixed test at m=1") {
    CHECK(bh_adjust({1.0, 1.0, 1.0}, 0.2).rejected.empty());
    const FdrReport single = bh_adjust({0.04}, 0.05);
    CHECK(single.rejected == std::vector<int>{0});
    CHECK(bh_adjust({0.06}, 0.05).rejected.empty());
}

TEST_CASE("bh monotonicity: shrinking a p-value never shrinks the rejection set") {
    Rng rng = make_rng(51);
    std::uniform_real_distribution<double> unif(0.001, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        const int m = 3 + static_cast<int>(rng() % 12);
        std::vector<double> p(m);
        for (auto& v : p) v = unif(rng);
        const FdrReport base = bh_adjust(p, 0.1);

        std::vector<double> shrunk = p;
        const int pick = static_cast<int>(rng() % m);
        shrunk[pick] *= 0.3;
        const FdrReport after = bh_adjust(shrunk, 0.1);

        const std::set<int> before_set(base.rejected.begin(), base.rejected.end());
        std::set<int> after_set(after.rejected.begin(), after.rejected.end());
        after_set.insert(pick);  // the shrunk index may newly enter
        for (int r : before_set) CHECK(after_set.count(r) == 1);
        CHECK(after.rejected.size() >= base.rejected.size());
    }
}

TEST_CASE("bh input validation") {
    CHECK_THROWS_AS(bh_adjust({}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(bh_adjust({0.0}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(bh_adjust({0.5}, 1.5), std::invalid_argument);
}

TEST_CASE("sure-screening smoke: strong neighbors survive the screen") {
    const int n = 200, p = 500;
    int all_found = 0;
    const int replicates = 100;
    for (int rep = 0; rep < replicates; ++rep) {
        Eigen::MatrixXd x = sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 7000 + rep);
        // column 0 = 0.6*x_17 - 0.5*x_330 + z
        Rng rng = make_rng(derive_seed(7000 + rep, 9));
        std::normal_distribution<double> normal;
        for (int i = 0; i < n; ++i)
            x(i, 0) = 0.6 * x(i, 17) - 0.5 * x(i, 330) + normal(rng);
        Dataset d = dataset_from(x, Eigen::VectorXd::Zero(n));

        const ScreenSet s = sis_screen(d, 0, 0.9, CorrMethod::pearson);
        const std::set<int> kept(s.kept.begin(), s.kept.end());
        if (kept.count(17) && kept.count(330)) ++all_found;
    }
    CHECK(all_found >= 95);
}

TEST_CASE("fdr meta-check: BH over the test pipeline controls false discoveries") {
    // all-null data; FDP is 1 when anything is rejected
    const int replicates = 120, p = 10, n = 60;
    double fdp_sum = 0.0;
    for (int rep = 0; rep < replicates; ++rep) {
        Dataset d;
        d.x = sample_gaussian(Eigen::MatrixXd::Identity(p, p), n, 40000 + rep);
        Rng rng = make_rng(derive_seed(40000 + rep, 3));
        std::normal_distribution<double> normal;
        d.y.kind = OutcomeKind::continuous;
        d.y.values.resize(n);
        for (int i = 0; i < n; ++i) d.y.values(i) = normal(rng);
        d = center_columns(d);

        std::vector<double> pvals;
        for (int i = 0; i < p; ++i)
            pvals.push_back(
                test_variable(d, i, StatKind::cvm, default_h(n), 400, 0.05, std::nullopt, rep)
                    .p_value);
        const FdrReport fdr = bh_adjust(pvals, 0.1);
        fdp_sum += fdr.rejected.empty() ? 0.0 : 1.0;
    }
    CHECK(fdp_sum / replicates <= 0.12);
}

}  // TEST_SUITE
