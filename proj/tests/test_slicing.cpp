#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "sda/rng.hpp"
#include "sda/slicing.hpp"

using namespace sda;

namespace {

Outcome continuous(std::initializer_list<double> values) {
    Outcome y;
    y.kind = OutcomeKind::continuous;
    y.values = Eigen::Map<const Eigen::VectorXd>(values.begin(), values.size());
    return y;
}

}  // namespace

TEST_SUITE("slicing") {

TEST_CASE("default_h follows ceil(n^(1/3)) with clamping") {
    CHECK(default_h(200) == 6);
    CHECK(default_h(400) == 8);
    CHECK(default_h(8) == 2);
    CHECK(default_h(27) == 3);
    CHECK(default_h(28) == 4);
    CHECK(default_h(1000) == 10);
    CHECK(default_h(4) == 2);
}

TEST_CASE("continuous slices are rank-balanced") {
    const SlicePlan plan = make_slices(continuous({3, 1, 2, 6, 5, 4}), 3);
    CHECK(plan.counts == std::vector<int>{2, 2, 2});
    // values {1,2} -> slice 0, {3,4} -> slice 1, {5,6} -> slice 2
    CHECK(plan.assignment == std::vector<int>{1, 0, 0, 2, 2, 1});
    CHECK_FALSE(plan.tie_warning);
    CHECK(plan.cut_points == std::vector<double>{3, 5});
}

TEST_CASE("remainder spreads over the first slices") {
    const SlicePlan plan = make_slices(continuous({5, 1, 4, 2, 3, 7, 6}), 3);  // n=7, H=3
    CHECK(plan.counts == std::vector<int>{3, 2, 2});
}

TEST_CASE("categorical labels slice in sorted order") {
    Outcome y;
    y.kind = OutcomeKind::categorical;
    y.labels = {"a", "b", "a", "c"};
    const SlicePlan plan = make_slices(y, 3);
    CHECK(plan.assignment == std::vector<int>{0, 1, 0, 2});
    CHECK(plan.counts == std::vector<int>{2, 1, 1});
    CHECK(plan.slice_labels == std::vector<std::string>{"a", "b", "c"});

    CHECK_THROWS_AS(make_slices(y, 2), std::invalid_argument);
}

TEST_CASE("survival apportionment is proportional with a floor of one") {
    Outcome y;
    y.kind = OutcomeKind::survival;
    y.values.resize(10);
    y.events.resize(10);
    // 4 censored, 6 events
    for (int i = 0; i < 10; ++i) {
        y.values(i) = i + 1;
        y.events(i) = i < 4 ? 0 : 1;
    }
    const SlicePlan plan = make_slices(y, 5);
    CHECK(plan.censored_slices == 2);
    // censored stratum: slices 0..1 of sizes 2,2; events: slices 2..4 of sizes 2,2,2
    CHECK(plan.counts == std::vector<int>{2, 2, 2, 2, 2});
    for (int i = 0; i < 4; ++i) CHECK(plan.assignment[i] < 2);
    for (int i = 4; i < 10; ++i) CHECK(plan.assignment[i] >= 2);

    Outcome all_events = y;
    all_events.events.setConstant(1);
    CHECK_THROWS_AS(make_slices(all_events, 5), std::invalid_argument);
}

TEST_CASE("indicator matrix rows sum to one, columns to counts") {
    SlicePlan plan;
    plan.h_count = 2;
    plan.assignment = {0, 1, 0};
    plan.counts = {2, 1};
    const Eigen::MatrixXd g = indicator_matrix(plan);
    CHECK(g.rows() == 3);
    CHECK(g.cols() == 2);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(2, 0) == 1.0);
    CHECK(g.sum() == 3.0);

    const SlicePlan one = make_slices(continuous({2, 1, 3}), 1);
    const Eigen::MatrixXd g1 = indicator_matrix(one);
    CHECK(g1.cols() == 1);
    CHECK(g1.sum() == 3.0);
}

TEST_CASE("ties straddling a boundary raise the tie flag") {
    const SlicePlan plan = make_slices(continuous({1, 1, 1, 1, 2, 2}), 3);
    CHECK(plan.tie_warning);
    CHECK(plan.counts == std::vector<int>{2, 2, 2});  // balance is preserved
}

TEST_CASE("properties: partition, monotone assignment, equivariance, determinism") {
    Rng rng = make_rng(42);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 5 + static_cast<int>(rng() % 200);
        const int h = 1 + static_cast<int>(rng() % std::min(n, 12));
        Outcome y;
        y.kind = OutcomeKind::continuous;
        y.values.resize(n);
        for (int i = 0; i < n; ++i)
            y.values(i) = rng() % 3 == 0 ? std::round(normal(rng) * 2) : normal(rng);

        const SlicePlan plan = make_slices(y, h);

        // partition: counts sum to n, every slice nonempty, balanced within 1
        CHECK(std::accumulate(plan.counts.begin(), plan.counts.end(), 0) == n);
        CHECK(*std::min_element(plan.counts.begin(), plan.counts.end()) >= 1);
        CHECK(*std::max_element(plan.counts.begin(), plan.counts.end()) -
                  *std::min_element(plan.counts.begin(), plan.counts.end()) <=
              1);

        // monotone in y
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (y.values(a) < y.values(b)) CHECK(plan.assignment[a] <= plan.assignment[b]);

        // column sums of the indicator equal counts
        const Eigen::MatrixXd g = indicator_matrix(plan);
        for (int k = 0; k < h; ++k) CHECK(g.col(k).sum() == doctest::Approx(plan.counts[k]));

        // determinism
        const SlicePlan again = make_slices(y, h);
        CHECK(again.assignment == plan.assignment);

        // permutation equivariance: reversing observations permutes assignments
        Outcome rev = y;
        rev.values = y.values.reverse();
        const SlicePlan rplan = make_slices(rev, h);
        bool equivariant = true;
        for (int a = 0; a < n; ++a) {
            // reversal swaps the stable tie order, so compare only where untied
            int same = 0;
            for (int b = 0; b < n; ++b) same += y.values(b) == y.values(a);
            if (same == 1 && rplan.assignment[n - 1 - a] != plan.assignment[a])
                equivariant = false;
        }
        CHECK(equivariant);
    }
}

TEST_CASE("make_slices rejects h > n") {
    CHECK_THROWS_AS(make_slices(continuous({1, 2}), 3), std::invalid_argument);
}

}  // TEST_SUITE
