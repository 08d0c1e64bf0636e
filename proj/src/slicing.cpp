#include "sda/slicing.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace sda {

int default_h(int n) {
    if (n < 2) throw std::invalid_argument("default_h: need n >= 2");
    int h = 1;
    while (h * h * h < n) ++h;  // h = ceil(n^(1/3)) without float error
    h = std::max(h, 2);
    h = std::min(h, std::max(1, n / 2));
    return h;
}

namespace {

// Rank-based balanced slicing of `idx` (already the member rows of one
// stratum) into `h` slices starting at slice id `base`. First (m mod h)
// slices take the extra observation.
void slice_by_rank(const Eigen::VectorXd& values, std::vector<int> idx, int h, int base,
                   std::vector<int>& assignment, std::vector<int>& counts,
                   std::vector<double>& cuts, bool& tie_warning) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (values(a) != values(b)) return values(a) < values(b);
        return a < b;
    });
    const int m = static_cast<int>(idx.size());
    const int quota = m / h, extra = m % h;
    int pos = 0;
    for (int k = 0; k < h; ++k) {
        const int take = quota + (k < extra ? 1 : 0);
        for (int t = 0; t < take; ++t) assignment[idx[pos + t]] = base + k;
        counts[base + k] = take;
        pos += take;
        if (k + 1 < h) {
            cuts.push_back(values(idx[pos]));
            if (values(idx[pos - 1]) == values(idx[pos])) tie_warning = true;
        }
    }
}

}  // namespace

SlicePlan make_slices(const Outcome& y, int h) {
    const int n = y.size();
    if (h < 1) throw std::invalid_argument("make_slices: need h >= 1");
    if (h > n) throw std::invalid_argument("make_slices: h exceeds n");

    SlicePlan plan;
    plan.h_count = h;
    plan.kind = y.kind;
    plan.assignment.assign(n, -1);
    plan.counts.assign(h, 0);

    switch (y.kind) {
        case OutcomeKind::continuous: {
            std::vector<int> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            slice_by_rank(y.values, std::move(idx), h, 0, plan.assignment, plan.counts,
                          plan.cut_points, plan.tie_warning);
            break;
        }
        case OutcomeKind::categorical: {
            std::map<std::string, int> slice_of;  // sorted label order
            for (const auto& lab : y.labels) slice_of.emplace(lab, 0);
            if (static_cast<int>(slice_of.size()) != h)
                throw std::invalid_argument(
                    "make_slices: categorical h mismatch (distinct labels = " +
                    std::to_string(slice_of.size()) + ", h = " + std::to_string(h) + ")");
            int k = 0;
            for (auto& [lab, slice] : slice_of) {
                slice = k++;
                plan.slice_labels.push_back(lab);
            }
            for (int j = 0; j < n; ++j) {
                const int s = slice_of[y.labels[j]];
                plan.assignment[j] = s;
                ++plan.counts[s];
            }
            break;
        }
        case OutcomeKind::survival: {
            std::vector<int> censored, events;
            for (int j = 0; j < n; ++j)
                (y.events(j) == 0 ? censored : events).push_back(j);
            if (censored.empty() || events.empty())
                throw std::invalid_argument("make_slices: empty survival stratum");
            if (h < 2) throw std::invalid_argument("make_slices: survival needs h >= 2");

            // Largest-remainder apportionment with at least one slice per
            // stratum.
            const int n0 = static_cast<int>(censored.size());
            const int n1 = static_cast<int>(events.size());
            const double quota0 = static_cast<double>(h) * n0 / n;
            const double quota1 = static_cast<double>(h) * n1 / n;
            int h0 = static_cast<int>(quota0);
            int h1 = static_cast<int>(quota1);
            if (h0 + h1 < h) {
                if (quota0 - h0 >= quota1 - h1) ++h0; else ++h1;
            }
            if (h0 == 0) { ++h0; --h1; }
            if (h1 == 0) { ++h1; --h0; }
            if (h0 > n0) { h1 += h0 - n0; h0 = n0; }
            if (h1 > n1) { h0 += h1 - n1; h1 = n1; }
            if (h0 < 1 || h1 < 1 || h0 > n0 || h1 > n1)
                throw std::invalid_argument("make_slices: h too large for survival strata");
            plan.censored_slices = h0;
            slice_by_rank(y.values, censored, h0, 0, plan.assignment, plan.counts,
                          plan.censored_cuts, plan.tie_warning);
            slice_by_rank(y.values, events, h1, h0, plan.assignment, plan.counts,
                          plan.event_cuts, plan.tie_warning);
            break;
        }
    }
    return plan;
}

Eigen::MatrixXd indicator_matrix(const SlicePlan& plan) {
    const int n = static_cast<int>(plan.assignment.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, plan.h_count);
    for (int j = 0; j < n; ++j) g(j, plan.assignment[j]) = 1.0;
    return g;
}

}  // namespace sda
