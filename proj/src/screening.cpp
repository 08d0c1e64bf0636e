#include "sda/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sda {

namespace {

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) < v(b); });
    Eigen::VectorXd ranks(n);
    int start = 0;
    while (start < n) {
        int end = start;
        while (end + 1 < n && v(idx[end + 1]) == v(idx[start])) ++end;
        const double avg = (start + end) / 2.0 + 1.0;  // 1-based average rank
        for (int k = start; k <= end; ++k) ranks(idx[k]) = avg;
        start = end + 1;
    }
    return ranks;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const int n = static_cast<int>(a.size());
    const double ma = a.mean(), mb = b.mean();
    double sab = 0, saa = 0, sbb = 0;
    for (int j = 0; j < n; ++j) {
        const double da = a(j) - ma, db = b(j) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0) throw DataError("correlation: constant target column");
    if (sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, CorrMethod method) {
    if (a.size() != b.size()) throw std::invalid_argument("correlation: length mismatch");
    if (method == CorrMethod::spearman) return pearson(average_ranks(a), average_ranks(b));
    return pearson(a, b);
}

namespace {

// Rank columns by |corr| with `target`, largest first, ties by smaller index.
std::vector<std::pair<int, double>> rank_by_correlation(const Dataset& d,
                                                        const Eigen::VectorXd& target,
                                                        int skip_index, CorrMethod method) {
    std::vector<std::pair<int, double>> ranked;
    const Eigen::VectorXd t =
        method == CorrMethod::spearman ? average_ranks(target) : target;
    for (int j = 0; j < d.p(); ++j) {
        if (j == skip_index) continue;
        const Eigen::VectorXd c =
            method == CorrMethod::spearman ? average_ranks(d.x.col(j)) : Eigen::VectorXd(d.x.col(j));
        ranked.emplace_back(j, std::abs(pearson(t, c)));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

}  // namespace

ScreenSet sis_screen(const Dataset& d, int i, double gamma, CorrMethod method) {
    if (i < 0 || i >= d.p()) throw std::invalid_argument("sis_screen: index out of range");
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("sis_screen: gamma not in (0,1)");
    if (d.n() < 3) throw std::invalid_argument("sis_screen: need n >= 3");

    const auto ranked = rank_by_correlation(d, d.x.col(i), i, method);
    const int keep = std::min(static_cast<int>(std::floor(gamma * (d.n() - 1))),
                              static_cast<int>(ranked.size()));
    ScreenSet s;
    s.target_index = i;
    s.gamma = gamma;
    for (int k = 0; k < keep; ++k) {
        s.kept.push_back(ranked[k].first);
        s.correlations.push_back(ranked[k].second);
    }
    return s;
}

std::vector<int> outcome_screen(const Dataset& d, int keep, CorrMethod method) {
    if (keep < 1 || keep > d.p()) throw std::invalid_argument("outcome_screen: bad keep count");
    if (d.y.kind == OutcomeKind::categorical)
        throw std::invalid_argument("outcome_screen: needs a numeric outcome");

    const auto ranked = rank_by_correlation(d, d.y.values, -1, method);
    std::vector<int> kept;
    for (int k = 0; k < keep; ++k) kept.push_back(ranked[k].first);
    return kept;
}

FdrReport bh_adjust(const std::vector<double>& p_values, double q) {
    const int m = static_cast<int>(p_values.size());
    if (m == 0) throw std::invalid_argument("bh_adjust: empty p-value list");
    if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("bh_adjust: q not in (0,1)");
    for (double p : p_values)
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("bh_adjust: p-values must be in (0,1]");

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (p_values[a] != p_values[b]) return p_values[a] < p_values[b];
        return a < b;
    });

    FdrReport report;
    report.q = q;
    report.p_values = p_values;

    int k = 0;
    for (int r = 1; r <= m; ++r)
        if (p_values[order[r - 1]] <= static_cast<double>(r) * q / m) k = r;
    report.threshold_rank = k;
    for (int r = 0; r < k; ++r) report.rejected.push_back(order[r]);
    std::sort(report.rejected.begin(), report.rejected.end());

    // adjusted p: cumulative minimum of m*p_(r)/r from the largest down
    report.adjusted.assign(m, 1.0);
    double running = 1.0;
    for (int r = m; r >= 1; --r) {
        running = std::min(running, std::min(1.0, p_values[order[r - 1]] * m / r));
        report.adjusted[order[r - 1]] = running;
    }
    return report;
}

}  // namespace sda
