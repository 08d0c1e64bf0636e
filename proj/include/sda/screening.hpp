#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sda/dataset.hpp"

namespace sda {

enum class CorrMethod { pearson, spearman };

// SIS conditioning set for one target: the floor(gamma*(n-1)) columns with
// the largest |corr(X_i, X_j)|, ties broken toward the smaller index.
struct ScreenSet {
    int target_index = -1;
    double gamma = 0.0;
    std::vector<int> kept;             // ranked, |corr| non-increasing
    std::vector<double> correlations;  // |corr| per kept entry
};

// Benjamini-Hochberg step-up report over m p-values.
struct FdrReport {
    double q = 0.1;
    std::vector<double> p_values;  // input order
    std::vector<double> adjusted;  // BH-adjusted, input order
    std::vector<int> rejected;     // indices into p_values
    int threshold_rank = 0;        // k in the step-up rule
};

// Pearson correlation; Spearman is Pearson on average ranks. A zero-variance
// `b` yields 0; a zero-variance `a` (the target) is the caller's error.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, CorrMethod method);

ScreenSet sis_screen(const Dataset& d, int i, double gamma, CorrMethod method);

// Top `keep` predictors by |corr(X_j, Y)|, ranked. Used to pre-select test
// candidates; conditioning sets downstream still draw from all columns.
std::vector<int> outcome_screen(const Dataset& d, int keep, CorrMethod method);

FdrReport bh_adjust(const std::vector<double>& p_values, double q);

}  // namespace sda
