#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sda/dataset.hpp"

namespace sda {

// Partition of the n observations into H slices. `assignment` is 0-based
// (slice ids 0..h_count-1); serialized forms use 1-based ids.
//
// For continuous outcomes the slices are rank-based and balanced: when H
// does not divide n the first (n mod H) slices take one extra observation.
// Tied outcome values may straddle a boundary by rank; `tie_warning` is set
// when that happens.
struct SlicePlan {
    int h_count = 0;
    OutcomeKind kind = OutcomeKind::continuous;
    std::vector<int> assignment;
    std::vector<int> counts;

    // boundary descriptions, by kind
    std::vector<double> cut_points;         // continuous: interior cuts, length H-1
    std::vector<std::string> slice_labels;  // categorical: label per slice
    int censored_slices = 0;                // survival: slices given to the delta=0 stratum
    std::vector<double> censored_cuts;      // survival: interior cuts within each stratum
    std::vector<double> event_cuts;

    bool tie_warning = false;
};

// Default slice count ceil(n^(1/3)), clamped to [2, n/2] so every slice can
// hold at least two observations.
int default_h(int n);

SlicePlan make_slices(const Outcome& y, int h);

// n x H matrix of slice-membership indicators; each row sums to 1.
Eigen::MatrixXd indicator_matrix(const SlicePlan& plan);

}  // namespace sda
