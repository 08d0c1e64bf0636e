#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sda/slicing.hpp"

namespace sda {

// Per-variable association summary: slice-wise mean residuals nu_hat, the
// influence covariance omega_hat, and standardized z-scores.
struct SdaResult {
    int target_index = -1;
    Eigen::VectorXd nu_hat;     // length H
    Eigen::MatrixXd omega_hat;  // H x H, symmetric PSD
    Eigen::VectorXd z_scores;   // length H, 0 at degenerate slices
    int n = 0;
    int h_count = 0;
    std::vector<int> degenerate_slices;  // slices with omega_hat(h,h) below floor
};

// Slice variances below this floor are degenerate: the z-score is pinned to
// 0 and the slice is excluded from the KS maximum.
constexpr double kVarianceFloor = 1e-12;

// nu_hat[h] = (1/n) * sum of residuals in slice h.
Eigen::VectorXd estimate_sda(const Eigen::VectorXd& residuals, const SlicePlan& plan);

// psi(j,h) = I(slice[j]=h)*residual[j] - nu_hat[h]; columns sum to zero.
Eigen::MatrixXd influence_matrix(const Eigen::VectorXd& residuals, const SlicePlan& plan,
                                 const Eigen::VectorXd& nu_hat);

// omega = (1/n) * psi' * psi, symmetrized.
Eigen::MatrixXd variance_estimate(const Eigen::MatrixXd& psi);

// z[h] = sqrt(n)*nu_hat[h]/sqrt(omega(h,h)); degenerate slices get z = 0 and
// are recorded. Throws if every slice is degenerate.
Eigen::VectorXd z_scores(const Eigen::VectorXd& nu_hat, const Eigen::MatrixXd& omega_hat, int n,
                         std::vector<int>* degenerate = nullptr);

// Full per-variable summary from residuals and a slice plan.
SdaResult sda_summary(const Eigen::VectorXd& residuals, const SlicePlan& plan);

}  // namespace sda
