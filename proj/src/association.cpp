#include "sda/association.hpp"

#include <cmath>
#include <stdexcept>

namespace sda {

Eigen::VectorXd estimate_sda(const Eigen::VectorXd& residuals, const SlicePlan& plan) {
    const int n = static_cast<int>(plan.assignment.size());
    if (residuals.size() != n) throw std::invalid_argument("estimate_sda: length mismatch");
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(plan.h_count);
    for (int j = 0; j < n; ++j) nu(plan.assignment[j]) += residuals(j);
    return nu / n;
}

Eigen::MatrixXd influence_matrix(const Eigen::VectorXd& residuals, const SlicePlan& plan,
                                 const Eigen::VectorXd& nu_hat) {
    const int n = static_cast<int>(plan.assignment.size());
    if (residuals.size() != n || nu_hat.size() != plan.h_count)
        throw std::invalid_argument("influence_matrix: dimension mismatch");
    Eigen::MatrixXd psi(n, plan.h_count);
    psi.rowwise() = -nu_hat.transpose();
    for (int j = 0; j < n; ++j) psi(j, plan.assignment[j]) += residuals(j);
    return psi;
}

Eigen::MatrixXd variance_estimate(const Eigen::MatrixXd& psi) {
    const int n = static_cast<int>(psi.rows());
    if (n < 2) throw std::invalid_argument("variance_estimate: need n >= 2");
    Eigen::MatrixXd omega = (psi.transpose() * psi) / n;
    omega = ((omega + omega.transpose()) / 2.0).eval();
    return omega;
}

Eigen::VectorXd z_scores(const Eigen::VectorXd& nu_hat, const Eigen::MatrixXd& omega_hat, int n,
                         std::vector<int>* degenerate) {
    const int h_count = static_cast<int>(nu_hat.size());
    Eigen::VectorXd z = Eigen::VectorXd::Zero(h_count);
    const double root_n = std::sqrt(static_cast<double>(n));
    int live = 0;
    for (int h = 0; h < h_count; ++h) {
        const double var = omega_hat(h, h);
        if (var < kVarianceFloor) {
            if (degenerate) degenerate->push_back(h);
            continue;
        }
        z(h) = root_n * nu_hat(h) / std::sqrt(var);
        ++live;
    }
    if (live == 0) throw std::runtime_error("z_scores: no variance signal (all slices degenerate)");
    return z;
}

SdaResult sda_summary(const Eigen::VectorXd& residuals, const SlicePlan& plan) {
    SdaResult r;
    r.n = static_cast<int>(residuals.size());
    r.h_count = plan.h_count;
    r.nu_hat = estimate_sda(residuals, plan);
    const Eigen::MatrixXd psi = influence_matrix(residuals, plan, r.nu_hat);
    r.omega_hat = variance_estimate(psi);
    r.z_scores = z_scores(r.nu_hat, r.omega_hat, r.n, &r.degenerate_slices);
    return r;
}

}  // namespace sda
