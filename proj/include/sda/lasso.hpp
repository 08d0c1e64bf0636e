#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "sda/dataset.hpp"

namespace sda {

// One penalized least-squares fit: minimize (1/n)||y - X b||^2 + lambda*||b||_1.
struct LassoFit {
    int target_index = -1;          // global column index (set by nodewise_fit)
    std::vector<int> conditioning;  // global column index per coefficient entry
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    Eigen::VectorXd residuals;
    std::vector<int> active_set;    // positions into `coefficients` with nonzero value
    double objective_value = 0.0;
    double l1_norm = 0.0;
    // Set when the target is (numerically) an exact linear combination of the
    // conditioning columns and the penalty was dropped to absorb it. The
    // residual then carries no variance signal and downstream tests fail
    // loudly instead of dividing by zero.
    bool exact_fit = false;
};

struct CvReport {
    std::vector<double> lambda_path;  // descending
    Eigen::MatrixXd cv_errors;        // path_length x folds, per-fold MSE
    std::vector<double> mean_errors;  // pooled out-of-fold MSE per lambda
    double chosen_lambda = 0.0;
    int fold_count = 0;
    std::uint64_t seed = 0;
};

// Cyclic coordinate descent with covariance-style updates: X'y and the
// diagonal of X'X are precomputed, Gram columns are cached lazily as
// variables activate, and X'Xb is maintained incrementally. Convergence is
// declared when the largest per-sweep coefficient change falls below
// 1e-7*(1+||b||_inf); more than 10,000 sweeps is an error.
class CoordinateDescent {
  public:
    CoordinateDescent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

    // Solve at `lambda`, warm-starting from the current coefficients. When
    // `polish` is set the solver keeps sweeping until the exact KKT
    // residuals are within the returned-fit contract; fold fits inside
    // cross-validation skip that and stop on the coefficient-change rule.
    void solve(double lambda, std::vector<double>* sweep_objectives = nullptr,
               bool polish = true);

    const Eigen::VectorXd& beta() const { return beta_; }
    void set_beta(const Eigen::VectorXd& b);
    double lambda_max() const { return lambda_max_; }
    double objective(double lambda) const;
    Eigen::VectorXd residual() const;

  private:
    void refresh_xtxb();
    const Eigen::VectorXd& gram_col(int j);
    bool factor_append(int j);
    bool factor_sync(const std::vector<int>& active);
    bool newton_jump(const std::vector<int>& active, double lambda);

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    int n_, p_;
    double y_sq_;
    double lambda_max_;
    Eigen::VectorXd xty_;      // X'y
    Eigen::VectorXd col_sq_;   // diag(X'X)
    Eigen::VectorXd beta_;
    Eigen::VectorXd xtxb_;     // X'Xb, maintained incrementally
    std::vector<Eigen::VectorXd> gram_;
    std::vector<char> gram_ready_;
    // Incremental Cholesky of the active-set Gram block. Grows by bordering
    // as coordinates activate; any removal rebuilds it. Shared across the
    // lambda path, where the active set is nearly monotone.
    Eigen::MatrixXd chol_;
    std::vector<int> chol_members_;  // coordinate per factor row, insertion order
    std::vector<int> chol_pos_;     // coordinate -> factor row, or -1
};

LassoFit fit_lasso(const Eigen::MatrixXd& x_others, const Eigen::VectorXd& x_target,
                   double lambda);

// Ten-fold (by default) cross-validation over a geometric lambda path from
// lambda_max down to ratio*lambda_max (ratio 1e-3, or 1e-2 when n < p).
// Folds are a seeded random partition into near-equal blocks; fits are
// warm-started along the path; the chosen lambda minimizes the pooled
// out-of-fold squared prediction error, ties broken toward the smaller
// lambda.
CvReport cv_select_lambda(const Eigen::MatrixXd& x_others, const Eigen::VectorXd& x_target,
                          int folds = 10, int path_length = 100, std::uint64_t seed = 0);

// Nodewise regression of column `i` on the remaining columns (or on
// `screen`, which must exclude `i`): lambda by cross-validation, then a full
// fit at the chosen lambda. The fold-partition RNG is seeded seed^i so fits
// for distinct targets are independent and order-insensitive.
LassoFit nodewise_fit(const Dataset& d, int i,
                      const std::optional<std::vector<int>>& screen = std::nullopt,
                      int folds = 10, std::uint64_t seed = 0);

}  // namespace sda
