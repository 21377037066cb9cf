#ifndef CVLAB_OLS_HPP
#define CVLAB_OLS_HPP

#include <cstddef>

#include <Eigen/Dense>

namespace cvlab {

/// XᵀX with condition number above this is treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// Leverages at or above 1 - kLeverageMargin make leave-one-out undefined.
inline constexpr double kLeverageMargin = 1e-10;

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd xtx_inv;
    Eigen::VectorXd residuals;
    Eigen::VectorXd leverages;  // diagonal of H = X (XᵀX)⁻¹ Xᵀ
    double rss = 0.0;
    double hat_trace = 0.0;
    double condition = 1.0;  // condition number of XᵀX
};

/// Least squares without intercept. Throws SingularityError if n < d or the
/// condition number of XᵀX exceeds kConditionLimit; there is no fallback ridge.
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Full hat matrix X (XᵀX)⁻¹ Xᵀ.
Eigen::MatrixXd hat_matrix(const Eigen::MatrixXd& X);

/// Leave-one-out risk from one fit: (1/n) Σ r_i² / (1 - H_ii)².
double loo_ols_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
double loo_ols_closed_form(const OlsFit& fit);

/// (1/n) Σ r_i² / (1 - H_ii), the single-power denominator variant. Kept for
/// comparison only; it does not equal the leave-one-out risk.
double loo_ols_single_power(const OlsFit& fit);

/// (1/n) RSS / (1 - trace(H)/n)².
double gcv_ols(double hat_trace, double residual_sum_sq, std::size_t n);

/// RSS / (n - trace(H)), the single-power trace-denominator variant.
double gcv_trace_display(double hat_trace, double residual_sum_sq, std::size_t n);

/// (XᵀX - X_removedᵀ X_removed)⁻¹ from (XᵀX)⁻¹ by the Woodbury identity.
/// Throws SingularityError when the downdated matrix is singular.
Eigen::MatrixXd woodbury_downdate(const Eigen::MatrixXd& xtx_inv, const Eigen::MatrixXd& removed_rows);

}  // namespace cvlab

#endif  // CVLAB_OLS_HPP
