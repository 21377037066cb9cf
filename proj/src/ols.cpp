#include "cvlab/ols.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cvlab/error.hpp"

namespace cvlab {

namespace {

double condition_of_gram(const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || !(hi > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

}  // namespace

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (y.size() != n) throw ShapeError("design and response sizes differ");
    if (d == 0) throw ShapeError("design has no columns");
    if (n < d)
        throw SingularityError("XᵀX is singular: " + std::to_string(n) + " rows for " + std::to_string(d) +
                               " columns");
    OlsFit fit;
    const Eigen::MatrixXd gram = X.transpose() * X;
    fit.condition = condition_of_gram(gram);
    if (!(fit.condition <= kConditionLimit)) {
        std::ostringstream msg;
        msg << "XᵀX is singular (condition number " << fit.condition << " > " << kConditionLimit << ")";
        throw SingularityError(msg.str());
    }
    // H = Q Qᵀ with X = QR, hence leverages are the squared row norms of Q.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    const auto Rtri = R.triangularView<Eigen::Upper>();
    fit.coefficients = Rtri.solve(Q.transpose() * y);
    const Eigen::MatrixXd Rinv = Rtri.solve(Eigen::MatrixXd::Identity(d, d));
    fit.xtx_inv = Rinv * Rinv.transpose();
    fit.residuals = y - X * fit.coefficients;
    fit.leverages = Q.rowwise().squaredNorm();
    fit.rss = fit.residuals.squaredNorm();
    fit.hat_trace = fit.leverages.sum();
    return fit;
}

Eigen::MatrixXd hat_matrix(const Eigen::MatrixXd& X) {
    const Eigen::VectorXd dummy = Eigen::VectorXd::Zero(X.rows());
    const OlsFit fit = fit_ols(X, dummy);
    return X * fit.xtx_inv * X.transpose();
}

double loo_ols_closed_form(const OlsFit& fit) {
    const auto n = fit.residuals.size();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = fit.leverages[i];
        if (h >= 1.0 - kLeverageMargin)
            throw DegenerateLeverageError("leverage of observation " + std::to_string(i) +
                                          " is 1; leave-one-out is undefined");
        const double r = fit.residuals[i] / (1.0 - h);
        sum += r * r;
    }
    return sum / static_cast<double>(n);
}

double loo_ols_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return loo_ols_closed_form(fit_ols(X, y));
}

double loo_ols_single_power(const OlsFit& fit) {
    const auto n = fit.residuals.size();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = fit.leverages[i];
        if (h >= 1.0 - kLeverageMargin)
            throw DegenerateLeverageError("leverage of observation " + std::to_string(i) + " is 1");
        sum += fit.residuals[i] * fit.residuals[i] / (1.0 - h);
    }
    return sum / static_cast<double>(n);
}

double gcv_ols(double hat_trace, double residual_sum_sq, std::size_t n) {
    const auto nn = static_cast<double>(n);
    if (n == 0 || !(hat_trace < nn))
        throw DegenerateSmootherError("GCV needs trace(H) < n (trace " + std::to_string(hat_trace) + ", n " +
                                      std::to_string(n) + ")");
    const double shrink = 1.0 - hat_trace / nn;
    return residual_sum_sq / nn / (shrink * shrink);
}

double gcv_trace_display(double hat_trace, double residual_sum_sq, std::size_t n) {
    const auto nn = static_cast<double>(n);
    if (n == 0 || !(hat_trace < nn)) throw DegenerateSmootherError("GCV needs trace(H) < n");
    return residual_sum_sq / (nn - hat_trace);
}

Eigen::MatrixXd woodbury_downdate(const Eigen::MatrixXd& xtx_inv, const Eigen::MatrixXd& removed_rows) {
    const auto d = xtx_inv.rows();
    if (xtx_inv.cols() != d || removed_rows.cols() != d) throw ShapeError("Woodbury operand shapes differ");
    const auto q = removed_rows.rows();
    if (q == 0) return xtx_inv;
    // (A - UᵀU)⁻¹ = A⁻¹ + A⁻¹Uᵀ (I - U A⁻¹ Uᵀ)⁻¹ U A⁻¹
    const Eigen::MatrixXd AinvUt = xtx_inv * removed_rows.transpose();
    Eigen::MatrixXd capacitance = -removed_rows * AinvUt;
    capacitance.diagonal().array() += 1.0;
    capacitance = 0.5 * (capacitance + capacitance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(capacitance, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    // Eigenvalues of the capacitance matrix are the factors by which the removal
    // shrinks XᵀX along each removed direction.
    if (!(smallest > 1.0 / kConditionLimit))
        throw SingularityError("downdated XᵀX is singular (capacitance eigenvalue " + std::to_string(smallest) +
                               ")");
    return xtx_inv + AinvUt * capacitance.ldlt().solve(AinvUt.transpose());
}

}  // namespace cvlab
