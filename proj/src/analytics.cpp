#include "fmom/analytics.hpp"

#include <iomanip>
#include <sstream>

namespace fmom {

namespace {

constexpr double kMaxCondition = 1e10;

std::string control_name(const PnlSeries& s, std::size_t index) {
    return s.meta.source.empty() ? "control[" + std::to_string(index) + "]" : s.meta.source;
}

[[noreturn]] void report_collinearity(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                                      double condition) {
    // Column 0 is the intercept. A constant control is collinear with it.
    std::ostringstream msg;
    msg << std::setprecision(6);
    for (Eigen::Index j = 1; j < X.cols(); ++j) {
        const Eigen::ArrayXd c = X.col(j).array() - X.col(j).mean();
        if (c.matrix().squaredNorm() <= 1e-24 * X.col(j).squaredNorm() || c.matrix().squaredNorm() == 0.0) {
            msg << "spanning_regression: rank-deficient controls: '" << names[j - 1]
                << "' is constant (collinear with the intercept); condition number " << condition;
            throw RankDeficientError(msg.str());
        }
    }
    double worst = -1.0;
    Eigen::Index wa = 1, wb = 1;
    for (Eigen::Index a = 1; a < X.cols(); ++a) {
        for (Eigen::Index b = a + 1; b < X.cols(); ++b) {
            const double r = std::abs(correlation(X.col(a), X.col(b)));
            if (r > worst) {
                worst = r;
                wa = a;
                wb = b;
            }
        }
    }
    msg << "spanning_regression: rank-deficient controls: '" << names[wa - 1] << "' and '" << names[wb - 1]
        << "' are collinear (|corr| = " << worst << ", condition number " << condition << ")";
    throw RankDeficientError(msg.str());
}

}  // namespace

PerfStats perf_stats(const PnlSeries& series) { return perf_stats(series.values); }

double correlation(const PnlSeries& a, const PnlSeries& b) {
    require_aligned(a.calendar, b.calendar, "correlation");
    return correlation(a.values, b.values);
}

RegressionResult spanning_regression(const PnlSeries& target, std::span<const PnlSeries> controls) {
    const Eigen::Index T = target.values.size();
    const auto k = static_cast<Eigen::Index>(controls.size());
    std::vector<std::string> names;
    for (std::size_t j = 0; j < controls.size(); ++j) {
        require_aligned(target.calendar, controls[j].calendar, "spanning_regression");
        names.push_back(control_name(controls[j], j));
    }

    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < T; ++t) {
        bool ok = !is_missing(target.values(t));
        for (const auto& c : controls) ok = ok && !is_missing(c.values(t));
        if (ok) rows.push_back(t);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n < k + 3) {
        throw UndefinedStatsError("spanning_regression: " + std::to_string(n) + " overlapping months for " +
                                  std::to_string(k) + " regressors (need " + std::to_string(k + 3) + ")");
    }

    Eigen::MatrixXd X(n, k + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index t = rows[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < k; ++j) X(i, j + 1) = controls[static_cast<std::size_t>(j)].values(t);
        y(i) = target.values(t);
    }

    // Normal equations on unit-norm columns; the scaling makes the
    // condition number a statement about collinearity, not units.
    Eigen::VectorXd norms = X.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < norms.size(); ++j)
        if (norms(j) == 0.0) norms(j) = 1.0;
    const Eigen::MatrixXd Xs = X * norms.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd gram = Xs.transpose() * Xs;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (condition > kMaxCondition) report_collinearity(X, names, condition);

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd coef = norms.cwiseInverse().asDiagonal() * ldlt.solve(Xs.transpose() * y);
    const Eigen::VectorXd fitted_resid = y - X * coef;
    const double ssr = fitted_resid.squaredNorm();
    const double sst = (y.array() - y.mean()).matrix().squaredNorm();

    RegressionResult out;
    out.n_obs = static_cast<int>(n);
    out.intercept = coef(0);
    out.betas = coef.tail(k);
    out.control_names = names;
    out.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    if (ssr <= 1e-24 * y.squaredNorm()) {
        throw UndefinedStatsError("spanning_regression: controls explain the target exactly; residual Sharpe undefined");
    }

    const double sigma2 = ssr / static_cast<double>(n - k - 1);
    const Eigen::MatrixXd cov_scaled = ldlt.solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
    out.beta_se.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) out.beta_se(j) = std::sqrt(sigma2 * cov_scaled(j + 1, j + 1)) / norms(j + 1);

    Eigen::VectorXd resid = Eigen::VectorXd::Constant(T, kMissing);
    for (Eigen::Index i = 0; i < n; ++i) resid(rows[static_cast<std::size_t>(i)]) = y(i) - X.rightCols(k).row(i).dot(out.betas);
    PnlMeta meta = target.meta;
    meta.stages.push_back("spanning_residual(intercept kept)");
    out.residuals = PnlSeries(target.calendar, std::move(resid), std::move(meta));
    out.residual_stats = perf_stats(out.residuals);
    return out;
}

}  // namespace fmom
