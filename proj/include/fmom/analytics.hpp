#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmom/errors.hpp"
#include "fmom/panel.hpp"

namespace fmom {

/// Monthly-sampled performance summary. Annualisation uses sqrt(12) and the
/// t statistic is the annual Sharpe times sqrt(years).
struct PerfStats {
    double sharpe_annual = 0.0;
    double t_stat = 0.0;
    int n_months = 0;
    double mean_monthly = 0.0;
    double vol_monthly = 0.0;
};

inline double t_stat_from_sharpe(double sharpe_annual, double n_months) {
    return sharpe_annual * std::sqrt(n_months / 12.0);
}

/// Missing points (NaN) are skipped. Throws UndefinedStatsError below two
/// observations or at zero volatility.
template <typename Derived>
PerfStats perf_stats(const Eigen::MatrixBase<Derived>& returns) {
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < returns.size(); ++i) {
        const double v = returns(i);
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    if (n < 2) throw UndefinedStatsError("perf_stats: need at least 2 observations, got " + std::to_string(n));
    const double mean = sum / n;
    double ss = 0.0, scale = 0.0;
    for (Eigen::Index i = 0; i < returns.size(); ++i) {
        const double v = returns(i);
        if (std::isnan(v)) continue;
        ss += (v - mean) * (v - mean);
        scale += v * v;
    }
    if (ss == 0.0 || ss <= 1e-24 * scale) throw UndefinedStatsError("perf_stats: zero volatility");
    PerfStats s;
    s.n_months = n;
    s.mean_monthly = mean;
    s.vol_monthly = std::sqrt(ss / (n - 1));
    s.sharpe_annual = mean / s.vol_monthly * std::sqrt(12.0);
    s.t_stat = t_stat_from_sharpe(s.sharpe_annual, n);
    return s;
}

PerfStats perf_stats(const PnlSeries& series);

/// Pearson correlation over the dates where both inputs are present.
template <typename DerivedA, typename DerivedB>
double correlation(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) throw Error("correlation: length mismatch");
    double sa = 0.0, sb = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::isnan(a(i)) || std::isnan(b(i))) continue;
        sa += a(i);
        sb += b(i);
        ++n;
    }
    if (n < 2) throw UndefinedStatsError("correlation: fewer than 2 overlapping observations");
    const double ma = sa / n, mb = sb / n;
    double saa = 0.0, sbb = 0.0, sab = 0.0, qa = 0.0, qb = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::isnan(a(i)) || std::isnan(b(i))) continue;
        saa += (a(i) - ma) * (a(i) - ma);
        sbb += (b(i) - mb) * (b(i) - mb);
        sab += (a(i) - ma) * (b(i) - mb);
        qa += a(i) * a(i);
        qb += b(i) * b(i);
    }
    if (saa == 0.0 || sbb == 0.0 || saa <= 1e-24 * qa || sbb <= 1e-24 * qb) {
        throw UndefinedStatsError("correlation: degenerate variance");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double correlation(const PnlSeries& a, const PnlSeries& b);

/// Full-sample OLS of a target PNL on control PNLs.
struct RegressionResult {
    Eigen::VectorXd betas;       // one slope per control
    Eigen::VectorXd beta_se;     // classical OLS standard errors
    double intercept = 0.0;
    PnlSeries residuals;         // target - sum(beta * control); intercept kept
    PerfStats residual_stats;
    double r_squared = 0.0;
    int n_obs = 0;
    std::vector<std::string> control_names;
};

/// Runs on the dates where the target and every control are present. The
/// residual keeps the intercept so its Sharpe measures unspanned alpha.
/// Throws RankDeficientError (naming the most collinear pair) when the
/// column-scaled normal matrix has condition number above 1e10, and
/// UndefinedStatsError when the controls explain the target exactly.
RegressionResult spanning_regression(const PnlSeries& target, std::span<const PnlSeries> controls);

/// f_t = (1 - rho) mu + rho f_{t-1} + u_t, u_t ~ N(0, sigma_u^2).
template <typename Scalar>
struct BasicAR1Params {
    Scalar rho{0};
    Scalar mu{0};
    Scalar sigma_u{1};

    Scalar stationary_variance() const { return sigma_u * sigma_u / (Scalar(1) - rho * rho); }

    void validate() const {
        using std::abs;
        if (!(abs(rho) < Scalar(1))) throw NonStationaryError("AR(1): |rho| must be < 1");
        if (sigma_u < Scalar(0)) throw ParameterError("AR(1): sigma_u must be >= 0");
    }

    /// Parameters whose stationary standard deviation is `sigma_f`.
    static BasicAR1Params with_stationary_vol(Scalar rho, Scalar mu, Scalar sigma_f) {
        using std::sqrt;
        return {rho, mu, sigma_f * sqrt(Scalar(1) - rho * rho)};
    }
};

using AR1Params = BasicAR1Params<double>;

/// Expected PNL of trading a single AR(1) factor on the sign-free product
/// f_{t-1} f_t, conditional on f_{t-1} and unconditionally.
template <typename Scalar>
struct AR1MomentumPnl {
    BasicAR1Params<Scalar> params;
    Scalar unconditional;

    Scalar conditional(Scalar f_prev) const {
        return params.rho * f_prev * f_prev + (Scalar(1) - params.rho) * params.mu * f_prev;
    }
};

template <typename Scalar>
AR1MomentumPnl<Scalar> ar1_momentum_pnl(const BasicAR1Params<Scalar>& p) {
    p.validate();
    return {p, p.rho * p.stationary_variance() + p.mu * p.mu};
}

}  // namespace fmom
