#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmom/analytics.hpp"
#include "fmom/errors.hpp"
#include "fmom/panel.hpp"
#include "fmom/sampling.hpp"

namespace fmom {

/// Feedback-trading model of N stock returns:
///   r_t = mu + eps_t + A r_{t-1},   eps_t = e_t - rho e_{t-1},   e_t ~ N(0, Sigma),
/// with A = alpha w w' the price impact of flows chasing the factor w'r.
template <typename Scalar>
struct BasicModelParams {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Scalar alpha{0};
    Vector w;
    Vector mu;
    Scalar rho{0};
    Matrix sigma;

    Eigen::Index size() const { return w.size(); }

    /// Feedback strength alpha w'w, the only nonzero eigenvalue of A.
    Scalar a() const { return alpha * w.squaredNorm(); }
    Matrix A() const { return alpha * w * w.transpose(); }
    /// Factor innovation variance w' Sigma w.
    Scalar V() const { return w.dot(sigma * w); }
    /// Intercept of the factor recursion F_t = w'mu + a F_{t-1} + ..., i.e. w'mu.
    Scalar factor_drift() const { return w.dot(mu); }
    /// Unconditional mean of F_t, w'mu / (1 - a).
    Scalar factor_mean() const { return factor_drift() / (Scalar(1) - a()); }
    /// Unconditional mean of r_t, (I - A)^{-1} mu = mu + A mu / (1 - a).
    Vector stock_mean() const { return mu + A() * mu / (Scalar(1) - a()); }

    void validate() const {
        const Eigen::Index n = size();
        if (n < 1) throw ParameterError("model: w must be non-empty");
        if (mu.size() != n) throw ParameterError("model: mu has length " + std::to_string(mu.size()) + ", expected " + std::to_string(n));
        if (sigma.rows() != n || sigma.cols() != n) throw ParameterError("model: sigma must be N x N");
        if (!(alpha >= Scalar(0))) throw ParameterError("model: alpha must be >= 0");
        if (!(a() < Scalar(1))) throw NonStationaryError("model: a = alpha w'w must be < 1 for stationarity");
        using std::abs;
        const Scalar scale = sigma.cwiseAbs().maxCoeff();
        if (!((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * (scale + Scalar(1)))) {
            throw ParameterError("model: sigma is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -Scalar(1e-12) * (scale + Scalar(1))) {
            throw ParameterError("model: sigma is not positive semi-definite");
        }
    }

    template <typename Other>
    BasicModelParams<Other> cast() const {
        return {Other(alpha), w.template cast<Other>(), mu.template cast<Other>(), Other(rho),
                sigma.template cast<Other>()};
    }
};

using ModelParams = BasicModelParams<double>;

/// Builds and validates parameters; `normalize_w` rescales w to unit norm so
/// that a equals alpha.
ModelParams make_model_params(double alpha, Eigen::VectorXd w, Eigen::VectorXd mu, double rho, Eigen::MatrixXd sigma,
                              bool normalize_w = true);

/// Closed-form autocovariances Omega_k = Cov(r_t, r_{t-k}), k = 1..k_max.
template <typename Scalar>
struct BasicAutocovarianceSet {
    std::vector<typename BasicModelParams<Scalar>::Matrix> omegas;

    int k_max() const { return static_cast<int>(omegas.size()); }
    const auto& omega(int k) const { return omegas.at(static_cast<std::size_t>(k - 1)); }
};

using AutocovarianceSet = BasicAutocovarianceSet<double>;

template <typename Scalar>
BasicAutocovarianceSet<Scalar> closed_form_omega(const BasicModelParams<Scalar>& p, int k_max) {
    p.validate();
    if (k_max < 1) throw ParameterError("closed_form_omega: k_max must be >= 1");
    using Matrix = typename BasicModelParams<Scalar>::Matrix;
    const Scalar a = p.a(), rho = p.rho, one(1);
    const Matrix A = p.A();
    const Matrix AS = A * p.sigma;
    const Matrix ASA = AS * A;
    const Scalar tail = one + (a - rho) * a / (one - a * a);

    BasicAutocovarianceSet<Scalar> out;
    out.omegas.push_back((one - rho * (a - rho)) * AS - rho * p.sigma + (a - rho) * tail * ASA);
    Scalar a_pow = one;  // a^(k-2)
    for (int k = 2; k <= k_max; ++k) {
        out.omegas.push_back((a - rho) * (one - rho * a) * a_pow * AS + (a - rho) * a_pow * a * tail * ASA);
        a_pow *= a;
    }
    return out;
}

/// Expected lag-k factor momentum PNL E(F_{t-k} F_t), split into the
/// persistence term and the mechanical term coming from the factor premium.
template <typename Scalar>
struct Prop1 {
    Scalar momentum_term;    // V (a - rho)(1 - rho a) / (1 - a^2) a^(k-1)
    Scalar mechanical_term;  // (E F)^2 with E F = w'mu / (1 - a)
    Scalar drift_squared;    // (w'mu)^2, the mean term written with the recursion intercept
    Scalar total() const { return momentum_term + mechanical_term; }
};

template <typename Scalar>
Prop1<Scalar> prop1_factor_momentum(const BasicModelParams<Scalar>& p, int k) {
    p.validate();
    if (k < 1) throw ParameterError("prop1_factor_momentum: k must be >= 1");
    using std::pow;
    const Scalar a = p.a(), rho = p.rho, one(1);
    const Scalar term = p.V() * ((a - rho) * (one - rho * a) / (one - a * a)) * pow(a, k - 1);
    const Scalar mean = p.factor_mean();
    const Scalar drift = p.factor_drift();
    return {term, mean * mean, drift * drift};
}

/// Expected lag-k stock momentum PNL E(r_{t-k}' r_t).
template <typename Scalar>
struct Prop2 {
    Scalar flow_term;          // alpha V (...) from feedback trading
    Scalar reversal_term;      // -rho tr(Sigma) at k = 1, zero otherwise
    Scalar mean_term;          // m'm with m = (I - A)^{-1} mu
    Scalar literal_mean_term;  // mu'mu
    Scalar trace_value;        // tr(Omega_k) + m'm from the matrix formulas

    Scalar value() const { return flow_term + reversal_term + mean_term; }
    /// The simplified expression with mu'mu as the mean term.
    Scalar literal_value() const { return flow_term + reversal_term + literal_mean_term; }
};

template <typename Scalar>
Prop2<Scalar> prop2_stock_momentum(const BasicModelParams<Scalar>& p, int k) {
    p.validate();
    if (k < 1) throw ParameterError("prop2_stock_momentum: k must be >= 1");
    using std::pow;
    const Scalar a = p.a(), rho = p.rho, one(1);
    const Scalar aV = p.alpha * p.V();
    Prop2<Scalar> out;
    if (k == 1) {
        out.flow_term = aV * (one + (a - rho) * (a - rho) / (one - a * a));
        out.reversal_term = -rho * p.sigma.trace();
    } else {
        out.flow_term = aV * ((a - rho) * (one - rho * a) / (one - a * a)) * pow(a, k - 2);
        out.reversal_term = Scalar(0);
    }
    const auto m = p.stock_mean();
    out.mean_term = m.squaredNorm();
    out.literal_mean_term = p.mu.squaredNorm();
    out.trace_value = closed_form_omega(p, k).omega(k).trace() + out.mean_term;
    return out;
}

/// Seeded path generator. Starts at the stationary mean with no prior
/// innovation, so the moving-average expansion over the generated
/// innovations reproduces the path exactly.
class ModelSimulator {
public:
    ModelSimulator(const ModelParams& params, std::uint64_t seed);

    /// Advances one period and returns r_t.
    const Eigen::VectorXd& step();
    const Eigen::VectorXd& returns() const noexcept { return r_; }
    const Eigen::VectorXd& innovation() const noexcept { return e_; }
    double factor() const { return params_.w.dot(r_); }
    void discard(std::size_t periods);

private:
    ModelParams params_;
    Eigen::MatrixXd chol_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
    Eigen::VectorXd z_, e_, e_prev_, r_;
};

/// Simulated stock panel with its factor series F_t = w'r_t.
struct SimPath {
    ReturnPanel returns;
    NamedSeries factor;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
};

SimPath simulate(const ModelParams& params, std::size_t T, std::uint64_t seed, std::size_t burn_in = 500);

/// Reconstructs r_t from stored innovations with the truncated expansion
///   r_t = (I - A)^{-1} mu + e_t + (A - rho I) e_{t-1} + (a - rho) sum_{k=2}^{depth} a^(k-2) A e_{t-k}
/// and compares against the recursion.
struct ReturnSolutionCheck {
    double max_deviation = 0.0;
    double tail_bound = 0.0;  // bound on the truncation error of the omitted terms
    int depth = 0;
};

ReturnSolutionCheck return_solution_check(const ModelParams& params, std::uint64_t seed, std::size_t T,
                                          int depth = 200);

/// Draws a stationary AR(1) path of length T.
Eigen::VectorXd simulate_ar1(const AR1Params& params, std::size_t T, std::uint64_t seed);

/// Single-factor economy r_t = beta f_t + e_t with unmanaged momentum PNLs
/// pi^F = fbar f and pi^S = rbar' r (bars: (m, n) trailing sums). Both sides
/// of cov(pi^F, pi^S) = beta'beta var(pi^F) are estimated on one path.
struct SingleFactorCovCheck {
    Estimate lhs;         // cov(pi^F, pi^S)
    Estimate rhs;         // beta'beta var(pi^F)
    Estimate difference;  // lhs - rhs, batch by batch
    double beta_squared = 0.0;
};

SingleFactorCovCheck single_factor_cov_check(const Eigen::VectorXd& beta, const AR1Params& factor, double idio_vol,
                                             int m, int n, std::size_t T, std::uint64_t seed, int batches = 100);

}  // namespace fmom
