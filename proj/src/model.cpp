#include "fmom/model.hpp"

#include <cmath>
#include <deque>

namespace fmom {

ModelParams make_model_params(double alpha, Eigen::VectorXd w, Eigen::VectorXd mu, double rho, Eigen::MatrixXd sigma,
                              bool normalize_w) {
    if (normalize_w) {
        const double norm = w.norm();
        if (norm == 0.0) throw ParameterError("model: w must be nonzero to normalize");
        w /= norm;
    }
    ModelParams p{alpha, std::move(w), std::move(mu), rho, std::move(sigma)};
    p.validate();
    return p;
}

namespace {

// Square root factor of a PSD matrix: Cholesky when positive definite,
// otherwise the symmetric eigen square root.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

ModelSimulator::ModelSimulator(const ModelParams& params, std::uint64_t seed)
    : params_(params), chol_(psd_factor(params.sigma)), rng_(seed) {
    params_.validate();
    const auto n = params_.size();
    z_.resize(n);
    e_ = Eigen::VectorXd::Zero(n);
    e_prev_ = Eigen::VectorXd::Zero(n);
    r_ = params_.stock_mean();
}

const Eigen::VectorXd& ModelSimulator::step() {
    for (Eigen::Index i = 0; i < z_.size(); ++i) z_(i) = normal_(rng_);
    e_.noalias() = chol_ * z_;
    const double flow = params_.alpha * params_.w.dot(r_);
    r_ = params_.mu + e_ - params_.rho * e_prev_ + flow * params_.w;
    e_prev_ = e_;
    return r_;
}

void ModelSimulator::discard(std::size_t periods) {
    for (std::size_t i = 0; i < periods; ++i) step();
}

SimPath simulate(const ModelParams& params, std::size_t T, std::uint64_t seed, std::size_t burn_in) {
    params.validate();
    if (T < 1) throw ParameterError("simulate: T must be >= 1");
    ModelSimulator sim(params, seed);
    sim.discard(burn_in);
    const auto n = params.size();
    Eigen::MatrixXd r(static_cast<Eigen::Index>(T), n);
    Eigen::VectorXd f(static_cast<Eigen::Index>(T));
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(T); ++t) {
        r.row(t) = sim.step().transpose();
        f(t) = sim.factor();
    }
    std::vector<std::string> names;
    const int width = static_cast<int>(std::to_string(n).size());
    for (Eigen::Index i = 0; i < n; ++i) {
        std::string id = std::to_string(i + 1);
        names.push_back("S" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id);
    }
    Calendar cal = Calendar::monthly(Period{1, 1, 0}, T);
    NamedSeries factor(cal, "F", std::move(f));
    return {ReturnPanel(std::move(cal), std::move(names), std::move(r)), std::move(factor), seed, burn_in};
}

ReturnSolutionCheck return_solution_check(const ModelParams& params, std::uint64_t seed, std::size_t T, int depth) {
    params.validate();
    if (depth < 1) throw ParameterError("return_solution_check: depth must be >= 1");
    const auto n = params.size();
    const auto len = static_cast<Eigen::Index>(T);
    ModelSimulator sim(params, seed);
    Eigen::MatrixXd e(len, n), r(len, n);
    for (Eigen::Index t = 0; t < len; ++t) {
        r.row(t) = sim.step().transpose();
        e.row(t) = sim.innovation().transpose();
    }
    const double a = params.a(), rho = params.rho;
    const Eigen::VectorXd mean = params.stock_mean();
    const Eigen::MatrixXd A = params.A();
    const Eigen::VectorXd s = e * params.w;  // w'e_t; A e_t = alpha w (w'e_t)

    Eigen::VectorXd powers(depth + 1);
    powers(0) = 1.0;
    for (int k = 1; k <= depth; ++k) powers(k) = powers(k - 1) * a;

    ReturnSolutionCheck out;
    out.depth = depth;
    for (Eigen::Index t = 0; t < len; ++t) {
        Eigen::VectorXd x = mean + e.row(t).transpose();
        if (t >= 1) x += A * e.row(t - 1).transpose() - rho * e.row(t - 1).transpose();
        double tail = 0.0;
        for (Eigen::Index k = 2; k <= depth && k <= t; ++k) tail += powers(k - 2) * s(t - k);
        x += (a - rho) * params.alpha * tail * params.w;
        out.max_deviation = std::max(out.max_deviation, (x - r.row(t).transpose()).cwiseAbs().maxCoeff());
    }
    if (a < 1.0 && static_cast<Eigen::Index>(depth) < len) {
        out.tail_bound = std::abs(a - rho) * params.alpha * params.w.cwiseAbs().maxCoeff() * s.cwiseAbs().maxCoeff() *
                         powers(depth - 1) * a / (1.0 - a);
    }
    return out;
}

Eigen::VectorXd simulate_ar1(const AR1Params& params, std::size_t T, std::uint64_t seed) {
    params.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd f(static_cast<Eigen::Index>(T));
    double prev = params.mu + std::sqrt(params.stationary_variance()) * normal(rng);
    const double drift = (1.0 - params.rho) * params.mu;
    for (Eigen::Index t = 0; t < f.size(); ++t) {
        prev = drift + params.rho * prev + params.sigma_u * normal(rng);
        f(t) = prev;
    }
    return f;
}

SingleFactorCovCheck single_factor_cov_check(const Eigen::VectorXd& beta, const AR1Params& factor, double idio_vol,
                                             int m, int n, std::size_t T, std::uint64_t seed, int batches) {
    factor.validate();
    if (m < 1 || n < 1) throw ParameterError("single_factor_cov_check: need m >= 1 and n >= 1");
    if (idio_vol < 0.0) throw ParameterError("single_factor_cov_check: idio_vol must be >= 0");
    if (batches < 2) throw ParameterError("single_factor_cov_check: need at least 2 batches");
    const auto L = static_cast<Eigen::Index>(T) / batches;
    if (L < 1) throw ParameterError("single_factor_cov_check: T smaller than the batch count");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto N = beta.size();
    const int window = m + n;  // history needed: f_{t-m-n+1} .. f_t

    // Ring buffers of the last `window` factor values and stock returns.
    std::vector<double> f_hist(static_cast<std::size_t>(window), 0.0);
    Eigen::MatrixXd r_hist = Eigen::MatrixXd::Zero(N, window);
    double f_prev = factor.mu + std::sqrt(factor.stationary_variance()) * normal(rng);
    const double drift = (1.0 - factor.rho) * factor.mu;
    Eigen::VectorXd noise(N);

    auto advance = [&](std::size_t slot) {
        f_prev = drift + factor.rho * f_prev + factor.sigma_u * normal(rng);
        for (Eigen::Index i = 0; i < N; ++i) noise(i) = normal(rng);
        f_hist[slot] = f_prev;
        r_hist.col(static_cast<Eigen::Index>(slot)) = beta * f_prev + idio_vol * noise;
    };

    std::size_t t = 0;
    for (; t < static_cast<std::size_t>(window - 1); ++t) advance(t % static_cast<std::size_t>(window));

    std::vector<double> sF(static_cast<std::size_t>(batches), 0.0), sS = sF, sFF = sF, sFS = sF;
    Eigen::VectorXd rbar(N);
    for (int b = 0; b < batches; ++b) {
        for (Eigen::Index i = 0; i < L; ++i, ++t) {
            const auto now = t % static_cast<std::size_t>(window);
            advance(now);
            double fbar = 0.0;
            rbar.setZero();
            for (int k = m; k < m + n; ++k) {
                const auto slot = (t + static_cast<std::size_t>(window) - static_cast<std::size_t>(k)) %
                                  static_cast<std::size_t>(window);
                fbar += f_hist[slot];
                rbar += r_hist.col(static_cast<Eigen::Index>(slot));
            }
            const double piF = fbar * f_hist[now];
            const double piS = rbar.dot(r_hist.col(static_cast<Eigen::Index>(now)));
            const auto bi = static_cast<std::size_t>(b);
            sF[bi] += piF;
            sS[bi] += piS;
            sFF[bi] += piF * piF;
            sFS[bi] += piF * piS;
        }
    }

    const double total = static_cast<double>(L) * batches;
    double mF = 0.0, mS = 0.0;
    for (int b = 0; b < batches; ++b) {
        mF += sF[static_cast<std::size_t>(b)];
        mS += sS[static_cast<std::size_t>(b)];
    }
    mF /= total;
    mS /= total;
    const double bb = beta.squaredNorm();
    const double len = static_cast<double>(L);
    std::vector<double> cov_b, var_b, diff_b;
    for (int b = 0; b < batches; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        const double c = (sFS[bi] - mF * sS[bi] - mS * sF[bi] + len * mF * mS) / len;
        const double v = (sFF[bi] - 2.0 * mF * sF[bi] + len * mF * mF) / len;
        cov_b.push_back(c);
        var_b.push_back(bb * v);
        diff_b.push_back(c - bb * v);
    }
    return {combine_batches(cov_b), combine_batches(var_b), combine_batches(diff_b), bb};
}

}  // namespace fmom
