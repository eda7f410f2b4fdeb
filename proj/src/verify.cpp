#include "fmom/verify.hpp"

#include <cmath>
#include <limits>

namespace fmom {

namespace {

CheckResult exact_check(std::string name, double lhs, double rhs, double tol, bool informational = false) {
    CheckResult c;
    c.name = std::move(name);
    c.kind = informational ? "informational" : "exact";
    c.lhs = lhs;
    c.rhs = rhs;
    c.pass = std::abs(lhs - rhs) <= tol * std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
    return c;
}

CheckResult mc_check(std::string name, const Estimate& est, double predicted, double sigmas,
                     bool informational = false) {
    CheckResult c;
    c.name = std::move(name);
    c.kind = informational ? "informational" : "monte_carlo";
    c.lhs = est.value;
    c.rhs = predicted;
    c.se = est.se;
    c.max_abs_z = est.se > 0.0 ? std::abs(est.value - predicted) / est.se
                               : (est.value == predicted ? 0.0 : std::numeric_limits<double>::infinity());
    c.pass = est.agrees_with(predicted, sigmas);
    c.failures = c.pass ? 0 : 1;
    return c;
}

}  // namespace

bool VerifyReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.informational() && !c.pass) return false;
    return true;
}

const CheckResult& VerifyReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw Error("VerifyReport: no check named '" + name + "'");
}

CheckResult compare_elementwise(std::string name, const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& se,
                                const Eigen::MatrixXd& predicted, double sigmas) {
    CheckResult c;
    c.name = std::move(name);
    c.kind = "monte_carlo";
    c.elements = static_cast<int>(estimate.size());
    c.max_abs_z = -1.0;
    for (Eigen::Index j = 0; j < estimate.cols(); ++j) {
        for (Eigen::Index i = 0; i < estimate.rows(); ++i) {
            const double diff = std::abs(estimate(i, j) - predicted(i, j));
            const double z = se(i, j) > 0.0 ? diff / se(i, j)
                                            : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            if (z > sigmas) ++c.failures;
            c.mean_sq_z += z * z / static_cast<double>(estimate.size());
            if (z > c.max_abs_z) {
                c.max_abs_z = z;
                c.lhs = estimate(i, j);
                c.rhs = predicted(i, j);
                c.se = se(i, j);
                c.note = "worst element (" + std::to_string(i) + "," + std::to_string(j) + ")";
            }
        }
    }
    c.pass = c.failures == 0;
    return c;
}

VerifyReport verify_model(const ModelParams& params, const VerifyOptions& options) {
    params.validate();
    if (options.k_max < 1) throw ParameterError("verify: k_max must be >= 1");
    if (options.batches < 2) throw ParameterError("verify: need at least 2 batches");
    const auto L = static_cast<Eigen::Index>(options.T) / options.batches;
    if (L < 1) throw ParameterError("verify: T smaller than the batch count");

    VerifyReport report;
    const double s = options.sigmas;
    const int K = options.k_max;

    ModelSimulator sim(params, options.seed);
    sim.discard(options.burn_in);
    LaggedMoments moments(params.size(), K, L);
    const std::size_t pushes = static_cast<std::size_t>(K) + static_cast<std::size_t>(L) * options.batches;
    for (std::size_t t = 0; t < pushes; ++t) moments.push(sim.step());

    const AutocovarianceSet omega = closed_form_omega(params, K);
    const Eigen::VectorXd& w = params.w;

    for (int k = 1; k <= K; ++k) {
        const std::string tag = "[k=" + std::to_string(k) + "]";

        Eigen::MatrixXd est, se;
        LaggedMoments::elementwise(moments.centered_batches(k), est, se);
        report.checks.push_back(compare_elementwise("omega" + tag, est, se, omega.omega(k), s));

        const auto raw = moments.raw_batches(k);
        const Prop1<double> p1 = prop1_factor_momentum(params, k);
        const Estimate factor_mc = LaggedMoments::functional(raw, [&](const Eigen::MatrixXd& m) { return w.dot(m * w); });
        report.checks.push_back(mc_check("prop1_mc" + tag, factor_mc, p1.total(), s));
        report.checks.push_back(
            exact_check("prop1_two_route" + tag, w.dot(omega.omega(k) * w), p1.momentum_term, options.exact_tolerance));
        auto literal1 = mc_check("prop1_drift_squared_mc" + tag, factor_mc, p1.momentum_term + p1.drift_squared, s, true);
        literal1.note = "mean term (w'mu)^2 in place of (E F)^2";
        report.checks.push_back(std::move(literal1));

        const Prop2<double> p2 = prop2_stock_momentum(params, k);
        const Estimate stock_mc = LaggedMoments::functional(raw, [](const Eigen::MatrixXd& m) { return m.trace(); });
        report.checks.push_back(mc_check("prop2_mc" + tag, stock_mc, p2.trace_value, s));
        auto simplified = exact_check("prop2_simplified_vs_trace" + tag, p2.value(), p2.trace_value,
                                      options.exact_tolerance, k == 1);
        if (k == 1) simplified.note = "k=1 simplified expression reported against tr(Omega_1) + m'm";
        report.checks.push_back(std::move(simplified));
        auto simplified_mc = mc_check("prop2_simplified_mc" + tag, stock_mc, p2.value(), s, true);
        report.checks.push_back(std::move(simplified_mc));
        auto literal2 = mc_check("prop2_literal_mc" + tag, stock_mc, p2.literal_value(), s, true);
        literal2.note = "mean term mu'mu in place of m'm";
        report.checks.push_back(std::move(literal2));
    }

    const auto solution = return_solution_check(params, derive_seed(options.seed, 1), options.solution_T,
                                                options.solution_depth);
    {
        CheckResult c;
        c.name = "return_solution";
        c.kind = "exact";
        c.lhs = solution.max_deviation;
        c.rhs = solution.tail_bound;
        const double scale = std::max(1.0, params.stock_mean().cwiseAbs().maxCoeff());
        c.pass = solution.max_deviation <= solution.tail_bound + 1e-10 * scale;
        c.note = "max |reconstructed - simulated| vs truncation bound at depth " + std::to_string(solution.depth);
        report.checks.push_back(std::move(c));
    }

    if (options.single_factor) {
        const auto& sf = *options.single_factor;
        std::uint64_t stream = 2;
        for (const auto& [m, n] : sf.lags) {
            const auto check = single_factor_cov_check(sf.beta, sf.factor, sf.idio_vol, m, n, sf.T,
                                                       derive_seed(options.seed, stream++), options.batches);
            const std::string tag = "[m=" + std::to_string(m) + ",n=" + std::to_string(n) + "]";
            auto agree = mc_check("cov_identity" + tag, check.difference, 0.0, s);
            agree.lhs = check.lhs.value;
            agree.rhs = check.rhs.value;
            agree.note = "lhs = cov(piF, piS), rhs = beta'beta var(piF); se of lhs - rhs";
            report.checks.push_back(std::move(agree));

            CheckResult pos;
            pos.name = "cov_positive" + tag;
            pos.kind = "monte_carlo";
            pos.lhs = check.lhs.value;
            pos.rhs = check.rhs.value;
            pos.se = std::max(check.lhs.se, check.rhs.se);
            pos.pass = check.lhs.positive(s) && check.rhs.positive(s);
            pos.failures = pos.pass ? 0 : 1;
            report.checks.push_back(std::move(pos));
        }
    }
    return report;
}

}  // namespace fmom
