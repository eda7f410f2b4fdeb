#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fmom/model.hpp"

namespace fmom {

/// Setup of the single-factor covariance check run by verify_model.
struct SingleFactorSpec {
    Eigen::VectorXd beta;
    AR1Params factor{0.0, 0.0, 1.0};
    double idio_vol = 1.0;
    std::vector<std::pair<int, int>> lags = {{1, 1}, {2, 11}, {1, 12}};
    std::size_t T = 1'000'000;
};

struct VerifyOptions {
    std::size_t T = 1'000'000;
    std::uint64_t seed = 42;
    int k_max = 3;
    int batches = 100;
    std::size_t burn_in = 500;
    double sigmas = 3.0;
    double exact_tolerance = 1e-12;  // two-route closed-form agreement
    int solution_depth = 200;
    std::size_t solution_T = 5000;
    std::optional<SingleFactorSpec> single_factor;
};

/// One line of the verification report. Informational checks are reported
/// but never fail the run.
struct CheckResult {
    std::string name;
    std::string kind;  // monte_carlo | exact | informational
    double lhs = 0.0;  // measured / first route
    double rhs = 0.0;  // predicted / second route
    double se = 0.0;
    bool pass = false;
    std::string note;
    int elements = 1;
    int failures = 0;
    double max_abs_z = 0.0;
    double mean_sq_z = 0.0;  // elementwise checks: near 1 when the SEs are calibrated

    bool informational() const { return kind == "informational"; }
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool all_passed() const;
    const CheckResult& find(const std::string& name) const;
};

/// Monte Carlo vs closed-form cross-validation of the model: sample
/// autocovariances against Omega_k, factor and stock momentum PNLs against
/// their closed forms, the moving-average return solution, and (when
/// configured) the single-factor covariance identity.
VerifyReport verify_model(const ModelParams& params, const VerifyOptions& options);

/// Elementwise comparison of a Monte Carlo matrix estimate against a
/// prediction, within `sigmas` standard errors.
CheckResult compare_elementwise(std::string name, const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& se,
                                const Eigen::MatrixXd& predicted, double sigmas);

}  // namespace fmom
