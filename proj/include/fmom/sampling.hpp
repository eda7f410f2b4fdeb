#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fmom {

/// Monte Carlo point estimate with its batch-means standard error.
struct Estimate {
    double value = 0.0;
    double se = 0.0;

    /// |value - expected| <= sigmas * se
    bool agrees_with(double expected, double sigmas = 3.0) const;
    /// value - sigmas * se > 0
    bool positive(double sigmas = 3.0) const { return value - sigmas * se > 0.0; }
    bool negative(double sigmas = 3.0) const { return value + sigmas * se < 0.0; }
};

/// Mean of equal-length batch estimates and the standard error of that mean.
Estimate combine_batches(const std::vector<double>& batch_estimates);

/// Batch-means estimate of E[x] from a serially correlated sample; the tail
/// that does not fill a whole batch is dropped.
Estimate batch_mean(const Eigen::Ref<const Eigen::VectorXd>& samples, int batches = 100);

/// Deterministic child seed: splitmix64 of (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Streaming accumulator of lagged cross moments sum_t x_t x_{t-k}' for
/// k = 1..max_lag, split into equal batches. The first `max_lag` pushes only
/// seed the history; afterwards every `batch_length` pushes close a batch.
/// Rows are buffered and reduced with matrix products.
class LaggedMoments {
public:
    LaggedMoments(Eigen::Index dim, int max_lag, Eigen::Index batch_length);

    void push(const Eigen::Ref<const Eigen::VectorXd>& x);

    int batches() const noexcept { return static_cast<int>(batch_sum_.size()); }
    int max_lag() const noexcept { return max_lag_; }
    Eigen::Index batch_length() const noexcept { return batch_length_; }

    /// Sample mean of all counted rows.
    Eigen::VectorXd mean() const;

    /// Per-batch E[x_t x_{t-k}'] (raw, not demeaned).
    std::vector<Eigen::MatrixXd> raw_batches(int k) const;
    /// Per-batch autocovariance Cov(x_t, x_{t-k}) demeaned with the full-sample mean.
    std::vector<Eigen::MatrixXd> centered_batches(int k) const;

    /// Batch-means estimate of any scalar functional of the per-batch matrices.
    static Estimate functional(const std::vector<Eigen::MatrixXd>& batches,
                               const std::function<double(const Eigen::MatrixXd&)>& f);
    /// Elementwise estimate and standard error.
    static void elementwise(const std::vector<Eigen::MatrixXd>& batches, Eigen::MatrixXd& value, Eigen::MatrixXd& se);

private:
    void close_batch();

    Eigen::Index dim_;
    int max_lag_;
    Eigen::Index batch_length_;
    Eigen::MatrixXd buffer_;  // max_lag_ history rows, then the current batch
    Eigen::Index filled_ = 0;
    std::vector<std::vector<Eigen::MatrixXd>> batch_cross_;  // [k-1][batch]
    std::vector<std::vector<Eigen::VectorXd>> batch_lag_sum_;
    std::vector<Eigen::VectorXd> batch_sum_;
};

}  // namespace fmom
