#include "fmom/sampling.hpp"

#include <cmath>

#include "fmom/errors.hpp"

namespace fmom {

bool Estimate::agrees_with(double expected, double sigmas) const {
    return std::abs(value - expected) <= sigmas * se;
}

Estimate combine_batches(const std::vector<double>& batch_estimates) {
    const auto B = static_cast<double>(batch_estimates.size());
    if (batch_estimates.size() < 2) throw Error("combine_batches: need at least 2 batches");
    double sum = 0.0;
    for (double v : batch_estimates) sum += v;
    const double mean = sum / B;
    double ss = 0.0;
    for (double v : batch_estimates) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (B - 1.0) / B)};
}

Estimate batch_mean(const Eigen::Ref<const Eigen::VectorXd>& samples, int batches) {
    if (batches < 2) throw ParameterError("batch_mean: need at least 2 batches");
    const Eigen::Index len = samples.size() / batches;
    if (len < 1) throw ParameterError("batch_mean: fewer samples than batches");
    std::vector<double> est(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) est[static_cast<std::size_t>(b)] = samples.segment(b * len, len).mean();
    return combine_batches(est);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

LaggedMoments::LaggedMoments(Eigen::Index dim, int max_lag, Eigen::Index batch_length)
    : dim_(dim),
      max_lag_(max_lag),
      batch_length_(batch_length),
      buffer_(max_lag + batch_length, dim),
      batch_cross_(static_cast<std::size_t>(max_lag)),
      batch_lag_sum_(static_cast<std::size_t>(max_lag)) {
    if (dim < 1 || max_lag < 1 || batch_length < 1) throw ParameterError("LaggedMoments: invalid dimensions");
}

void LaggedMoments::push(const Eigen::Ref<const Eigen::VectorXd>& x) {
    buffer_.row(filled_++) = x.transpose();
    if (filled_ == buffer_.rows()) close_batch();
}

void LaggedMoments::close_batch() {
    const auto L = batch_length_;
    const auto current = buffer_.middleRows(max_lag_, L);
    for (int k = 1; k <= max_lag_; ++k) {
        const auto lagged = buffer_.middleRows(max_lag_ - k, L);
        batch_cross_[static_cast<std::size_t>(k - 1)].push_back(current.transpose() * lagged);
        batch_lag_sum_[static_cast<std::size_t>(k - 1)].push_back(lagged.colwise().sum().transpose());
    }
    batch_sum_.push_back(current.colwise().sum().transpose());
    // The last max_lag rows become the history of the next batch.
    buffer_.topRows(max_lag_) = buffer_.bottomRows(max_lag_).eval();
    filled_ = max_lag_;
}

Eigen::VectorXd LaggedMoments::mean() const {
    if (batch_sum_.empty()) throw Error("LaggedMoments: no complete batch");
    Eigen::VectorXd total = Eigen::VectorXd::Zero(dim_);
    for (const auto& s : batch_sum_) total += s;
    return total / static_cast<double>(batch_length_ * batches());
}

std::vector<Eigen::MatrixXd> LaggedMoments::raw_batches(int k) const {
    if (k < 1 || k > max_lag_) throw ParameterError("LaggedMoments: lag out of range");
    std::vector<Eigen::MatrixXd> out;
    for (const auto& c : batch_cross_[static_cast<std::size_t>(k - 1)]) out.push_back(c / static_cast<double>(batch_length_));
    return out;
}

std::vector<Eigen::MatrixXd> LaggedMoments::centered_batches(int k) const {
    if (k < 1 || k > max_lag_) throw ParameterError("LaggedMoments: lag out of range");
    const Eigen::VectorXd m = mean();
    const double L = static_cast<double>(batch_length_);
    std::vector<Eigen::MatrixXd> out;
    const auto& cross = batch_cross_[static_cast<std::size_t>(k - 1)];
    const auto& lag_sum = batch_lag_sum_[static_cast<std::size_t>(k - 1)];
    for (std::size_t b = 0; b < cross.size(); ++b) {
        // sum (x_t - m)(x_{t-k} - m)' expanded in the accumulated sums
        out.push_back((cross[b] - m * lag_sum[b].transpose() - batch_sum_[b] * m.transpose() + L * m * m.transpose()) / L);
    }
    return out;
}

Estimate LaggedMoments::functional(const std::vector<Eigen::MatrixXd>& batches,
                                   const std::function<double(const Eigen::MatrixXd&)>& f) {
    std::vector<double> v;
    v.reserve(batches.size());
    for (const auto& b : batches) v.push_back(f(b));
    return combine_batches(v);
}

void LaggedMoments::elementwise(const std::vector<Eigen::MatrixXd>& batches, Eigen::MatrixXd& value,
                                Eigen::MatrixXd& se) {
    if (batches.size() < 2) throw Error("LaggedMoments: need at least 2 batches");
    const double B = static_cast<double>(batches.size());
    value = Eigen::MatrixXd::Zero(batches.front().rows(), batches.front().cols());
    for (const auto& b : batches) value += b;
    value /= B;
    Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(value.rows(), value.cols());
    for (const auto& b : batches) ss += (b - value).cwiseAbs2();
    se = (ss / (B - 1.0) / B).cwiseSqrt();
}

}  // namespace fmom
