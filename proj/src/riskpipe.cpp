#include "fmom/riskpipe.hpp"

#include <cmath>

#include "fmom/errors.hpp"
#include "fmom/parallel.hpp"

namespace fmom {

namespace {

// Relative floor below which a window's dispersion is treated as zero.
constexpr double kDegenerate = 1e-24;

PnlMeta with_stage(PnlMeta meta, std::string stage) {
    meta.stages.push_back(std::move(stage));
    return meta;
}

}  // namespace

void PipelineConfig::validate() const {
    if (window_months < 2) throw ParameterError("window_months must be >= 2, got " + std::to_string(window_months));
    if (lag_months < 1) throw ParameterError("lag_months must be >= 1, got " + std::to_string(lag_months));
    if (!(vol_target > 0.0)) throw ParameterError("vol_target must be > 0");
    const int mo = effective_min_obs();
    if (mo < 2 || mo > window_months) {
        throw ParameterError("min_obs must lie in [2, window_months], got " + std::to_string(mo));
    }
}

PnlSeries beta_hedge(const PnlSeries& factor, const NamedSeries& market, const PipelineConfig& cfg) {
    cfg.validate();
    require_aligned(factor.calendar, market.calendar, "beta_hedge");
    const Eigen::Index T = factor.values.size();
    const auto& y = factor.values;
    const auto& x = market.values;
    Eigen::VectorXd out = Eigen::VectorXd::Constant(T, kMissing);

    std::optional<double> beta;
    for (Eigen::Index t = cfg.burn_in(); t < T; ++t) {
        const Eigen::Index end = t - cfg.lag_months;
        const Eigen::Index begin = end - cfg.window_months + 1;
        int count = 0;
        double sx = 0.0, sy = 0.0;
        for (Eigen::Index s = begin; s <= end; ++s) {
            if (is_missing(x(s)) || is_missing(y(s))) continue;
            sx += x(s);
            sy += y(s);
            ++count;
        }
        if (count >= cfg.effective_min_obs()) {
            const double mx = sx / count, my = sy / count;
            double sxx = 0.0, sxy = 0.0, scale = 0.0;
            for (Eigen::Index s = begin; s <= end; ++s) {
                if (is_missing(x(s)) || is_missing(y(s))) continue;
                sxx += (x(s) - mx) * (x(s) - mx);
                sxy += (x(s) - mx) * (y(s) - my);
                scale += x(s) * x(s);
            }
            if (sxx > kDegenerate * scale) beta = sxy / sxx;
        }
        if (beta && !is_missing(y(t)) && !is_missing(x(t))) out(t) = y(t) - *beta * x(t);
    }
    return PnlSeries(factor.calendar, std::move(out),
                     with_stage(factor.meta, "beta_hedge(window=" + std::to_string(cfg.window_months) +
                                                 ",lag=" + std::to_string(cfg.lag_months) + ")"));
}

PnlSeries vol_normalize(const PnlSeries& series, const PipelineConfig& cfg) {
    cfg.validate();
    const Eigen::Index T = series.values.size();
    const auto& x = series.values;
    Eigen::VectorXd out = Eigen::VectorXd::Constant(T, kMissing);

    for (Eigen::Index t = cfg.burn_in(); t < T; ++t) {
        if (is_missing(x(t))) continue;
        const Eigen::Index end = t - cfg.lag_months;
        const Eigen::Index begin = end - cfg.window_months + 1;
        int count = 0;
        double sum = 0.0;
        for (Eigen::Index s = begin; s <= end; ++s) {
            if (is_missing(x(s))) continue;
            sum += x(s);
            ++count;
        }
        if (count < cfg.effective_min_obs()) continue;
        const double mean = sum / count;
        double ss = 0.0, scale = 0.0;
        for (Eigen::Index s = begin; s <= end; ++s) {
            if (is_missing(x(s))) continue;
            ss += (x(s) - mean) * (x(s) - mean);
            scale += x(s) * x(s);
        }
        if (ss <= kDegenerate * scale || ss == 0.0) continue;
        out(t) = cfg.vol_target * x(t) / std::sqrt(ss / (count - 1));
    }
    return PnlSeries(series.calendar, std::move(out),
                     with_stage(series.meta, "vol_normalize(window=" + std::to_string(cfg.window_months) +
                                                 ",lag=" + std::to_string(cfg.lag_months) +
                                                 ",target=" + std::to_string(cfg.vol_target) + ")"));
}

PnlSeries menagerie(const ReturnPanel& factors, const std::optional<PipelineConfig>& vol_target) {
    const Eigen::Index T = factors.rows();
    Eigen::VectorXd out(T);
    PnlMeta meta{"menagerie", {"menagerie(sum over available factors)"}, {}};
    meta.constituents.resize(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t) {
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index j = 0; j < factors.cols(); ++j) {
            const double v = factors.values()(t, j);
            if (is_missing(v)) continue;
            sum += v;
            ++count;
        }
        out(t) = count > 0 ? sum : kMissing;
        meta.constituents[static_cast<std::size_t>(t)] = count;
    }
    PnlSeries result(factors.calendar(), std::move(out), std::move(meta));
    return vol_target ? vol_normalize(result, *vol_target) : result;
}

ReturnPanel risk_manage(const ReturnPanel& factors, const NamedSeries& market, const PipelineConfig& cfg,
                        unsigned threads) {
    cfg.validate();
    require_aligned(factors.calendar(), market.calendar, "risk_manage");
    Eigen::MatrixXd out(factors.rows(), factors.cols());
    parallel_for(static_cast<std::size_t>(factors.cols()), threads, [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        const PnlSeries raw(factors.calendar(), factors.values().col(col), PnlMeta{factors.assets()[j], {}, {}});
        out.col(col) = vol_normalize(beta_hedge(raw, market, cfg), cfg).values;
    });
    return ReturnPanel(factors.calendar(), factors.assets(), std::move(out));
}

}  // namespace fmom
