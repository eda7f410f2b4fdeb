#pragma once

#include <optional>

#include "fmom/panel.hpp"

namespace fmom {

/// Rolling-window settings shared by hedging and volatility scaling.
struct PipelineConfig {
    int window_months = 36;
    int lag_months = 1;         // estimate used at t ends at t - lag
    double vol_target = 0.01;   // per month
    std::optional<int> min_obs; // defaults to window_months

    int effective_min_obs() const { return min_obs.value_or(window_months); }
    /// First output index that can be non-missing.
    int burn_in() const { return window_months + lag_months - 1; }
    void validate() const;
};

/// factor_t - beta_{t-lag} * market_t with beta the trailing-window OLS
/// slope of factor on market. Degenerate windows (flat market, too few
/// observations) reuse the last estimable beta.
PnlSeries beta_hedge(const PnlSeries& factor, const NamedSeries& market, const PipelineConfig& cfg);

/// vol_target * x_t / sigma_{t-lag}, sigma the trailing-window sample
/// standard deviation. Zero sigma yields a missing point.
PnlSeries vol_normalize(const PnlSeries& series, const PipelineConfig& cfg);

/// Equal-dollar sum of factor returns per date, over the columns present
/// that date; rows with no column present are missing. With `vol_target`
/// the sum is vol-normalized afterwards.
PnlSeries menagerie(const ReturnPanel& factors, const std::optional<PipelineConfig>& vol_target = std::nullopt);

/// Hedge then vol-normalize every column of a factor panel.
ReturnPanel risk_manage(const ReturnPanel& factors, const NamedSeries& market, const PipelineConfig& cfg,
                        unsigned threads = 1);

}  // namespace fmom
