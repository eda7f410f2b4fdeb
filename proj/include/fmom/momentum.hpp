#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmom/grid.hpp"
#include "fmom/panel.hpp"
#include "fmom/riskpipe.hpp"

namespace fmom {

enum class Weighting { Rank, Sign };
enum class Leg { Both, Winners, Losers };

Weighting parse_weighting(std::string_view name);
std::string to_string(Weighting w);
std::string to_string(Leg leg);

/// One momentum implementation: the signal at t is the sum of returns from
/// t-m-n+1 to t-m, converted to weights that trade the return at t.
struct StrategySpec {
    int m = 1;  // lag: most recent month in the signal is t - m
    int n = 12; // number of months summed
    Weighting weighting = Weighting::Sign;
    Leg leg = Leg::Both;
    bool risk_managed = false;

    std::string describe() const;
};

struct WeightsPanel {
    Calendar calendar;
    std::vector<std::string> assets;
    Eigen::MatrixXd values;  // zero where an asset is not held
};

/// Trailing sum F_t(m, n) = sum_{k=m}^{m+n-1} F_{t-k}, per asset. Missing
/// when the window runs past the first row or holds a missing return.
ReturnPanel signal(const ReturnPanel& panel, int m, int n);

/// Cross-sectional rank weights: the present entries, in ascending order,
/// receive linspace(-1, 1, count). Missing entries get 0; fewer than two
/// present entries give all zeros. Ties keep ascending `ids` order (index
/// order when `ids` is empty).
Eigen::VectorXd rank_weights(const Eigen::Ref<const Eigen::VectorXd>& row, std::span<const std::string> ids = {});

/// Elementwise sign with sgn(0) = 0 and missing -> 0.
Eigen::VectorXd sign_weights(const Eigen::Ref<const Eigen::VectorXd>& row);

/// Weights applied to the return at each date (legs filtered).
WeightsPanel strategy_weights(const ReturnPanel& panel, const StrategySpec& spec);

/// pi_t = w_t' r_t. An asset trades at t only if both its signal and its
/// return at t are present; the PNL is missing when no asset trades.
/// Requires m >= 1.
PnlSeries strategy_pnl(const ReturnPanel& panel, const StrategySpec& spec, const PipelineConfig& cfg = {});

/// Statistic evaluated on each (m, n) strategy PNL of a sweep.
struct GridStatistic {
    enum class Kind { Sharpe, Correlation, ResidualSharpe };

    Kind kind = Kind::Sharpe;
    std::function<PnlSeries(int m, int n)> reference;              // Correlation
    std::function<std::vector<PnlSeries>(int m, int n)> controls;  // ResidualSharpe

    static GridStatistic sharpe() { return {}; }
    static GridStatistic correlation_with(std::function<PnlSeries(int, int)> ref) {
        return {Kind::Correlation, std::move(ref), {}};
    }
    static GridStatistic residual_sharpe(std::function<std::vector<PnlSeries>(int, int)> ctrl) {
        return {Kind::ResidualSharpe, {}, std::move(ctrl)};
    }
    std::string label() const;
};

struct GridSpec {
    std::vector<int> m_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<int> n_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    Weighting weighting = Weighting::Sign;
    bool risk_managed = false;
    int min_observations = 24;
    unsigned threads = 1;
};

/// Evaluates the statistic for every (m, n). Cells with fewer than
/// `min_observations` PNL months, or whose statistic is undefined, are
/// missing. Results do not depend on `threads`.
GridResult grid_sweep(const ReturnPanel& panel, const GridSpec& spec, const GridStatistic& statistic,
                      const PipelineConfig& cfg = {});

}  // namespace fmom
