#include "fmom/momentum.hpp"

#include <algorithm>
#include <numeric>

#include "fmom/analytics.hpp"
#include "fmom/errors.hpp"
#include "fmom/parallel.hpp"

namespace fmom {

Weighting parse_weighting(std::string_view name) {
    if (name == "rank") return Weighting::Rank;
    if (name == "sign") return Weighting::Sign;
    throw ConfigError("unknown weighting '" + std::string(name) + "' (expected rank or sign)");
}

std::string to_string(Weighting w) { return w == Weighting::Rank ? "rank" : "sign"; }

std::string to_string(Leg leg) {
    switch (leg) {
        case Leg::Winners: return "winners";
        case Leg::Losers: return "losers";
        default: return "both";
    }
}

std::string StrategySpec::describe() const {
    return to_string(weighting) + "(m=" + std::to_string(m) + ",n=" + std::to_string(n) + ",leg=" + to_string(leg) +
           (risk_managed ? ",risk_managed" : "") + ")";
}

ReturnPanel signal(const ReturnPanel& panel, int m, int n) {
    if (m < 0 || n < 1) {
        throw ParameterError("signal: need m >= 0 and n >= 1, got m=" + std::to_string(m) + " n=" + std::to_string(n));
    }
    const Eigen::Index T = panel.rows();
    const auto& r = panel.values();
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(T, panel.cols(), kMissing);
    // NaN propagates through the sum, so a single missing constituent marks
    // the whole window missing.
    for (Eigen::Index t = m + n - 1; t < T; ++t) {
        out.row(t) = r.middleRows(t - m - n + 1, n).colwise().sum();
    }
    return ReturnPanel(panel.calendar(), panel.assets(), std::move(out));
}

Eigen::VectorXd rank_weights(const Eigen::Ref<const Eigen::VectorXd>& row, std::span<const std::string> ids) {
    const Eigen::Index N = row.size();
    if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != N) {
        throw Error("rank_weights: " + std::to_string(ids.size()) + " ids for " + std::to_string(N) + " entries");
    }
    std::vector<Eigen::Index> present;
    for (Eigen::Index i = 0; i < N; ++i)
        if (!is_missing(row(i))) present.push_back(i);

    Eigen::VectorXd weights = Eigen::VectorXd::Zero(N);
    const auto count = static_cast<Eigen::Index>(present.size());
    if (count < 2) return weights;

    std::sort(present.begin(), present.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (row(x) != row(y)) return row(x) < row(y);
        return ids.empty() ? x < y : ids[static_cast<std::size_t>(x)] < ids[static_cast<std::size_t>(y)];
    });
    // (2k - (count - 1)) / (count - 1): integer numerators keep the grid
    // exactly antisymmetric.
    const double denom = static_cast<double>(count - 1);
    for (Eigen::Index k = 0; k < count; ++k) {
        weights(present[static_cast<std::size_t>(k)]) = static_cast<double>(2 * k - (count - 1)) / denom;
    }
    return weights;
}

Eigen::VectorXd sign_weights(const Eigen::Ref<const Eigen::VectorXd>& row) {
    return row.unaryExpr([](double v) { return is_missing(v) ? 0.0 : static_cast<double>((v > 0.0) - (v < 0.0)); });
}

namespace {

void require_tradeable(const StrategySpec& spec) {
    if (spec.m < 1) {
        throw LookaheadError("strategy " + spec.describe() +
                             ": m must be >= 1 so that weights at t use data through t-1 only");
    }
    if (spec.n < 1) throw ParameterError("strategy " + spec.describe() + ": n must be >= 1");
}

// Weights for row t; returns false when no asset can trade at t.
bool weights_at(const ReturnPanel& panel, const Eigen::MatrixXd& sig, Eigen::Index t, const StrategySpec& spec,
                Eigen::VectorXd& w) {
    Eigen::VectorXd row = sig.row(t).transpose();
    bool any = false;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (is_missing(panel.values()(t, j))) row(j) = kMissing;
        any = any || !is_missing(row(j));
    }
    if (!any) return false;
    w = spec.weighting == Weighting::Rank ? rank_weights(row, panel.assets()) : sign_weights(row);
    if (spec.leg == Leg::Winners) w = w.cwiseMax(0.0);
    if (spec.leg == Leg::Losers) w = w.cwiseMin(0.0);
    return true;
}

}  // namespace

WeightsPanel strategy_weights(const ReturnPanel& panel, const StrategySpec& spec) {
    require_tradeable(spec);
    const Eigen::MatrixXd sig = signal(panel, spec.m, spec.n).values();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(panel.rows(), panel.cols());
    Eigen::VectorXd w;
    for (Eigen::Index t = 0; t < panel.rows(); ++t) {
        if (weights_at(panel, sig, t, spec, w)) out.row(t) = w.transpose();
    }
    return {panel.calendar(), panel.assets(), std::move(out)};
}

PnlSeries strategy_pnl(const ReturnPanel& panel, const StrategySpec& spec, const PipelineConfig& cfg) {
    require_tradeable(spec);
    const Eigen::MatrixXd sig = signal(panel, spec.m, spec.n).values();
    const auto& r = panel.values();
    Eigen::VectorXd pnl = Eigen::VectorXd::Constant(panel.rows(), kMissing);
    Eigen::VectorXd w;
    for (Eigen::Index t = 0; t < panel.rows(); ++t) {
        if (!weights_at(panel, sig, t, spec, w)) continue;
        double sum = 0.0;
        for (Eigen::Index j = 0; j < w.size(); ++j)
            if (w(j) != 0.0) sum += w(j) * r(t, j);
        pnl(t) = sum;
    }
    PnlSeries out(panel.calendar(), std::move(pnl), PnlMeta{spec.describe(), {"strategy_pnl"}, {}});
    return spec.risk_managed ? vol_normalize(out, cfg) : out;
}

std::string GridStatistic::label() const {
    switch (kind) {
        case Kind::Correlation: return "correlation";
        case Kind::ResidualSharpe: return "residual_sharpe";
        default: return "sharpe";
    }
}

GridResult grid_sweep(const ReturnPanel& panel, const GridSpec& spec, const GridStatistic& statistic,
                      const PipelineConfig& cfg) {
    if (spec.m_values.empty() || spec.n_values.empty()) throw ConfigError("grid_sweep: empty m or n range");
    if (statistic.kind == GridStatistic::Kind::Correlation && !statistic.reference) {
        throw ConfigError("grid_sweep: correlation statistic needs a reference series");
    }
    if (statistic.kind == GridStatistic::Kind::ResidualSharpe && !statistic.controls) {
        throw ConfigError("grid_sweep: residual statistic needs control series");
    }
    const auto rows = static_cast<Eigen::Index>(spec.m_values.size());
    const auto cols = static_cast<Eigen::Index>(spec.n_values.size());
    GridResult grid{spec.m_values, spec.n_values, Eigen::MatrixXd::Constant(rows, cols, kMissing),
                    Eigen::MatrixXi::Zero(rows, cols), statistic.label()};

    parallel_for(static_cast<std::size_t>(rows * cols), spec.threads, [&](std::size_t cell) {
        const auto i = static_cast<Eigen::Index>(cell) / cols;
        const auto j = static_cast<Eigen::Index>(cell) % cols;
        const int m = spec.m_values[static_cast<std::size_t>(i)];
        const int n = spec.n_values[static_cast<std::size_t>(j)];
        const StrategySpec strat{m, n, spec.weighting, Leg::Both, spec.risk_managed};
        const PnlSeries pnl = strategy_pnl(panel, strat, cfg);
        const auto valid = static_cast<int>(pnl.valid_count());
        grid.observations(i, j) = valid;
        if (valid < spec.min_observations) return;
        try {
            switch (statistic.kind) {
                case GridStatistic::Kind::Sharpe:
                    grid.cells(i, j) = perf_stats(pnl).sharpe_annual;
                    break;
                case GridStatistic::Kind::Correlation:
                    grid.cells(i, j) = correlation(pnl, statistic.reference(m, n));
                    break;
                case GridStatistic::Kind::ResidualSharpe: {
                    const auto controls = statistic.controls(m, n);
                    const auto reg = spanning_regression(pnl, controls);
                    grid.observations(i, j) = reg.n_obs;
                    grid.cells(i, j) = reg.residual_stats.sharpe_annual;
                    break;
                }
            }
        } catch (const UndefinedStatsError&) {
            // cell stays missing
        }
    });
    return grid;
}

}  // namespace fmom
