// fmom: momentum backtests, (m, n) sweeps, spanning regressions and the
// feedback-trading model simulator/verifier.

#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "commands.hpp"
#include "json_config.hpp"

namespace {

using namespace fmom;
using namespace fmom::cli;

void add_layout(CLI::App* cmd, Layout& layout, bool& allow_missing) {
    cmd->add_option_function<std::string>(
           "--layout", [&layout](const std::string& v) { layout = parse_layout(v); }, "wide | long")
        ->check(CLI::IsMember({"wide", "long"}));
    cmd->add_flag("--allow-missing", allow_missing, "Treat empty / non-numeric cells as missing");
}

void add_pipeline(CLI::App* cmd, PipelineConfig& p) {
    cmd->add_option("--window", p.window_months, "Trailing window in months")->capture_default_str();
    cmd->add_option("--lag-vol", p.lag_months, "Months between estimation window end and use")
        ->capture_default_str();
    cmd->add_option("--vol-target", p.vol_target, "Monthly volatility target")->capture_default_str();
    cmd->add_option_function<int>(
        "--min-obs", [&p](const int& v) { p.min_obs = v; }, "Minimum observations per window (default: --window)");
}

void add_weighting(CLI::App* cmd, const std::string& flag, Weighting& w, const std::string& help) {
    cmd->add_option_function<std::string>(
           flag, [&w](const std::string& v) { w = parse_weighting(v); }, help)
        ->check(CLI::IsMember({"rank", "sign"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factor and stock momentum toolkit"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file (command-line flags take precedence)");

    RunContext ctx;
    std::string out_dir = ".";
    app.add_option_function<std::uint64_t>(
        "--seed", [&ctx](const std::uint64_t& s) { ctx.seed = s; }, "Random seed (required by simulate, verify)");
    app.add_option("--out-dir", out_dir, "Directory for relative output paths")->capture_default_str();
    app.add_option("--threads", ctx.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    BacktestConfig backtest;
    auto* bt = app.add_subcommand("backtest", "Risk-manage factors, run TS/XS momentum, report Sharpe ratios");
    bt->add_option("--factors", backtest.factors, "Factor return panel (CSV)");
    bt->add_option("--market", backtest.market, "Market return series (CSV)");
    bt->add_option_function<std::string>(
        "--market-column", [&backtest](const std::string& v) { backtest.market_column = v; }, "Column of --market");
    add_layout(bt, backtest.layout, backtest.allow_missing);
    add_pipeline(bt, backtest.pipeline);
    bt->add_option("--m", backtest.m, "Signal lag")->capture_default_str();
    bt->add_option("--n", backtest.n, "Signal length in months")->capture_default_str();
    bt->add_flag("--skip-pipeline", backtest.skip_pipeline, "Inputs are already hedged and vol-scaled");
    bt->add_flag("--raw-strategies", backtest.raw_strategies, "Do not vol-scale strategy PNLs");
    bt->add_flag("--menagerie-vol-target", backtest.menagerie_vol_target, "Vol-scale the menagerie");
    bt->add_option("--pnl-out", backtest.pnl_out)->capture_default_str();
    bt->add_option("--stats-out", backtest.stats_out)->capture_default_str();

    SweepConfig sweep;
    auto* sw = app.add_subcommand("sweep", "Statistic grid over signal lag m and length n");
    sw->add_option("--input", sweep.input, "Factor return panel (CSV)");
    add_weighting(sw, "--weighting", sweep.weighting, "Factor momentum weighting: rank | sign");
    sw->add_option_function<std::string>(
        "--stocks", [&sweep](const std::string& v) { sweep.stocks = v; }, "Stock return panel (CSV)");
    add_weighting(sw, "--stock-weighting", sweep.stock_weighting, "Stock momentum weighting: rank | sign");
    sw->add_option_function<std::string>(
        "--market", [&sweep](const std::string& v) { sweep.market = v; }, "Market return series (CSV)");
    sw->add_option_function<std::string>(
        "--market-column", [&sweep](const std::string& v) { sweep.market_column = v; }, "Column of --market");
    sw->add_option_function<std::string>(
        "--control-series", [&sweep](const std::string& v) { sweep.control_series = v; },
        "Fixed control (e.g. UMD) replacing the per-cell stock momentum control");
    add_layout(sw, sweep.layout, sweep.allow_missing);
    sw->add_option("--m", sweep.m_range, "Lags, e.g. 1..12 or 1,3,6")->capture_default_str();
    sw->add_option("--n", sweep.n_range, "Lengths, e.g. 1..12")->capture_default_str();
    sw->add_option("--stat", sweep.stat, "sharpe | corr | residual | all")->capture_default_str();
    sw->add_option("--direction", sweep.direction, "factor-on-stock | stock-on-factor")->capture_default_str();
    sw->add_flag("--risk-managed", sweep.risk_managed, "Vol-scale every strategy PNL");
    add_pipeline(sw, sweep.pipeline);
    sw->add_option("--min-cell-obs", sweep.min_cell_obs, "Minimum PNL months per cell")->capture_default_str();
    sw->add_option_function<std::string>(
        "--out", [&sweep](const std::string& v) { sweep.out = v; }, "Output path for a single statistic");

    SpanConfig span;
    auto* sp = app.add_subcommand("span", "Spanning regression of one PNL on controls");
    sp->add_option("--target", span.target, "Target PNL (CSV)");
    sp->add_option_function<std::string>(
        "--target-column", [&span](const std::string& v) { span.target_column = v; }, "Column of --target");
    sp->add_option("--controls", span.controls, "Control series: path or path:column")->expected(1, -1);
    sp->add_option("--out", span.out)->capture_default_str();

    SimulateConfig simulate;
    auto* si = app.add_subcommand("simulate", "Simulate the feedback-trading model");
    si->add_option("--params", simulate.params, "model.json");
    si->add_option("--T", simulate.T, "Months to keep")->capture_default_str();
    si->add_option("--burn-in", simulate.burn_in, "Months discarded first")->capture_default_str();
    si->add_option("--out", simulate.out)->capture_default_str();
    si->add_option_function<std::string>(
        "--factor-out", [&simulate](const std::string& v) { simulate.factor_out = v; }, "Write F_t = w'r_t");
    si->add_option_function<std::string>(
        "--market-out", [&simulate](const std::string& v) { simulate.market_out = v; },
        "Write the equal-weight average return");

    VerifyConfig verify;
    auto* ve = app.add_subcommand("verify", "Monte Carlo check of the model's closed forms");
    ve->add_option("--params", verify.params, "model.json");
    ve->add_option("--k-max", verify.k_max)->capture_default_str();
    ve->add_option("--T", verify.T)->capture_default_str();
    ve->add_option("--batches", verify.batches)->capture_default_str();
    ve->add_option("--burn-in", verify.burn_in)->capture_default_str();
    ve->add_option("--sigmas", verify.sigmas, "Acceptance band in standard errors")->capture_default_str();
    ve->add_option("--report", verify.report)->capture_default_str();

    ResampleConfig resample;
    auto* rs = app.add_subcommand("resample", "Compound daily returns to monthly");
    rs->add_option("--input", resample.input, "Daily return panel (CSV)");
    add_layout(rs, resample.layout, resample.allow_missing);
    rs->add_option("--out", resample.out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const fmom::Error& e) {
        // Raised from option callbacks (e.g. an unknown layout name).
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    }
    ctx.out_dir = out_dir;

    try {
        if (*bt) cmd_backtest(backtest, ctx);
        if (*sw) cmd_sweep(sweep, ctx);
        if (*sp) cmd_span(span, ctx);
        if (*si) cmd_simulate(simulate, ctx);
        if (*ve) {
            const VerifySummary summary = cmd_verify(verify, ctx);
            for (const auto& f : summary.failures) std::cerr << "verify: FAIL " << f << "\n";
            std::cout << "verify: " << summary.checks << " checks, " << summary.failures.size() << " failed\n";
            return summary.passed() ? 0 : 1;
        }
        if (*rs) cmd_resample(resample, ctx);
    } catch (const fmom::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
