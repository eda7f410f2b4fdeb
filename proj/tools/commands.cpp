#include "commands.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "fmom/analytics.hpp"
#include "fmom/model.hpp"

namespace fmom::cli {

using nlohmann::json;

fs::path RunContext::output(const fs::path& p) const { return p.is_absolute() ? p : out_dir / p; }

std::uint64_t RunContext::require_seed(const std::string& command) const {
    if (!seed) throw ConfigError(command + ": --seed is required for stochastic commands");
    return *seed;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void require_file(const fs::path& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " is required");
    if (!fs::is_regular_file(path)) throw ConfigError(what + ": no such file '" + path.string() + "'");
}

// Inputs enter the config hash by content.
json input_digest(const fs::path& path) { return "fnv1a:" + hex(fnv1a(read_bytes(path))); }

json pipeline_json(const PipelineConfig& p) {
    return {{"window", p.window_months},
            {"lag", p.lag_months},
            {"vol_target", p.vol_target},
            {"min_obs", p.effective_min_obs()}};
}

// Numbers in JSON outputs carry the same ten significant digits as CSVs.
json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    const std::string s = format_number(v);
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

json meta_json(const std::string& command, const json& config, const RunContext& ctx) {
    json meta = {{"command", command}, {"config_hash", config_hash(command, config, ctx)}, {"config", config}};
    meta["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
    return meta;
}

json stats_json(const PerfStats& s) {
    return {{"sharpe_annual", number(s.sharpe_annual)},
            {"t_stat", number(s.t_stat)},
            {"n_months", s.n_months},
            {"mean_monthly", number(s.mean_monthly)},
            {"vol_monthly", number(s.vol_monthly)}};
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void ensure_out_dir(const RunContext& ctx) {
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());
}

// Prefixes the message of a library error while keeping its exit code.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
    throw Error(context + ": " + e.what(), e.exit_code());
}

}  // namespace

std::string config_hash(const std::string& command, const json& config, const RunContext& ctx) {
    json canonical = {{"command", command}, {"config", config}};
    canonical["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
    return hex(fnv1a(canonical.dump()));
}

std::string provenance_line(const std::string& command, const json& config, const RunContext& ctx) {
    return "fmom " + command + " config_hash=" + config_hash(command, config, ctx) +
           " seed=" + (ctx.seed ? std::to_string(*ctx.seed) : std::string("none"));
}

std::vector<int> parse_range(const std::string& text, const std::string& flag) {
    auto to_int = [&](std::string_view s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            throw ConfigError(flag + ": cannot parse '" + std::string(s) + "' as an integer");
        }
        return v;
    };
    std::set<int> values;
    std::string_view rest(text);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view part = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto dots = part.find("..");
        if (dots == std::string_view::npos) {
            values.insert(to_int(part));
        } else {
            const int lo = to_int(part.substr(0, dots)), hi = to_int(part.substr(dots + 2));
            for (int v = lo; v <= hi; ++v) values.insert(v);
        }
    }
    if (values.empty()) throw ConfigError(flag + ": empty range '" + text + "'");
    return {values.begin(), values.end()};
}

// ---------------------------------------------------------------------------
// model.json

ModelFile parse_model_json(const json& j) {
    try {
        const auto N = j.at("N").get<int>();
        if (N < 1) throw ConfigError("model.json: N must be >= 1");
        auto vec = [&](const json& v, const std::string& key) {
            const auto values = v.get<std::vector<double>>();
            if (static_cast<int>(values.size()) != N) {
                throw ConfigError("model.json: " + key + " has " + std::to_string(values.size()) +
                                  " entries, expected N = " + std::to_string(N));
            }
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(values.data(), N));
        };
        Eigen::VectorXd w = vec(j.at("w"), "w");
        Eigen::VectorXd mu = j.contains("mu") ? vec(j.at("mu"), "mu") : Eigen::VectorXd::Zero(N);
        const json& s = j.at("sigma");
        Eigen::MatrixXd sigma;
        if (s.contains("diag")) {
            sigma = vec(s.at("diag"), "sigma.diag").asDiagonal();
        } else if (s.contains("full")) {
            const auto rows = s.at("full").get<std::vector<std::vector<double>>>();
            if (static_cast<int>(rows.size()) != N) throw ConfigError("model.json: sigma.full must have N rows");
            sigma.resize(N, N);
            for (int i = 0; i < N; ++i) {
                if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != N) {
                    throw ConfigError("model.json: sigma.full row " + std::to_string(i) + " must have N entries");
                }
                for (int k = 0; k < N; ++k) sigma(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
        } else {
            throw ConfigError("model.json: sigma needs a 'diag' or 'full' entry");
        }
        ModelFile out{make_model_params(j.at("alpha").get<double>(), std::move(w), std::move(mu),
                                        j.at("rho").get<double>(), std::move(sigma), j.value("normalize_w", true)),
                      std::nullopt};

        if (j.contains("single_factor")) {
            const json& sf = j.at("single_factor");
            SingleFactorSpec spec;
            const auto beta = sf.at("beta").get<std::vector<double>>();
            spec.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
            spec.factor = AR1Params::with_stationary_vol(sf.value("rho", 0.0), sf.value("mu", 0.0),
                                                         sf.value("sigma_f", 1.0));
            spec.factor.validate();
            spec.idio_vol = sf.value("idio_vol", 1.0);
            if (sf.contains("lags")) {
                spec.lags.clear();
                for (const auto& pair : sf.at("lags")) spec.lags.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
            }
            spec.T = sf.value("T", spec.T);
            out.single_factor = std::move(spec);
        }
        return out;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model.json: ") + e.what());
    }
}

ModelFile load_model_file(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_bytes(path));
    } catch (const json::exception& e) {
        throw ConfigError("'" + path.string() + "': invalid JSON: " + e.what());
    }
    return parse_model_json(j);
}

// ---------------------------------------------------------------------------
// backtest

void cmd_backtest(const BacktestConfig& cfg, const RunContext& ctx) {
    require_file(cfg.factors, "backtest: --factors");
    require_file(cfg.market, "backtest: --market");
    cfg.pipeline.validate();
    if (cfg.m < 1 || cfg.n < 1) throw ConfigError("backtest: --m and --n must be >= 1");

    const json config = {{"factors", input_digest(cfg.factors)},
                         {"market", input_digest(cfg.market)},
                         {"market_column", cfg.market_column.value_or("")},
                         {"layout", cfg.layout == Layout::Long ? "long" : "wide"},
                         {"allow_missing", cfg.allow_missing},
                         {"pipeline", pipeline_json(cfg.pipeline)},
                         {"m", cfg.m},
                         {"n", cfg.n},
                         {"skip_pipeline", cfg.skip_pipeline},
                         {"raw_strategies", cfg.raw_strategies},
                         {"menagerie_vol_target", cfg.menagerie_vol_target}};

    const ReturnPanel factors = load_panel(cfg.factors, {cfg.layout, cfg.allow_missing});
    const NamedSeries market = load_series(cfg.market, cfg.market_column);
    require_aligned(factors.calendar(), market.calendar, "backtest: factors vs market");

    const ReturnPanel managed = cfg.skip_pipeline ? factors : risk_manage(factors, market, cfg.pipeline, ctx.threads);

    struct Row {
        std::string name;
        PnlSeries pnl;
    };
    std::vector<Row> rows;
    rows.push_back({"menagerie",
                    menagerie(managed, cfg.menagerie_vol_target ? std::optional(cfg.pipeline) : std::nullopt)});
    const std::pair<const char*, Weighting> kinds[] = {{"ts", Weighting::Sign}, {"xs", Weighting::Rank}};
    const std::pair<const char*, Leg> legs[] = {{"", Leg::Both}, {"_winners", Leg::Winners}, {"_losers", Leg::Losers}};
    for (const auto& [kind, weighting] : kinds) {
        for (const auto& [suffix, leg] : legs) {
            const StrategySpec spec{cfg.m, cfg.n, weighting, leg, !cfg.raw_strategies};
            rows.push_back({std::string(kind) + suffix, strategy_pnl(managed, spec, cfg.pipeline)});
        }
    }

    json stats = json::array();
    for (const auto& row : rows) {
        try {
            json entry = stats_json(perf_stats(row.pnl));
            entry["name"] = row.name;
            stats.push_back(std::move(entry));
        } catch (const Error& e) {
            rethrow_with_context(e, "backtest: " + row.name);
        }
    }

    ensure_out_dir(ctx);
    std::vector<NamedSeries> columns;
    for (const auto& row : rows) columns.push_back(row.pnl.named(row.name));
    const std::vector<std::string> header = {provenance_line("backtest", config, ctx)};
    emit_csv(panel_from_series(columns), ctx.output(cfg.pnl_out), header);

    json out = {{"meta", meta_json("backtest", config, ctx)}, {"rows", std::move(stats)}};
    out["meta"]["first_date"] = factors.calendar().periods().front().str();
    out["meta"]["last_date"] = factors.calendar().periods().back().str();
    write_json(ctx.output(cfg.stats_out), out);
}

// ---------------------------------------------------------------------------
// sweep

void cmd_sweep(const SweepConfig& cfg, const RunContext& ctx) {
    require_file(cfg.input, "sweep: --input");
    if (cfg.stocks) require_file(*cfg.stocks, "sweep: --stocks");
    if (cfg.market) require_file(*cfg.market, "sweep: --market");
    if (cfg.control_series) require_file(*cfg.control_series, "sweep: --control-series");
    cfg.pipeline.validate();
    if (cfg.min_cell_obs < 2) throw ConfigError("sweep: --min-cell-obs must be >= 2");

    std::vector<std::string> stats;
    if (cfg.stat == "all") {
        stats = {"sharpe", "corr", "residual"};
    } else if (cfg.stat == "sharpe" || cfg.stat == "corr" || cfg.stat == "residual") {
        stats = {cfg.stat};
    } else {
        throw ConfigError("sweep: --stat must be sharpe, corr, residual or all (got '" + cfg.stat + "')");
    }
    if (cfg.out && stats.size() != 1) throw ConfigError("sweep: --out needs a single --stat; use --out-dir");
    const bool reverse = cfg.direction == "stock-on-factor";
    if (!reverse && cfg.direction != "factor-on-stock") {
        throw ConfigError("sweep: --direction must be factor-on-stock or stock-on-factor");
    }
    const bool needs_reference = stats.size() > 1 || stats.front() != "sharpe";
    if (reverse && !cfg.stocks) throw ConfigError("sweep: --direction stock-on-factor needs --stocks");
    if (needs_reference && !reverse && !cfg.stocks && !cfg.control_series) {
        throw ConfigError("sweep: missing control series: corr/residual grids need --stocks or --control-series");
    }
    if (std::find(stats.begin(), stats.end(), "residual") != stats.end() && !cfg.market) {
        throw ConfigError("sweep: missing control series: the residual grid needs --market");
    }

    GridSpec grid;
    grid.m_values = parse_range(cfg.m_range, "--m");
    grid.n_values = parse_range(cfg.n_range, "--n");
    grid.risk_managed = cfg.risk_managed;
    grid.min_observations = cfg.min_cell_obs;
    grid.threads = ctx.threads;
    if (grid.m_values.front() < 1) throw ConfigError("sweep: --m values must be >= 1");
    if (grid.n_values.front() < 1) throw ConfigError("sweep: --n values must be >= 1");

    json config = {{"input", input_digest(cfg.input)},
                   {"weighting", to_string(cfg.weighting)},
                   {"stock_weighting", to_string(cfg.stock_weighting)},
                   {"layout", cfg.layout == Layout::Long ? "long" : "wide"},
                   {"allow_missing", cfg.allow_missing},
                   {"m", grid.m_values},
                   {"n", grid.n_values},
                   {"direction", cfg.direction},
                   {"risk_managed", cfg.risk_managed},
                   {"pipeline", pipeline_json(cfg.pipeline)},
                   {"min_cell_obs", cfg.min_cell_obs}};
    if (cfg.stocks) config["stocks"] = input_digest(*cfg.stocks);
    if (cfg.market) config["market"] = input_digest(*cfg.market);
    if (cfg.market_column) config["market_column"] = *cfg.market_column;
    if (cfg.control_series) config["control_series"] = input_digest(*cfg.control_series);

    const LoadOptions load{cfg.layout, cfg.allow_missing};
    const ReturnPanel factors = load_panel(cfg.input, load);
    std::optional<ReturnPanel> stocks;
    if (cfg.stocks) {
        stocks = load_panel(*cfg.stocks, load);
        require_aligned(factors.calendar(), stocks->calendar(), "sweep: factors vs stocks");
    }
    std::optional<PnlSeries> market, fixed_control;
    if (cfg.market) {
        market = PnlSeries::from(load_series(*cfg.market, cfg.market_column));
        require_aligned(factors.calendar(), market->calendar, "sweep: factors vs market");
    }
    if (cfg.control_series) {
        fixed_control = PnlSeries::from(load_series(*cfg.control_series));
        require_aligned(factors.calendar(), fixed_control->calendar, "sweep: factors vs control series");
    }
    const PnlSeries mkt_menagerie = menagerie(factors);

    // Target strategies come from `target`; the per-cell control is the same
    // (m, n) strategy on the other panel unless a fixed series is given.
    const ReturnPanel& target = reverse ? *stocks : factors;
    grid.weighting = reverse ? cfg.stock_weighting : cfg.weighting;
    const ReturnPanel* other = reverse ? &factors : (stocks ? &*stocks : nullptr);
    const Weighting other_weighting = reverse ? cfg.weighting : cfg.stock_weighting;
    const PipelineConfig pipeline = cfg.pipeline;
    const bool rm = cfg.risk_managed;
    auto reference = [&, pipeline, rm](int m, int n) -> PnlSeries {
        if (fixed_control && !reverse) return *fixed_control;
        return strategy_pnl(*other, StrategySpec{m, n, other_weighting, Leg::Both, rm}, pipeline);
    };

    ensure_out_dir(ctx);
    for (const auto& stat : stats) {
        GridStatistic statistic;
        if (stat == "corr") {
            statistic = GridStatistic::correlation_with(reference);
        } else if (stat == "residual") {
            statistic = GridStatistic::residual_sharpe([&](int m, int n) {
                return std::vector<PnlSeries>{reference(m, n), mkt_menagerie, *market};
            });
        }
        json stat_config = config;
        stat_config["stat"] = stat;
        const GridResult result = grid_sweep(target, grid, statistic, cfg.pipeline);
        const fs::path path = cfg.out ? ctx.output(*cfg.out) : ctx.output("grid_" + stat + ".csv");
        emit_csv(result, path,
                 {provenance_line("sweep", stat_config, ctx),
                  "statistic=" + result.statistic + " rows=m columns=n direction=" + cfg.direction});
    }
}

// ---------------------------------------------------------------------------
// span

namespace {

NamedSeries load_control(const std::string& spec) {
    // "path:column" unless the whole string names an existing file.
    if (!fs::is_regular_file(spec)) {
        const auto colon = spec.rfind(':');
        if (colon != std::string::npos && fs::is_regular_file(spec.substr(0, colon))) {
            return load_series(spec.substr(0, colon), spec.substr(colon + 1));
        }
        throw ConfigError("span: --controls: no such file '" + spec + "'");
    }
    return load_series(spec);
}

}  // namespace

void cmd_span(const SpanConfig& cfg, const RunContext& ctx) {
    require_file(cfg.target, "span: --target");
    if (cfg.controls.empty()) throw ConfigError("span: --controls needs at least one series");

    json config = {{"target", input_digest(cfg.target)}, {"target_column", cfg.target_column.value_or("")}};
    std::vector<PnlSeries> controls;
    std::vector<std::string> names;
    json control_digests = json::array();
    for (const auto& spec : cfg.controls) {
        const NamedSeries s = load_control(spec);
        const auto colon = spec.rfind(':');
        const fs::path file = fs::is_regular_file(spec) ? fs::path(spec) : fs::path(spec.substr(0, colon));
        control_digests.push_back({{"file", input_digest(file)}, {"column", s.name}});
        names.push_back(s.name);
        controls.push_back(PnlSeries::from(s));
    }
    config["controls"] = std::move(control_digests);

    const NamedSeries target = load_series(cfg.target, cfg.target_column);
    RegressionResult reg;
    try {
        reg = spanning_regression(PnlSeries::from(target), controls);
    } catch (const Error& e) {
        rethrow_with_context(e, "span");
    }

    json betas = json::array();
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        betas.push_back({{"name", names[j]}, {"beta", number(reg.betas(i))}, {"se", number(reg.beta_se(i))}});
    }
    json out = {{"meta", meta_json("span", config, ctx)},
                {"target", target.name},
                {"n_obs", reg.n_obs},
                {"intercept", number(reg.intercept)},
                {"r_squared", number(reg.r_squared)},
                {"betas", std::move(betas)},
                {"residual", stats_json(reg.residual_stats)},
                {"residual_keeps_intercept", true}};
    ensure_out_dir(ctx);
    write_json(ctx.output(cfg.out), out);
}

// ---------------------------------------------------------------------------
// simulate

void cmd_simulate(const SimulateConfig& cfg, const RunContext& ctx) {
    require_file(cfg.params, "simulate: --params");
    const std::uint64_t seed = ctx.require_seed("simulate");
    if (cfg.T < 1) throw ConfigError("simulate: --T must be >= 1");
    const ModelFile model = load_model_file(cfg.params);

    const json config = {{"params", input_digest(cfg.params)}, {"T", cfg.T}, {"burn_in", cfg.burn_in}};
    const SimPath path = simulate(model.params, cfg.T, seed, cfg.burn_in);
    const std::vector<std::string> header = {provenance_line("simulate", config, ctx)};

    ensure_out_dir(ctx);
    emit_csv(path.returns, ctx.output(cfg.out), header);
    if (cfg.factor_out) emit_csv(path.factor, ctx.output(*cfg.factor_out), header);
    if (cfg.market_out) {
        const Eigen::VectorXd ew = path.returns.values().rowwise().mean();
        emit_csv(NamedSeries(path.returns.calendar(), "market", ew), ctx.output(*cfg.market_out), header);
    }
}

// ---------------------------------------------------------------------------
// verify

VerifySummary cmd_verify(const VerifyConfig& cfg, const RunContext& ctx) {
    require_file(cfg.params, "verify: --params");
    const std::uint64_t seed = ctx.require_seed("verify");
    if (cfg.k_max < 1) throw ConfigError("verify: --k-max must be >= 1");
    if (cfg.batches < 2) throw ConfigError("verify: --batches must be >= 2");
    if (cfg.T < static_cast<std::size_t>(cfg.batches)) throw ConfigError("verify: --T must be at least --batches");
    if (!(cfg.sigmas > 0.0)) throw ConfigError("verify: --sigmas must be positive");

    // Non-stationary parameters fail here, before any simulation.
    const ModelFile model = load_model_file(cfg.params);

    VerifyOptions options;
    options.T = cfg.T;
    options.seed = seed;
    options.k_max = cfg.k_max;
    options.batches = cfg.batches;
    options.burn_in = cfg.burn_in;
    options.sigmas = cfg.sigmas;
    options.single_factor = model.single_factor;

    const json config = {{"params", input_digest(cfg.params)}, {"k_max", cfg.k_max},   {"T", cfg.T},
                         {"batches", cfg.batches},             {"burn_in", cfg.burn_in}, {"sigmas", cfg.sigmas}};
    const VerifyReport report = verify_model(model.params, options);

    json checks = json::array();
    VerifySummary summary;
    summary.checks = report.checks.size();
    for (const auto& c : report.checks) {
        const bool counts = !c.informational() && !c.pass;
        json entry = {{"name", c.name},      {"kind", c.kind},         {"lhs", number(c.lhs)},
                      {"rhs", number(c.rhs)}, {"se", number(c.se)},     {"pass", c.pass},
                      {"elements", c.elements}, {"failures", c.failures}, {"max_abs_z", number(c.max_abs_z)}};
        if (!c.note.empty()) entry["note"] = c.note;
        checks.push_back(std::move(entry));
        if (counts) {
            std::ostringstream line;
            line << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs << " se=" << c.se;
            summary.failures.push_back(line.str());
        }
    }
    const auto& p = model.params;
    json out = {{"meta", meta_json("verify", config, ctx)},
                {"model", {{"N", p.size()}, {"a", number(p.a())}, {"rho", number(p.rho)}, {"V", number(p.V())}}},
                {"all_passed", report.all_passed()},
                {"checks", std::move(checks)}};
    ensure_out_dir(ctx);
    write_json(ctx.output(cfg.report), out);
    return summary;
}

// ---------------------------------------------------------------------------
// resample

void cmd_resample(const ResampleConfig& cfg, const RunContext& ctx) {
    require_file(cfg.input, "resample: --input");
    const json config = {{"input", input_digest(cfg.input)},
                         {"layout", cfg.layout == Layout::Long ? "long" : "wide"},
                         {"allow_missing", cfg.allow_missing}};
    const ReturnPanel monthly = resample_monthly(load_panel(cfg.input, {cfg.layout, cfg.allow_missing}));
    ensure_out_dir(ctx);
    emit_csv(monthly, ctx.output(cfg.out), {provenance_line("resample", config, ctx)});
}

}  // namespace fmom::cli
