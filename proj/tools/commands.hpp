#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmom/csv.hpp"
#include "fmom/momentum.hpp"
#include "fmom/riskpipe.hpp"
#include "fmom/verify.hpp"

namespace fmom::cli {

namespace fs = std::filesystem;

/// Settings shared by every subcommand (the global flags).
struct RunContext {
    fs::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;

    /// Relative output paths land under out_dir.
    fs::path output(const fs::path& p) const;
    std::uint64_t require_seed(const std::string& command) const;
};

/// 64-bit FNV-1a, used for config hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Comment line embedded in every output file.
std::string provenance_line(const std::string& command, const nlohmann::json& config, const RunContext& ctx);

/// Hash of the effective configuration. Input files contribute their
/// contents rather than their paths, and output locations are excluded, so
/// the same inputs and settings hash identically wherever they live.
std::string config_hash(const std::string& command, const nlohmann::json& config, const RunContext& ctx);

/// "a..b" or a comma list "1,3,6" -> sorted values. An empty range
/// (a > b) raises ConfigError.
std::vector<int> parse_range(const std::string& text, const std::string& flag);

struct BacktestConfig {
    fs::path factors;
    fs::path market;
    std::optional<std::string> market_column;
    Layout layout = Layout::Wide;
    bool allow_missing = false;
    PipelineConfig pipeline;
    int m = 1;
    int n = 12;
    bool skip_pipeline = false;        // inputs already hedged and vol-scaled
    bool raw_strategies = false;       // report strategy PNLs without vol scaling
    bool menagerie_vol_target = false;
    fs::path pnl_out = "pnl.csv";
    fs::path stats_out = "stats.json";
};

struct SweepConfig {
    fs::path input;  // factor panel
    Weighting weighting = Weighting::Sign;
    std::optional<fs::path> stocks;
    Weighting stock_weighting = Weighting::Rank;
    std::optional<fs::path> market;
    std::optional<std::string> market_column;
    std::optional<fs::path> control_series;  // fixed control replacing per-cell stock momentum
    Layout layout = Layout::Wide;
    bool allow_missing = false;
    std::string m_range = "1..12";
    std::string n_range = "1..12";
    std::string stat = "all";                  // sharpe | corr | residual | all
    std::string direction = "factor-on-stock"; // or stock-on-factor
    bool risk_managed = false;
    PipelineConfig pipeline;
    int min_cell_obs = 24;
    std::optional<fs::path> out;  // single-statistic output path
};

struct SpanConfig {
    fs::path target;
    std::optional<std::string> target_column;
    std::vector<std::string> controls;  // path or path:column
    fs::path out = "span.json";
};

struct SimulateConfig {
    fs::path params;
    std::size_t T = 1000;
    std::size_t burn_in = 500;
    fs::path out = "panel.csv";
    std::optional<fs::path> factor_out;
    std::optional<fs::path> market_out;
};

struct VerifyConfig {
    fs::path params;
    int k_max = 3;
    std::size_t T = 1'000'000;
    int batches = 100;
    std::size_t burn_in = 500;
    double sigmas = 3.0;
    fs::path report = "verify.json";
};

struct ResampleConfig {
    fs::path input;
    Layout layout = Layout::Wide;
    bool allow_missing = false;
    fs::path out = "monthly.csv";
};

/// Parsed model.json: model parameters plus the optional single-factor
/// block consumed by verify.
struct ModelFile {
    ModelParams params;
    std::optional<SingleFactorSpec> single_factor;
};

ModelFile parse_model_json(const nlohmann::json& j);
ModelFile load_model_file(const fs::path& path);

// Each command validates its configuration, runs, and writes its outputs.
// Failures surface as fmom::Error carrying the process exit code.
void cmd_backtest(const BacktestConfig& cfg, const RunContext& ctx);
void cmd_sweep(const SweepConfig& cfg, const RunContext& ctx);
void cmd_span(const SpanConfig& cfg, const RunContext& ctx);
void cmd_simulate(const SimulateConfig& cfg, const RunContext& ctx);
struct VerifySummary {
    std::size_t checks = 0;
    std::vector<std::string> failures;  // one line per failed non-informational check
    bool passed() const { return failures.empty(); }
};

VerifySummary cmd_verify(const VerifyConfig& cfg, const RunContext& ctx);
void cmd_resample(const ResampleConfig& cfg, const RunContext& ctx);

}  // namespace fmom::cli
