#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmom/calendar.hpp"

namespace fmom {

/// Explicit missing marker for panel cells and series points.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Date-aligned return matrix: one row per calendar period, one column per
/// asset. Immutable after construction; every transformation returns a new
/// panel.
class ReturnPanel {
public:
    ReturnPanel() = default;
    ReturnPanel(Calendar calendar, std::vector<std::string> assets, Eigen::MatrixXd values);

    const Calendar& calendar() const noexcept { return calendar_; }
    const std::vector<std::string>& assets() const noexcept { return assets_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }

    Eigen::Index column_index(const std::string& asset) const;
    bool has_missing() const;

    /// Sub-panel with the named columns, in the given order.
    ReturnPanel select(std::span<const std::string> assets) const;
    /// First `count` rows.
    ReturnPanel head(std::size_t count) const;

private:
    Calendar calendar_;
    std::vector<std::string> assets_;
    Eigen::MatrixXd values_;
};

/// A single labelled return series (market, UMD, a strategy PNL read back
/// from disk).
struct NamedSeries {
    Calendar calendar;
    std::string name;
    Eigen::VectorXd values;

    NamedSeries() = default;
    NamedSeries(Calendar cal, std::string label, Eigen::VectorXd v);

    static NamedSeries from_column(const ReturnPanel& panel, Eigen::Index col);
};

/// Provenance carried alongside a strategy return series.
struct PnlMeta {
    std::string source;               // what produced the series
    std::vector<std::string> stages;  // pipeline stages applied, in order
    std::vector<int> constituents;    // per-date count of contributing columns (menagerie)
};

/// Strategy or factor return series with provenance.
struct PnlSeries {
    Calendar calendar;
    Eigen::VectorXd values;
    PnlMeta meta;

    PnlSeries() = default;
    PnlSeries(Calendar cal, Eigen::VectorXd v, PnlMeta m = {});

    static PnlSeries from(const NamedSeries& s);
    NamedSeries named(std::string label) const { return NamedSeries(calendar, std::move(label), values); }
    PnlSeries head(std::size_t count) const;
    Eigen::Index valid_count() const;
};

/// Builds a panel whose columns are the given series; calendars must agree.
ReturnPanel panel_from_series(std::span<const NamedSeries> series);

/// Daily -> monthly: compounds the daily returns within each month,
/// prod(1 + r) - 1, skipping missing days; months without observations are
/// missing.
ReturnPanel resample_monthly(const ReturnPanel& daily);

}  // namespace fmom
