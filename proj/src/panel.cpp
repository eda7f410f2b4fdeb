#include "fmom/panel.hpp"

#include <algorithm>
#include <unordered_set>

#include "fmom/errors.hpp"

namespace fmom {

ReturnPanel::ReturnPanel(Calendar calendar, std::vector<std::string> assets, Eigen::MatrixXd values)
    : calendar_(std::move(calendar)), assets_(std::move(assets)), values_(std::move(values)) {
    if (values_.rows() != static_cast<Eigen::Index>(calendar_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(assets_.size())) {
        throw Error("ReturnPanel: values are " + std::to_string(values_.rows()) + "x" +
                    std::to_string(values_.cols()) + " but calendar x assets is " +
                    std::to_string(calendar_.size()) + "x" + std::to_string(assets_.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& a : assets_) {
        if (!seen.insert(a).second) throw DuplicateError("ReturnPanel: duplicate asset '" + a + "'");
    }
}

Eigen::Index ReturnPanel::column_index(const std::string& asset) const {
    auto it = std::find(assets_.begin(), assets_.end(), asset);
    if (it == assets_.end()) throw Error("ReturnPanel: unknown asset '" + asset + "'");
    return static_cast<Eigen::Index>(it - assets_.begin());
}

bool ReturnPanel::has_missing() const { return values_.hasNaN(); }

ReturnPanel ReturnPanel::select(std::span<const std::string> assets) const {
    Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(assets.size()));
    for (std::size_t j = 0; j < assets.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = values_.col(column_index(assets[j]));
    }
    return ReturnPanel(calendar_, {assets.begin(), assets.end()}, std::move(out));
}

ReturnPanel ReturnPanel::head(std::size_t count) const {
    count = std::min(count, calendar_.size());
    return ReturnPanel(calendar_.head(count), assets_, values_.topRows(static_cast<Eigen::Index>(count)));
}

NamedSeries::NamedSeries(Calendar cal, std::string label, Eigen::VectorXd v)
    : calendar(std::move(cal)), name(std::move(label)), values(std::move(v)) {
    if (values.size() != static_cast<Eigen::Index>(calendar.size())) {
        throw Error("NamedSeries '" + name + "': length " + std::to_string(values.size()) +
                    " differs from calendar length " + std::to_string(calendar.size()));
    }
}

NamedSeries NamedSeries::from_column(const ReturnPanel& panel, Eigen::Index col) {
    return NamedSeries(panel.calendar(), panel.assets().at(static_cast<std::size_t>(col)),
                       panel.values().col(col));
}

PnlSeries::PnlSeries(Calendar cal, Eigen::VectorXd v, PnlMeta m)
    : calendar(std::move(cal)), values(std::move(v)), meta(std::move(m)) {
    if (values.size() != static_cast<Eigen::Index>(calendar.size())) {
        throw Error("PnlSeries: length " + std::to_string(values.size()) + " differs from calendar length " +
                    std::to_string(calendar.size()));
    }
}

PnlSeries PnlSeries::from(const NamedSeries& s) {
    return PnlSeries(s.calendar, s.values, PnlMeta{s.name, {}, {}});
}

PnlSeries PnlSeries::head(std::size_t count) const {
    count = std::min(count, calendar.size());
    PnlMeta m = meta;
    if (m.constituents.size() > count) m.constituents.resize(count);
    return PnlSeries(calendar.head(count), values.head(static_cast<Eigen::Index>(count)), std::move(m));
}

Eigen::Index PnlSeries::valid_count() const {
    return static_cast<Eigen::Index>((values.array() == values.array()).count());
}

ReturnPanel panel_from_series(std::span<const NamedSeries> series) {
    if (series.empty()) throw EmptyInputError("panel_from_series: no series");
    const Calendar& cal = series.front().calendar;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(cal.size()), static_cast<Eigen::Index>(series.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < series.size(); ++j) {
        require_aligned(cal, series[j].calendar, "panel_from_series");
        values.col(static_cast<Eigen::Index>(j)) = series[j].values;
        names.push_back(series[j].name);
    }
    return ReturnPanel(cal, std::move(names), std::move(values));
}

ReturnPanel resample_monthly(const ReturnPanel& daily) {
    const Calendar& cal = daily.calendar();
    if (!cal.is_daily()) throw Error("resample_monthly: input calendar is not daily");
    if (cal.empty()) throw EmptyInputError("resample_monthly: empty panel");

    // Every month between the first and last observation gets a row so that
    // gaps surface as missing months instead of vanishing.
    const Period first = cal[0].month_of();
    const Period last = cal[cal.size() - 1].month_of();
    std::vector<Period> months;
    for (Period p = first; p <= last; p = p.next_month()) months.push_back(p);

    const Eigen::Index n_months = static_cast<Eigen::Index>(months.size());
    Eigen::MatrixXd growth = Eigen::MatrixXd::Ones(n_months, daily.cols());
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(n_months, daily.cols());

    Eigen::Index row = 0;
    for (std::size_t d = 0; d < cal.size(); ++d) {
        while (months[static_cast<std::size_t>(row)] < cal[d].month_of()) ++row;
        for (Eigen::Index j = 0; j < daily.cols(); ++j) {
            const double r = daily.values()(static_cast<Eigen::Index>(d), j);
            if (is_missing(r)) continue;
            growth(row, j) *= 1.0 + r;
            ++count(row, j);
        }
    }
    Eigen::MatrixXd monthly = (growth.array() - 1.0).matrix();
    for (Eigen::Index i = 0; i < n_months; ++i)
        for (Eigen::Index j = 0; j < daily.cols(); ++j)
            if (count(i, j) == 0) monthly(i, j) = kMissing;
    return ReturnPanel(Calendar(std::move(months)), daily.assets(), std::move(monthly));
}

}  // namespace fmom
