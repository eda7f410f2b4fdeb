#include "fmom/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fmom/errors.hpp"

namespace fmom {

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            if (!field.empty()) throw ParseError("stray quote inside unquoted field", line_no);
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            if (was_quoted) throw ParseError("characters after closing quote", line_no);
            field += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    fields.push_back(std::move(field));
    return fields;
}

std::string quote_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), last, value);
    if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

double parse_cell(std::string_view text, bool allow_missing, std::size_t line_no) {
    if (auto v = parse_number(text)) return *v;
    if (allow_missing) return kMissing;
    throw ParseError("non-numeric cell '" + std::string(text) + "' (use allow-missing to accept)", line_no);
}

Period parse_date(std::string_view text, std::size_t line_no) {
    try {
        return Period::parse(trim(text));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
    }
}

struct Line {
    std::size_t number;
    std::vector<std::string> fields;
};

std::vector<Line> read_lines(std::istream& in) {
    std::vector<Line> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string_view view = trim(raw);
        if (view.empty() || view.front() == '#') continue;
        lines.push_back({number, split_csv_line(view, number)});
    }
    return lines;
}

void check_resolution(const std::vector<Period>& dates) {
    const bool any_monthly = std::any_of(dates.begin(), dates.end(), [](const Period& p) { return p.is_monthly(); });
    const bool any_daily = std::any_of(dates.begin(), dates.end(), [](const Period& p) { return !p.is_monthly(); });
    if (any_monthly && any_daily) throw Error("panel mixes monthly and daily date labels");
}

ReturnPanel parse_wide(const std::vector<Line>& lines, bool allow_missing) {
    const auto& header = lines.front();
    if (header.fields.size() < 2) throw ParseError("wide header needs date plus at least one asset", header.number);
    std::vector<std::string> assets(header.fields.begin() + 1, header.fields.end());
    for (auto& a : assets) a = std::string(trim(a));

    std::vector<std::pair<Period, std::size_t>> order;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.fields.size() != header.fields.size()) {
            throw ParseError("expected " + std::to_string(header.fields.size()) + " fields, got " +
                                 std::to_string(line.fields.size()),
                             line.number);
        }
        order.emplace_back(parse_date(line.fields[0], line.number), i);
    }
    if (order.empty()) throw EmptyInputError("panel file has a header but no rows");
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (order[i].first == order[i - 1].first) {
            throw DuplicateError("duplicate date " + order[i].first.str() + " (line " +
                                 std::to_string(lines[order[i].second].number) + ")");
        }
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(assets.size()));
    std::vector<Period> dates;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& line = lines[order[r].second];
        dates.push_back(order[r].first);
        for (std::size_t j = 0; j < assets.size(); ++j) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                parse_cell(line.fields[j + 1], allow_missing, line.number);
        }
    }
    check_resolution(dates);
    return ReturnPanel(Calendar(std::move(dates)), std::move(assets), std::move(values));
}

ReturnPanel parse_long(const std::vector<Line>& lines, bool allow_missing) {
    const auto& header = lines.front();
    if (header.fields.size() != 3) throw ParseError("long header must be date,asset,return", header.number);

    std::map<std::pair<Period, std::string>, double> cells;
    std::set<Period> date_set;
    std::set<std::string> asset_set;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.fields.size() != 3) {
            throw ParseError("expected 3 fields, got " + std::to_string(line.fields.size()), line.number);
        }
        const Period date = parse_date(line.fields[0], line.number);
        std::string asset(trim(line.fields[1]));
        if (asset.empty()) throw ParseError("empty asset identifier", line.number);
        const double value = parse_cell(line.fields[2], allow_missing, line.number);
        if (!cells.emplace(std::make_pair(date, asset), value).second) {
            throw DuplicateError("duplicate (date, asset) pair (" + date.str() + ", " + asset + ") (line " +
                                 std::to_string(line.number) + ")");
        }
        date_set.insert(date);
        asset_set.insert(std::move(asset));
    }
    if (cells.empty()) throw EmptyInputError("panel file has a header but no rows");

    std::vector<Period> dates(date_set.begin(), date_set.end());
    std::vector<std::string> assets(asset_set.begin(), asset_set.end());
    check_resolution(dates);
    Eigen::MatrixXd values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dates.size()),
                                                       static_cast<Eigen::Index>(assets.size()), kMissing);
    for (std::size_t r = 0; r < dates.size(); ++r) {
        for (std::size_t j = 0; j < assets.size(); ++j) {
            auto it = cells.find({dates[r], assets[j]});
            if (it != cells.end()) {
                values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = it->second;
            } else if (!allow_missing) {
                throw ParseError("no row for (" + dates[r].str() + ", " + assets[j] +
                                     "); use allow-missing to accept gaps",
                                 header.number);
            }
        }
    }
    return ReturnPanel(Calendar(std::move(dates)), std::move(assets), std::move(values));
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
}

}  // namespace

double GridResult::at(int m, int n) const {
    auto mi = std::find(m_values.begin(), m_values.end(), m);
    auto ni = std::find(n_values.begin(), n_values.end(), n);
    if (mi == m_values.end() || ni == n_values.end()) {
        throw Error("GridResult: no cell (" + std::to_string(m) + "," + std::to_string(n) + ")");
    }
    return cells(mi - m_values.begin(), ni - n_values.begin());
}

int GridResult::observations_at(int m, int n) const {
    auto mi = std::find(m_values.begin(), m_values.end(), m);
    auto ni = std::find(n_values.begin(), n_values.end(), n);
    if (mi == m_values.end() || ni == n_values.end()) {
        throw Error("GridResult: no cell (" + std::to_string(m) + "," + std::to_string(n) + ")");
    }
    return observations(mi - m_values.begin(), ni - n_values.begin());
}

Layout parse_layout(std::string_view name) {
    if (name == "long") return Layout::Long;
    if (name == "wide") return Layout::Wide;
    throw ConfigError("unknown layout '" + std::string(name) + "' (expected long or wide)");
}

ReturnPanel parse_panel(std::istream& in, const LoadOptions& options) {
    const auto lines = read_lines(in);
    if (lines.empty()) throw EmptyInputError("empty panel input");
    return options.layout == Layout::Wide ? parse_wide(lines, options.allow_missing)
                                          : parse_long(lines, options.allow_missing);
}

ReturnPanel load_panel(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return parse_panel(in, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    } catch (const EmptyInputError& e) {
        throw EmptyInputError(path.string() + ": " + e.what());
    }
}

NamedSeries load_series(const std::filesystem::path& path, std::optional<std::string> column, bool allow_missing) {
    const ReturnPanel panel = load_panel(path, {Layout::Wide, allow_missing});
    const Eigen::Index col = column ? panel.column_index(*column) : 0;
    return NamedSeries::from_column(panel, col);
}

std::string format_number(double value) {
    if (is_missing(value)) return {};
    if (value == 0.0) return "0";  // folds -0 as well
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 10);
    if (ec != std::errc{}) throw Error("format_number: conversion failed");
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const ReturnPanel& panel, const std::vector<std::string>& comments) {
    write_comments(out, comments);
    out << "date";
    for (const auto& a : panel.assets()) out << ',' << quote_field(a);
    out << '\n';
    for (Eigen::Index i = 0; i < panel.rows(); ++i) {
        out << panel.calendar()[static_cast<std::size_t>(i)].str();
        for (Eigen::Index j = 0; j < panel.cols(); ++j) out << ',' << format_number(panel.values()(i, j));
        out << '\n';
    }
}

void write_csv(std::ostream& out, const GridResult& grid, const std::vector<std::string>& comments) {
    write_comments(out, comments);
    out << "m/n";
    for (int n : grid.n_values) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < grid.m_values.size(); ++i) {
        out << grid.m_values[i];
        for (std::size_t j = 0; j < grid.n_values.size(); ++j) {
            out << ',' << format_number(grid.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
}

void emit_csv(const ReturnPanel& panel, const std::filesystem::path& path, const std::vector<std::string>& comments) {
    auto out = open_for_write(path);
    write_csv(out, panel, comments);
    finish(out, path);
}

void emit_csv(const NamedSeries& series, const std::filesystem::path& path,
              const std::vector<std::string>& comments) {
    const NamedSeries one[] = {series};
    emit_csv(panel_from_series(one), path, comments);
}

void emit_csv(const GridResult& grid, const std::filesystem::path& path, const std::vector<std::string>& comments) {
    auto out = open_for_write(path);
    write_csv(out, grid, comments);
    finish(out, path);
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    auto out = open_for_write(path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    finish(out, path);
}

}  // namespace fmom
