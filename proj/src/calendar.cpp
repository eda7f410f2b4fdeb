#include "fmom/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "fmom/errors.hpp"

namespace fmom {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw Error("invalid period label '" + std::string(whole) + "'");
    }
    return value;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

}  // namespace

Period Period::next_month() const noexcept {
    return month == 12 ? Period{year + 1, 1, 0} : Period{year, month + 1, 0};
}

std::string Period::str() const {
    char buf[32];
    if (is_monthly()) {
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    }
    return buf;
}

Period Period::parse(std::string_view text) {
    const auto first_dash = text.find('-');
    if (first_dash == std::string_view::npos || first_dash < 4) {
        throw Error("invalid period label '" + std::string(text) + "'");
    }
    Period p;
    p.year = parse_int(text.substr(0, first_dash), text);
    auto rest = text.substr(first_dash + 1);
    const auto second_dash = rest.find('-');
    if (second_dash == std::string_view::npos) {
        if (rest.size() != 2) throw Error("invalid period label '" + std::string(text) + "'");
        p.month = parse_int(rest, text);
        p.day = 0;
    } else {
        if (second_dash != 2 || rest.size() != 5) {
            throw Error("invalid period label '" + std::string(text) + "'");
        }
        p.month = parse_int(rest.substr(0, 2), text);
        p.day = parse_int(rest.substr(3), text);
    }
    if (p.year < 1 || p.month < 1 || p.month > 12) {
        throw Error("invalid period label '" + std::string(text) + "'");
    }
    if (!p.is_monthly() && (p.day < 1 || p.day > days_in_month(p.year, p.month))) {
        throw Error("invalid period label '" + std::string(text) + "'");
    }
    return p;
}

Calendar::Calendar(std::vector<Period> periods) : periods_(std::move(periods)) {
    for (std::size_t i = 1; i < periods_.size(); ++i) {
        if (!(periods_[i - 1] < periods_[i])) {
            throw Error("calendar must be strictly increasing: " + periods_[i - 1].str() +
                        " precedes " + periods_[i].str());
        }
    }
}

Calendar Calendar::monthly(Period first, std::size_t count) {
    std::vector<Period> periods;
    periods.reserve(count);
    Period p = first.month_of();
    for (std::size_t i = 0; i < count; ++i) {
        periods.push_back(p);
        p = p.next_month();
    }
    return Calendar(std::move(periods));
}

bool Calendar::is_monthly() const noexcept {
    return std::all_of(periods_.begin(), periods_.end(), [](const Period& p) { return p.is_monthly(); });
}

bool Calendar::is_daily() const noexcept {
    return std::none_of(periods_.begin(), periods_.end(), [](const Period& p) { return p.is_monthly(); });
}

Calendar Calendar::head(std::size_t count) const {
    count = std::min(count, periods_.size());
    Calendar out;
    out.periods_.assign(periods_.begin(), periods_.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
}

void require_aligned(const Calendar& lhs, const Calendar& rhs, std::string_view context) {
    if (lhs == rhs) return;
    std::vector<Period> only_lhs;
    std::vector<Period> only_rhs;
    std::set_difference(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(), std::back_inserter(only_lhs));
    std::set_difference(rhs.begin(), rhs.end(), lhs.begin(), lhs.end(), std::back_inserter(only_rhs));
    auto list = [](const std::vector<Period>& dates) {
        std::string s;
        for (std::size_t i = 0; i < dates.size() && i < 5; ++i) {
            if (i) s += ' ';
            s += dates[i].str();
        }
        if (dates.size() > 5) s += " ...";
        return s.empty() ? std::string("none") : s;
    };
    throw AlignmentError(std::string(context) + ": misaligned calendars (" + std::to_string(lhs.size()) +
                         " vs " + std::to_string(rhs.size()) + " dates); only in first: " + list(only_lhs) +
                         "; only in second: " + list(only_rhs));
}

}  // namespace fmom
