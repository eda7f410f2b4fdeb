#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fmom {

/// A period label: a calendar month (`day == 0`) or a calendar day.
/// Years are not limited to four digits so that long simulated samples
/// still get unique monthly labels.
struct Period {
    int year = 1;
    int month = 1;
    int day = 0;

    bool is_monthly() const noexcept { return day == 0; }
    Period month_of() const noexcept { return {year, month, 0}; }
    Period next_month() const noexcept;

    /// `YYYY-MM` or `YYYY-MM-DD`.
    std::string str() const;
    static Period parse(std::string_view text);

    auto operator<=>(const Period&) const = default;
};

/// Strictly increasing sequence of period labels shared by aligned panels.
class Calendar {
public:
    Calendar() = default;
    explicit Calendar(std::vector<Period> periods);

    /// `count` consecutive months starting at `first`.
    static Calendar monthly(Period first, std::size_t count);

    std::size_t size() const noexcept { return periods_.size(); }
    bool empty() const noexcept { return periods_.empty(); }
    const Period& operator[](std::size_t i) const { return periods_[i]; }
    const std::vector<Period>& periods() const noexcept { return periods_; }
    auto begin() const noexcept { return periods_.begin(); }
    auto end() const noexcept { return periods_.end(); }

    bool is_monthly() const noexcept;
    bool is_daily() const noexcept;

    /// First `count` periods.
    Calendar head(std::size_t count) const;

    bool operator==(const Calendar&) const = default;

private:
    std::vector<Period> periods_;
};

/// Throws AlignmentError listing the first few dates present in one
/// calendar and not the other.
void require_aligned(const Calendar& lhs, const Calendar& rhs, std::string_view context);

}  // namespace fmom
