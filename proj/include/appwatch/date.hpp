#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace appwatch {

/// Calendar date at daily granularity. Serialized as ISO-8601 `YYYY-MM-DD`.
class Date {
public:
    constexpr Date() = default;
    explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}

    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Strict `YYYY-MM-DD`; throws Error(Errc::InvalidDate) otherwise.
    static Date parse(std::string_view iso);

    std::string iso() const;
    constexpr std::chrono::sys_days sys_days() const { return days_; }
    constexpr long serial() const { return days_.time_since_epoch().count(); }

    constexpr Date operator+(long n) const { return Date{days_ + std::chrono::days{n}}; }
    constexpr Date operator-(long n) const { return Date{days_ - std::chrono::days{n}}; }
    constexpr Date& operator+=(long n) { days_ += std::chrono::days{n}; return *this; }
    friend constexpr long operator-(Date a, Date b) { return (a.days_ - b.days_).count(); }

    friend constexpr auto operator<=>(Date, Date) = default;
    friend constexpr bool operator==(Date, Date) = default;

private:
    std::chrono::sys_days days_{};
};

/// Inclusive range of calendar days.
struct DateRange {
    Date first;
    Date last;

    long size() const { return last - first + 1; }
    bool contains(Date d) const { return first <= d && d <= last; }
};

/// `days` consecutive days ending at `end` inclusive, i.e. the half-open
/// interval (end - days, end].
struct Window {
    Date end;
    int days = 1;

    Date first() const { return end - (days - 1); }
    Date start_exclusive() const { return end - days; }
    bool contains(Date d) const { return first() <= d && d <= end; }
    DateRange range() const { return {first(), end}; }
};

}  // namespace appwatch
