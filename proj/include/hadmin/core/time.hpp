#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hadmin {

/// Calendar date with day arithmetic. Serializes as "YYYY-MM-DD".
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days d) : days_(d) {}
    Date(int y, unsigned m, unsigned d);

    /// Parses "YYYY-MM-DD"; throws FormatError on anything else.
    static Date parse(std::string_view text);

    std::string str() const;      // 2025-03-25
    std::string compact() const;  // 20250325

    int year() const;
    unsigned month() const;
    unsigned day() const;

    Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }
    int days_until(Date other) const { return static_cast<int>((other.days_ - days_).count()); }
    std::chrono::sys_days sys() const { return days_; }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

/// Local wall-clock instant at minute resolution (minutes since 1970-01-01T00:00 local).
/// The engine uses one fixed UTC offset per hospital, so local minutes are totally ordered.
class TimePoint {
public:
    constexpr TimePoint() = default;
    constexpr explicit TimePoint(std::int64_t minutes) : minutes_(minutes) {}
    static TimePoint at(Date d, int minute_of_day);

    /// Accepts "YYYY-MM-DDTHH:MM[:SS][(+|-)HH:MM|Z]". An explicit offset other than
    /// `local_offset_min` is converted into local time.
    static TimePoint parse_iso(std::string_view text, int local_offset_min);

    Date date() const;
    int minute_of_day() const;
    std::int64_t minutes() const { return minutes_; }

    /// "2025-03-25T12:30:00+09:00"
    std::string iso(int offset_min) const;
    /// "2025-03-25T12:30:00" (no offset), as printed to agents.
    std::string iso_local() const;

    TimePoint plus_minutes(std::int64_t m) const { return TimePoint(minutes_ + m); }

    auto operator<=>(const TimePoint&) const = default;

private:
    std::int64_t minutes_ = 0;
};

/// Converts fractional hours to whole minutes; throws ConfigError if not a whole minute.
int hours_to_minutes(double hours);
double minutes_to_hours(int minutes);
/// Like hours_to_minutes but returns false instead of throwing.
bool try_hours_to_minutes(double hours, int& out);
/// "HH:MM" for a minute-of-day.
std::string clock_string(int minute_of_day);

/// A day-local slot address.
struct SlotRef {
    Date date;
    int index = 0;

    auto operator<=>(const SlotRef&) const = default;
};

/// Operating hours, slot unit and simulation horizon. All quantities are integer minutes.
class TimeSystem {
public:
    TimeSystem() = default;
    /// Throws ConfigError unless end > start, the span is a multiple of the unit and
    /// the unit divides one hour.
    TimeSystem(int start_minute, int end_minute, int unit_minutes, Date start_date, int days,
               int utc_offset_minutes = 9 * 60);

    static TimeSystem from_hours(double start_hour, double end_hour, double time_unit,
                                 Date start_date, int days, int utc_offset_minutes = 9 * 60);

    int start_minute() const { return start_min_; }
    int end_minute() const { return end_min_; }
    int unit_minutes() const { return unit_min_; }
    int utc_offset_minutes() const { return offset_min_; }
    double start_hour() const { return minutes_to_hours(start_min_); }
    double end_hour() const { return minutes_to_hours(end_min_); }
    double time_unit() const { return minutes_to_hours(unit_min_); }

    Date start_date() const { return start_date_; }
    /// Exclusive end of the horizon.
    Date end_date() const { return start_date_.plus_days(days_); }
    Date last_date() const { return start_date_.plus_days(days_ - 1); }
    int days() const { return days_; }
    bool in_horizon(Date d) const { return d >= start_date_ && d < end_date(); }
    std::vector<Date> dates() const;

    /// Maximum patients per hour, 1/τ.
    int max_capacity() const { return 60 / unit_min_; }
    int slots_per_day() const { return (end_min_ - start_min_) / unit_min_; }

    /// First instant after the horizon: last day's closing time.
    TimePoint horizon_end() const { return TimePoint::at(last_date(), end_min_); }
    TimePoint horizon_start() const { return TimePoint::at(start_date_, start_min_); }

    bool operator==(const TimeSystem&) const = default;

private:
    int start_min_ = 0;
    int end_min_ = 0;
    int unit_min_ = 0;
    Date start_date_{};
    int days_ = 0;
    int offset_min_ = 9 * 60;
};

int slots_per_day(const TimeSystem& ts);

/// True if `capacity_per_hour` is a positive divisor of 1/τ.
bool is_valid_capacity(int capacity_per_hour, const TimeSystem& ts);

/// Consecutive slots per consultation, (1/capacity)/τ. Throws ConfigError for non-divisors.
int appointment_slot_count(int capacity_per_hour, const TimeSystem& ts);

/// Start instant of a slot. Throws RangeError outside the grid or horizon.
TimePoint slot_to_clock(const SlotRef& ref, const TimeSystem& ts);
/// End instant of a slot.
TimePoint slot_end_clock(const SlotRef& ref, const TimeSystem& ts);

/// Enclosing slot of an instant. Throws RangeError outside operating hours or horizon.
SlotRef clock_to_slot(TimePoint t, const TimeSystem& ts);

} // namespace hadmin
