#include "hadmin/core/time.hpp"

#include "hadmin/core/errors.hpp"

#include <cmath>
#include <cstdio>

namespace hadmin {

namespace {

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

Date::Date(int y, unsigned m, unsigned d) {
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw FormatError("invalid calendar date");
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_fixed_int(text, 0, 4, y) ||
        !parse_fixed_int(text, 5, 2, m) || !parse_fixed_int(text, 8, 2, d)) {
        throw FormatError("expected YYYY-MM-DD date, got '" + std::string(text) + "'");
    }
    return Date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

int Date::year() const { return static_cast<int>(std::chrono::year_month_day{days_}.year()); }
unsigned Date::month() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.month()); }
unsigned Date::day() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.day()); }

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

std::string Date::compact() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d%02u%02u", year(), month(), day());
    return buf;
}

TimePoint TimePoint::at(Date d, int minute_of_day) {
    return TimePoint(static_cast<std::int64_t>(d.sys().time_since_epoch().count()) * 1440 + minute_of_day);
}

Date TimePoint::date() const {
    return Date(std::chrono::sys_days{std::chrono::days{floor_div(minutes_, 1440)}});
}

int TimePoint::minute_of_day() const {
    return static_cast<int>(minutes_ - floor_div(minutes_, 1440) * 1440);
}

TimePoint TimePoint::parse_iso(std::string_view text, int local_offset_min) {
    auto fail = [&] { return FormatError("invalid ISO timestamp '" + std::string(text) + "'"); };
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ')) throw fail();
    Date d = Date::parse(text.substr(0, 10));
    int hh = 0, mm = 0, ss = 0;
    if (!parse_fixed_int(text, 11, 2, hh) || text[13] != ':' || !parse_fixed_int(text, 14, 2, mm)) throw fail();
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!parse_fixed_int(text, pos + 1, 2, ss)) throw fail();
        pos += 3;
    }
    if (hh > 24 || mm > 59 || ss > 59 || ss != 0) throw fail();
    int offset = local_offset_min;
    if (pos < text.size()) {
        char sign = text[pos];
        if (sign == 'Z' && pos + 1 == text.size()) {
            offset = 0;
        } else if ((sign == '+' || sign == '-') && text.size() == pos + 6 && text[pos + 3] == ':') {
            int oh = 0, om = 0;
            if (!parse_fixed_int(text, pos + 1, 2, oh) || !parse_fixed_int(text, pos + 4, 2, om)) throw fail();
            offset = (oh * 60 + om) * (sign == '-' ? -1 : 1);
        } else {
            throw fail();
        }
    }
    return TimePoint::at(d, hh * 60 + mm).plus_minutes(local_offset_min - offset);
}

std::string TimePoint::iso_local() const {
    int mod = minute_of_day();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:00", date().str().c_str(), mod / 60, mod % 60);
    return buf;
}

std::string TimePoint::iso(int offset_min) const {
    int a = offset_min < 0 ? -offset_min : offset_min;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%02d:%02d", offset_min < 0 ? '-' : '+', a / 60, a % 60);
    return iso_local() + buf;
}

bool try_hours_to_minutes(double hours, int& out) {
    if (!std::isfinite(hours)) return false;
    double m = hours * 60.0;
    double r = std::round(m);
    if (std::fabs(m - r) > 1e-6) return false;
    out = static_cast<int>(r);
    return true;
}

int hours_to_minutes(double hours) {
    int m = 0;
    if (!try_hours_to_minutes(hours, m)) {
        throw ConfigError("hour value " + std::to_string(hours) + " is not a whole number of minutes");
    }
    return m;
}

double minutes_to_hours(int minutes) { return static_cast<double>(minutes) / 60.0; }

std::string clock_string(int minute_of_day) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minute_of_day / 60, minute_of_day % 60);
    return buf;
}

TimeSystem::TimeSystem(int start_minute, int end_minute, int unit_minutes, Date start_date, int days,
                       int utc_offset_minutes)
    : start_min_(start_minute),
      end_min_(end_minute),
      unit_min_(unit_minutes),
      start_date_(start_date),
      days_(days),
      offset_min_(utc_offset_minutes) {
    if (unit_min_ <= 0) throw ConfigError("time unit must be positive");
    if (60 % unit_min_ != 0) throw ConfigError("1/time_unit must be a positive integer");
    if (start_min_ < 0 || end_min_ > 24 * 60 || end_min_ <= start_min_) {
        throw ConfigError("operating hours must satisfy 0 <= start_hour < end_hour <= 24");
    }
    if ((end_min_ - start_min_) % unit_min_ != 0) {
        throw ConfigError("operating span is not a multiple of the time unit");
    }
    if (days_ <= 0) throw ConfigError("simulation period must be at least one day");
}

TimeSystem TimeSystem::from_hours(double start_hour, double end_hour, double time_unit, Date start_date,
                                  int days, int utc_offset_minutes) {
    return TimeSystem(hours_to_minutes(start_hour), hours_to_minutes(end_hour), hours_to_minutes(time_unit),
                      start_date, days, utc_offset_minutes);
}

std::vector<Date> TimeSystem::dates() const {
    std::vector<Date> out;
    out.reserve(static_cast<std::size_t>(days_));
    for (int i = 0; i < days_; ++i) out.push_back(start_date_.plus_days(i));
    return out;
}

int slots_per_day(const TimeSystem& ts) { return ts.slots_per_day(); }

bool is_valid_capacity(int capacity_per_hour, const TimeSystem& ts) {
    return capacity_per_hour > 0 && ts.max_capacity() % capacity_per_hour == 0;
}

int appointment_slot_count(int capacity_per_hour, const TimeSystem& ts) {
    if (!is_valid_capacity(capacity_per_hour, ts)) {
        throw ConfigError("capacity " + std::to_string(capacity_per_hour) + " does not divide 1/time_unit = " +
                          std::to_string(ts.max_capacity()));
    }
    return ts.max_capacity() / capacity_per_hour;
}

TimePoint slot_to_clock(const SlotRef& ref, const TimeSystem& ts) {
    if (!ts.in_horizon(ref.date)) throw RangeError("slot date " + ref.date.str() + " outside horizon");
    if (ref.index < 0 || ref.index >= ts.slots_per_day()) {
        throw RangeError("slot index " + std::to_string(ref.index) + " outside the day grid");
    }
    return TimePoint::at(ref.date, ts.start_minute() + ref.index * ts.unit_minutes());
}

TimePoint slot_end_clock(const SlotRef& ref, const TimeSystem& ts) {
    return slot_to_clock(ref, ts).plus_minutes(ts.unit_minutes());
}

SlotRef clock_to_slot(TimePoint t, const TimeSystem& ts) {
    Date d = t.date();
    if (!ts.in_horizon(d)) throw RangeError("timestamp " + t.iso_local() + " outside horizon");
    int mod = t.minute_of_day();
    if (mod < ts.start_minute() || mod >= ts.end_minute()) {
        throw RangeError("timestamp " + t.iso_local() + " outside operating hours");
    }
    return SlotRef{d, (mod - ts.start_minute()) / ts.unit_minutes()};
}

} // namespace hadmin
