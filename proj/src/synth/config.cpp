#include "hadmin/synth/config.hpp"

#include "hadmin/core/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <numeric>

namespace hadmin::synth {

namespace {

std::int64_t pow10(int n) {
    std::int64_t v = 1;
    while (n-- > 0) v *= 10;
    return v;
}

template <class T>
void check_range(const Range<T>& r, std::string_view name) {
    if (r.max < r.min) throw ConfigError(std::string(name) + ": min must not exceed max");
}

void check_unit_range(const Range<double>& r, std::string_view name) {
    check_range(r, name);
    if (r.min < 0.0 || r.max > 1.0) throw ConfigError(std::string(name) + ": ratios must lie in [0, 1]");
}

const YAML::Node require(const YAML::Node& root, const char* key) {
    const YAML::Node n = root[key];
    if (!n) throw ConfigError(std::string("missing config key '") + key + "'");
    return n;
}

template <class T>
T scalar(const YAML::Node& n, std::string_view key) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
    }
}

template <class T>
Range<T> parse_range(const YAML::Node& root, const char* key) {
    const YAML::Node n = require(root, key);
    if (n.IsScalar()) {
        T v = scalar<T>(n, key);
        return {v, v};
    }
    if (!n.IsMap() || !n["min"] || !n["max"]) {
        throw ConfigError(std::string("config key '") + key + "' must be a scalar or a {min, max} map");
    }
    return {scalar<T>(n["min"], key), scalar<T>(n["max"], key)};
}

Range<Date> parse_date_range(const YAML::Node& root) {
    const YAML::Node n = require(root, "start_date");
    try {
        if (n.IsScalar()) {
            Date d = Date::parse(n.Scalar());
            return {d, d};
        }
        return {Date::parse(require(n, "min").Scalar()), Date::parse(require(n, "max").Scalar())};
    } catch (const FormatError& e) {
        throw ConfigError(std::string("start_date: ") + e.what());
    }
}

// Parses {type: [...], probs: [...]} into the fixed order of `names`, checking that the
// decimal probabilities sum to exactly one.
template <std::size_t N>
std::array<double, N> parse_distribution(const YAML::Node& root, const char* key,
                                         const std::array<std::string_view, N>& names) {
    const YAML::Node n = require(root, key);
    const YAML::Node types = n["type"];
    const YAML::Node probs = n["probs"];
    if (!types || !probs || !types.IsSequence() || !probs.IsSequence() || types.size() != N ||
        probs.size() != N) {
        throw ConfigError(std::string(key) + ": expected 'type' and 'probs' lists of length " + std::to_string(N));
    }
    std::array<double, N> out{};
    std::array<bool, N> seen{};
    std::array<Decimal, N> exact{};
    for (std::size_t i = 0; i < N; ++i) {
        std::string t = types[i].Scalar();
        std::size_t slot = N;
        for (std::size_t j = 0; j < N; ++j) {
            if (names[j] == t) slot = j;
        }
        if (slot == N || seen[slot]) throw ConfigError(std::string(key) + ": unknown or repeated type '" + t + "'");
        seen[slot] = true;
        try {
            exact[slot] = Decimal::parse(probs[i].Scalar());
        } catch (const FormatError& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
        out[slot] = exact[slot].value();
    }
    int scale = 0;
    for (const auto& d : exact) scale = std::max(scale, d.scale);
    std::int64_t sum = 0;
    for (const auto& d : exact) {
        if (d.num < 0) throw ConfigError(std::string(key) + ": probabilities must be non-negative");
        sum += d.num * pow10(scale - d.scale);
    }
    if (sum != pow10(scale)) throw ConfigError(std::string(key) + ": probabilities must sum to exactly 1");
    return out;
}

} // namespace

double Decimal::value() const { return static_cast<double>(num) / static_cast<double>(pow10(scale)); }

Decimal Decimal::parse(std::string_view text) {
    Decimal d;
    bool neg = false;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) neg = text[i++] == '-';
    bool any = false, dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.' && !dot) {
            dot = true;
        } else if (c >= '0' && c <= '9') {
            if (d.scale > 12 || d.num > (INT64_MAX / 10) - 10) throw FormatError("decimal too long");
            d.num = d.num * 10 + (c - '0');
            if (dot) ++d.scale;
            any = true;
        } else {
            throw FormatError("not a plain decimal: '" + std::string(text) + "'");
        }
    }
    if (!any) throw FormatError("not a plain decimal: '" + std::string(text) + "'");
    if (neg) d.num = -d.num;
    return d;
}

void SynthConfig::validate() const {
    if (hospital_n < 1) throw ConfigError("hospital_n must be at least 1");
    if (days < 1) throw ConfigError("days must be at least 1");
    if (time_unit_minutes <= 0 || 60 % time_unit_minutes != 0) {
        throw ConfigError("time_unit must be a whole number of minutes dividing one hour");
    }
    check_range(start_date, "start_date");
    check_range(start_hour, "start_hour");
    check_range(end_hour, "end_hour");
    if (!(start_hour.max < end_hour.min)) throw ConfigError("start_hour range must lie before end_hour range");
    check_range(department_per_hospital, "department_per_hospital");
    if (department_per_hospital.min < 1 || department_per_hospital.max > 9) {
        throw ConfigError("department_per_hospital must lie within [1, 9]");
    }
    check_range(physician_per_department, "physician_per_department");
    if (physician_per_department.min < 0) throw ConfigError("physician_per_department must be non-negative");
    check_range(working_days, "working_days");
    if (working_days.min < 0 || working_days.max > days) {
        throw ConfigError("working_days must lie within [0, days]");
    }
    check_range(capacity_per_hour, "capacity_per_hour");
    const int max_cap = 60 / time_unit_minutes;
    bool any_divisor = false;
    for (int d = std::max(1, capacity_per_hour.min); d <= std::min(capacity_per_hour.max, max_cap); ++d) {
        if (max_cap % d == 0) any_divisor = true;
    }
    if (!any_divisor) {
        throw ConfigError("capacity_per_hour range contains no divisor of 1/time_unit = " + std::to_string(max_cap));
    }
    if (busy_schedule_prob < 0.0 || busy_schedule_prob > 1.0) throw ConfigError("busy_schedule_prob must lie in [0, 1]");
    check_unit_range(busy_schedule_ratio, "busy_schedule_ratio");
    check_unit_range(appointment_ratio, "appointment_ratio");
    auto check_probs = [](auto const& probs, std::string_view name) {
        double sum = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw ConfigError(std::string(name) + ": probabilities must be non-negative");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError(std::string(name) + ": probabilities must sum to 1");
    };
    check_probs(preference_probs, "preference");
    check_probs(symptom_probs, "symptom");
}

SynthConfig parse_synth_config(const YAML::Node& root) {
    if (!root.IsMap()) throw ConfigError("config root must be a map");
    SynthConfig c;
    if (root["level"]) c.level = root["level"].Scalar();
    c.hospital_n = scalar<int>(require(root, "hospital_n"), "hospital_n");
    c.start_date = parse_date_range(root);
    c.days = scalar<int>(require(root, "days"), "days");
    {
        int minutes = 0;
        if (!try_hours_to_minutes(scalar<double>(require(root, "time_unit"), "time_unit"), minutes)) {
            throw ConfigError("time_unit must be a whole number of minutes");
        }
        c.time_unit_minutes = minutes;
    }
    c.start_hour = parse_range<double>(root, "start_hour");
    c.end_hour = parse_range<double>(root, "end_hour");
    // Accept the misspelled key as it appears in some published configs.
    c.department_per_hospital = parse_range<int>(
        root, !root["department_per_hospital"] && root["departemnt_per_hospital"] ? "departemnt_per_hospital"
                                                                                  : "department_per_hospital");
    c.physician_per_department = parse_range<int>(root, "physician_per_department");
    c.working_days = parse_range<int>(root, "working_days");
    c.capacity_per_hour = parse_range<int>(root, "capacity_per_hour");
    c.busy_schedule_prob = scalar<double>(require(root, "busy_schedule_prob"), "busy_schedule_prob");
    c.busy_schedule_ratio = parse_range<double>(root, "busy_schedule_ratio");
    c.appointment_ratio = parse_range<double>(root, "appointment_ratio");
    c.preference_probs = parse_distribution<3>(root, "preference", {"asap", "physician", "date"});
    c.symptom_probs = parse_distribution<2>(root, "symptom", {"without_history", "with_history"});
    if (root["rng_seed"]) c.rng_seed = scalar<std::uint64_t>(root["rng_seed"], "rng_seed");
    if (root["utc_offset_minutes"]) c.utc_offset_minutes = scalar<int>(root["utc_offset_minutes"], "utc_offset_minutes");
    c.validate();
    return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw NotFound("cannot open config file " + path.string());
    } catch (const YAML::Exception& e) {
        throw FormatError("YAML parse error in " + path.string() + ": " + e.what());
    }
    return parse_synth_config(root);
}

SynthConfig level_preset(std::string_view level, std::uint64_t seed) {
    SynthConfig c;
    c.level = std::string(level);
    c.hospital_n = 3;
    c.start_date = {Date(2025, 3, 17), Date(2025, 9, 21)};
    c.days = 7;
    c.start_hour = {9.0, 10.0};
    c.end_hour = {18.0, 19.0};
    c.busy_schedule_prob = 0.0;
    c.busy_schedule_ratio = {0.4, 0.6};
    c.appointment_ratio = {0.2, 0.5};
    c.rng_seed = seed;
    if (level == "primary") {
        c.time_unit_minutes = 15;
        c.department_per_hospital = {2, 3};
        c.physician_per_department = {1, 1};
        c.working_days = {5, 7};
        c.capacity_per_hour = {4, 4};
        c.preference_probs = {0.6, 0.2, 0.2};
        c.symptom_probs = {0.9, 0.1};
    } else if (level == "secondary") {
        c.time_unit_minutes = 15;
        c.department_per_hospital = {7, 9};
        c.physician_per_department = {1, 2};
        c.working_days = {3, 4};
        c.capacity_per_hour = {1, 4};
        c.preference_probs = {0.4, 0.4, 0.2};
        c.symptom_probs = {0.6, 0.4};
    } else if (level == "tertiary") {
        c.time_unit_minutes = 3;
        c.department_per_hospital = {9, 9};
        c.physician_per_department = {2, 3};
        c.working_days = {3, 4};
        c.capacity_per_hour = {1, 20};
        c.preference_probs = {0.4, 0.4, 0.2};
        c.symptom_probs = {0.2, 0.8};
    } else {
        throw ConfigError("unknown hospital level '" + std::string(level) + "'");
    }
    c.validate();
    return c;
}

} // namespace hadmin::synth
