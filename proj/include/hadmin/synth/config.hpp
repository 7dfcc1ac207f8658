#pragma once

#include "hadmin/core/time.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace YAML {
class Node;
}

namespace hadmin::synth {

template <class T>
struct Range {
    T min{};
    T max{};

    bool operator==(const Range&) const = default;
};

/// Exact decimal value as num / 10^scale, used to check probability vectors sum to 1.
struct Decimal {
    std::int64_t num = 0;
    int scale = 0;

    double value() const;
    static Decimal parse(std::string_view text);  // "0.25", "1", "1e-1" is rejected
};

/// Synthesis parameters. YAML keys mirror the parameter names of the hospital / physician /
/// patient configuration tables (hospital_n, start_date, days, time_unit, ...).
struct SynthConfig {
    std::string level = "custom";
    int hospital_n = 1;
    Range<Date> start_date;
    int days = 7;
    int time_unit_minutes = 15;
    Range<double> start_hour{9.0, 10.0};
    Range<double> end_hour{18.0, 19.0};
    Range<int> department_per_hospital{2, 3};
    Range<int> physician_per_department{1, 1};
    Range<int> working_days{5, 7};
    Range<int> capacity_per_hour{4, 4};
    double busy_schedule_prob = 0.0;
    Range<double> busy_schedule_ratio{0.4, 0.6};
    Range<double> appointment_ratio{0.2, 0.5};
    /// asap, physician, date
    std::array<double, 3> preference_probs{0.6, 0.2, 0.2};
    /// without_history, with_history
    std::array<double, 2> symptom_probs{0.9, 0.1};
    std::uint64_t rng_seed = 0;
    int utc_offset_minutes = 9 * 60;

    double time_unit_hours() const { return time_unit_minutes / 60.0; }

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    bool operator==(const SynthConfig&) const = default;
};

SynthConfig parse_synth_config(const YAML::Node& root);
SynthConfig load_synth_config(const std::filesystem::path& path);

/// Built-in hospital-level presets (primary / secondary / tertiary) for a 7-day simulation.
SynthConfig level_preset(std::string_view level, std::uint64_t seed = 0);

} // namespace hadmin::synth
