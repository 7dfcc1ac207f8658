#pragma once

#include "hadmin/core/time.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hadmin {

// ---------------------------------------------------------------------------
// Departments
// ---------------------------------------------------------------------------

struct Specialty {
    std::string name;
    std::string code;

    bool operator==(const Specialty&) const = default;
};

struct DepartmentInfo {
    std::string_view name;  // e.g. "endocrinology/metabolism"
    std::string_view code;  // e.g. "IMEND"
    std::array<std::string_view, 3> subspecialties;
};

/// The nine internal-medicine specialties, in canonical order.
const std::array<DepartmentInfo, 9>& department_catalog();
const DepartmentInfo* find_department(std::string_view name);
bool is_known_department(std::string_view name);

struct Department {
    std::string name;
    std::string code;
    std::vector<std::string> physicians;  // physician display names, e.g. "Dr. Alden Gaestel"

    bool operator==(const Department&) const = default;
};

// ---------------------------------------------------------------------------
// Physicians
// ---------------------------------------------------------------------------

enum class SlotStatus : std::uint8_t { free, busy };

struct Physician {
    std::string id;    // Practitioner id, {hospital}-{deptcode}-{Name}
    std::string name;  // "Dr. Benedict Tomerlin"
    std::string gender;
    std::string birth_date;
    std::string telecom;
    std::string department;
    Specialty specialty;
    int capacity_per_hour = 1;
    std::vector<Date> working_days;                      // sorted, within the horizon
    std::map<Date, std::vector<SlotStatus>> schedule;    // working days only; missing day = all busy

    bool works_on(Date d) const { return schedule.count(d) != 0; }
    bool operator==(const Physician&) const = default;
};

/// Total consultations over the horizon, as carried by the "capacity" characteristic.
int total_capacity(const Physician& p, const TimeSystem& ts);

// ---------------------------------------------------------------------------
// Patients
// ---------------------------------------------------------------------------

enum class Preference { asap, physician, date };
enum class HistoryFlag { without_history, with_history };

std::string_view to_string(Preference p);
std::string_view to_string(HistoryFlag h);
Preference parse_preference(std::string_view s);
HistoryFlag parse_history_flag(std::string_view s);

/// A contiguous run of slots on one physician's day.
struct SlotRun {
    Date date;
    int first = 0;
    int length = 0;

    int last() const { return first + length - 1; }
    auto operator<=>(const SlotRun&) const = default;
};

struct PatientProfile {
    std::string id;  // Patient id, {hospital}-{deptcode}-{Name}
    std::string name;
    std::string gender;
    std::string birth_date;
    std::string telecom;
    std::string personal_id;
    std::string address;

    Preference preference_primary = Preference::asap;
    Preference preference_secondary = Preference::physician;
    std::optional<std::string> preferred_physician;  // physician display name
    std::optional<Date> valid_from;

    HistoryFlag history = HistoryFlag::without_history;
    std::string disease;
    std::vector<std::string> gold_departments;
    std::vector<std::string> symptoms;

    // Prefilled appointment block this profile was generated for.
    std::string attending_physician;
    std::string department;
    SlotRun block;

    bool operator==(const PatientProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Appointments
// ---------------------------------------------------------------------------

enum class AppointmentStatus { scheduled, in_progress, completed, cancelled };
std::string_view to_string(AppointmentStatus s);

struct Appointment {
    std::string id;
    std::string physician_id;
    std::string patient_id;
    SlotRun run;
    AppointmentStatus status = AppointmentStatus::scheduled;

    Date date() const { return run.date; }
    bool operator==(const Appointment&) const = default;
};

struct WaitingListEntry {
    std::string patient_id;
    std::string physician_id;
    std::string department;
    std::string appointment_id;
    Date current_date;
    SlotRun current_run;
    std::uint64_t enqueue_seq = 0;

    bool operator==(const WaitingListEntry&) const = default;
};

/// Identifier fragment: removes whitespace, "Dr. Lincoln Bendzus" -> "Dr.LincolnBendzus".
std::string id_fragment(std::string_view display_name);
/// "hospital_01" -> "hospital01".
std::string hospital_prefix(std::string_view hospital_name);

} // namespace hadmin
