#pragma once

#include "hadmin/core/model.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/fhir/resources.hpp"
#include "hadmin/fhir/store.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hadmin::scheduler {

struct SchedulingRequest {
    std::string department;
    Preference mode = Preference::asap;
    std::optional<std::string> preferred_physician;  // display name, mode = physician
    std::optional<Date> valid_from;                  // mode = date
    TimePoint not_before;                            // the clock's now; starts must be strictly later

    // Narrowing used by rescheduling and waiting-list moves.
    std::optional<std::string> only_physician_id;
    std::optional<TimePoint> before;   // starts must be strictly earlier
    std::string ignore_appointment;    // its own slots count as free
};

/// A consultation proposal on one physician's grid, in local minutes of day.
struct Proposal {
    std::string physician_id;
    std::string physician_name;
    Date date;
    int start_minute = 0;
    int end_minute = 0;

    double start_hour() const { return minutes_to_hours(start_minute); }
    double end_hour() const { return minutes_to_hours(end_minute); }
    auto operator<=>(const Proposal&) const = default;
};

SlotRun to_run(const Proposal& p, const TimeSystem& ts);
Proposal from_run(const Physician& p, const SlotRun& run, const TimeSystem& ts);

/// {"schedule": {"<Dr. Name>": {"date": ..., "start": <hours>, "end": <hours>}}}
fhir::Json proposal_json(const Proposal& p);
/// Python-style rendering used inside dialogue, e.g.
/// {'schedule': {'Dr. X': {'date': '2025-05-21', 'start': 11.9, 'end': 12.0}}}
std::string proposal_text(const Proposal& p);
/// Hours rendered as the shortest decimal, always with a fractional part: 9 -> "9.0".
std::string hour_text(double hours);

/// Earliest feasible run using the environment's slot index. Ties at the same start go to
/// the lower workload, then the lexicographically smaller physician id. nullopt means no
/// availability. Throws NotFound for unknown departments or physicians and FormatError when
/// a mode-specific field is missing.
std::optional<Proposal> find_earliest(const SchedulingRequest& req, const fhir::Hospital& hospital);

/// Same contract computed from raw FHIR resources only (roles, slots, appointments).
std::optional<Proposal> brute_force_earliest(const SchedulingRequest& req, fhir::ResourceStore& store);

/// Appointment-held share of slots starting after `now`, as an exact fraction.
std::pair<long, long> workload(const std::string& physician_id, const fhir::Hospital& hospital, TimePoint now);

struct MovedEarlier {
    std::string appointment_id;
    SlotRun from;
    Proposal proposal;
};

struct Waitlisted {
    WaitingListEntry entry;
};

using RescheduleOutcome = std::variant<MovedEarlier, Waitlisted>;

struct Reassignment {
    std::string appointment_id;
    std::string patient_id;
    SlotRun from;
    SlotRun to;

    bool operator==(const Reassignment&) const = default;
};

struct CancelReceipt {
    std::string appointment_id;
    std::string patient_name;
    std::string physician_name;
    std::string department;
    SlotRun run;
    std::vector<Reassignment> reassignments;
};

/// Appointment for (patient, physician, date). Throws NotFound when absent and
/// TemporalError when it has already started.
const fhir::BookedAppointment& locate_modifiable(const fhir::Hospital& hospital, const std::string& patient_id,
                                                 const std::string& physician_id, Date date, TimePoint now);

/// Request for an earlier run of the same physician: strictly after now, strictly before the
/// current start, the appointment's own slots counted as free.
SchedulingRequest move_earlier_request(const fhir::Hospital& hospital, const fhir::BookedAppointment& b,
                                       TimePoint now);
/// Moves the appointment to the proposal's run and drops any waiting-list entry for it.
MovedEarlier apply_move(fhir::Hospital& hospital, const std::string& appointment_id, const Proposal& p);
/// Appends a waiting-list entry for the appointment unless one exists; returns the entry.
Waitlisted enqueue_waiting(fhir::Hospital& hospital, const std::string& appointment_id);

/// Moves the appointment to the earliest strictly earlier run of the same physician that
/// starts after now; otherwise appends (or returns the existing) waiting-list entry.
RescheduleOutcome reschedule(fhir::Hospital& hospital, const std::string& patient_id,
                             const std::string& physician_id, Date date, TimePoint now);

/// Cancels, then scans the waiting list once in FIFO order.
CancelReceipt cancel(fhir::Hospital& hospital, const std::string& patient_id, const std::string& physician_id,
                     Date date, TimePoint now);

/// One FIFO pass over the waiting list: each modifiable entry moves to the earliest strictly
/// earlier run of its physician; moved entries leave the list, entries whose appointment was
/// cancelled are dropped, entries that already started stay.
std::vector<Reassignment> drain_waiting_list(fhir::Hospital& hospital, TimePoint now);

} // namespace hadmin::scheduler
