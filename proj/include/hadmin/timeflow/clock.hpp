#pragma once

#include "hadmin/core/model.hpp"
#include "hadmin/core/rng.hpp"
#include "hadmin/core/time.hpp"

#include <string>
#include <vector>

namespace hadmin::fhir {
class Hospital;
struct BookedAppointment;
} // namespace hadmin::fhir

namespace hadmin::timeflow {

/// Lifecycle status of an appointment occupying [start, end) at instant `now`.
AppointmentStatus status_at(TimePoint start, TimePoint end, TimePoint now, bool cancelled);

struct StatusTransition {
    std::string appointment_id;
    AppointmentStatus from;
    AppointmentStatus to;

    bool operator==(const StatusTransition&) const = default;
};

/// Virtual current time of one simulation run. Starts `init_offset_days` before the
/// horizon at opening time and only moves forward.
class SimClock {
public:
    explicit SimClock(const TimeSystem& ts, int init_offset_days = 1);

    TimePoint now() const { return now_; }
    TimePoint initial() const { return initial_; }
    int init_offset_days() const { return offset_days_; }
    TimePoint horizon_end() const { return ts_.horizon_end(); }

    /// Moves to `t` and refreshes every appointment's lifecycle status. Throws
    /// TemporalError if `t` is earlier than now.
    std::vector<StatusTransition> advance_to(TimePoint t, fhir::Hospital& hospital);

private:
    TimeSystem ts_;
    int offset_days_;
    TimePoint initial_;
    TimePoint now_;
};

/// Reschedule and cancel are legal only while the appointment has not started.
bool can_modify(const fhir::BookedAppointment& b, const fhir::Hospital& hospital, TimePoint now);

/// Sorted arrival instants drawn uniformly (whole minutes) over [initial now, horizon end).
std::vector<TimePoint> sample_arrivals(std::size_t n, const SimClock& clock, Rng& rng);

} // namespace hadmin::timeflow
