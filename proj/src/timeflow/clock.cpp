#include "hadmin/timeflow/clock.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/fhir/hospital.hpp"

#include <algorithm>

namespace hadmin::timeflow {

AppointmentStatus status_at(TimePoint start, TimePoint end, TimePoint now, bool cancelled) {
    if (cancelled) return AppointmentStatus::cancelled;
    if (now < start) return AppointmentStatus::scheduled;
    if (now < end) return AppointmentStatus::in_progress;
    return AppointmentStatus::completed;
}

SimClock::SimClock(const TimeSystem& ts, int init_offset_days)
    : ts_(ts),
      offset_days_(init_offset_days),
      initial_(TimePoint::at(ts.start_date().plus_days(-init_offset_days), ts.start_minute())),
      now_(initial_) {
    if (init_offset_days < 0) throw ConfigError("clock offset days must be non-negative");
}

std::vector<StatusTransition> SimClock::advance_to(TimePoint t, fhir::Hospital& hospital) {
    if (t < now_) {
        throw TemporalError("clock cannot move backwards from " + now_.iso_local() + " to " + t.iso_local());
    }
    now_ = t;
    std::vector<StatusTransition> out;
    for (const auto* b : hospital.appointments()) {
        const Appointment& a = b->appt;
        if (a.status == AppointmentStatus::cancelled) continue;
        AppointmentStatus next = status_at(hospital.start_of(a.run), hospital.end_of(a.run), now_, false);
        if (next != a.status) {
            out.push_back({a.id, a.status, next});
            hospital.set_status(a.id, next);
        }
    }
    return out;
}

bool can_modify(const fhir::BookedAppointment& b, const fhir::Hospital& hospital, TimePoint now) {
    const Appointment& a = b.appt;
    return status_at(hospital.start_of(a.run), hospital.end_of(a.run), now,
                     a.status == AppointmentStatus::cancelled) == AppointmentStatus::scheduled;
}

std::vector<TimePoint> sample_arrivals(std::size_t n, const SimClock& clock, Rng& rng) {
    std::vector<TimePoint> out;
    out.reserve(n);
    const std::int64_t lo = clock.initial().minutes();
    const std::int64_t hi = clock.horizon_end().minutes() - 1;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(rng.uniform_int(lo, std::max(lo, hi)));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace hadmin::timeflow
