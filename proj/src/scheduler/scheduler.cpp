#include "hadmin/scheduler/scheduler.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/timeflow/clock.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace hadmin::scheduler {

namespace {

using Fraction = std::pair<long, long>;

// a < b for non-negative fractions; an empty denominator reads as zero.
bool less_fraction(Fraction a, Fraction b) {
    if (a.second == 0) a = {0, 1};
    if (b.second == 0) b = {0, 1};
    return static_cast<long long>(a.first) * b.second < static_cast<long long>(b.first) * a.second;
}

struct Candidate {
    Proposal proposal;
    TimePoint start;
    Fraction load;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.start != b.start) return a.start < b.start;
    if (less_fraction(a.load, b.load)) return true;
    if (less_fraction(b.load, a.load)) return false;
    return a.proposal.physician_id < b.proposal.physician_id;
}

void check_mode_fields(const SchedulingRequest& req) {
    if (req.mode == Preference::physician && !req.preferred_physician) {
        throw FormatError("physician preference without a physician name");
    }
    if (req.mode == Preference::date && !req.valid_from) {
        throw FormatError("date preference without a date");
    }
}

std::optional<Proposal> pick(const std::vector<Candidate>& cands) {
    if (cands.empty()) return std::nullopt;
    const Candidate* best = &cands.front();
    for (const auto& c : cands) {
        if (better(c, *best)) best = &c;
    }
    return best->proposal;
}

} // namespace

SlotRun to_run(const Proposal& p, const TimeSystem& ts) {
    const int unit = ts.unit_minutes();
    return {p.date, (p.start_minute - ts.start_minute()) / unit, (p.end_minute - p.start_minute) / unit};
}

Proposal from_run(const Physician& p, const SlotRun& run, const TimeSystem& ts) {
    const int unit = ts.unit_minutes();
    return {p.id, p.name, run.date, ts.start_minute() + run.first * unit,
            ts.start_minute() + (run.first + run.length) * unit};
}

std::string hour_text(double hours) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, hours);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

fhir::Json proposal_json(const Proposal& p) {
    fhir::Json slot = {{"date", p.date.str()}, {"start", p.start_hour()}, {"end", p.end_hour()}};
    return fhir::Json{{"schedule", fhir::Json{{p.physician_name, slot}}}};
}

std::string proposal_text(const Proposal& p) {
    return "{'schedule': {'" + p.physician_name + "': {'date': '" + p.date.str() + "', 'start': " +
           hour_text(p.start_hour()) + ", 'end': " + hour_text(p.end_hour()) + "}}}";
}

std::pair<long, long> workload(const std::string& physician_id, const fhir::Hospital& hospital, TimePoint now) {
    return hospital.workload(physician_id, now);
}

std::optional<Proposal> find_earliest(const SchedulingRequest& req, const fhir::Hospital& hospital) {
    check_mode_fields(req);
    auto physicians = hospital.physicians_in(req.department);
    if (req.mode == Preference::physician) {
        bool found = std::any_of(physicians.begin(), physicians.end(),
                                 [&](const Physician* p) { return p->name == *req.preferred_physician; });
        if (!found) {
            throw NotFound("no physician '" + *req.preferred_physician + "' in " + req.department);
        }
    }
    const TimeSystem& ts = hospital.time();
    std::vector<Candidate> cands;
    for (const Physician* p : physicians) {
        if (req.mode == Preference::physician && p->name != *req.preferred_physician) continue;
        if (req.only_physician_id && p->id != *req.only_physician_id) continue;
        const int len = hospital.run_length(*p);
        std::optional<SlotRun> hit;
        for (const Date& d : p->working_days) {
            if (req.mode == Preference::date && d < *req.valid_from) continue;
            for (int first = 0; first + len <= ts.slots_per_day(); ++first) {
                SlotRun run{d, first, len};
                TimePoint start = hospital.start_of(run);
                if (start <= req.not_before) continue;
                if (req.before && start >= *req.before) break;
                if (hospital.run_is_free(p->id, run, req.ignore_appointment)) {
                    hit = run;
                    break;
                }
            }
            if (hit) break;
        }
        if (!hit) continue;
        cands.push_back({from_run(*p, *hit, ts), hospital.start_of(*hit), hospital.workload(p->id, req.not_before)});
    }
    return pick(cands);
}

std::optional<Proposal> brute_force_earliest(const SchedulingRequest& req, fhir::ResourceStore& store) {
    check_mode_fields(req);
    struct RawSlot {
        std::string id;
        TimePoint start;
        TimePoint end;
        bool busy;
    };

    std::vector<Candidate> cands;
    bool preferred_seen = false;
    for (const auto& role_json : store.search("PractitionerRole")) {
        const fhir::PractitionerRole role = fhir::practitioner_role_from_json(role_json);
        if (role.department != req.department) continue;
        const std::string pid = fhir::reference_id(role.practitioner);
        auto prac = store.read("Practitioner", pid);
        if (!prac) continue;
        const std::string name = fhir::practitioner_from_json(*prac).name.display();
        if (req.mode == Preference::physician) {
            if (name != *req.preferred_physician) continue;
            preferred_seen = true;
        }
        if (req.only_physician_id && pid != *req.only_physician_id) continue;

        // The grid offset travels in every timestamp; use it to read times back as local.
        std::vector<RawSlot> slots;
        std::optional<int> offset;
        for (const auto& sj : store.search("Slot", {{"schedule", fhir::reference_to("Schedule", pid + "-schedule")}})) {
            const fhir::Slot s = fhir::slot_from_json(sj);
            if (!offset) {
                const std::string& t = s.start;
                int sign = t[t.size() - 6] == '-' ? -1 : 1;
                offset = sign * (std::stoi(t.substr(t.size() - 5, 2)) * 60 + std::stoi(t.substr(t.size() - 2, 2)));
            }
            slots.push_back({s.id, TimePoint::parse_iso(s.start, *offset), TimePoint::parse_iso(s.end, *offset),
                             s.status == "busy"});
        }
        std::sort(slots.begin(), slots.end(), [](const RawSlot& a, const RawSlot& b) { return a.start < b.start; });

        std::set<std::string> own;
        if (!req.ignore_appointment.empty()) {
            if (auto a = store.read("Appointment", req.ignore_appointment)) {
                for (const auto& ref : fhir::appointment_from_json(*a).slots) own.insert(fhir::reference_id(ref));
            }
        }
        std::set<std::string> booked;
        for (const auto& aj : store.search("Appointment",
                                           {{"actor", fhir::reference_to("Practitioner", pid)}, {"status", "booked"}})) {
            for (const auto& ref : fhir::appointment_from_json(aj).slots) booked.insert(fhir::reference_id(ref));
        }
        Fraction load{0, 0};
        for (const auto& s : slots) {
            if (s.start <= req.not_before) continue;
            ++load.second;
            if (booked.count(s.id)) ++load.first;
        }

        const long duration = 60 / role.capacity_per_hour;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const RawSlot& first = slots[i];
            if (first.start <= req.not_before) continue;
            if (req.before && first.start >= *req.before) continue;
            if (req.mode == Preference::date && first.start.date() < *req.valid_from) continue;
            TimePoint reach = first.start;
            bool ok = true;
            std::size_t j = i;
            while (ok && reach.minutes() - first.start.minutes() < duration) {
                if (j >= slots.size() || slots[j].start != reach || slots[j].start.date() != first.start.date()) {
                    ok = false;
                    break;
                }
                if (slots[j].busy && !own.count(slots[j].id)) ok = false;
                reach = slots[j].end;
                ++j;
            }
            if (!ok || reach.minutes() - first.start.minutes() != duration) continue;
            Proposal p{pid, name, first.start.date(), first.start.minute_of_day(), reach.minute_of_day()};
            cands.push_back({p, first.start, load});
            break;
        }
    }
    if (req.mode == Preference::physician && !preferred_seen) {
        throw NotFound("no physician '" + *req.preferred_physician + "' in " + req.department);
    }
    return pick(cands);
}

const fhir::BookedAppointment& locate_modifiable(const fhir::Hospital& hospital, const std::string& patient_id,
                                                 const std::string& physician_id, Date date, TimePoint now) {
    const fhir::BookedAppointment* b = hospital.find_for(patient_id, physician_id, date);
    if (b == nullptr) {
        throw NotFound("no appointment for " + patient_id + " with " + physician_id + " on " + date.str());
    }
    if (!timeflow::can_modify(*b, hospital, now)) {
        throw TemporalError("appointment " + b->appt.id + " is " + std::string(to_string(b->appt.status)) +
                            " and can no longer be changed");
    }
    return *b;
}

SchedulingRequest move_earlier_request(const fhir::Hospital& hospital, const fhir::BookedAppointment& b,
                                       TimePoint now) {
    const Physician& p = hospital.physician(b.appt.physician_id);
    SchedulingRequest req;
    req.department = p.department;
    req.mode = Preference::asap;
    req.not_before = now;
    req.only_physician_id = p.id;
    req.before = hospital.start_of(b.appt.run);
    req.ignore_appointment = b.appt.id;
    return req;
}

namespace {

std::optional<Proposal> earlier_run(const fhir::Hospital& hospital, const fhir::BookedAppointment& b, TimePoint now) {
    return find_earliest(move_earlier_request(hospital, b, now), hospital);
}

void forget_waiting(fhir::Hospital& hospital, const std::string& appointment_id) {
    auto& wl = hospital.waiting_list();
    wl.erase(std::remove_if(wl.begin(), wl.end(),
                            [&](const WaitingListEntry& e) { return e.appointment_id == appointment_id; }),
             wl.end());
}

} // namespace

MovedEarlier apply_move(fhir::Hospital& hospital, const std::string& appointment_id, const Proposal& p) {
    const fhir::BookedAppointment* b = hospital.find(appointment_id);
    if (b == nullptr) throw NotFound("unknown appointment " + appointment_id);
    SlotRun from = b->appt.run;
    hospital.move(appointment_id, to_run(p, hospital.time()));
    forget_waiting(hospital, appointment_id);
    return MovedEarlier{appointment_id, from, p};
}

Waitlisted enqueue_waiting(fhir::Hospital& hospital, const std::string& appointment_id) {
    for (const auto& e : hospital.waiting_list()) {
        if (e.appointment_id == appointment_id) return Waitlisted{e};
    }
    const fhir::BookedAppointment* b = hospital.find(appointment_id);
    if (b == nullptr) throw NotFound("unknown appointment " + appointment_id);
    WaitingListEntry e;
    e.patient_id = b->appt.patient_id;
    e.physician_id = b->appt.physician_id;
    e.department = hospital.physician(b->appt.physician_id).department;
    e.appointment_id = appointment_id;
    e.current_date = b->appt.run.date;
    e.current_run = b->appt.run;
    e.enqueue_seq = hospital.next_waiting_seq();
    hospital.waiting_list().push_back(e);
    return Waitlisted{e};
}

RescheduleOutcome reschedule(fhir::Hospital& hospital, const std::string& patient_id,
                             const std::string& physician_id, Date date, TimePoint now) {
    const fhir::BookedAppointment& b = locate_modifiable(hospital, patient_id, physician_id, date, now);
    if (auto p = earlier_run(hospital, b, now)) return apply_move(hospital, b.appt.id, *p);
    return enqueue_waiting(hospital, b.appt.id);
}

CancelReceipt cancel(fhir::Hospital& hospital, const std::string& patient_id, const std::string& physician_id,
                     Date date, TimePoint now) {
    const fhir::BookedAppointment& b = locate_modifiable(hospital, patient_id, physician_id, date, now);
    CancelReceipt r;
    r.appointment_id = b.appt.id;
    r.patient_name = b.patient_name;
    r.physician_name = b.physician_name;
    r.department = hospital.physician(physician_id).department;
    r.run = b.appt.run;
    hospital.cancel(b.appt.id);
    r.reassignments = drain_waiting_list(hospital, now);
    return r;
}

std::vector<Reassignment> drain_waiting_list(fhir::Hospital& hospital, TimePoint now) {
    std::vector<Reassignment> out;
    auto& wl = hospital.waiting_list();
    for (auto it = wl.begin(); it != wl.end();) {
        const fhir::BookedAppointment* b = hospital.find(it->appointment_id);
        if (b == nullptr || b->appt.status == AppointmentStatus::cancelled) {
            it = wl.erase(it);
            continue;
        }
        if (!timeflow::can_modify(*b, hospital, now)) {
            ++it;
            continue;
        }
        if (auto p = earlier_run(hospital, *b, now)) {
            SlotRun from = b->appt.run;
            SlotRun to = to_run(*p, hospital.time());
            hospital.move(b->appt.id, to);
            out.push_back({b->appt.id, b->appt.patient_id, from, to});
            it = wl.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

} // namespace hadmin::scheduler
