#include "hadmin/fhir/hospital.hpp"

#include "hadmin/core/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace hadmin::fhir {

std::string slot_id(std::string_view physician_id, Date d, int index) {
    return std::string(physician_id) + "-" + d.compact() + "-slot" + std::to_string(index);
}

std::string schedule_id(std::string_view physician_id) { return std::string(physician_id) + "-schedule"; }
std::string role_id(std::string_view physician_id) { return std::string(physician_id) + "-role"; }

Practitioner make_practitioner(const Physician& p) {
    Practitioner r;
    r.id = p.id;
    r.name = HumanName::split(p.name);
    r.phone = p.telecom;
    r.gender = p.gender;
    r.birth_date = p.birth_date;
    return r;
}

PractitionerRole make_role(const Physician& p, const TimeSystem& ts) {
    PractitionerRole r;
    r.id = role_id(p.id);
    r.practitioner = reference_to("Practitioner", p.id);
    r.specialty_code = p.specialty.code;
    r.specialty_display = p.specialty.name;
    r.department = p.department;
    r.capacity_per_hour = p.capacity_per_hour;
    r.capacity = total_capacity(p, ts);
    return r;
}

Schedule make_schedule(const Physician& p, const TimeSystem& ts) {
    Schedule s;
    s.id = schedule_id(p.id);
    s.actor = reference_to("Practitioner", p.id);
    s.horizon_start = ts.horizon_start().iso(ts.utc_offset_minutes());
    s.horizon_end = ts.horizon_end().iso(ts.utc_offset_minutes());
    return s;
}

Slot make_slot(const Physician& p, Date d, int index, bool busy, const TimeSystem& ts) {
    Slot s;
    s.id = slot_id(p.id, d, index);
    s.schedule = reference_to("Schedule", schedule_id(p.id));
    s.status = busy ? "busy" : "free";
    s.start = slot_to_clock({d, index}, ts).iso(ts.utc_offset_minutes());
    s.end = slot_end_clock({d, index}, ts).iso(ts.utc_offset_minutes());
    return s;
}

Patient make_patient(const PatientProfile& p) {
    Patient r;
    r.id = p.id;
    r.identifier = p.personal_id;
    r.name = HumanName::split(p.name);
    r.phone = p.telecom;
    r.gender = p.gender;
    r.birth_date = p.birth_date;
    r.address = p.address;
    return r;
}

Hospital::Hospital(synth::HospitalDataset dataset, ResourceStore& store) : ds_(std::move(dataset)), store_(store) {
    const int slots = ds_.time.slots_per_day();
    for (std::size_t i = 0; i < ds_.physicians.size(); ++i) {
        const Physician& p = ds_.physicians[i];
        physician_index_[p.id] = i;
        auto& days = days_[p.id];
        for (const auto& [date, table] : p.schedule) {
            Day d;
            d.cells.resize(static_cast<std::size_t>(slots));
            for (int k = 0; k < slots && k < static_cast<int>(table.size()); ++k) {
                if (table[static_cast<std::size_t>(k)] == SlotStatus::busy) {
                    d.cells[static_cast<std::size_t>(k)].prefilled = true;
                    ++prefilled_busy_;
                }
            }
            days.emplace(date, std::move(d));
        }
    }
}

UploadCounts Hospital::upload(const UploadOptions& options) {
    UploadCounts n;
    const TimeSystem& ts = ds_.time;
    for (const auto& p : ds_.physicians) {
        store_.create(to_json(make_practitioner(p)));
        ++n.practitioners;
        store_.create(to_json(make_role(p, ts)));
        ++n.roles;
        store_.create(to_json(make_schedule(p, ts)));
        ++n.schedules;
        for (const auto& [date, d] : days_.at(p.id)) {
            for (int k = 0; k < static_cast<int>(d.cells.size()); ++k) {
                const Cell& c = d.cells[static_cast<std::size_t>(k)];
                store_.create(to_json(make_slot(p, date, k, c.prefilled || c.owner >= 0, ts)));
                ++n.slots;
            }
        }
    }
    if (options.book_prefilled_blocks) {
        for (const auto& patient : ds_.patients) {
            const Physician* p = physician_by_name(patient.attending_physician);
            if (p == nullptr) throw NotFound("attending physician '" + patient.attending_physician + "'");
            book(patient, p->id, patient.block);
            ++n.patients;
            ++n.appointments;
        }
    }
    return n;
}

std::vector<const Physician*> Hospital::physicians_in(std::string_view department) const {
    bool known = false;
    for (const auto& d : ds_.departments) known = known || d.name == department;
    if (!known) throw NotFound("unknown department '" + std::string(department) + "'");
    std::vector<const Physician*> out;
    for (const auto& p : ds_.physicians) {
        if (p.department == department) out.push_back(&p);
    }
    return out;
}

const Physician& Hospital::physician(std::string_view id) const {
    auto it = physician_index_.find(id);
    if (it == physician_index_.end()) throw NotFound("unknown physician '" + std::string(id) + "'");
    return ds_.physicians[it->second];
}

const Physician* Hospital::physician_by_name(std::string_view name) const { return ds_.find_physician(name); }

int Hospital::run_length(const Physician& p) const { return appointment_slot_count(p.capacity_per_hour, ds_.time); }

const Hospital::Day* Hospital::day(std::string_view physician_id, Date d) const {
    auto p = days_.find(physician_id);
    if (p == days_.end()) throw NotFound("unknown physician '" + std::string(physician_id) + "'");
    auto it = p->second.find(d);
    return it == p->second.end() ? nullptr : &it->second;
}

Hospital::Day* Hospital::day(std::string_view physician_id, Date d) {
    return const_cast<Day*>(static_cast<const Hospital*>(this)->day(physician_id, d));
}

bool Hospital::works_on(std::string_view physician_id, Date d) const { return day(physician_id, d) != nullptr; }

bool Hospital::is_busy(std::string_view physician_id, Date d, int index) const {
    const Day* dd = day(physician_id, d);
    if (dd == nullptr || index < 0 || index >= static_cast<int>(dd->cells.size())) return true;
    const Cell& c = dd->cells[static_cast<std::size_t>(index)];
    return c.prefilled || c.owner >= 0;
}

bool Hospital::is_prefilled_busy(std::string_view physician_id, Date d, int index) const {
    const Day* dd = day(physician_id, d);
    if (dd == nullptr || index < 0 || index >= static_cast<int>(dd->cells.size())) return false;
    return dd->cells[static_cast<std::size_t>(index)].prefilled;
}

const BookedAppointment* Hospital::owner(std::string_view physician_id, Date d, int index) const {
    const Day* dd = day(physician_id, d);
    if (dd == nullptr || index < 0 || index >= static_cast<int>(dd->cells.size())) return nullptr;
    int o = dd->cells[static_cast<std::size_t>(index)].owner;
    return o < 0 ? nullptr : &appts_[static_cast<std::size_t>(o)];
}

bool Hospital::run_is_free(std::string_view physician_id, const SlotRun& run,
                           std::string_view ignore_appointment) const {
    const Day* dd = day(physician_id, run.date);
    if (dd == nullptr || run.length <= 0 || run.first < 0 || run.last() >= static_cast<int>(dd->cells.size())) {
        return false;
    }
    for (int k = run.first; k <= run.last(); ++k) {
        const Cell& c = dd->cells[static_cast<std::size_t>(k)];
        if (c.prefilled) return false;
        if (c.owner >= 0 && (ignore_appointment.empty() ||
                             appts_[static_cast<std::size_t>(c.owner)].appt.id != ignore_appointment)) {
            return false;
        }
    }
    return true;
}

TimePoint Hospital::start_of(const SlotRun& run) const {
    return TimePoint::at(run.date, ds_.time.start_minute() + run.first * ds_.time.unit_minutes());
}

TimePoint Hospital::end_of(const SlotRun& run) const {
    return TimePoint::at(run.date, ds_.time.start_minute() + (run.first + run.length) * ds_.time.unit_minutes());
}

std::vector<SlotRef> Hospital::query_free_slots(std::string_view physician_id, TimePoint from) const {
    auto p = days_.find(physician_id);
    if (p == days_.end()) throw NotFound("unknown physician '" + std::string(physician_id) + "'");
    std::vector<SlotRef> out;
    for (const auto& [date, d] : p->second) {
        for (int k = 0; k < static_cast<int>(d.cells.size()); ++k) {
            const Cell& c = d.cells[static_cast<std::size_t>(k)];
            if (c.prefilled || c.owner >= 0) continue;
            if (start_of({date, k, 1}) > from) out.push_back({date, k});
        }
    }
    return out;
}

std::vector<std::pair<std::string, SlotRef>> Hospital::query_free_slots_in(std::string_view department,
                                                                           TimePoint from) const {
    std::vector<std::pair<std::string, SlotRef>> out;
    for (const Physician* p : physicians_in(department)) {
        for (const auto& s : query_free_slots(p->id, from)) out.emplace_back(p->id, s);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    return out;
}

void Hospital::write_slots(const Physician& p, const SlotRun& run) {
    const Day* dd = day(p.id, run.date);
    for (int k = run.first; k <= run.last(); ++k) {
        const Cell& c = dd->cells[static_cast<std::size_t>(k)];
        store_.update(to_json(make_slot(p, run.date, k, c.prefilled || c.owner >= 0, ds_.time)));
    }
}

void Hospital::write_appointment(const BookedAppointment& b) {
    const hadmin::Appointment& a = b.appt;
    fhir::Appointment r;
    r.id = a.id;
    r.status = a.status == AppointmentStatus::cancelled ? "cancelled" : "booked";
    const int off = ds_.time.utc_offset_minutes();
    r.start = start_of(a.run).iso(off);
    r.end = end_of(a.run).iso(off);
    for (int k = a.run.first; k <= a.run.last(); ++k) {
        r.slots.push_back(reference_to("Slot", slot_id(a.physician_id, a.run.date, k)));
    }
    r.participants.push_back({reference_to("Practitioner", a.physician_id), b.physician_name, "accepted"});
    r.participants.push_back({reference_to("Patient", a.patient_id), b.patient_name, "accepted"});
    store_.update(to_json(r));
}

const BookedAppointment& Hospital::book(const PatientProfile& patient, std::string_view physician_id,
                                        const SlotRun& run) {
    return book_internal(patient, physician(physician_id), run, true);
}

const BookedAppointment& Hospital::book_internal(const PatientProfile& patient, const Physician& p,
                                                 const SlotRun& run, bool create_patient) {
    if (run.length != run_length(p)) {
        throw BookingConflict("run length " + std::to_string(run.length) + " does not match the consultation length of " +
                              p.name);
    }
    if (!run_is_free(p.id, run)) {
        throw BookingConflict("slots " + slot_id(p.id, run.date, run.first) + " .. " + std::to_string(run.last()) +
                              " are not free");
    }
    int& counter = per_day_counter_[{p.id, run.date}];
    BookedAppointment b;
    b.appt.id = p.id + "-" + run.date.compact() + "-appn" + std::to_string(counter++) + "-0";
    b.appt.physician_id = p.id;
    b.appt.patient_id = patient.id;
    b.appt.run = run;
    b.appt.status = AppointmentStatus::scheduled;
    b.patient_name = patient.name;
    b.physician_name = p.name;
    b.seq = appts_.size();

    if (create_patient) store_.create(to_json(make_patient(patient)));
    const int index = static_cast<int>(appts_.size());
    appts_.push_back(b);
    appt_index_[b.appt.id] = index;
    Day* dd = day(p.id, run.date);
    for (int k = run.first; k <= run.last(); ++k) dd->cells[static_cast<std::size_t>(k)].owner = index;
    write_appointment(appts_.back());
    write_slots(p, run);
    return appts_.back();
}

hadmin::Appointment& Hospital::appt_mut(std::string_view id, int* index) {
    auto it = appt_index_.find(id);
    if (it == appt_index_.end()) throw NotFound("unknown appointment '" + std::string(id) + "'");
    *index = it->second;
    return appts_[static_cast<std::size_t>(it->second)].appt;
}

const BookedAppointment& Hospital::cancel(std::string_view appointment_id) {
    int index = 0;
    hadmin::Appointment& a = appt_mut(appointment_id, &index);
    if (a.status == AppointmentStatus::cancelled) {
        throw TemporalError("appointment '" + a.id + "' is already cancelled");
    }
    a.status = AppointmentStatus::cancelled;
    Day* dd = day(a.physician_id, a.run.date);
    for (int k = a.run.first; k <= a.run.last(); ++k) {
        Cell& c = dd->cells[static_cast<std::size_t>(k)];
        if (c.owner == index) c.owner = -1;
    }
    const BookedAppointment& b = appts_[static_cast<std::size_t>(index)];
    write_appointment(b);
    write_slots(physician(a.physician_id), a.run);
    return b;
}

const BookedAppointment& Hospital::move(std::string_view appointment_id, const SlotRun& run) {
    int index = 0;
    hadmin::Appointment& a = appt_mut(appointment_id, &index);
    if (a.status == AppointmentStatus::cancelled) {
        throw TemporalError("appointment '" + a.id + "' is cancelled");
    }
    const Physician& p = physician(a.physician_id);
    if (run.length != a.run.length) throw BookingConflict("a move must keep the consultation length");
    if (!run_is_free(p.id, run, a.id)) {
        throw BookingConflict("target slots for '" + a.id + "' are not free");
    }
    const SlotRun old = a.run;
    Day* od = day(p.id, old.date);
    for (int k = old.first; k <= old.last(); ++k) od->cells[static_cast<std::size_t>(k)].owner = -1;
    Day* nd = day(p.id, run.date);
    for (int k = run.first; k <= run.last(); ++k) nd->cells[static_cast<std::size_t>(k)].owner = index;
    a.run = run;
    const BookedAppointment& b = appts_[static_cast<std::size_t>(index)];
    write_slots(p, old);
    write_appointment(b);
    write_slots(p, run);
    return b;
}

const BookedAppointment* Hospital::find(std::string_view appointment_id) const {
    auto it = appt_index_.find(appointment_id);
    return it == appt_index_.end() ? nullptr : &appts_[static_cast<std::size_t>(it->second)];
}

const BookedAppointment* Hospital::find_for(std::string_view patient_id, std::string_view physician_id,
                                            Date d) const {
    const BookedAppointment* best = nullptr;
    for (const auto& b : appts_) {
        const hadmin::Appointment& a = b.appt;
        if (a.status == AppointmentStatus::cancelled || a.patient_id != patient_id ||
            a.physician_id != physician_id || a.run.date != d) {
            continue;
        }
        if (best == nullptr || a.run.first < best->appt.run.first) best = &b;
    }
    return best;
}

std::vector<const BookedAppointment*> Hospital::appointments() const {
    std::vector<const BookedAppointment*> out;
    out.reserve(appts_.size());
    for (const auto& b : appts_) out.push_back(&b);
    return out;
}

void Hospital::set_status(std::string_view appointment_id, AppointmentStatus status) {
    int index = 0;
    hadmin::Appointment& a = appt_mut(appointment_id, &index);
    if (status == AppointmentStatus::cancelled) {
        cancel(appointment_id);
        return;
    }
    a.status = status;
}

std::pair<long, long> Hospital::workload(std::string_view physician_id, TimePoint now) const {
    auto p = days_.find(physician_id);
    if (p == days_.end()) throw NotFound("unknown physician '" + std::string(physician_id) + "'");
    long booked = 0, total = 0;
    for (const auto& [date, d] : p->second) {
        for (int k = 0; k < static_cast<int>(d.cells.size()); ++k) {
            if (start_of({date, k, 1}) <= now) continue;
            ++total;
            if (d.cells[static_cast<std::size_t>(k)].owner >= 0) ++booked;
        }
    }
    return {booked, total};
}

int Hospital::busy_count() const {
    int n = 0;
    for (const auto& [id, days] : days_) {
        for (const auto& [date, d] : days) {
            for (const auto& c : d.cells) n += (c.prefilled || c.owner >= 0) ? 1 : 0;
        }
    }
    return n;
}

int Hospital::booked_slot_total() const {
    int n = 0;
    for (const auto& b : appts_) {
        if (b.appt.status != AppointmentStatus::cancelled) n += b.appt.run.length;
    }
    return n;
}

int Hospital::slot_total() const {
    int n = 0;
    for (const auto& [id, days] : days_) {
        for (const auto& [date, d] : days) n += static_cast<int>(d.cells.size());
    }
    return n;
}

void Hospital::check_occupancy(bool against_store) const {
    const int busy = busy_count();
    if (busy != prefilled_busy_ + booked_slot_total()) {
        throw std::logic_error("occupancy mismatch: " + std::to_string(busy) + " busy slots, expected " +
                               std::to_string(prefilled_busy_ + booked_slot_total()));
    }
    if (!against_store) return;
    int store_busy = 0;
    for (const auto& p : ds_.physicians) {
        store_busy += static_cast<int>(
            store_.search("Slot", {{"schedule", reference_to("Schedule", schedule_id(p.id))}, {"status", "busy"}}).size());
    }
    if (store_busy != busy) {
        throw std::logic_error("store holds " + std::to_string(store_busy) + " busy slots, index holds " +
                               std::to_string(busy));
    }
}

} // namespace hadmin::fhir
