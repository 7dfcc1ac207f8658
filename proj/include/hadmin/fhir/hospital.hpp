#pragma once

#include "hadmin/core/model.hpp"
#include "hadmin/fhir/resources.hpp"
#include "hadmin/fhir/store.hpp"
#include "hadmin/synth/dataset.hpp"

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hadmin::fhir {

struct UploadCounts {
    int practitioners = 0;
    int roles = 0;
    int schedules = 0;
    int slots = 0;
    int patients = 0;
    int appointments = 0;

    int total() const { return practitioners + roles + schedules + slots + patients + appointments; }
    bool operator==(const UploadCounts&) const = default;
};

struct UploadOptions {
    /// Book every synthesized patient's appointment block at upload time. The simulation
    /// leaves blocks free so that the generated patients can be scheduled into them.
    bool book_prefilled_blocks = false;
};

// Resource builders shared by the environment and tests.
std::string slot_id(std::string_view physician_id, Date d, int index);
std::string schedule_id(std::string_view physician_id);
std::string role_id(std::string_view physician_id);
Practitioner make_practitioner(const Physician& p);
PractitionerRole make_role(const Physician& p, const TimeSystem& ts);
Schedule make_schedule(const Physician& p, const TimeSystem& ts);
Slot make_slot(const Physician& p, Date d, int index, bool busy, const TimeSystem& ts);
Patient make_patient(const PatientProfile& p);

/// An appointment held by the environment, with display names for its participants.
struct BookedAppointment {
    hadmin::Appointment appt;
    std::string patient_name;
    std::string physician_name;
    std::uint64_t seq = 0;  // creation order
};

/// The hospital information system for one simulated hospital: a typed slot index kept in
/// lockstep with the FHIR resources of a backing store (write-through).
class Hospital {
public:
    Hospital(synth::HospitalDataset dataset, ResourceStore& store);

    UploadCounts upload(const UploadOptions& options = {});

    const synth::HospitalDataset& dataset() const { return ds_; }
    const TimeSystem& time() const { return ds_.time; }
    ResourceStore& store() { return store_; }

    /// Physicians of a department in dataset order; throws NotFound for an unknown name.
    std::vector<const Physician*> physicians_in(std::string_view department) const;
    const Physician& physician(std::string_view id) const;
    const Physician* physician_by_name(std::string_view name) const;
    int run_length(const Physician& p) const;

    bool works_on(std::string_view physician_id, Date d) const;
    bool is_busy(std::string_view physician_id, Date d, int index) const;
    bool is_prefilled_busy(std::string_view physician_id, Date d, int index) const;
    /// Appointment occupying a slot, if any.
    const BookedAppointment* owner(std::string_view physician_id, Date d, int index) const;
    /// True if every slot of the run is on a working day and free, ignoring slots held by
    /// `ignore_appointment`.
    bool run_is_free(std::string_view physician_id, const SlotRun& run,
                     std::string_view ignore_appointment = {}) const;

    /// Chronologically ordered free slots starting strictly after `from`.
    std::vector<SlotRef> query_free_slots(std::string_view physician_id, TimePoint from) const;
    std::vector<std::pair<std::string, SlotRef>> query_free_slots_in(std::string_view department,
                                                                     TimePoint from) const;

    /// Books a run for a patient: creates the Patient and Appointment resources and marks the
    /// slots busy. Throws BookingConflict if any slot is taken or off-grid.
    const BookedAppointment& book(const PatientProfile& patient, std::string_view physician_id,
                                  const SlotRun& run);
    /// Marks the appointment cancelled and frees its slots.
    const BookedAppointment& cancel(std::string_view appointment_id);
    /// Moves an appointment to another run of the same physician in one step. On conflict
    /// the old booking stays intact.
    const BookedAppointment& move(std::string_view appointment_id, const SlotRun& run);

    const BookedAppointment* find(std::string_view appointment_id) const;
    /// Non-cancelled appointment for (patient, physician, date), earliest start first.
    const BookedAppointment* find_for(std::string_view patient_id, std::string_view physician_id, Date d) const;
    std::vector<const BookedAppointment*> appointments() const;  // creation order

    void set_status(std::string_view appointment_id, AppointmentStatus status);

    TimePoint start_of(const SlotRun& run) const;
    TimePoint end_of(const SlotRun& run) const;

    /// Busy fraction attributable to appointments over slots starting strictly after `now`;
    /// returned as (numerator, denominator) for exact comparison.
    std::pair<long, long> workload(std::string_view physician_id, TimePoint now) const;

    int prefilled_busy_count() const { return prefilled_busy_; }
    int busy_count() const;
    int booked_slot_total() const;
    int slot_total() const;
    /// Throws std::logic_error if busy != prefilled busy + booked run lengths, or if the
    /// index disagrees with the store.
    void check_occupancy(bool against_store = false) const;

    std::deque<WaitingListEntry>& waiting_list() { return waiting_; }
    const std::deque<WaitingListEntry>& waiting_list() const { return waiting_; }
    std::uint64_t next_waiting_seq() { return waiting_seq_++; }

private:
    struct Cell {
        bool prefilled = false;
        int owner = -1;  // index into appts_
    };
    struct Day {
        std::vector<Cell> cells;
    };

    const Day* day(std::string_view physician_id, Date d) const;
    Day* day(std::string_view physician_id, Date d);
    void write_slots(const Physician& p, const SlotRun& run);
    void write_appointment(const BookedAppointment& b);
    hadmin::Appointment& appt_mut(std::string_view id, int* index);
    const BookedAppointment& book_internal(const PatientProfile& patient, const Physician& p, const SlotRun& run,
                                           bool create_patient);

    synth::HospitalDataset ds_;
    ResourceStore& store_;
    std::map<std::string, std::map<Date, Day>, std::less<>> days_;
    std::map<std::string, std::size_t, std::less<>> physician_index_;
    std::deque<BookedAppointment> appts_;  // stable addresses
    std::map<std::string, int, std::less<>> appt_index_;
    std::map<std::pair<std::string, Date>, int> per_day_counter_;
    std::deque<WaitingListEntry> waiting_;
    std::uint64_t waiting_seq_ = 0;
    int prefilled_busy_ = 0;
};

} // namespace hadmin::fhir
