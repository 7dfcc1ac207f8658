#include "hadmin/core/errors.hpp"
#include "hadmin/core/rng.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/fhir/rest.hpp"
#include "support/fhir_examples.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace hadmin;
using namespace hadmin::fhir;
using namespace hadmin::fixtures;

namespace {

template <class Parse>
void expect_round_trip(const char* text, Parse parse) {
    Json original = Json::parse(text);
    auto typed = parse(original);
    std::string once = to_json(typed).dump();
    EXPECT_EQ(once, original.dump());
    EXPECT_EQ(to_json(parse(Json::parse(once))).dump(), once);
}

TimeSystem quarter_hours(Date start, int days, int start_hour = 9, int end_hour = 17) {
    return TimeSystem(start_hour * 60, end_hour * 60, 15, start, days);
}

} // namespace

TEST(FhirResources, ExamplesRoundTripByteStable) {
    expect_round_trip(kPractitioner, practitioner_from_json);
    expect_round_trip(kRole, practitioner_role_from_json);
    expect_round_trip(kSchedule, schedule_from_json);
    expect_round_trip(kSlot, slot_from_json);
    expect_round_trip(kPatient, patient_from_json);
    expect_round_trip(kAppointment, appointment_from_json);
}

TEST(FhirResources, RoleCapacityParsesToIntegers) {
    auto role = practitioner_role_from_json(Json::parse(kRole));
    EXPECT_EQ(role.capacity_per_hour, 4);
    EXPECT_EQ(role.capacity, 192);
    EXPECT_EQ(role.department, "allergy");
}

TEST(FhirResources, WrongTypeOrMissingFieldIsFormatError) {
    EXPECT_THROW(slot_from_json(Json::parse(kPatient)), FormatError);
    Json j = Json::parse(kSlot);
    j.erase("start");
    EXPECT_THROW(slot_from_json(j), FormatError);
}

TEST(FhirResources, BuildersReproduceTheSlotAndScheduleExamples) {
    TimeSystem ts(10 * 60, 18 * 60, 15, Date(2025, 3, 22), 7);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Lincoln Bendzus", "rheumatology", 4, {3}, {{3, 10}}}}, "hospital_01");
    const Physician& p = ds.physicians[0];
    EXPECT_EQ(p.id, "hospital01-imrhe-Dr.LincolnBendzus");
    EXPECT_EQ(to_json(make_slot(p, Date(2025, 3, 25), 10, true, ts)).dump(), Json::parse(kSlot).dump());
    EXPECT_EQ(to_json(make_schedule(p, ts)).dump(), Json::parse(kSchedule).dump());
}

TEST(FhirHospital, UploadMaterializesEverySlotOfWorkingDays) {
    TimeSystem ts(9 * 60, 18 * 60, 15, Date(2025, 3, 17), 7);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 4, {0, 1, 2, 3, 4, 5}, {{0, 0}, {2, 5}}}});
    MemoryStore store;
    Hospital h(ds, store);
    auto n = h.upload();
    EXPECT_EQ(n.slots, 6 * 36);
    EXPECT_EQ(n.schedules, 1);
    EXPECT_EQ(store.size("Slot"), 216u);
    const std::string sched = reference_to("Schedule", schedule_id(ds.physicians[0].id));
    EXPECT_EQ(store.search("Slot", {{"schedule", sched}}).size(), 216u);
    EXPECT_EQ(store.search("Slot", {{"schedule", sched}, {"status", "busy"}}).size(), 2u);
    h.check_occupancy(true);
}

TEST(FhirHospital, EmptyDatasetUploadsNothing) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 2);
    auto ds = fixtures::make_hospital(ts, {});
    MemoryStore store;
    Hospital h(ds, store);
    EXPECT_EQ(h.upload().total(), 0);
    EXPECT_EQ(store.size(), 0u);
}

TEST(FhirHospital, BookCreatesPatientAndAppointmentAndFlipsSlots) {
    TimeSystem ts = quarter_hours(Date(2025, 9, 18), 1, 10, 18);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Alden Gaestel", "infectious diseases", 4, {0}, {}}}, "hospital_02");
    MemoryStore store;
    Hospital h(ds, store);
    h.upload();
    auto patient = fixtures::make_patient(ds, "Earnest Metoxen", "infectious diseases");
    const auto& b = h.book(patient, ds.physicians[0].id, {Date(2025, 9, 18), 0, 1});
    EXPECT_EQ(b.appt.id, "hospital02-iminf-Dr.AldenGaestel-20250918-appn0-0");

    auto appt = store.read("Appointment", b.appt.id);
    ASSERT_TRUE(appt);
    Json expected = Json::parse(kAppointment);
    EXPECT_EQ(appt->dump(), expected.dump());
    ASSERT_TRUE(store.read("Patient", patient.id));
    EXPECT_EQ((*store.read("Slot", slot_id(ds.physicians[0].id, Date(2025, 9, 18), 0)))["status"], "busy");

    auto free = h.query_free_slots(ds.physicians[0].id, TimePoint::at(Date(2025, 9, 17), 0));
    EXPECT_EQ(free.size(), 31u);
    EXPECT_EQ(free.front().index, 1);
    h.check_occupancy(true);
}

TEST(FhirHospital, DoubleBookingIsAConflict) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 1);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 2, {0}, {{0, 4}}}});
    MemoryStore store;
    Hospital h(ds, store);
    h.upload();
    auto a = fixtures::make_patient(ds, "Ann Lee", "cardiology");
    auto b = fixtures::make_patient(ds, "Bo Park", "cardiology");
    const std::string pid = ds.physicians[0].id;
    h.book(a, pid, {ts.start_date(), 0, 2});
    EXPECT_THROW(h.book(b, pid, {ts.start_date(), 1, 2}), BookingConflict);
    EXPECT_THROW(h.book(b, pid, {ts.start_date(), 3, 2}), BookingConflict);  // prefilled busy
    EXPECT_THROW(h.book(b, pid, {ts.start_date(), 6, 1}), BookingConflict);  // wrong length
    EXPECT_THROW(h.book(b, pid, {ts.start_date(), 31, 2}), BookingConflict); // off the grid
    h.check_occupancy(true);
}

TEST(FhirHospital, CancelFreesSlotsAndMarksCancelled) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 1);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 2, {0}, {}}});
    MemoryStore store;
    Hospital h(ds, store);
    h.upload();
    const std::string pid = ds.physicians[0].id;
    std::string id = h.book(fixtures::make_patient(ds, "Ann Lee", "cardiology"), pid, {ts.start_date(), 4, 2}).appt.id;
    EXPECT_EQ(h.busy_count(), 2);
    h.cancel(id);
    EXPECT_EQ(h.busy_count(), 0);
    EXPECT_EQ((*store.read("Appointment", id))["status"], "cancelled");
    EXPECT_EQ(store.search("Slot", {{"status", "busy"}}).size(), 0u);
    EXPECT_THROW(h.cancel("nope"), NotFound);
    h.check_occupancy(true);
}

TEST(FhirHospital, MoveIsAtomicAndKeepsOneBookedAppointment) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 1);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 2, {0}, {}}});
    MemoryStore store;
    Hospital h(ds, store);
    h.upload();
    const std::string pid = ds.physicians[0].id;
    Date d = ts.start_date();
    std::string a = h.book(fixtures::make_patient(ds, "Ann Lee", "cardiology"), pid, {d, 10, 2}).appt.id;
    h.book(fixtures::make_patient(ds, "Bo Park", "cardiology"), pid, {d, 2, 2});

    EXPECT_THROW(h.move(a, {d, 3, 2}), BookingConflict);
    EXPECT_TRUE(h.is_busy(pid, d, 10));
    EXPECT_TRUE(h.is_busy(pid, d, 11));

    h.move(a, {d, 9, 2});  // overlaps its own old run
    EXPECT_FALSE(h.is_busy(pid, d, 11));
    EXPECT_TRUE(h.is_busy(pid, d, 9));
    EXPECT_EQ(store.search("Appointment", {{"status", "booked"}}).size(), 2u);
    EXPECT_EQ((*store.read("Appointment", a))["start"], "2025-03-17T11:15:00+09:00");
    h.check_occupancy(true);
}

TEST(FhirHospital, FreeSlotQueryMatchesFullScan) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 3);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 4, {0, 2}, {{0, 3}, {2, 0}, {2, 31}}}});
    MemoryStore store;
    Hospital h(ds, store);
    h.upload();
    const std::string pid = ds.physicians[0].id;
    h.book(fixtures::make_patient(ds, "Ann Lee", "cardiology"), pid, {ts.start_date().plus_days(2), 7, 1});
    for (TimePoint from : {TimePoint::at(ts.start_date(), 0), TimePoint::at(ts.start_date(), 12 * 60 + 7),
                           TimePoint::at(ts.start_date().plus_days(2), 9 * 60), ts.horizon_end()}) {
        std::vector<std::string> scan;
        for (const auto& s : store.search("Slot", {{"status", "free"}})) {
            if (TimePoint::parse_iso(s["start"].get<std::string>(), ts.utc_offset_minutes()) > from) {
                scan.push_back(s["id"]);
            }
        }
        std::vector<std::string> got;
        for (const auto& r : h.query_free_slots(pid, from)) got.push_back(slot_id(pid, r.date, r.index));
        std::sort(scan.begin(), scan.end());
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, scan);
    }
    EXPECT_TRUE(h.query_free_slots(pid, ts.horizon_end()).empty());
    EXPECT_THROW(h.query_free_slots("nobody", ts.horizon_start()), NotFound);
    EXPECT_THROW(h.physicians_in("dermatology"), NotFound);
}

TEST(FhirHospital, UploadCanBookPrefilledBlocks) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 1);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 4, {0}, {}}});
    auto p = fixtures::make_patient(ds, "Ann Lee", "cardiology");
    p.attending_physician = "Dr. Ada Kim";
    p.block = {ts.start_date(), 5, 1};
    ds.patients.push_back(p);
    MemoryStore store;
    Hospital h(ds, store);
    auto n = h.upload({.book_prefilled_blocks = true});
    EXPECT_EQ(n.appointments, 1);
    EXPECT_EQ(store.size("Appointment"), 1u);
    EXPECT_TRUE(h.is_busy(ds.physicians[0].id, ts.start_date(), 5));
}

TEST(FhirBackends, MemoryAndStubHttpEndIdentical) {
    TimeSystem ts = quarter_hours(Date(2025, 3, 17), 2);
    auto ds = fixtures::make_hospital(ts, {{"Dr. Ada Kim", "cardiology", 4, {0, 1}, {{0, 2}}},
                                          {"Dr. Bo Han", "cardiology", 2, {1}, {}}});
    MemoryStore mem;
    Hospital a(ds, mem);
    a.upload();
    int changed_a = run_script(a, 42, 50);

    StubFhirServer server;
    server.start();
    RestStore rest({.base_url = server.base_url(), .page_size = 7});
    Hospital b(ds, rest);
    b.upload();
    int changed_b = run_script(b, 42, 50);

    EXPECT_EQ(changed_a, changed_b);
    EXPECT_GT(changed_a, 10);
    EXPECT_EQ(canonical_dump(mem, resource_types()), canonical_dump(rest, resource_types()));
    EXPECT_EQ(canonical_dump(mem, resource_types()), canonical_dump(server.backing(), resource_types()));
    b.check_occupancy(true);
}

TEST(FhirBackends, RestReadDeleteAndMissing) {
    StubFhirServer server;
    server.start();
    RestStore rest({.base_url = server.base_url()});
    rest.create(Json::parse(kPatient));
    auto r = rest.read("Patient", "hospital02-iminf-EarnestMetoxen");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->dump(), Json::parse(kPatient).dump());
    EXPECT_FALSE(rest.read("Patient", "missing"));
    EXPECT_TRUE(rest.remove("Patient", "hospital02-iminf-EarnestMetoxen"));
    EXPECT_FALSE(rest.remove("Patient", "hospital02-iminf-EarnestMetoxen"));
}

TEST(FhirBackends, UnreachableServerReportsResourceId) {
    RestStore rest({.base_url = "http://127.0.0.1:1/fhir", .timeout = std::chrono::milliseconds(300), .retries = 0});
    try {
        rest.update(Json::parse(kSlot));
        FAIL() << "expected BackendError";
    } catch (const BackendError& e) {
        EXPECT_EQ(e.resource_id(), "hospital01-imrhe-Dr.LincolnBendzus-20250325-slot10");
    }
}
