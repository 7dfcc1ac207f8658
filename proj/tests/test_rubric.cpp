#include "hadmin/rubric/rubric.hpp"
#include "support/random_instances.hpp"
#include "support/rubric_fixtures.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace hadmin;
using rubric::Code;

TEST(Rubric, FaultFixturesTriggerTheirCodes) {
    std::set<Code> seen;
    std::set<std::pair<Code, std::string>> placed;
    int clean = 0;
    int canonical = 0;
    for (const auto& c : fixtures::rubric_cases()) {
        SCOPED_TRACE(c.name + ": " + c.actual.detail);
        EXPECT_EQ(c.actual.code, c.expected);
        EXPECT_EQ(c.actual.criterion, c.criterion);
        if (c.expected) {
            EXPECT_TRUE(placed.insert({*c.expected, c.criterion}).second);
            if (c.canonical) {
                ++canonical;
                EXPECT_TRUE(seen.insert(*c.expected).second) << "duplicate fixture for " << rubric::to_string(*c.expected);
            }
        } else {
            ++clean;
        }
    }
    EXPECT_EQ(seen.size(), 13u);
    EXPECT_EQ(canonical, 13);
    EXPECT_EQ(clean, 4);
}

TEST(Rubric, CodeNamesRoundTrip) {
    for (Code c : rubric::all_codes()) EXPECT_EQ(rubric::parse_code(rubric::to_string(c)), c);
    EXPECT_THROW(rubric::parse_code("XX"), FormatError);
    rubric::Outcome o = rubric::fail(agents::TaskKind::reschedule, Code::NET, "C2-8", "later");
    EXPECT_EQ(rubric::outcome_from_json(rubric::to_json(o)), o);
    EXPECT_EQ(rubric::outcome_from_json(rubric::to_json(rubric::pass(agents::TaskKind::intake))),
              rubric::pass(agents::TaskKind::intake));
}

TEST(Rubric, IncompleteIntakeMasksDepartmentButUnmaskedCheckSeesIt) {
    fixtures::RubricWorld w;
    PatientProfile p = w.patient("Jude Park", "pulmonology");
    agents::ScriptedStaff staff;
    agents::ScriptedPatient silent(agents::ScriptedPatientOptions{true, false, false});
    auto r = agents::run_intake(p, w.departments, staff, silent);
    ASSERT_TRUE(r.extracted);
    r.extracted->department = "cardiology";
    auto o = rubric::evaluate_intake(r, p, w.departments);
    EXPECT_EQ(o.code, Code::IS);
    EXPECT_TRUE(rubric::department_wrong_unmasked(r, p, w.departments));
}

TEST(Rubric, MissingAnswerLineIsIncomplete) {
    fixtures::RubricWorld w;
    PatientProfile p = w.patient("Jude Park", "pulmonology");
    agents::ScriptedStaff staff;
    agents::ScriptedPatient patient;
    agents::WorkflowOptions two;
    two.max_rounds = 2;
    auto r = agents::run_intake(p, w.departments, staff, patient, two);
    EXPECT_FALSE(r.answer_department);
    EXPECT_EQ(rubric::evaluate_intake(r, p, w.departments).code, Code::IS);
}

TEST(Rubric, FieldNormalization) {
    EXPECT_EQ(rubric::normalize_field("name", "  Jude   PARK "), "jude park");
    EXPECT_EQ(rubric::normalize_field("phone_number", "+82 10-1234-5678"), "821012345678");
    EXPECT_EQ(rubric::normalize_field("personal_id", "900505-1234567"), "9005051234567");
}

TEST(Rubric, NoAvailabilityClaimIsCheckedAgainstTheOracle) {
    fixtures::RubricWorld w;
    rubric::SchedulingCheck c{true, true, true, std::nullopt, fixtures::asap_request(w)};
    EXPECT_EQ(rubric::evaluate_scheduling(c, *w.hospital, w.now).code, Code::NET);
    const TimePoint end = w.ts.horizon_end();
    c.request.not_before = end;
    EXPECT_TRUE(rubric::evaluate_scheduling(c, *w.hospital, end).success());
}

TEST(Rubric, OutOfHorizonAndForeignPhysicianAreInvalid) {
    fixtures::RubricWorld w;
    auto req = fixtures::asap_request(w);
    auto eval = [&](agents::RawProposal p) {
        return rubric::evaluate_scheduling({true, true, false, p, req}, *w.hospital, w.now);
    };
    EXPECT_EQ(eval(fixtures::raw({"Dr. Eve Fox"}, "2025-03-03", 9.0, 9.25)).code, Code::IVS);
    EXPECT_EQ(eval(fixtures::raw({"Dr. Nobody"}, "2025-03-03", 9.0, 9.25)).code, Code::IVS);
    EXPECT_EQ(eval(fixtures::raw({"Dr. Cal Dorn"}, "2025-03-09", 9.0, 9.5)).code, Code::IVS);
    EXPECT_EQ(eval(fixtures::raw({"Dr. Cal Dorn"}, "2025-03-03", 16.75, 17.25)).code, Code::IVS);
    EXPECT_EQ(eval(fixtures::raw({"Dr. Cal Dorn"}, "2025-03-03", 9.1, 9.6)).code, Code::IVS);
    // Dr. Cal Dorn does not work on day 2.
    EXPECT_EQ(eval(fixtures::raw({"Dr. Cal Dorn"}, "2025-03-05", 9.0, 9.5)).code, Code::TC);
}

TEST(Rubric, RescheduleIntoLaterGapIsNotEarliest) {
    // Two earlier gaps for Dr. Ada Brun on day 0: 10:00 and 11:00. Moving to 11:00 is NET.
    fixtures::RubricWorld w;
    auto& h = *w.hospital;
    const auto& ada = *h.physician_by_name("Dr. Ada Brun");
    const std::string id = h.book(w.patient("Rhea Stone", "cardiology"), ada.id, {Date(2025, 3, 4), 0, 1}).appt.id;
    for (int k = 5; k <= 7; ++k) h.book(w.patient("Tom Vale " + std::to_string(k), "cardiology"), ada.id, {Date(2025, 3, 3), k, 1});

    agents::EventResult ev;
    ev.kind = agents::TaskKind::reschedule;
    ev.target_id = id;
    ev.retrieved_id = id;
    ev.action = std::string(agents::kRescheduleTool);
    ev.request = scheduler::move_earlier_request(h, *h.find(id), w.now);
    ev.proposal = fixtures::raw({"Dr. Ada Brun"}, "2025-03-03", 11.0, 11.25);
    scheduler::apply_move(h, id, *agents::to_grid(*ev.proposal, h));
    ev.moved = true;
    auto o = rubric::evaluate_event(ev, h, w.now);
    EXPECT_EQ(o.code, Code::NET);
    EXPECT_EQ(o.criterion, "C2-8");
}

TEST(Rubric, CancelWithoutFreeingSlotsIsIncomplete) {
    fixtures::RubricWorld w;
    auto& h = *w.hospital;
    const std::string id =
        h.book(w.patient("Rhea Stone", "cardiology"), h.physician_by_name("Dr. Ada Brun")->id, {Date(2025, 3, 4), 0, 1})
            .appt.id;
    agents::EventResult ev;
    ev.kind = agents::TaskKind::cancel;
    ev.target_id = id;
    ev.retrieved_id = id;
    ev.action = std::string(agents::kCancelTool);
    EXPECT_EQ(rubric::evaluate_event(ev, h, w.now).code, Code::IS);
    ev.action = std::string(agents::kRescheduleTool);
    EXPECT_EQ(rubric::evaluate_event(ev, h, w.now).code, Code::FI);
}

TEST(Rubric, NetSoundnessOnRandomInstances) {
    Rng rng(2024);
    int nets = 0;
    int passes = 0;
    for (int trial = 0; trial < 150; ++trial) {
        fhir::MemoryStore store;
        auto h = fixtures::random_hospital(rng, store);
        const TimeSystem& ts = h->time();
        for (Preference mode : {Preference::asap, Preference::date, Preference::physician}) {
            auto req = fixtures::random_request(rng, *h, mode);
            auto bf = scheduler::brute_force_earliest(req, h->store());
            for (const auto& p : h->dataset().physicians) {
                const int len = h->run_length(p);
                for (Date d : p.working_days) {
                    for (int first = 0; first + len <= ts.slots_per_day(); ++first) {
                        const int s = ts.start_minute() + first * ts.unit_minutes();
                        agents::RawProposal raw{{p.name}, d.str(), minutes_to_hours(s),
                                                minutes_to_hours(s + len * ts.unit_minutes())};
                        auto o = rubric::evaluate_scheduling({true, true, false, raw, req}, *h, req.not_before);
                        if (o.code && *o.code != Code::NET) continue;
                        ASSERT_TRUE(bf) << "a feasible run exists but the oracle found none";
                        const bool earlier_exists = std::tie(bf->date, bf->start_minute) < std::tie(d, s);
                        EXPECT_EQ(o.code == Code::NET, earlier_exists);
                        (o.code ? nets : passes)++;
                    }
                }
            }
        }
    }
    EXPECT_GT(nets, 0);
    EXPECT_GT(passes, 0);
}
