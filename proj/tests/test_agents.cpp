#include "hadmin/agents/chat.hpp"
#include "hadmin/agents/workflows.hpp"
#include "hadmin/core/errors.hpp"
#include "hadmin/rubric/rubric.hpp"
#include "hadmin/sim/simulation.hpp"
#include "hadmin/synth/config.hpp"
#include "hadmin/synth/disease_kb.hpp"
#include "hadmin/synth/synthesizer.hpp"
#include "support/rubric_fixtures.hpp"

#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

using namespace hadmin;
using namespace hadmin::agents;

namespace {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &n, EVP_sha256(), nullptr);
    std::ostringstream out;
    for (unsigned int i = 0; i < n; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return out.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::filesystem::path kPromptDir = std::filesystem::path(HADMIN_DATA_DIR) / "prompts";

} // namespace

TEST(Prompts, ManifestMatchesShippedTemplates) {
    auto manifest = nlohmann::json::parse(slurp(kPromptDir / "manifest.json"));
    ASSERT_EQ(manifest.size(), PromptLibrary::template_names().size() + 1);  // plus personas.json
    for (const auto& [file, entry] : manifest.items()) {
        SCOPED_TRACE(file);
        const std::string text = slurp(kPromptDir / file);
        EXPECT_EQ(sha256_hex(text), entry["sha256"].get<std::string>());
        EXPECT_EQ(placeholders(text), entry["placeholders"].get<std::vector<std::string>>());
    }
}

TEST(Prompts, RenderIsSinglePass) {
    EXPECT_EQ(render("{a} and {b}", {{"a", "{b}"}, {"b", "x"}}), "{b} and x");
    EXPECT_EQ(render(R"({"schedule": {}} {name})", {{"name", "Jo"}}), R"({"schedule": {}} Jo)");
    EXPECT_EQ(render("{unknown}", {}), "{unknown}");
    EXPECT_EQ(placeholders("{b} {a} {b} {\"x\": 1}"), (std::vector<std::string>{"a", "b"}));
}

TEST(Prompts, EveryTemplatePlaceholderIsFilled) {
    const auto& lib = PromptLibrary::standard();
    fixtures::RubricWorld w;
    PatientProfile p = w.patient("Jude Park", "pulmonology");
    for (const std::string& s :
         {intake_patient_prompt(lib, p), intake_staff_prompt(lib, w.departments, 2, 5),
          schedule_patient_prompt(lib, p, Preference::date),
          schedule_reject_prompt(lib, p, Preference::physician, Preference::asap),
          event_patient_prompt(lib, true, p.name, "Dr. Ada Brun", Date(2025, 3, 4), 9 * 60)}) {
        for (const auto& name : placeholders(s)) ADD_FAILURE() << "unfilled {" << name << "}";
    }
}

TEST(Dispatch, InterpretsToolCallsAndText) {
    std::vector<std::string> notes;
    auto d = interpret({"", {{"physician_filter_tool", {{"preferred_doctor", "Dr. Buford Kol"}}}}}, &notes);
    ASSERT_TRUE(std::holds_alternative<ToolCall>(d));
    EXPECT_EQ(std::get<ToolCall>(d).arg("preferred_doctor"), "Dr. Buford Kol");

    d = interpret({"", {{"physician_filter_tool", {}}}});
    ASSERT_TRUE(std::holds_alternative<Clarify>(d));

    EXPECT_TRUE(std::holds_alternative<NoTool>(interpret({"NO TOOL", {}})));
    EXPECT_TRUE(std::holds_alternative<Clarify>(interpret({"Which date works for you?", {}})));

    d = interpret({"[TOOL CALL] date_filter_tool | date=2025-03-04", {}});
    ASSERT_TRUE(std::holds_alternative<ToolCall>(d));
    EXPECT_EQ(std::get<ToolCall>(d).arg("date"), "2025-03-04");

    notes.clear();
    d = interpret({"", {{"get_all_time_tool", {}}, {"date_filter_tool", {{"date", "2025-03-04"}}}}}, &notes);
    EXPECT_EQ(std::get<ToolCall>(d).tool, "get_all_time_tool");
    EXPECT_EQ(notes.size(), 1u);

    EXPECT_TRUE(std::holds_alternative<NoTool>(interpret({"", {{"book_everything", {}}}})));
}

TEST(Dispatch, ToolCallTextRoundTrips) {
    ToolCall c{"physician_filter_tool", {{"preferred_doctor", "Dr. Buford Kol"}}};
    EXPECT_EQ(c.text(), "[TOOL CALL] physician_filter_tool | preferred_doctor=Dr. Buford Kol");
    EXPECT_EQ(parse_tool_call_text(c.text()), c);
}

TEST(Extraction, ParsesModelOutput) {
    const std::string fenced = "Here you go:\n```json\n{\"name\": \"Mina Cho\", \"gender\": \"female\", "
                               "\"phone_number\": \"+821055501234\", \"personal_id\": \"850101-2345678\", "
                               "\"address\": \"3, Jungang-ro, Jung-gu, Daegu\", \"department\": \"nephrology\"}\n```";
    auto e = parse_extraction(fenced);
    EXPECT_EQ(e.name, "Mina Cho");
    EXPECT_EQ(e.department, "nephrology");
    EXPECT_THROW(parse_extraction("{\"name\": \"x\"}"), FormatError);
    EXPECT_THROW(parse_extraction("no json here"), FormatError);
    EXPECT_THROW(parse_extraction(R"({"name": 1, "gender": "", "phone_number": "", "personal_id": "",
                                      "address": "", "department": ""})"),
                 FormatError);
}

TEST(Extraction, AnswerLineSelectsDepartment) {
    const std::vector<std::string> depts = {"cardiology", "nephrology", "infectious disease"};
    EXPECT_EQ(find_answer_department("Answer: 2. Nephrology", depts), "nephrology");
    EXPECT_EQ(find_answer_department("Answer: 3. Infectious Diseases", depts), "infectious disease");
    EXPECT_EQ(find_answer_department("Answer: 1. heart clinic", depts), "cardiology");
    EXPECT_FALSE(find_answer_department("I think nephrology.", depts));
}

TEST(Extraction, ScheduleAnswer) {
    EXPECT_FALSE(parse_schedule_answer(R"({"schedule": {}})"));
    auto p = parse_schedule_answer(
        R"({"schedule": {"Dr. Ada Brun": {"date": "2025-03-03", "start": 10.0, "end": 10.25}}})");
    ASSERT_TRUE(p);
    EXPECT_EQ(p->physicians, std::vector<std::string>{"Dr. Ada Brun"});
    EXPECT_DOUBLE_EQ(p->end, 10.25);
    EXPECT_THROW(parse_schedule_answer(R"({"plan": {}})"), FormatError);
    EXPECT_THROW(parse_schedule_answer(R"({"schedule": {"Dr. A": {"date": "2025-03-03"}}})"), FormatError);
}

TEST(Workflows, RejectionFrequency) {
    Rng rng(123);
    int hits = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) hits += draw_rejection(rng, 0.3);
    EXPECT_NEAR(hits / double(n), 0.30, 0.01);
}

TEST(Workflows, EventDrawFrequencies) {
    Rng rng(321);
    int resched = 0;
    int cancel = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto k = draw_event(rng, 0.15, 0.10);
        if (k == TaskKind::reschedule) ++resched;
        if (k == TaskKind::cancel) ++cancel;
    }
    EXPECT_NEAR(resched / double(n), 0.15, 0.01);
    EXPECT_NEAR(cancel / double(n), 0.10, 0.01);
}

TEST(Workflows, SchedulingDialogueShapes) {
    // Each preference, with and without a forced rejection towards each other preference.
    for (Preference active : {Preference::asap, Preference::date, Preference::physician}) {
        for (Preference secondary : {Preference::asap, Preference::date, Preference::physician}) {
            fixtures::RubricWorld w;
            PatientProfile p = w.patient("Jude Park", "cardiology");
            p.preference_primary = active;
            p.preference_secondary = secondary;
            p.preferred_physician = "Dr. Ada Brun";
            p.valid_from = Date(2025, 3, 4);
            ScriptedStaff staff;
            ScriptedPatient patient;
            Rng rng(1);
            WorkflowOptions always;
            always.reject_prob = 1.0;
            std::optional<rubric::Outcome> outcome;
            auto r = run_scheduling(p, "cardiology", *w.hospital, w.now, staff, patient, rng, always,
                                    [&](const SchedulingResult& res) {
                                        outcome = rubric::evaluate_scheduling(rubric::check_of(res), *w.hospital, w.now);
                                    });
            SCOPED_TRACE(std::string(to_string(active)) + " -> " + std::string(to_string(secondary)));
            EXPECT_TRUE(r.completed);
            EXPECT_EQ(r.rejected, secondary != active);
            EXPECT_EQ(r.final_preference, secondary);
            EXPECT_FALSE(r.wrong_tool);
            ASSERT_TRUE(r.appointment_id);
            ASSERT_TRUE(outcome);
            EXPECT_TRUE(outcome->success()) << outcome->detail;
            const std::size_t proposals = r.rejected ? 2 : 1;
            std::size_t seen = 0;
            for (const auto& turn : r.transcript.turns) {
                if (turn.text.rfind("How about this schedule:", 0) == 0) ++seen;
            }
            EXPECT_EQ(seen, proposals);
            EXPECT_EQ(r.transcript.tools.size(), proposals);
        }
    }
}

TEST(Workflows, WithheldDemographicsAreIncomplete) {
    fixtures::RubricWorld w;
    PatientProfile p = w.patient("Jude Park", "pulmonology");
    ScriptedStaff staff;
    ScriptedPatient silent(ScriptedPatientOptions{true, false, false});
    auto r = run_intake(p, w.departments, staff, silent);
    auto o = rubric::evaluate_intake(r, p, w.departments);
    EXPECT_EQ(o.code, rubric::Code::IS);
    EXPECT_EQ(o.criterion, "C1-2");
}

TEST(Workflows, WithheldDoctorFailsRetrieval) {
    fixtures::RubricWorld w;
    const auto& ada = *w.hospital->physician_by_name("Dr. Ada Brun");
    const std::string id = w.hospital->book(w.patient("Rhea Stone", "cardiology"), ada.id, {Date(2025, 3, 4), 0, 1}).appt.id;
    ScriptedStaff staff;
    ScriptedPatient patient(ScriptedPatientOptions{false, true, false});
    auto ev = run_event(TaskKind::cancel, id, *w.hospital, w.now, staff, patient);
    EXPECT_FALSE(ev.retrieved_id);
    EXPECT_EQ(rubric::evaluate_event(ev, *w.hospital, w.now).code, rubric::Code::FI);
    EXPECT_EQ(w.hospital->find(id)->appt.status, AppointmentStatus::scheduled);
}

TEST(Workflows, CancelFlowFreesTheSlots) {
    fixtures::RubricWorld w;
    const auto& ada = *w.hospital->physician_by_name("Dr. Ada Brun");
    const std::string id = w.hospital->book(w.patient("Rhea Stone", "cardiology"), ada.id, {Date(2025, 3, 4), 0, 1}).appt.id;
    ScriptedStaff staff;
    ScriptedPatient patient;
    auto ev = run_event(TaskKind::cancel, id, *w.hospital, w.now, staff, patient);
    EXPECT_EQ(ev.retrieved_id, id);
    EXPECT_EQ(ev.action, kCancelTool);
    EXPECT_EQ(w.hospital->find(id)->appt.status, AppointmentStatus::cancelled);
    EXPECT_EQ(ev.transcript.last(Speaker::staff)->text.rfind("I've cancelled this schedule:", 0), 0u);
    EXPECT_TRUE(rubric::evaluate_event(ev, *w.hospital, w.now).success());
}

TEST(Workflows, RescheduleFlowMovesEarlierOrWaitlists) {
    {
        fixtures::RubricWorld w;
        const auto& ada = *w.hospital->physician_by_name("Dr. Ada Brun");
        const std::string id =
            w.hospital->book(w.patient("Rhea Stone", "cardiology"), ada.id, {Date(2025, 3, 4), 0, 1}).appt.id;
        ScriptedStaff staff;
        ScriptedPatient patient;
        auto ev = run_event(TaskKind::reschedule, id, *w.hospital, w.now, staff, patient);
        EXPECT_TRUE(ev.moved);
        EXPECT_EQ(ev.transcript.last(Speaker::staff)->text.rfind("I've moved this schedule:", 0), 0u);
        ASSERT_TRUE(ev.proposal);
        EXPECT_EQ(ev.proposal->date, "2025-03-03");
        EXPECT_DOUBLE_EQ(ev.proposal->start, 10.0);
        EXPECT_TRUE(rubric::evaluate_event(ev, *w.hospital, w.now).success());
    }
    {
        // The booking already sits at the first free slot: nothing earlier exists.
        fixtures::RubricWorld w;
        const auto& ada = *w.hospital->physician_by_name("Dr. Ada Brun");
        const std::string id =
            w.hospital->book(w.patient("Rhea Stone", "cardiology"), ada.id, {Date(2025, 3, 3), 4, 1}).appt.id;
        ScriptedStaff staff;
        ScriptedPatient patient;
        auto ev = run_event(TaskKind::reschedule, id, *w.hospital, w.now, staff, patient);
        EXPECT_FALSE(ev.moved);
        EXPECT_TRUE(ev.waitlisted);
        EXPECT_NE(ev.transcript.last(Speaker::staff)->text.find("waiting list"), std::string::npos);
        EXPECT_TRUE(rubric::evaluate_event(ev, *w.hospital, w.now).success());
    }
}

TEST(Chat, ParsesToolCallResponses) {
    nlohmann::json resp = {
        {"choices",
         {{{"message",
            {{"role", "assistant"},
             {"content", nullptr},
             {"tool_calls",
              {{{"id", "c1"},
                {"type", "function"},
                {"function",
                 {{"name", "physician_filter_tool"},
                  {"arguments", R"({"preferred_doctor": "Dr. Buford Kol"})"}}}}}}}}}}}};
    auto r = HttpChatBackend::parse_response(resp);
    ASSERT_EQ(r.calls.size(), 1u);
    EXPECT_EQ(r.calls[0].arg("preferred_doctor"), "Dr. Buford Kol");
    EXPECT_THROW(HttpChatBackend::parse_response(nlohmann::json::object()), BackendError);
}

TEST(Chat, ToolSchemaListsFiveFunctions) {
    const auto& s = staff_tool_schema();
    ASSERT_EQ(s.size(), 5u);
    for (const auto& t : s) EXPECT_TRUE(is_known_tool(t["function"]["name"].get<std::string>()));
}

TEST(Chat, StubServerDrivesAFullHospital) {
    StubChatServer server;
    server.start();
    ChatConfig cfg;
    cfg.endpoint = server.base_url();
    cfg.model = "prompt-echo";

    static const auto kb = synth::load_disease_kb(synth::default_disease_kb_path());
    auto sc = synth::level_preset("primary", 21);
    sc.hospital_n = 1;
    auto ds = synth::synthesize(sc, kb).front();
    ds.patients.resize(std::min<std::size_t>(ds.patients.size(), 25));

    sim::SimOptions opt;
    opt.seed = 5;
    opt.model = "prompt-echo";
    opt.events = sim::EventProbabilities{0.3, 0.2};
    fhir::MemoryStore store;
    auto pair = sim::llm_agents(cfg);
    auto run = sim::run_hospital(ds, store, pair, opt);
    EXPECT_GT(server.request_count(), 0u);
    int failures = 0;
    for (const auto& r : run.records) {
        if (r["rubric"]["result"] != "success") ++failures;
    }
    EXPECT_EQ(failures, 0);
    EXPECT_EQ(run.patients, 25);
    server.stop();
}
