#include "hadmin/sim/simulation.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/timeflow/clock.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace hadmin::sim {

using nlohmann::ordered_json;

namespace {

ordered_json raw_json(const std::optional<agents::RawProposal>& p) {
    if (!p) return nullptr;
    ordered_json sched = ordered_json::object();
    for (const auto& name : p->physicians) sched[name] = {{"date", p->date}, {"start", p->start}, {"end", p->end}};
    return ordered_json{{"schedule", sched}};
}

ordered_json opt(const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(); }

struct Ctx {
    const synth::HospitalDataset& ds;
    const SimOptions& options;
    TimePoint now;

    ordered_json header(agents::TaskKind kind, const std::string& patient_id) const {
        ordered_json r;
        r["task"] = agents::to_string(kind);
        r["hospital"] = ds.hospital_name;
        r["level"] = ds.level;
        r["model"] = options.model;
        r["mode"] = agents::to_string(options.workflow.mode);
        r["patient_id"] = patient_id;
        r["time"] = now.iso(ds.time.utc_offset_minutes());
        return r;
    }
};

} // namespace

EventProbabilities event_probabilities_for(std::string_view level) {
    if (level == "tertiary") return {0.15, 0.10};
    return {0.10, 0.05};
}

AgentPair scripted_agents() {
    return {std::make_unique<agents::ScriptedStaff>(), std::make_unique<agents::ScriptedPatient>(), {}};
}

AgentPair llm_agents(const agents::ChatConfig& config) {
    auto backend = std::make_shared<agents::HttpChatBackend>(config);
    const auto& lib = agents::PromptLibrary::standard();
    return {std::make_unique<agents::LlmStaff>(*backend, lib), std::make_unique<agents::LlmPatient>(*backend, lib),
            {backend}};
}

HospitalRun run_hospital(const synth::HospitalDataset& ds, fhir::ResourceStore& store, AgentPair& pair,
                         const SimOptions& options) {
    fhir::Hospital hospital(ds, store);
    hospital.upload();
    timeflow::SimClock clock(ds.time, options.init_offset_days);
    const EventProbabilities probs = options.events.value_or(event_probabilities_for(ds.level));

    Rng root = Rng(options.seed).child(ds.hospital_name);
    Rng arrival_rng = root.child("arrivals");
    Rng order_rng = root.child("order");
    Rng reject_rng = root.child("rejections");
    Rng event_rng = root.child("events");

    std::vector<std::size_t> order(ds.patients.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
    const auto arrivals = timeflow::sample_arrivals(ds.patients.size(), clock, arrival_rng);

    std::vector<std::string> departments;
    for (const auto& d : ds.departments) departments.push_back(d.name);

    HospitalRun run;
    run.hospital = ds.hospital_name;
    run.level = ds.level;
    run.patients = static_cast<int>(ds.patients.size());
    auto& staff = *pair.staff;
    auto& patient_agent = *pair.patient;

    for (std::size_t k = 0; k < order.size(); ++k) {
        const PatientProfile& patient = ds.patients[order[k]];
        clock.advance_to(arrivals[k], hospital);
        Ctx ctx{ds, options, clock.now()};

        // Intake
        auto intake = agents::run_intake(patient, departments, staff, patient_agent, options.workflow);
        auto intake_outcome = rubric::evaluate_intake(intake, patient, departments);
        {
            ordered_json r = ctx.header(agents::TaskKind::intake, patient.id);
            r["transcript"] = agents::to_json(intake.transcript);
            r["outputs"] = {
                {"extraction", intake.extracted ? ordered_json(agents::to_json(*intake.extracted)) : ordered_json()},
                {"raw_extraction", intake.raw_extraction},
                {"answer_department", opt(intake.answer_department)},
                {"recommended_department", rubric::recommended_department(intake, departments)},
                {"gold_departments", patient.gold_departments},
                {"history", to_string(patient.history)},
            };
            r["rubric"] = rubric::to_json(intake_outcome);
            r["stats"] = {{"rounds", intake.transcript.rounds},
                          {"decision_round", intake.decision_round ? ordered_json(*intake.decision_round) : ordered_json()},
                          {"department_wrong_unmasked", rubric::department_wrong_unmasked(intake, patient, departments)}};
            run.records.push_back(std::move(r));
        }

        // Scheduling
        const std::string department = agents::scheduling_department(intake, patient, departments);
        rubric::Outcome sched_outcome;
        auto sched = agents::run_scheduling(
            patient, department, hospital, clock.now(), staff, patient_agent, reject_rng, options.workflow,
            [&](const agents::SchedulingResult& r) {
                sched_outcome = rubric::evaluate_scheduling(rubric::check_of(r), hospital, clock.now());
            });
        {
            ordered_json r = ctx.header(agents::TaskKind::scheduling, patient.id);
            r["transcript"] = agents::to_json(sched.transcript);
            r["outputs"] = {
                {"department", department},
                {"preference_primary", to_string(patient.preference_primary)},
                {"preference_final", to_string(sched.final_preference)},
                {"rejected", sched.rejected},
                {"proposal", raw_json(sched.proposal)},
                {"claimed_none", sched.claimed_none},
                {"format_error", sched.format_error},
                {"appointment_id", opt(sched.appointment_id)},
                {"booking_error", sched.booking_error},
            };
            r["rubric"] = rubric::to_json(sched_outcome);
            r["stats"] = {{"rounds", sched.transcript.rounds},
                          {"tool_calls", sched.transcript.tools.size()},
                          {"wrong_tool", sched.wrong_tool},
                          {"used_fallback", sched.used_fallback},
                          {"final_from_fallback", sched.final_from_fallback}};
            run.records.push_back(std::move(r));
        }
        if (!sched.appointment_id) continue;
        ++run.bookings;

        // Reschedule / cancel
        auto kind = agents::draw_event(event_rng, probs.reschedule, probs.cancel);
        if (!kind) continue;
        std::vector<std::string> modifiable;
        for (const auto* b : hospital.appointments()) {
            if (timeflow::can_modify(*b, hospital, clock.now())) modifiable.push_back(b->appt.id);
        }
        if (modifiable.empty()) continue;
        const std::string target = modifiable[event_rng.below(modifiable.size())];
        const std::string target_patient = hospital.find(target)->appt.patient_id;
        auto ev = agents::run_event(*kind, target, hospital, clock.now(), staff, patient_agent, options.workflow);
        auto ev_outcome = rubric::evaluate_event(ev, hospital, clock.now());
        ordered_json r = ctx.header(*kind, target_patient);
        r["transcript"] = agents::to_json(ev.transcript);
        ordered_json moves = ordered_json::array();
        for (const auto& m : ev.reassignments) moves.push_back(m.appointment_id);
        r["outputs"] = {
            {"target_appointment", target},
            {"retrieved_appointment", opt(ev.retrieved_id)},
            {"action", ev.action},
            {"proposal", raw_json(ev.proposal)},
            {"moved", ev.moved},
            {"waitlisted", ev.waitlisted},
            {"format_error", ev.format_error},
            {"booking_error", ev.booking_error},
            {"reassigned", moves},
        };
        r["rubric"] = rubric::to_json(ev_outcome);
        r["stats"] = {{"rounds", ev.transcript.rounds},
                      {"tool_calls", ev.transcript.tools.size()},
                      {"wrong_tool", false},
                      {"used_fallback", ev.used_fallback},
                      {"final_from_fallback", ev.used_fallback}};
        run.records.push_back(std::move(r));
    }
    clock.advance_to(std::max(clock.now(), clock.horizon_end()), hospital);
    hospital.check_occupancy();
    run.waiting_list = static_cast<int>(hospital.waiting_list().size());
    return run;
}

std::vector<HospitalRun> run_hospitals(const std::vector<synth::HospitalDataset>& datasets,
                                       const StoreFactory& stores, const AgentFactory& agents,
                                       const SimOptions& options, int jobs) {
    std::vector<HospitalRun> out(datasets.size());
    std::vector<std::exception_ptr> errors(datasets.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < datasets.size(); i = next++) {
            try {
                auto store = stores(datasets[i]);
                AgentPair pair = agents();
                out[i] = run_hospital(datasets[i], *store, pair, options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::clamp(jobs, 1, std::max(1, static_cast<int>(datasets.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

void write_jsonl(std::ostream& out, const std::vector<HospitalRun>& runs) {
    for (const auto& run : runs) {
        for (const auto& r : run.records) out << r.dump() << '\n';
    }
}

std::vector<nlohmann::json> read_jsonl(std::istream& in) {
    std::vector<nlohmann::json> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("transcript line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

} // namespace hadmin::sim
