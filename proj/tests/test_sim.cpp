#include "hadmin/report/report.hpp"
#include "hadmin/sim/simulation.hpp"
#include "hadmin/synth/config.hpp"
#include "hadmin/synth/disease_kb.hpp"
#include "hadmin/synth/synthesizer.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hadmin;

namespace {

synth::HospitalDataset primary_hospital(std::uint64_t seed) {
    static const auto kb = synth::load_disease_kb(synth::default_disease_kb_path());
    auto cfg = synth::level_preset("primary", seed);
    cfg.hospital_n = 1;
    return synth::synthesize(cfg, kb).front();
}

std::string run_jsonl(const synth::HospitalDataset& ds, const sim::SimOptions& opt) {
    fhir::MemoryStore store;
    auto pair = sim::scripted_agents();
    auto run = sim::run_hospital(ds, store, pair, opt);
    std::ostringstream out;
    sim::write_jsonl(out, {run});
    return out.str();
}

} // namespace

TEST(Simulation, OracleAgentsProduceNoRubricErrors) {
    const auto ds = primary_hospital(7);
    for (auto mode : {agents::SchedulingMode::tools, agents::SchedulingMode::reasoning}) {
        sim::SimOptions opt;
        opt.seed = 11;
        opt.workflow.mode = mode;
        opt.events = sim::EventProbabilities{0.3, 0.2};
        std::istringstream in(run_jsonl(ds, opt));
        auto records = sim::read_jsonl(in);
        ASSERT_FALSE(records.empty());
        std::map<std::string, int> tasks;
        for (const auto& r : records) {
            tasks[r["task"].get<std::string>()]++;
            EXPECT_EQ(r["rubric"]["result"], "success") << r.dump(2);
        }
        EXPECT_EQ(tasks["intake"], static_cast<int>(ds.patients.size()));
        EXPECT_EQ(tasks["scheduling"], static_cast<int>(ds.patients.size()));
        EXPECT_GT(tasks["reschedule"] + tasks["cancel"], 0);
    }
}

TEST(Simulation, OracleExtractionMatchesProfile) {
    const auto ds = primary_hospital(3);
    sim::SimOptions opt;
    std::istringstream in(run_jsonl(ds, opt));
    for (const auto& r : sim::read_jsonl(in)) {
        if (r["task"] != "intake") continue;
        const auto* p = [&]() -> const PatientProfile* {
            for (const auto& q : ds.patients) {
                if (q.id == r["patient_id"]) return &q;
            }
            return nullptr;
        }();
        ASSERT_NE(p, nullptr);
        const auto& e = r["outputs"]["extraction"];
        EXPECT_EQ(e["name"], p->name);
        EXPECT_EQ(e["gender"], p->gender);
        EXPECT_EQ(e["phone_number"], p->telecom);
        EXPECT_EQ(e["personal_id"], p->personal_id);
        EXPECT_EQ(e["address"], p->address);
        EXPECT_EQ(e["department"], p->department);
    }
}

TEST(Simulation, TranscriptsAreDeterministic) {
    const auto ds = primary_hospital(5);
    sim::SimOptions opt;
    opt.seed = 99;
    EXPECT_EQ(run_jsonl(ds, opt), run_jsonl(ds, opt));
    sim::SimOptions other = opt;
    other.seed = 100;
    EXPECT_NE(run_jsonl(ds, opt), run_jsonl(ds, other));
}

TEST(Simulation, ParallelRunKeepsInputOrder) {
    static const auto kb = synth::load_disease_kb(synth::default_disease_kb_path());
    auto cfg = synth::level_preset("primary", 4);
    cfg.hospital_n = 2;
    auto datasets = synth::synthesize(cfg, kb);
    sim::SimOptions opt;
    auto stores = [](const synth::HospitalDataset&) { return std::make_unique<fhir::MemoryStore>(); };
    auto serial = sim::run_hospitals(datasets, stores, sim::scripted_agents, opt, 1);
    auto parallel = sim::run_hospitals(datasets, stores, sim::scripted_agents, opt, 2);
    std::ostringstream a, b;
    sim::write_jsonl(a, serial);
    sim::write_jsonl(b, parallel);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(serial[0].hospital, datasets[0].hospital_name);
}

TEST(Simulation, EventProbabilitiesByLevel) {
    EXPECT_DOUBLE_EQ(sim::event_probabilities_for("tertiary").reschedule, 0.15);
    EXPECT_DOUBLE_EQ(sim::event_probabilities_for("tertiary").cancel, 0.10);
    EXPECT_DOUBLE_EQ(sim::event_probabilities_for("secondary").reschedule, 0.10);
    EXPECT_DOUBLE_EQ(sim::event_probabilities_for("primary").cancel, 0.05);
}

TEST(Simulation, OracleReportIsZeroFilled) {
    const auto ds = primary_hospital(8);
    sim::SimOptions opt;
    std::istringstream in(run_jsonl(ds, opt));
    auto rep = report::build(sim::read_jsonl(in));
    EXPECT_TRUE(report::reconcile(rep).empty());
    ASSERT_EQ(rep.intake.size(), 1u);
    EXPECT_EQ(rep.intake[0].errors, 0);
    EXPECT_EQ(rep.scheduling[0].errors, 0);
    EXPECT_EQ(rep.success[0]["Intake"], "100.0 ± 0.0");
    EXPECT_EQ(rep.success[0]["Scheduling"], "100.0 ± 0.0");
}
