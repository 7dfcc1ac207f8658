#pragma once

#include "hadmin/agents/chat.hpp"
#include "hadmin/agents/workflows.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/rubric/rubric.hpp"
#include "hadmin/synth/dataset.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace hadmin::sim {

struct EventProbabilities {
    double reschedule = 0.10;
    double cancel = 0.05;
};

/// Default reschedule/cancel probabilities for a hospital level.
EventProbabilities event_probabilities_for(std::string_view level);

struct SimOptions {
    agents::WorkflowOptions workflow;
    int init_offset_days = 1;
    std::optional<EventProbabilities> events;  // level default when unset
    std::uint64_t seed = 0;
    std::string model = "oracle";  // label written to every record
};

/// A staff / patient pair used for one hospital run.
struct AgentPair {
    std::unique_ptr<agents::StaffAgent> staff;
    std::unique_ptr<agents::PatientAgent> patient;
    std::vector<std::shared_ptr<void>> owned;  // backends the agents refer to
};
using AgentFactory = std::function<AgentPair()>;
AgentPair scripted_agents();
/// Chat-model staff and patient sharing one HTTP backend.
AgentPair llm_agents(const agents::ChatConfig& config);

struct HospitalRun {
    std::string hospital;
    std::string level;
    std::vector<nlohmann::ordered_json> records;  // one per task, in execution order
    int patients = 0;
    int bookings = 0;
    int waiting_list = 0;
};

/// Simulates every patient of one hospital: arrivals sampled over the clock window, then
/// intake, scheduling and an optional reschedule/cancel event per patient. The store must
/// be empty; the dataset is uploaded into it first.
HospitalRun run_hospital(const synth::HospitalDataset& ds, fhir::ResourceStore& store, AgentPair& agents,
                         const SimOptions& options);

using StoreFactory = std::function<std::unique_ptr<fhir::ResourceStore>(const synth::HospitalDataset&)>;

/// Runs several hospitals on up to `jobs` threads. Results keep the input order.
std::vector<HospitalRun> run_hospitals(const std::vector<synth::HospitalDataset>& datasets,
                                       const StoreFactory& stores, const AgentFactory& agents,
                                       const SimOptions& options, int jobs = 1);

/// One JSON document per line, keys in insertion order.
void write_jsonl(std::ostream& out, const std::vector<HospitalRun>& runs);
std::vector<nlohmann::json> read_jsonl(std::istream& in);

} // namespace hadmin::sim
