#pragma once

#include "hadmin/agents/agents.hpp"
#include "hadmin/agents/prompts.hpp"
#include "hadmin/core/rng.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/scheduler/scheduler.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hadmin::agents {

enum class SchedulingMode { tools, reasoning };
std::string_view to_string(SchedulingMode m);
SchedulingMode parse_scheduling_mode(std::string_view s);

struct WorkflowOptions {
    int max_rounds = 5;
    double reject_prob = 0.3;
    SchedulingMode mode = SchedulingMode::tools;
};

/// One draw of the proposal-rejection coin.
bool draw_rejection(Rng& rng, double reject_prob);

// ---------------------------------------------------------------------------
// Intake
// ---------------------------------------------------------------------------

struct IntakeResult {
    Transcript transcript;
    std::string raw_extraction;
    std::optional<ExtractedPatientInfo> extracted;  // nullopt: extraction unparseable
    std::string format_error;
    std::optional<std::string> answer_department;  // from the Answer line
    std::optional<int> decision_round;
};

IntakeResult run_intake(const PatientProfile& patient, const std::vector<std::string>& departments, StaffAgent& staff,
                        PatientAgent& patient_agent, const WorkflowOptions& options = {});

/// Department used for scheduling: the extracted one when it names a hospital department,
/// then the Answer line, then the patient's attending department.
std::string scheduling_department(const IntakeResult& intake, const PatientProfile& patient,
                                  const std::vector<std::string>& departments);

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

/// Python-style rendering of a raw proposal, as spoken by the staff.
std::string raw_proposal_text(const RawProposal& p);
RawProposal to_raw(const scheduler::Proposal& p);
/// Grid proposal for a raw one. nullopt when the physician, date or times cannot be placed.
std::optional<scheduler::Proposal> to_grid(const RawProposal& p, const fhir::Hospital& hospital);

/// The tool that matches a preference.
std::string_view tool_for(Preference p);

/// Prompt pair for the reasoning fallback. Doctor tables list busy intervals per working date
/// for every physician of the department (or only `only_physician_id`).
std::pair<std::string, std::string> reasoning_prompts(const fhir::Hospital& hospital, const std::string& department,
                                                      const std::string& utterance, TimePoint now, bool rescheduling,
                                                      const std::optional<std::string>& only_physician_id = {},
                                                      const std::string& ignore_appointment = {},
                                                      const PromptLibrary& lib = PromptLibrary::standard());

struct SchedulingResult {
    Transcript transcript;
    std::string department;
    bool completed = false;      // ended with an accepted proposal or a no-availability answer
    bool format_ok = true;
    std::string format_error;
    bool claimed_none = false;
    std::optional<RawProposal> proposal;  // the accepted one
    Preference final_preference = Preference::asap;
    bool rejected = false;
    bool used_fallback = false;          // any reasoning call in the task
    bool final_from_fallback = false;    // the accepted proposal came from reasoning
    bool wrong_tool = false;             // a tool not matching the stated preference was called
    scheduler::SchedulingRequest request;  // ground-truth request for the final preference
    std::optional<std::string> appointment_id;
    std::string booking_error;
};

/// Ground-truth request for evaluating a new-appointment proposal.
scheduler::SchedulingRequest ground_truth_request(const PatientProfile& patient, const std::string& department,
                                                  Preference pref, TimePoint now);

using SchedulingHook = std::function<void(const SchedulingResult&)>;

/// Runs the scheduling dialogue and books the accepted proposal when it fits the grid.
/// `before_commit` sees the result before anything is written.
SchedulingResult run_scheduling(const PatientProfile& patient, const std::string& department,
                                fhir::Hospital& hospital, TimePoint now, StaffAgent& staff,
                                PatientAgent& patient_agent, Rng& rng, const WorkflowOptions& options = {},
                                const SchedulingHook& before_commit = {});

// ---------------------------------------------------------------------------
// Reschedule / cancel events
// ---------------------------------------------------------------------------

struct EventResult {
    Transcript transcript;
    TaskKind kind = TaskKind::reschedule;
    std::string target_id;
    std::optional<std::string> retrieved_id;
    std::string action;  // tool that acted on the retrieved appointment
    // Reschedule
    bool format_ok = true;
    std::string format_error;
    bool claimed_none = false;
    std::optional<RawProposal> proposal;
    bool moved = false;
    bool waitlisted = false;
    bool used_fallback = false;
    std::string booking_error;
    scheduler::SchedulingRequest request;
    // Cancel
    std::vector<scheduler::Reassignment> reassignments;
};

/// Event draw after a completed new-appointment task: one uniform number split into
/// [0, p_reschedule) -> reschedule, [p_reschedule, p_reschedule + p_cancel) -> cancel.
std::optional<TaskKind> draw_event(Rng& rng, double p_reschedule, double p_cancel);

/// Event dialogue against an existing appointment.
EventResult run_event(TaskKind kind, const std::string& target_appointment_id, fhir::Hospital& hospital,
                      TimePoint now, StaffAgent& staff, PatientAgent& patient_agent,
                      const WorkflowOptions& options = {});

} // namespace hadmin::agents
