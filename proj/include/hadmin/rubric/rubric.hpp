#pragma once

#include "hadmin/agents/workflows.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/scheduler/scheduler.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hadmin::rubric {

enum class Code { IF, IS, ID, IPI, IDPI, PC, IVS, WD, TC, IP, IDT, NET, FI };

std::string_view to_string(Code c);
Code parse_code(std::string_view s);
const std::vector<Code>& all_codes();

/// Success, or the first failing criterion of the task's chain.
struct Outcome {
    agents::TaskKind kind = agents::TaskKind::intake;
    std::optional<Code> code;
    std::string criterion;  // "C1-2", "C2-7", "C3-1"; empty on success
    std::string detail;

    bool success() const { return !code.has_value(); }
    bool operator==(const Outcome&) const = default;
};

Outcome pass(agents::TaskKind kind);
Outcome fail(agents::TaskKind kind, Code code, std::string criterion, std::string detail);

nlohmann::ordered_json to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Intake
// ---------------------------------------------------------------------------

/// Whitespace trimmed and collapsed, case folded. Phone numbers and personal IDs keep digits only.
std::string normalize_field(std::string_view key, std::string_view value);

/// Department the staff settled on: the extracted one when it parses, else the Answer line.
std::string recommended_department(const agents::IntakeResult& r, const std::vector<std::string>& departments);

/// C1-1 format, C1-2 completeness, C1-3 department and extraction.
Outcome evaluate_intake(const agents::IntakeResult& r, const PatientProfile& gold,
                        const std::vector<std::string>& departments);

/// Department check without the earlier stages, for reporting errors masked by IF or IS.
bool department_wrong_unmasked(const agents::IntakeResult& r, const PatientProfile& gold,
                               const std::vector<std::string>& departments);

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

struct SchedulingCheck {
    bool completed = true;
    bool format_ok = true;
    bool claimed_none = false;
    std::optional<agents::RawProposal> proposal;
    scheduler::SchedulingRequest request;  // ground truth, including any narrowing
};

/// C2-1 .. C2-8 against the hospital's current state. The state must not yet contain the
/// proposal's own booking unless `request.ignore_appointment` names it.
Outcome evaluate_scheduling(const SchedulingCheck& c, fhir::Hospital& hospital, TimePoint now,
                            agents::TaskKind kind = agents::TaskKind::scheduling);

SchedulingCheck check_of(const agents::SchedulingResult& r);

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// C3-1 identification, then the cancel or reschedule verification. Runs after the event
/// has been applied.
Outcome evaluate_event(const agents::EventResult& r, fhir::Hospital& hospital, TimePoint now);

} // namespace hadmin::rubric
