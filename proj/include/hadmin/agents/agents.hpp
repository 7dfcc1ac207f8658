#pragma once

#include "hadmin/agents/dialogue.hpp"
#include "hadmin/core/model.hpp"
#include "hadmin/core/time.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hadmin::fhir {
class Hospital;
}

namespace hadmin::agents {

struct IntakeContext {
    const PatientProfile* patient = nullptr;
    std::vector<std::string> departments;  // hospital departments in option order
    int round = 1;
    int max_rounds = 5;
};

struct PreferenceContext {
    const PatientProfile* patient = nullptr;
    std::string department;
    Preference preference = Preference::asap;
    std::optional<Preference> rejected;  // set when turning down a proposal
};

struct EventContext {
    TaskKind kind = TaskKind::reschedule;
    std::string patient_name;
    std::string doctor_name;
    std::string department;
    Date date;
    int start_minute = 0;
};

/// Everything the reasoning fallback sees. The prompts are what a chat model gets; the
/// structured fields let an oracle answer without parsing them back.
struct ReasoningContext {
    std::string system_prompt;
    std::string user_prompt;
    std::string utterance;
    bool rescheduling = false;
    std::string department;
    TimePoint now;
    fhir::Hospital* hospital = nullptr;
    std::optional<std::string> only_physician_id;
    std::optional<TimePoint> before;
    std::string ignore_appointment;
};

class PatientAgent {
public:
    virtual ~PatientAgent() = default;
    virtual std::string intake_reply(const IntakeContext& ctx, const Transcript& t) = 0;
    /// States the active preference; when `ctx.rejected` is set, turns down the last proposal first.
    virtual std::string state_preference(const PreferenceContext& ctx, const Transcript& t) = 0;
    virtual std::string event_reply(const EventContext& ctx, const Transcript& t) = 0;
};

class StaffAgent {
public:
    virtual ~StaffAgent() = default;
    virtual std::string intake_turn(const IntakeContext& ctx, const Transcript& t) = 0;
    /// Raw extraction output, expected to hold the six-key JSON object.
    virtual std::string extract(const IntakeContext& ctx, const Transcript& t) = 0;
    /// Tool-calling turn for scheduling and events.
    virtual StaffReply dispatch(const Transcript& t) = 0;
    /// Raw reasoning-mode answer, expected to hold {"schedule": {...}}.
    virtual std::string reason(const ReasoningContext& ctx) = 0;
};

/// Knobs for the scripted patient used to force failure paths.
struct ScriptedPatientOptions {
    bool withhold_demographics = false;
    bool withhold_doctor = false;
    bool withhold_name = false;
};

/// Answers truthfully and formulaically from the profile.
class ScriptedPatient : public PatientAgent {
public:
    explicit ScriptedPatient(ScriptedPatientOptions options = {}) : opt_(options) {}
    std::string intake_reply(const IntakeContext& ctx, const Transcript& t) override;
    std::string state_preference(const PreferenceContext& ctx, const Transcript& t) override;
    std::string event_reply(const EventContext& ctx, const Transcript& t) override;

private:
    ScriptedPatientOptions opt_;
};

/// Rubric-optimal staff: demographics in round 1, history in round 2, decision from the
/// gold labels in round 3; tool selection from the latest utterance; reasoning answers
/// computed by the brute-force scheduler.
class ScriptedStaff : public StaffAgent {
public:
    std::string intake_turn(const IntakeContext& ctx, const Transcript& t) override;
    std::string extract(const IntakeContext& ctx, const Transcript& t) override;
    StaffReply dispatch(const Transcript& t) override;
    std::string reason(const ReasoningContext& ctx) override;
};

/// Fixed utterances shared by the workflows and the scripted agents.
namespace lines {
inline constexpr std::string_view kGreeting = "Hello, how can I help you?";
inline constexpr std::string_view kAskPreference = "How would you like to schedule the appointment?";
inline constexpr std::string_view kEventGreeting = "How can I help you?";
inline constexpr std::string_view kThanks = "Thank you.";
inline constexpr std::string_view kNoTimes = "There are no available times.";
inline constexpr std::string_view kChangedMind = "No, I changed my mind. ";
inline constexpr std::string_view kAskAgain = "Could you tell me a little more about what you need?";
} // namespace lines

/// Patient-side statement of a preference, e.g. "I prefer an appointment with Dr. X."
std::string preference_statement(const PatientProfile& p, Preference pref);

/// Intent read from free text: doctor names ("Dr. First Last"), ISO dates, a self-introduced
/// patient name, and cancel / move / earliest cues.
struct UtteranceIntent {
    std::optional<std::string> doctor;
    std::optional<std::string> date;
    std::optional<std::string> patient_name;
    bool cancel = false;
    bool move = false;
    bool earliest = false;
};
UtteranceIntent read_intent(std::string_view text);

} // namespace hadmin::agents
