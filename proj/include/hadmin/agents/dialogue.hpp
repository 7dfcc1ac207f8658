#pragma once

#include "hadmin/core/model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace hadmin::agents {

enum class Speaker { staff, patient };
enum class TaskKind { intake, scheduling, reschedule, cancel };

std::string_view to_string(Speaker s);
std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

struct Turn {
    Speaker speaker = Speaker::staff;
    std::string text;
    int round = 0;
};

/// The five staff tools.
inline constexpr std::string_view kGetAllTimeTool = "get_all_time_tool";
inline constexpr std::string_view kDateFilterTool = "date_filter_tool";
inline constexpr std::string_view kPhysicianFilterTool = "physician_filter_tool";
inline constexpr std::string_view kRescheduleTool = "reschedule_tool";
inline constexpr std::string_view kCancelTool = "cancel_tool";

bool is_known_tool(std::string_view name);
/// Arguments a tool cannot run without.
std::vector<std::string> required_args(std::string_view tool);

struct ToolCall {
    std::string tool;
    std::vector<std::pair<std::string, std::string>> args;

    /// Empty string when absent.
    std::string arg(std::string_view name) const;
    std::vector<std::string> missing_args() const;
    /// "[TOOL CALL] physician_filter_tool | preferred_doctor=Dr. Buford Kol"
    std::string text() const;
    bool operator==(const ToolCall&) const = default;
};

/// Parses the bracketed text form produced by ToolCall::text().
std::optional<ToolCall> parse_tool_call_text(std::string_view line);

struct ToolEvent {
    int round = 0;
    ToolCall call;
    bool ok = true;
    std::string result;
};

/// One finished task: ordered turns, tool events and free-form protocol notes.
struct Transcript {
    TaskKind kind = TaskKind::intake;
    std::vector<Turn> turns;
    std::vector<ToolEvent> tools;
    std::vector<std::string> notes;
    int rounds = 0;

    void say(Speaker who, std::string text, int round) { turns.push_back({who, std::move(text), round}); }
    const Turn* last(Speaker who) const;
    std::vector<std::string> utterances(Speaker who) const;
};

nlohmann::ordered_json to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

/// Raw staff output in tool-calling mode: free text and/or native tool calls.
struct StaffReply {
    std::string text;
    std::vector<ToolCall> calls;
};

struct Clarify {
    std::string question;
};
struct NoTool {};

using Dispatch = std::variant<ToolCall, Clarify, NoTool>;

/// Classifies a staff reply. Native calls win; a bracketed call in the text counts as a call;
/// the literal "NO TOOL" yields NoTool; any other text is a clarifying question. Extra calls
/// are noted in `notes` and dropped. A call missing required arguments becomes a Clarify
/// asking for them.
Dispatch interpret(const StaffReply& reply, std::vector<std::string>* notes = nullptr);

/// Fields extracted after intake, "none" when unavailable.
struct ExtractedPatientInfo {
    std::string name;
    std::string gender;
    std::string phone_number;
    std::string personal_id;
    std::string address;
    std::string department;

    bool operator==(const ExtractedPatientInfo&) const = default;
};

nlohmann::ordered_json to_json(const ExtractedPatientInfo& e);
/// Accepts raw model output: the first JSON object in the text (code fences allowed). Throws
/// FormatError unless the object has exactly the six string keys.
ExtractedPatientInfo parse_extraction(std::string_view text);

/// The department named by an `Answer: <n>. <department>` line, if any. When the name does
/// not match a listed department the number selects it.
std::optional<std::string> find_answer_department(std::string_view text, const std::vector<std::string>& departments);
/// Round of the first staff turn carrying an Answer line.
std::optional<int> answer_round(const Transcript& t, const std::vector<std::string>& departments);

/// Maps a loosely written department ("Infectious Diseases", "pulmonary", "endocrinology")
/// onto one of `departments`; empty when nothing matches.
std::string normalize_department(std::string_view text, const std::vector<std::string>& departments);

/// Fallback reasoning answer: {"schedule": {"<Dr. Name>": {"date", "start", "end"}}}.
struct RawProposal {
    std::vector<std::string> physicians;  // every key of "schedule"
    std::string date;
    double start = 0.0;
    double end = 0.0;
};

/// Parses the reasoning answer. An empty "schedule" object means no availability and yields
/// nullopt. Throws FormatError on anything else that is malformed.
std::optional<RawProposal> parse_schedule_answer(std::string_view text);

} // namespace hadmin::agents
