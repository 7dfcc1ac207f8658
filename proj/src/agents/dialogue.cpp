#include "hadmin/agents/dialogue.hpp"

#include "hadmin/core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace hadmin::agents {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s, std::string_view junk = " \t\r\n") {
    auto b = s.find_first_not_of(junk);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(junk);
    return std::string(s.substr(b, e - b + 1));
}

std::string arg_label(std::string_view name) {
    if (name == "patient_name") return "patient's full name";
    if (name == "doctor_name") return "doctor's full name";
    if (name == "preferred_doctor") return "preferred doctor's full name";
    if (name == "date") return "appointment date (YYYY-MM-DD)";
    return std::string(name);
}

// Outermost {...} span of the text, tolerating code fences and prose around it.
std::string json_span(std::string_view text) {
    auto b = text.find('{');
    auto e = text.rfind('}');
    if (b == std::string_view::npos || e == std::string_view::npos || e < b) {
        throw FormatError("no JSON object in model output");
    }
    return std::string(text.substr(b, e - b + 1));
}

} // namespace

std::string_view to_string(Speaker s) { return s == Speaker::staff ? "staff" : "patient"; }

std::string_view to_string(TaskKind k) {
    switch (k) {
    case TaskKind::intake: return "intake";
    case TaskKind::scheduling: return "scheduling";
    case TaskKind::reschedule: return "reschedule";
    case TaskKind::cancel: return "cancel";
    }
    return "intake";
}

TaskKind parse_task_kind(std::string_view s) {
    for (TaskKind k : {TaskKind::intake, TaskKind::scheduling, TaskKind::reschedule, TaskKind::cancel}) {
        if (to_string(k) == s) return k;
    }
    throw FormatError("unknown task kind '" + std::string(s) + "'");
}

bool is_known_tool(std::string_view name) {
    return name == kGetAllTimeTool || name == kDateFilterTool || name == kPhysicianFilterTool ||
           name == kRescheduleTool || name == kCancelTool;
}

std::vector<std::string> required_args(std::string_view tool) {
    if (tool == kDateFilterTool) return {"date"};
    if (tool == kPhysicianFilterTool) return {"preferred_doctor"};
    if (tool == kRescheduleTool || tool == kCancelTool) return {"patient_name", "doctor_name", "date"};
    return {};
}

std::string ToolCall::arg(std::string_view name) const {
    for (const auto& [k, v] : args) {
        if (k == name) return v;
    }
    return {};
}

std::vector<std::string> ToolCall::missing_args() const {
    std::vector<std::string> out;
    for (const auto& name : required_args(tool)) {
        if (trim(arg(name)).empty()) out.push_back(name);
    }
    return out;
}

std::string ToolCall::text() const {
    std::string out = "[TOOL CALL] " + tool;
    if (!args.empty()) {
        out += " | ";
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) out += ", ";
            out += args[i].first + "=" + args[i].second;
        }
    }
    return out;
}

std::optional<ToolCall> parse_tool_call_text(std::string_view line) {
    static const std::string_view tag = "[TOOL CALL]";
    auto at = line.find(tag);
    if (at == std::string_view::npos) return std::nullopt;
    std::string rest = trim(line.substr(at + tag.size()));
    auto eol = rest.find('\n');
    if (eol != std::string::npos) rest = trim(rest.substr(0, eol));
    ToolCall call;
    auto bar = rest.find('|');
    call.tool = trim(rest.substr(0, bar));
    if (call.tool.empty()) return std::nullopt;
    if (bar != std::string::npos) {
        // Values may contain commas (addresses never appear here, names and dates do not), so
        // split on ", key=" boundaries only.
        std::string body = rest.substr(bar + 1);
        static const std::regex key_re(R"((?:^|,)\s*([A-Za-z_]+)=)");
        std::vector<std::pair<std::string, std::size_t>> keys;  // key, value start
        std::vector<std::size_t> cuts;
        for (auto it = std::sregex_iterator(body.begin(), body.end(), key_re); it != std::sregex_iterator(); ++it) {
            cuts.push_back(static_cast<std::size_t>(it->position(0)));
            keys.emplace_back((*it)[1].str(), static_cast<std::size_t>(it->position(0) + it->length(0)));
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
            std::size_t end = i + 1 < cuts.size() ? cuts[i + 1] : body.size();
            call.args.emplace_back(keys[i].first, trim(body.substr(keys[i].second, end - keys[i].second)));
        }
    }
    return call;
}

const Turn* Transcript::last(Speaker who) const {
    for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
        if (it->speaker == who) return &*it;
    }
    return nullptr;
}

std::vector<std::string> Transcript::utterances(Speaker who) const {
    std::vector<std::string> out;
    for (const auto& t : turns) {
        if (t.speaker == who) out.push_back(t.text);
    }
    return out;
}

nlohmann::ordered_json to_json(const Transcript& t) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(t.kind);
    j["rounds"] = t.rounds;
    j["turns"] = nlohmann::ordered_json::array();
    for (const auto& turn : t.turns) {
        j["turns"].push_back({{"round", turn.round}, {"speaker", to_string(turn.speaker)}, {"text", turn.text}});
    }
    j["tools"] = nlohmann::ordered_json::array();
    for (const auto& ev : t.tools) {
        nlohmann::ordered_json args = nlohmann::ordered_json::object();
        for (const auto& [k, v] : ev.call.args) args[k] = v;
        j["tools"].push_back({{"round", ev.round},
                              {"tool", ev.call.tool},
                              {"args", args},
                              {"text", ev.call.text()},
                              {"ok", ev.ok},
                              {"result", ev.result}});
    }
    j["notes"] = t.notes;
    return j;
}

Transcript transcript_from_json(const nlohmann::json& j) {
    try {
        Transcript t;
        t.kind = parse_task_kind(j.at("kind").get<std::string>());
        t.rounds = j.at("rounds").get<int>();
        for (const auto& turn : j.at("turns")) {
            t.turns.push_back({turn.at("speaker").get<std::string>() == "staff" ? Speaker::staff : Speaker::patient,
                               turn.at("text").get<std::string>(), turn.at("round").get<int>()});
        }
        for (const auto& ev : j.at("tools")) {
            ToolEvent e;
            e.round = ev.at("round").get<int>();
            e.call.tool = ev.at("tool").get<std::string>();
            for (const auto& [k, v] : ev.at("args").items()) e.call.args.emplace_back(k, v.get<std::string>());
            e.ok = ev.at("ok").get<bool>();
            e.result = ev.at("result").get<std::string>();
            t.tools.push_back(std::move(e));
        }
        if (j.contains("notes")) t.notes = j.at("notes").get<std::vector<std::string>>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("transcript: ") + e.what());
    }
}

Dispatch interpret(const StaffReply& reply, std::vector<std::string>* notes) {
    std::vector<ToolCall> calls = reply.calls;
    if (calls.empty()) {
        std::string_view text = reply.text;
        std::size_t pos = 0;
        while ((pos = text.find("[TOOL CALL]", pos)) != std::string_view::npos) {
            if (auto c = parse_tool_call_text(text.substr(pos))) calls.push_back(*c);
            pos += 11;
        }
    }
    if (!calls.empty()) {
        if (calls.size() > 1 && notes) {
            notes->push_back("protocol violation: " + std::to_string(calls.size()) +
                             " tool calls in one reply; using the first");
        }
        ToolCall call = calls.front();
        if (!is_known_tool(call.tool)) {
            if (notes) notes->push_back("unknown tool '" + call.tool + "'");
            return NoTool{};
        }
        auto missing = call.missing_args();
        if (!missing.empty()) {
            std::string q = "Please provide the ";
            for (std::size_t i = 0; i < missing.size(); ++i) {
                if (i) q += i + 1 == missing.size() ? " and the " : ", the ";
                q += arg_label(missing[i]);
            }
            return Clarify{q + "."};
        }
        return call;
    }
    std::string text = trim(reply.text);
    if (text.empty() || text.find("NO TOOL") != std::string::npos) return NoTool{};
    return Clarify{text};
}

nlohmann::ordered_json to_json(const ExtractedPatientInfo& e) {
    return {{"name", e.name},
            {"gender", e.gender},
            {"phone_number", e.phone_number},
            {"personal_id", e.personal_id},
            {"address", e.address},
            {"department", e.department}};
}

ExtractedPatientInfo parse_extraction(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_span(text));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("extraction is not valid JSON: ") + e.what());
    }
    static const std::vector<std::string> keys = {"name", "gender", "phone_number", "personal_id", "address",
                                                  "department"};
    if (!j.is_object() || j.size() != keys.size()) throw FormatError("extraction must have exactly six keys");
    std::vector<std::string> values;
    for (const auto& k : keys) {
        auto it = j.find(k);
        if (it == j.end() || !it->is_string()) throw FormatError("extraction key '" + k + "' missing or not a string");
        values.push_back(it->get<std::string>());
    }
    return {values[0], values[1], values[2], values[3], values[4], values[5]};
}

std::string normalize_department(std::string_view text, const std::vector<std::string>& departments) {
    std::string t = lower(trim(text, " \t\r\n.`*'\""));
    if (t.empty()) return {};
    for (const auto& d : departments) {
        if (lower(d) == t) return d;
    }
    for (const auto& d : departments) {
        std::string ld = lower(d);
        std::size_t start = 0;
        while (start <= ld.size()) {
            auto slash = ld.find('/', start);
            std::string part = ld.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
            if (part == t) return d;
            if (slash == std::string::npos) break;
            start = slash + 1;
        }
    }
    std::size_t best = 0;
    std::string pick;
    for (const auto& d : departments) {
        std::string ld = lower(d);
        std::size_t n = 0;
        while (n < ld.size() && n < t.size() && ld[n] == t[n]) ++n;
        if (n >= 5 && n > best) {
            best = n;
            pick = d;
        }
    }
    return pick;
}

std::optional<std::string> find_answer_department(std::string_view text, const std::vector<std::string>& departments) {
    static const std::regex re(R"(Answer:\s*(\d+)\s*\.\s*([^\n`*]*))");
    std::string s(text);
    std::smatch m;
    if (!std::regex_search(s, m, re)) return std::nullopt;
    std::string name = trim(m[2].str(), " \t\r.\"'");
    std::string norm = normalize_department(name, departments);
    if (!norm.empty()) return norm;
    int n = std::stoi(m[1].str());
    if (n >= 1 && n <= static_cast<int>(departments.size())) return departments[static_cast<std::size_t>(n - 1)];
    return lower(name);
}

std::optional<int> answer_round(const Transcript& t, const std::vector<std::string>& departments) {
    for (const auto& turn : t.turns) {
        if (turn.speaker == Speaker::staff && find_answer_department(turn.text, departments)) return turn.round;
    }
    return std::nullopt;
}

std::optional<RawProposal> parse_schedule_answer(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_span(text));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("schedule answer is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schedule") || !j["schedule"].is_object()) {
        throw FormatError("schedule answer lacks a 'schedule' object");
    }
    const auto& sched = j["schedule"];
    if (sched.empty()) return std::nullopt;
    RawProposal p;
    for (const auto& [name, _] : sched.items()) p.physicians.push_back(name);
    const auto& first = sched.begin().value();
    if (!first.is_object() || !first.contains("date") || !first["date"].is_string() || !first.contains("start") ||
        !first["start"].is_number() || !first.contains("end") || !first["end"].is_number()) {
        throw FormatError("schedule entry needs a string 'date' and numeric 'start' and 'end'");
    }
    p.date = first["date"].get<std::string>();
    p.start = first["start"].get<double>();
    p.end = first["end"].get<double>();
    return p;
}

} // namespace hadmin::agents
