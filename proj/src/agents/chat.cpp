#include "hadmin/agents/chat.hpp"

#include "hadmin/core/errors.hpp"

#include <httplib.h>

#include <cstdlib>

namespace hadmin::agents {

namespace {

nlohmann::json function_tool(const char* name, const char* description,
                             const std::vector<std::pair<const char*, const char*>>& params) {
    nlohmann::json props = nlohmann::json::object();
    nlohmann::json required = nlohmann::json::array();
    for (const auto& [p, desc] : params) {
        props[p] = {{"type", "string"}, {"description", desc}};
        required.push_back(p);
    }
    return {{"type", "function"},
            {"function",
             {{"name", name},
              {"description", description},
              {"parameters", {{"type", "object"}, {"properties", props}, {"required", required}}}}}};
}

} // namespace

const nlohmann::json& staff_tool_schema() {
    static const nlohmann::json tools = nlohmann::json::array({
        function_tool("get_all_time_tool",
                      "Earliest available appointment among all doctors of the patient's department.", {}),
        function_tool("date_filter_tool", "Earliest available appointment on or after the given date.",
                      {{"date", "Earliest acceptable date, YYYY-MM-DD."}}),
        function_tool("physician_filter_tool", "Earliest available appointment with the named doctor.",
                      {{"preferred_doctor", "Full doctor name, e.g. Dr. Jane Doe."}}),
        function_tool("reschedule_tool", "Move an existing appointment to an earlier time.",
                      {{"patient_name", "Patient's full name."},
                       {"doctor_name", "Attending doctor's full name."},
                       {"date", "Original appointment date, YYYY-MM-DD."}}),
        function_tool("cancel_tool", "Cancel an existing appointment.",
                      {{"patient_name", "Patient's full name."},
                       {"doctor_name", "Attending doctor's full name."},
                       {"date", "Appointment date, YYYY-MM-DD."}}),
    });
    return tools;
}

HttpChatBackend::HttpChatBackend(ChatConfig config) : cfg_(std::move(config)) {
    if (cfg_.endpoint.empty()) throw ConfigError("chat backend needs an endpoint URL");
    if (cfg_.model.empty()) throw ConfigError("chat backend needs a model name");
    if (const char* k = std::getenv(cfg_.api_key_env.c_str())) key_ = k;
}

nlohmann::json HttpChatBackend::request_body(const std::string& system, const std::vector<ChatMessage>& history,
                                             const nlohmann::json* tools) const {
    nlohmann::json msgs = nlohmann::json::array();
    msgs.push_back({{"role", "system"}, {"content", system}});
    for (const auto& m : history) msgs.push_back({{"role", m.role}, {"content", m.content}});
    nlohmann::json body = {{"model", cfg_.model}, {"messages", msgs}};
    if (tools) body["tools"] = *tools;
    if (!cfg_.reasoning_effort.empty()) body["reasoning_effort"] = cfg_.reasoning_effort;
    return body;
}

StaffReply HttpChatBackend::parse_response(const nlohmann::json& response) {
    try {
        const auto& msg = response.at("choices").at(0).at("message");
        StaffReply r;
        if (msg.contains("content") && msg["content"].is_string()) r.text = msg["content"].get<std::string>();
        if (msg.contains("tool_calls") && msg["tool_calls"].is_array()) {
            for (const auto& tc : msg["tool_calls"]) {
                ToolCall call;
                call.tool = tc.at("function").at("name").get<std::string>();
                std::string raw = tc.at("function").value("arguments", std::string("{}"));
                nlohmann::json args = nlohmann::json::parse(raw.empty() ? std::string("{}") : raw);
                for (const auto& [k, v] : args.items()) call.args.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
                r.calls.push_back(std::move(call));
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
}

nlohmann::json HttpChatBackend::post(const nlohmann::json& body) {
    auto scheme = cfg_.endpoint.find("://");
    if (scheme == std::string::npos) throw ConfigError("chat endpoint needs a scheme: '" + cfg_.endpoint + "'");
    auto slash = cfg_.endpoint.find('/', scheme + 3);
    std::string host = cfg_.endpoint.substr(0, slash);
    std::string path = slash == std::string::npos ? std::string() : cfg_.endpoint.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
    path += "/chat/completions";

    httplib::Client client(host);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    client.set_write_timeout(cfg_.timeout);
    httplib::Headers headers;
    if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);
    const std::string payload = body.dump();
    httplib::Result r;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        r = client.Post(path, headers, payload, "application/json");
        if (r && r->status != 429 && r->status < 500) break;
    }
    if (!r) throw BackendError("chat endpoint unreachable: " + httplib::to_string(r.error()));
    if (r->status >= 300) {
        throw BackendError("chat endpoint returned HTTP " + std::to_string(r->status) + ": " + r->body.substr(0, 300));
    }
    try {
        return nlohmann::json::parse(r->body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("chat endpoint returned non-JSON: ") + e.what());
    }
}

std::string HttpChatBackend::complete(const std::string& system, const std::vector<ChatMessage>& history) {
    return parse_response(post(request_body(system, history, nullptr))).text;
}

StaffReply HttpChatBackend::complete_with_tools(const std::string& system, const std::vector<ChatMessage>& history,
                                                const nlohmann::json& tools) {
    return parse_response(post(request_body(system, history, &tools)));
}

std::vector<ChatMessage> history_for(const Transcript& t, Speaker self) {
    std::vector<ChatMessage> out;
    for (const auto& turn : t.turns) out.push_back({turn.speaker == self ? "assistant" : "user", turn.text});
    return out;
}

// ---------------------------------------------------------------------------
// Chat-model agents
// ---------------------------------------------------------------------------

std::string LlmPatient::intake_reply(const IntakeContext& ctx, const Transcript& t) {
    return backend_.complete(intake_patient_prompt(lib_, *ctx.patient), history_for(t, Speaker::patient));
}

std::string LlmPatient::state_preference(const PreferenceContext& ctx, const Transcript& t) {
    std::string system = ctx.rejected ? schedule_reject_prompt(lib_, *ctx.patient, ctx.preference, *ctx.rejected)
                                      : schedule_patient_prompt(lib_, *ctx.patient, ctx.preference);
    return backend_.complete(system, history_for(t, Speaker::patient));
}

std::string LlmPatient::event_reply(const EventContext& ctx, const Transcript& t) {
    return backend_.complete(event_patient_prompt(lib_, ctx.kind == TaskKind::cancel, ctx.patient_name,
                                                  ctx.doctor_name, ctx.date, ctx.start_minute),
                             history_for(t, Speaker::patient));
}

std::string LlmStaff::intake_turn(const IntakeContext& ctx, const Transcript& t) {
    return backend_.complete(intake_staff_prompt(lib_, ctx.departments, ctx.round, ctx.max_rounds),
                             history_for(t, Speaker::staff));
}

std::string LlmStaff::extract(const IntakeContext& ctx, const Transcript& t) {
    auto history = history_for(t, Speaker::staff);
    history.push_back({"user", lib_.text("intake_extract")});
    return backend_.complete(intake_staff_prompt(lib_, ctx.departments, ctx.round, ctx.max_rounds), history);
}

StaffReply LlmStaff::dispatch(const Transcript& t) {
    return backend_.complete_with_tools(lib_.text("staff_tools"), history_for(t, Speaker::staff),
                                        staff_tool_schema());
}

std::string LlmStaff::reason(const ReasoningContext& ctx) {
    return backend_.complete(ctx.system_prompt, {{"user", ctx.user_prompt}});
}

} // namespace hadmin::agents
