#pragma once

#include "hadmin/agents/agents.hpp"
#include "hadmin/agents/prompts.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace hadmin::agents {

struct ChatMessage {
    std::string role;  // "user" or "assistant"
    std::string content;
};

/// A system-prompt + message-history completion service.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const std::string& system, const std::vector<ChatMessage>& history) = 0;
    /// Completion with the staff tool set offered; returns text and/or tool calls.
    virtual StaffReply complete_with_tools(const std::string& system, const std::vector<ChatMessage>& history,
                                           const nlohmann::json& tools) = 0;
};

/// Function definitions for the five staff tools, in the OpenAI "tools" layout.
const nlohmann::json& staff_tool_schema();

struct ChatConfig {
    std::string endpoint;        // base URL, e.g. https://api.openai.com/v1
    std::string model;           // e.g. gpt-5-mini
    std::string api_key_env = "HADMIN_API_KEY";
    std::string reasoning_effort;  // forwarded when non-empty
    std::chrono::seconds timeout{120};
    int retries = 2;
};

/// OpenAI-compatible /chat/completions client. Credentials come from the environment
/// variable named in the config. Throws BackendError on transport or protocol failure.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(ChatConfig config);
    std::string complete(const std::string& system, const std::vector<ChatMessage>& history) override;
    StaffReply complete_with_tools(const std::string& system, const std::vector<ChatMessage>& history,
                                   const nlohmann::json& tools) override;

    /// Request body for one call; exposed for tests.
    nlohmann::json request_body(const std::string& system, const std::vector<ChatMessage>& history,
                                const nlohmann::json* tools) const;
    /// Parses a completion response into text and tool calls.
    static StaffReply parse_response(const nlohmann::json& response);

private:
    nlohmann::json post(const nlohmann::json& body);

    ChatConfig cfg_;
    std::string key_;
};

/// Converts a transcript into chat history from one speaker's point of view: its own turns
/// become "assistant", the other side's "user".
std::vector<ChatMessage> history_for(const Transcript& t, Speaker self);

/// Patient agent driven by a chat model with the persona prompts.
class LlmPatient : public PatientAgent {
public:
    LlmPatient(ChatBackend& backend, const PromptLibrary& lib) : backend_(backend), lib_(lib) {}
    std::string intake_reply(const IntakeContext& ctx, const Transcript& t) override;
    std::string state_preference(const PreferenceContext& ctx, const Transcript& t) override;
    std::string event_reply(const EventContext& ctx, const Transcript& t) override;

private:
    ChatBackend& backend_;
    const PromptLibrary& lib_;
};

/// Staff agent driven by a chat model with the staff prompts and tool schema.
class LlmStaff : public StaffAgent {
public:
    LlmStaff(ChatBackend& backend, const PromptLibrary& lib) : backend_(backend), lib_(lib) {}
    std::string intake_turn(const IntakeContext& ctx, const Transcript& t) override;
    std::string extract(const IntakeContext& ctx, const Transcript& t) override;
    StaffReply dispatch(const Transcript& t) override;
    std::string reason(const ReasoningContext& ctx) override;

private:
    ChatBackend& backend_;
    const PromptLibrary& lib_;
};

/// Local stand-in for a chat model: reads the rendered prompts and answers with the
/// scripted policies. Used to exercise the chat plumbing without credentials.
class PromptEchoModel {
public:
    /// Answers one OpenAI-style chat completion request body with a response body.
    static nlohmann::json answer(const nlohmann::json& request);
};

/// Serves PromptEchoModel on <base>/chat/completions from a background thread.
class StubChatServer {
public:
    StubChatServer();
    ~StubChatServer();
    StubChatServer(const StubChatServer&) = delete;
    StubChatServer& operator=(const StubChatServer&) = delete;

    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    std::string base_url() const;
    std::size_t request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace hadmin::agents
