#include "hadmin/agents/chat.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/synth/disease_kb.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <thread>

namespace hadmin::agents {

namespace {

using nlohmann::json;

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Value after "- <label>:" on its own line.
std::string field(const std::string& text, const std::string& label) {
    const std::string key = "- " + label + ":";
    auto pos = text.find(key);
    if (pos == std::string::npos) return {};
    pos += key.size();
    auto end = text.find('\n', pos);
    std::string v = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    auto b = v.find_first_not_of(' ');
    return b == std::string::npos ? std::string() : v.substr(b);
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto p = s.find(sep, start);
        out.push_back(s.substr(start, p == std::string::npos ? std::string::npos : p - start));
        if (p == std::string::npos) break;
        start = p + sep.size();
    }
    return out;
}

struct Request {
    std::string system;
    std::vector<std::pair<std::string, std::string>> messages;  // role, content (system excluded)
    bool tools = false;
};

Request read_request(const json& body) {
    Request r;
    for (const auto& m : body.at("messages")) {
        std::string role = m.at("role").get<std::string>();
        std::string content = m.value("content", std::string());
        if (role == "system") {
            r.system += content;
        } else {
            r.messages.emplace_back(std::move(role), std::move(content));
        }
    }
    r.tools = body.contains("tools");
    return r;
}

Transcript transcript_of(const Request& r, Speaker self, TaskKind kind) {
    Transcript t;
    t.kind = kind;
    const Speaker other = self == Speaker::staff ? Speaker::patient : Speaker::staff;
    int round = 0;
    for (const auto& [role, content] : r.messages) {
        Speaker who = role == "assistant" ? self : other;
        if (who == Speaker::staff) ++round;
        t.say(who, content, std::max(round, 1));
    }
    return t;
}

std::vector<std::string> option_list(const std::string& system) {
    std::vector<std::string> out;
    auto pos = system.find("Current department options in the hospital:\n");
    if (pos == std::string::npos) return out;
    static const std::regex line(R"(^\d+\.\s+(.+)$)");
    std::string rest = system.substr(pos);
    for (const auto& l : split(rest, "\n")) {
        std::smatch m;
        if (std::regex_match(l, m, line)) out.push_back(m[1].str());
    }
    return out;
}

// Gold departments guessed from what the patient said: a named prior diagnosis wins,
// otherwise the knowledge-base entry sharing the most symptoms.
std::vector<std::string> guess_departments(const Transcript& t) {
    static const synth::DiseaseKb kb = synth::load_disease_kb(synth::default_disease_kb_path());
    std::string said;
    for (const auto& u : t.utterances(Speaker::patient)) said += lower(u) + " ";
    const synth::DiseaseEntry* best = nullptr;
    for (const auto& e : kb) {
        if (said.find("diagnosed with " + lower(e.disease)) != std::string::npos) return e.departments;
    }
    std::size_t best_hits = 0;
    for (const auto& e : kb) {
        std::size_t hits = 0;
        for (const auto& s : e.symptoms) hits += said.find(lower(s)) != std::string::npos;
        if (hits > best_hits) {
            best_hits = hits;
            best = &e;
        }
    }
    return best ? best->departments : std::vector<std::string>{};
}

std::string patient_intake(const Request& r) {
    PatientProfile p;
    p.name = field(r.system, "Name");
    p.gender = field(r.system, "Gender");
    p.telecom = field(r.system, "Phone Number");
    p.personal_id = field(r.system, "Personal ID");
    p.address = field(r.system, "Address");
    const std::string hist = field(r.system, "Relevant medical history");
    p.disease = field(r.system, "Disease");
    p.history = starts_with(hist, "Diagnosed with") ? HistoryFlag::with_history : HistoryFlag::without_history;
    p.symptoms = split(field(r.system, "Symptom"), ", ");
    IntakeContext ctx{&p, {}, 1, 5};
    ScriptedPatient agent;
    return agent.intake_reply(ctx, transcript_of(r, Speaker::patient, TaskKind::intake));
}

std::string staff_intake(const Request& r) {
    static const std::regex round_re(R"(This is round (\d+))");
    std::smatch m;
    int round = std::regex_search(r.system, m, round_re) ? std::stoi(m[1].str()) : 1;
    const auto departments = option_list(r.system);
    Request hist = r;
    const bool extracting =
        !r.messages.empty() && r.messages.back().first == "user" &&
        starts_with(r.messages.back().second, "Please extract the patient's");
    if (extracting) hist.messages.pop_back();
    Transcript t = transcript_of(hist, Speaker::staff, TaskKind::intake);
    PatientProfile p;
    p.gold_departments = guess_departments(t);
    p.department = p.gold_departments.empty() ? std::string() : p.gold_departments.front();
    IntakeContext ctx{&p, departments, round, 5};
    ScriptedStaff staff;
    return extracting ? staff.extract(ctx, t) : staff.intake_turn(ctx, t);
}

std::string patient_preference(const Request& r) {
    PatientProfile p;
    const Preference pref = parse_preference(field(r.system, "Preference type"));
    const std::string doctor = field(r.system, "Preferred doctor");
    if (doctor != "N/A" && !doctor.empty()) p.preferred_physician = doctor;
    static const std::regex date_re(R"(starting from \*\*(\d{4}-\d{2}-\d{2})\*\*)");
    std::smatch m;
    const std::string desc = field(r.system, "Preference explanation");
    if (std::regex_search(desc, m, date_re)) p.valid_from = Date::parse(m[1].str());
    PreferenceContext ctx{&p, {}, pref, std::nullopt};
    if (r.system.find("## Staff-proposed Schedule") != std::string::npos) ctx.rejected = Preference::asap;
    ScriptedPatient agent;
    return agent.state_preference(ctx, transcript_of(r, Speaker::patient, TaskKind::scheduling));
}

std::string patient_event(const Request& r, bool cancel) {
    EventContext ctx;
    ctx.kind = cancel ? TaskKind::cancel : TaskKind::reschedule;
    ctx.patient_name = field(r.system, "Patient name");
    ctx.doctor_name = field(r.system, "Doctor name");
    ctx.date = Date::parse(field(r.system, cancel ? "Schedule date" : "Original appointment date"));
    const std::string hhmm = field(r.system, cancel ? "Schedule time" : "Original appointment time").substr(0, 5);
    ctx.start_minute = std::stoi(hhmm.substr(0, 2)) * 60 + std::stoi(hhmm.substr(3, 2));
    ScriptedPatient agent;
    return agent.event_reply(ctx, transcript_of(r, Speaker::patient, ctx.kind));
}

StaffReply staff_dispatch(const Request& r) {
    TaskKind kind = TaskKind::scheduling;
    if (!r.messages.empty() && r.messages.front().second != lines::kAskPreference) {
        kind = TaskKind::reschedule;
        for (const auto& [role, content] : r.messages) {
            if (role == "user" && read_intent(content).cancel) kind = TaskKind::cancel;
        }
    }
    ScriptedStaff staff;
    return staff.dispatch(transcript_of(r, Speaker::staff, kind));
}

// Earliest feasible start computed from the busy tables printed in the reasoning prompt.
std::string staff_reasoning(const Request& r) {
    if (r.messages.empty()) throw FormatError("reasoning request without a user message");
    const std::string& u = r.messages.back().second;
    auto hours = [&](const std::string& label) { return std::stod(field(u, label)); };
    const double start_h = hours("Start hour");
    const double end_h = hours("End hour");
    const double unit_h = hours("Time unit");
    const std::string now_iso = field(u, "Current time");
    const std::string utterance = field(u, "Patient utterance expressing scheduling preference");
    const bool rescheduling = field(u, "Rescheduling request") == "true";
    const Date today = Date::parse(now_iso.substr(0, 10));
    const int now_min = std::stoi(now_iso.substr(11, 2)) * 60 + std::stoi(now_iso.substr(14, 2));

    auto open = u.find("```json\n", u.find("## Doctor information"));
    if (open == std::string::npos) throw FormatError("reasoning prompt without a doctor table");
    open += 8;
    const json doctors = json::parse(u.substr(open, u.find("\n```", open) - open));

    std::optional<std::string> only;
    std::optional<Date> from;
    if (!rescheduling) {
        UtteranceIntent in = read_intent(utterance);
        if (in.doctor) only = in.doctor;
        else if (in.date) from = Date::parse(*in.date);
    }
    auto to_min = [](double h) { return static_cast<int>(std::lround(h * 60.0)); };
    const int unit = to_min(unit_h);

    struct Best {
        Date date;
        int start = 0;
        double workload = 0;
        std::string key;
        std::string name;
        int end = 0;
    };
    std::optional<Best> best;
    for (const auto& [name, doc] : doctors.items()) {
        if (only && name != *only) continue;
        const int dur = to_min(doc.at("outpatient_duration").get<double>());
        const double load = std::stod(doc.at("workload").get<std::string>());
        for (const auto& [day, intervals] : doc.at("schedule").items()) {
            const Date d = Date::parse(day);
            if (from && d < *from) continue;
            std::vector<std::pair<int, int>> busy;
            for (const auto& iv : intervals) busy.emplace_back(to_min(iv.at(0).get<double>()), to_min(iv.at(1).get<double>()));
            for (int s = to_min(start_h); s + dur <= to_min(end_h); s += unit) {
                if (d < today || (d == today && s <= now_min)) continue;
                bool clash = std::any_of(busy.begin(), busy.end(),
                                         [&](auto b) { return s < b.second && b.first < s + dur; });
                if (clash) continue;
                Best cand{d, s, load, id_fragment(name), name, s + dur};
                auto better = [&](const Best& a, const Best& b) {
                    return std::tie(a.date, a.start, a.workload, a.key) < std::tie(b.date, b.start, b.workload, b.key);
                };
                if (!best || better(cand, *best)) best = cand;
                break;
            }
        }
    }
    json out = {{"schedule", json::object()}};
    if (best) {
        out["schedule"][best->name] = {{"date", best->date.str()},
                                       {"start", best->start / 60.0},
                                       {"end", best->end / 60.0}};
    }
    return out.dump();
}

json response(const json& request, const StaffReply& reply) {
    json msg = {{"role", "assistant"}, {"content", reply.text}};
    if (!reply.calls.empty()) {
        json calls = json::array();
        int i = 0;
        for (const auto& c : reply.calls) {
            json args = json::object();
            for (const auto& [k, v] : c.args) args[k] = v;
            calls.push_back({{"id", "call_" + std::to_string(i++)},
                             {"type", "function"},
                             {"function", {{"name", c.tool}, {"arguments", args.dump()}}}});
        }
        msg["tool_calls"] = std::move(calls);
        msg["content"] = nullptr;
    }
    return {{"id", "stub-completion"},
            {"object", "chat.completion"},
            {"model", request.value("model", std::string("stub"))},
            {"choices", json::array({{{"index", 0},
                                      {"message", msg},
                                      {"finish_reason", reply.calls.empty() ? "stop" : "tool_calls"}}})}};
}

} // namespace

json PromptEchoModel::answer(const json& request) {
    const Request r = read_request(request);
    const std::string& s = r.system;
    StaffReply reply;
    if (r.tools) {
        reply = staff_dispatch(r);
    } else if (starts_with(s, "Imagine you are a patient experiencing")) {
        reply.text = patient_intake(r);
    } else if (starts_with(s, "You are playing the role of a kind")) {
        reply.text = staff_intake(r);
    } else if (starts_with(s, "Imagine you are a patient scheduling")) {
        reply.text = patient_preference(r);
    } else if (starts_with(s, "You are a patient contacting")) {
        reply.text = patient_event(r, s.find("to cancel") != std::string::npos);
    } else if (starts_with(s, "You are a hospital appointment scheduling assistant")) {
        reply.text = staff_reasoning(r);
    } else {
        reply.text = std::string(lines::kAskAgain);
    }
    return response(request, reply);
}

struct StubChatServer::Impl {
    httplib::Server server;
    std::thread worker;
    std::string host;
    int port = 0;
    std::atomic<std::size_t> requests{0};
};

StubChatServer::StubChatServer() : impl_(std::make_unique<Impl>()) {
    impl_->server.Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
        ++impl_->requests;
        try {
            res.set_content(PromptEchoModel::answer(json::parse(req.body)).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", {{"message", e.what()}}}}.dump(), "application/json");
        }
    });
}

StubChatServer::~StubChatServer() { stop(); }

int StubChatServer::start(const std::string& host, int port) {
    if (impl_->worker.joinable()) return impl_->port;
    impl_->host = host;
    impl_->port = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (impl_->port < 0) throw BackendError("stub chat server could not bind " + host + ":" + std::to_string(port));
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void StubChatServer::stop() {
    if (!impl_->worker.joinable()) return;
    impl_->server.stop();
    impl_->worker.join();
}

std::string StubChatServer::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1";
}

std::size_t StubChatServer::request_count() const { return impl_->requests.load(); }

} // namespace hadmin::agents
