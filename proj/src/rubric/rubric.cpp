#include "hadmin/rubric/rubric.hpp"

#include "hadmin/core/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

namespace hadmin::rubric {

using agents::TaskKind;

namespace {

constexpr std::array<std::string_view, 13> kNames = {"IF", "IS",  "ID", "IPI", "IDPI", "PC", "IVS",
                                                     "WD", "TC",  "IP", "IDT", "NET",  "FI"};

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string digits(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

std::string intake_is(const agents::IntakeResult& r, const PatientProfile& gold) {
    if (!r.answer_department) return "no Answer line within the round cap";
    bool asked = false;
    for (const auto& s : r.transcript.utterances(agents::Speaker::staff)) asked = asked || lower(s).find("name") != std::string::npos;
    if (!asked) return "staff never asked for demographics";
    std::string said;
    for (const auto& u : r.transcript.utterances(agents::Speaker::patient)) said += u + "\n";
    const std::string said_lower = lower(said);
    const std::string said_digits = digits(said);
    auto heard = [&](std::string_view v) { return said_lower.find(lower(v)) != std::string::npos; };
    if (!heard(gold.name)) return "patient never stated the name";
    const std::regex gender_re("\\b" + lower(gold.gender) + "\\b");
    if (!std::regex_search(said_lower, gender_re)) return "patient never stated the gender";
    if (said_digits.find(digits(gold.telecom)) == std::string::npos) return "patient never stated the phone number";
    if (said_digits.find(digits(gold.personal_id)) == std::string::npos) return "patient never stated the personal ID";
    if (!heard(gold.address)) return "patient never stated the address";
    return {};
}

bool in_gold(const std::string& dept, const PatientProfile& gold) {
    return std::find(gold.gold_departments.begin(), gold.gold_departments.end(), dept) != gold.gold_departments.end();
}

} // namespace

std::string_view to_string(Code c) { return kNames[static_cast<std::size_t>(c)]; }

Code parse_code(std::string_view s) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == s) return static_cast<Code>(i);
    }
    throw FormatError("unknown rubric code '" + std::string(s) + "'");
}

const std::vector<Code>& all_codes() {
    static const std::vector<Code> codes = [] {
        std::vector<Code> v;
        for (std::size_t i = 0; i < kNames.size(); ++i) v.push_back(static_cast<Code>(i));
        return v;
    }();
    return codes;
}

Outcome pass(TaskKind kind) { return Outcome{kind, std::nullopt, {}, {}}; }

Outcome fail(TaskKind kind, Code code, std::string criterion, std::string detail) {
    return Outcome{kind, code, std::move(criterion), std::move(detail)};
}

nlohmann::ordered_json to_json(const Outcome& o) {
    nlohmann::ordered_json j;
    j["kind"] = agents::to_string(o.kind);
    j["result"] = o.success() ? "success" : "error";
    j["code"] = o.code ? nlohmann::ordered_json(std::string(to_string(*o.code))) : nlohmann::ordered_json();
    j["criterion"] = o.criterion;
    j["detail"] = o.detail;
    return j;
}

Outcome outcome_from_json(const nlohmann::json& j) {
    Outcome o;
    o.kind = agents::parse_task_kind(j.at("kind").get<std::string>());
    if (j.contains("code") && j["code"].is_string()) o.code = parse_code(j["code"].get<std::string>());
    o.criterion = j.value("criterion", std::string());
    o.detail = j.value("detail", std::string());
    const std::string result = j.value("result", std::string());
    if ((result == "success") != o.success()) throw FormatError("rubric result disagrees with its code");
    return o;
}

// ---------------------------------------------------------------------------
// Intake
// ---------------------------------------------------------------------------

std::string normalize_field(std::string_view key, std::string_view value) {
    if (key == "phone_number" || key == "personal_id") return digits(value);
    std::string out;
    bool space = false;
    for (char c : value) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string recommended_department(const agents::IntakeResult& r, const std::vector<std::string>& departments) {
    if (r.extracted) {
        std::string d = agents::normalize_department(r.extracted->department, departments);
        return d.empty() ? normalize_field("department", r.extracted->department) : d;
    }
    return r.answer_department.value_or(std::string());
}

Outcome evaluate_intake(const agents::IntakeResult& r, const PatientProfile& gold,
                        const std::vector<std::string>& departments) {
    if (!r.extracted) return fail(TaskKind::intake, Code::IF, "C1-1", "extraction output unparseable: " + r.format_error);
    if (std::string why = intake_is(r, gold); !why.empty()) return fail(TaskKind::intake, Code::IS, "C1-2", why);

    const bool dept_ok = in_gold(recommended_department(r, departments), gold);
    const auto& e = *r.extracted;
    const std::array<std::pair<const char*, std::pair<std::string, std::string>>, 5> fields = {{
        {"name", {e.name, gold.name}},
        {"gender", {e.gender, gold.gender}},
        {"phone_number", {e.phone_number, gold.telecom}},
        {"personal_id", {e.personal_id, gold.personal_id}},
        {"address", {e.address, gold.address}},
    }};
    std::string wrong;
    for (const auto& [key, vals] : fields) {
        if (normalize_field(key, vals.first) != normalize_field(key, vals.second)) {
            if (!wrong.empty()) wrong += ", ";
            wrong += key;
        }
    }
    const std::string dept_msg = "department '" + e.department + "' not in the gold labels";
    if (!dept_ok && !wrong.empty()) return fail(TaskKind::intake, Code::IDPI, "C1-3", dept_msg + "; wrong " + wrong);
    if (!dept_ok) return fail(TaskKind::intake, Code::ID, "C1-3", dept_msg);
    if (!wrong.empty()) return fail(TaskKind::intake, Code::IPI, "C1-3", "wrong " + wrong);
    return pass(TaskKind::intake);
}

bool department_wrong_unmasked(const agents::IntakeResult& r, const PatientProfile& gold,
                               const std::vector<std::string>& departments) {
    return !in_gold(recommended_department(r, departments), gold);
}

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

Outcome evaluate_scheduling(const SchedulingCheck& c, fhir::Hospital& hospital, TimePoint now, TaskKind kind) {
    const auto& req = c.request;
    if (!c.completed) return fail(kind, Code::IS, "C2-1", "dialogue ended without a schedule or a no-availability answer");
    if (!c.format_ok) return fail(kind, Code::IF, "C2-2", "scheduling answer unparseable");

    auto oracle = [&]() -> std::optional<scheduler::Proposal> {
        try {
            return scheduler::brute_force_earliest(req, hospital.store());
        } catch (const NotFound&) {
            return std::nullopt;
        }
    };
    if (c.claimed_none || !c.proposal) {
        if (auto bf = oracle()) {
            return fail(kind, Code::NET, "C2-8", "no availability claimed but " + scheduler::proposal_text(*bf) + " is free");
        }
        return pass(kind);
    }
    const auto& p = *c.proposal;
    if (p.physicians.size() != 1) {
        return fail(kind, Code::PC, "C2-3", std::to_string(p.physicians.size()) + " physicians in the proposal");
    }

    const TimeSystem& ts = hospital.time();
    const Physician* doc = hospital.physician_by_name(p.physicians.front());
    if (!doc) return fail(kind, Code::IVS, "C2-4", "unknown physician " + p.physicians.front());
    if (doc->department != req.department) {
        return fail(kind, Code::IVS, "C2-4", doc->name + " is not in " + req.department);
    }
    Date d;
    try {
        d = Date::parse(p.date);
    } catch (const FormatError&) {
        return fail(kind, Code::IVS, "C2-4", "invalid date '" + p.date + "'");
    }
    if (!ts.in_horizon(d)) return fail(kind, Code::IVS, "C2-4", "date outside the horizon");
    int s = 0;
    int e = 0;
    if (!try_hours_to_minutes(p.start, s) || !try_hours_to_minutes(p.end, e) || e <= s) {
        return fail(kind, Code::IVS, "C2-4", "start/end are not a valid interval");
    }
    if (s < ts.start_minute() || e > ts.end_minute()) return fail(kind, Code::IVS, "C2-4", "outside operating hours");
    if ((s - ts.start_minute()) % ts.unit_minutes() != 0 || (e - ts.start_minute()) % ts.unit_minutes() != 0) {
        return fail(kind, Code::IVS, "C2-4", "not aligned to the time unit");
    }
    const TimePoint start = TimePoint::at(d, s);
    if (start <= now) return fail(kind, Code::IVS, "C2-4", "start is not after the current time");
    if (req.before && start >= *req.before) {
        return fail(kind, Code::IVS, "C2-4", "not earlier than the original appointment");
    }

    if (e - s != 60 / doc->capacity_per_hour) {
        return fail(kind, Code::WD, "C2-5",
                    "duration " + std::to_string(e - s) + " min, expected " + std::to_string(60 / doc->capacity_per_hour));
    }

    const SlotRun run{d, (s - ts.start_minute()) / ts.unit_minutes(), (e - s) / ts.unit_minutes()};
    if (!hospital.run_is_free(doc->id, run, req.ignore_appointment)) {
        return fail(kind, Code::TC, "C2-6", "overlaps busy slots or a non-working day");
    }

    if (req.only_physician_id && doc->id != *req.only_physician_id) {
        return fail(kind, Code::IP, "C2-7", "must stay with the original physician");
    }
    if (req.mode == Preference::physician && req.preferred_physician && doc->name != *req.preferred_physician) {
        return fail(kind, Code::IP, "C2-7", "preferred " + *req.preferred_physician + ", got " + doc->name);
    }
    if (req.mode == Preference::date && req.valid_from && d < *req.valid_from) {
        return fail(kind, Code::IDT, "C2-7", "date before " + req.valid_from->str());
    }

    if (auto bf = oracle(); bf && std::tie(bf->date, bf->start_minute) < std::tie(d, s)) {
        return fail(kind, Code::NET, "C2-8", "earlier option " + scheduler::proposal_text(*bf));
    }
    return pass(kind);
}

SchedulingCheck check_of(const agents::SchedulingResult& r) {
    return SchedulingCheck{r.completed, r.format_ok, r.claimed_none, r.proposal, r.request};
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

Outcome evaluate_event(const agents::EventResult& r, fhir::Hospital& hospital, TimePoint now) {
    const TaskKind kind = r.kind;
    if (!r.retrieved_id) return fail(kind, Code::FI, "C3-1", "appointment not identified");
    if (*r.retrieved_id != r.target_id) return fail(kind, Code::FI, "C3-1", "identified the wrong appointment");
    const std::string_view expected = kind == TaskKind::cancel ? agents::kCancelTool : agents::kRescheduleTool;
    if (r.action != expected) return fail(kind, Code::FI, "C3-1", "applied " + r.action + " to the request");

    const fhir::BookedAppointment* b = hospital.find(r.target_id);
    if (!b) return fail(kind, Code::FI, "C3-1", "appointment vanished");

    if (kind == TaskKind::cancel) {
        if (b->appt.status != AppointmentStatus::cancelled) return fail(kind, Code::IS, "C2-1", "status not cancelled");
        const Physician& doc = hospital.physician(b->appt.physician_id);
        const SlotRun& run = b->appt.run;
        for (int i = run.first; i <= run.last(); ++i) {
            const auto* owner = hospital.owner(doc.id, run.date, i);
            if (owner && owner->appt.id == r.target_id) return fail(kind, Code::IS, "C2-1", "slots still held");
        }
        return pass(kind);
    }

    if (!r.format_ok) return fail(kind, Code::IF, "C2-2", "scheduling answer unparseable");
    if (r.waitlisted) {
        const auto& wl = hospital.waiting_list();
        const bool queued = std::any_of(wl.begin(), wl.end(), [&](const WaitingListEntry& w) {
            return w.appointment_id == r.target_id;
        });
        if (!queued) return fail(kind, Code::IS, "C2-1", "waiting-list entry missing");
        SchedulingCheck c{true, true, true, std::nullopt, r.request};
        return evaluate_scheduling(c, hospital, now, kind);
    }
    if (!r.proposal) return fail(kind, Code::IS, "C2-1", "neither moved nor waitlisted");
    SchedulingCheck c{true, true, false, r.proposal, r.request};
    return evaluate_scheduling(c, hospital, now, kind);
}

} // namespace hadmin::rubric
