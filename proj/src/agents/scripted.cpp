#include "hadmin/agents/agents.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/scheduler/scheduler.hpp"

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

bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

std::optional<std::string> first_match(const std::string& text, const std::regex& re, int group = 1) {
    std::smatch m;
    if (std::regex_search(text, m, re)) return m[group].str();
    return std::nullopt;
}

std::string symptom_sentence(const PatientProfile& p) {
    if (p.symptoms.empty()) return "I don't feel well.";
    std::string s = "I have ";
    std::size_t n = std::min<std::size_t>(3, p.symptoms.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += i + 1 == n ? " and " : ", ";
        s += p.symptoms[i];
    }
    return s + ".";
}

std::string history_sentence(const PatientProfile& p) {
    if (p.history == HistoryFlag::with_history) return "Yes, I was diagnosed with " + p.disease + " before.";
    return "No diagnosed diseases before.";
}

std::string demographics_sentence(const PatientProfile& p) {
    return "My name is " + p.name + ". I am " + p.gender + ". My phone number is " + p.telecom +
           ". My personal ID is " + p.personal_id + ". My address is " + p.address + ".";
}

// Department the oracle staff settles on: the attending department when the diagnosis
// supports it, otherwise the first gold department the hospital offers.
std::string oracle_department(const PatientProfile& p, const std::vector<std::string>& departments) {
    auto offered = [&](const std::string& d) {
        return std::find(departments.begin(), departments.end(), d) != departments.end();
    };
    const auto& gold = p.gold_departments;
    if (offered(p.department) && std::find(gold.begin(), gold.end(), p.department) != gold.end()) return p.department;
    for (const auto& g : gold) {
        if (offered(g)) return g;
    }
    return departments.empty() ? p.department : departments.front();
}

} // namespace

std::string preference_statement(const PatientProfile& p, Preference pref) {
    if (pref == Preference::physician && p.preferred_physician) {
        return "I prefer an appointment with " + *p.preferred_physician + ".";
    }
    if (pref == Preference::date && p.valid_from) {
        return "I want an appointment on or after " + p.valid_from->str() + " with any available doctor.";
    }
    return "I want the earliest available doctor in the department for an outpatient visit.";
}

UtteranceIntent read_intent(std::string_view text) {
    static const std::regex doctor_re(R"(Dr\.\s*[A-Z][A-Za-z\-]+(?:\s+[A-Z][A-Za-z\-]+)*)");
    static const std::regex date_re(R"(\b(\d{4}-\d{2}-\d{2})\b)");
    static const std::regex name_re(R"((?:[Mm]y name is|[Nn]ame:?)\s+([A-Z][A-Za-z\-]+(?:\s+[A-Z][A-Za-z\-]+)*))");
    const std::string s(text);
    UtteranceIntent in;
    in.doctor = first_match(s, doctor_re, 0);
    in.date = first_match(s, date_re);
    in.patient_name = first_match(s, name_re);
    const std::string l = lower(s);
    in.cancel = contains(l, "cancel");
    in.move = contains(l, "move") || contains(l, "earlier") || contains(l, "reschedul");
    in.earliest = contains(l, "earliest") || contains(l, "as soon as");
    return in;
}

// ---------------------------------------------------------------------------
// Scripted patient
// ---------------------------------------------------------------------------

std::string ScriptedPatient::intake_reply(const IntakeContext& ctx, const Transcript& t) {
    const PatientProfile& p = *ctx.patient;
    const Turn* staff = t.last(Speaker::staff);
    const std::string q = staff ? lower(staff->text) : std::string();
    std::string out;
    if (contains(q, "name")) {
        out = opt_.withhold_demographics ? "I'd rather not share my personal details." : demographics_sentence(p);
    }
    if (contains(q, "diagnos") || contains(q, "history") || contains(q, "symptom")) {
        if (!out.empty()) out += ' ';
        out += history_sentence(p) + " " + symptom_sentence(p);
    }
    if (out.empty()) out = symptom_sentence(p);
    return out;
}

std::string ScriptedPatient::state_preference(const PreferenceContext& ctx, const Transcript&) {
    std::string s = preference_statement(*ctx.patient, ctx.preference);
    if (ctx.rejected) return std::string(lines::kChangedMind) + s;
    return s;
}

std::string ScriptedPatient::event_reply(const EventContext& ctx, const Transcript& t) {
    const bool cancel = ctx.kind == TaskKind::cancel;
    if (t.utterances(Speaker::patient).empty()) {
        std::string s = cancel ? "I'd like to cancel my appointment" : "I'd like to move my appointment";
        if (!opt_.withhold_doctor) s += " with " + ctx.doctor_name;
        s += " on " + ctx.date.str() + " at " + clock_string(ctx.start_minute);
        return s + (cancel ? "." : " to an earlier time.");
    }
    const Turn* staff = t.last(Speaker::staff);
    const std::string q = staff ? lower(staff->text) : std::string();
    if (contains(q, "doctor")) {
        if (opt_.withhold_doctor) return "Sorry, I don't remember the doctor's name.";
        return "The doctor is " + ctx.doctor_name + ".";
    }
    if (contains(q, "name")) {
        if (opt_.withhold_name) return "I'd rather not say.";
        return "My name is " + ctx.patient_name + ".";
    }
    if (contains(q, "date")) return "The appointment is on " + ctx.date.str() + ".";
    return std::string(lines::kThanks);
}

// ---------------------------------------------------------------------------
// Scripted staff
// ---------------------------------------------------------------------------

std::string ScriptedStaff::intake_turn(const IntakeContext& ctx, const Transcript&) {
    if (ctx.round <= 1) {
        return std::string(lines::kGreeting) +
               " Could you please tell me your full name, gender, phone number, personal ID, and address?";
    }
    if (ctx.round == 2) {
        return "Thank you. Do you have any previously diagnosed diseases, and what symptoms are you having?";
    }
    const std::string dept = oracle_department(*ctx.patient, ctx.departments);
    auto it = std::find(ctx.departments.begin(), ctx.departments.end(), dept);
    const auto n = it == ctx.departments.end() ? 0 : (it - ctx.departments.begin()) + 1;
    return "I will introduce you to a physician who works in the " + dept + ".\nAnswer: " + std::to_string(n) + ". " +
           dept;
}

std::string ScriptedStaff::extract(const IntakeContext& ctx, const Transcript& t) {
    static const std::regex name_re(R"((?:[Mm]y name is|[Nn]ame:?)\s+([^.,\n]+?)\s*(?:[.,]|$))");
    static const std::regex gender_re(R"(\b(female|male)\b)", std::regex::icase);
    static const std::regex phone_re(R"((\+\d{6,}))");
    static const std::regex id_re(R"(\b(\d{6}-\d{7})\b)");
    static const std::regex address_re(R"((?:my address is|address)\s+(.+?)(?:\.\s|\.$|$))", std::regex::icase);
    static const std::regex works_re(R"(works in the ([^.\n]+)\.)");
    static const std::regex would_be_re(R"(department for you would be ([^.\n]+)\.)");

    ExtractedPatientInfo e{"none", "none", "none", "none", "none", "none"};
    for (const auto& text : t.utterances(Speaker::patient)) {
        if (e.name == "none") e.name = first_match(text, name_re).value_or("none");
        if (e.gender == "none") {
            if (auto g = first_match(text, gender_re)) e.gender = lower(*g);
        }
        if (e.phone_number == "none") e.phone_number = first_match(text, phone_re).value_or("none");
        if (e.personal_id == "none") e.personal_id = first_match(text, id_re).value_or("none");
        if (e.address == "none") e.address = first_match(text, address_re).value_or("none");
    }
    for (const auto& text : t.utterances(Speaker::staff)) {
        if (auto d = find_answer_department(text, ctx.departments)) {
            e.department = *d;
            break;
        }
        for (const auto* re : {&works_re, &would_be_re}) {
            if (auto d = first_match(text, *re)) {
                std::string norm = normalize_department(*d, ctx.departments);
                e.department = norm.empty() ? lower(*d) : norm;
            }
        }
    }
    return to_json(e).dump();
}

StaffReply ScriptedStaff::dispatch(const Transcript& t) {
    StaffReply r;
    if (t.kind == TaskKind::scheduling) {
        const Turn* last = t.last(Speaker::patient);
        UtteranceIntent in = read_intent(last ? last->text : "");
        if (in.doctor) {
            r.calls.push_back({std::string(kPhysicianFilterTool), {{"preferred_doctor", *in.doctor}}});
        } else if (in.date) {
            r.calls.push_back({std::string(kDateFilterTool), {{"date", *in.date}}});
        } else if (in.earliest) {
            r.calls.push_back({std::string(kGetAllTimeTool), {}});
        } else {
            r.text = std::string(lines::kAskPreference);
        }
        return r;
    }
    UtteranceIntent all;
    for (const auto& text : t.utterances(Speaker::patient)) {
        UtteranceIntent in = read_intent(text);
        if (!all.doctor) all.doctor = in.doctor;
        if (!all.date) all.date = in.date;
        if (!all.patient_name) all.patient_name = in.patient_name;
        all.cancel = all.cancel || in.cancel;
        all.move = all.move || in.move;
    }
    const bool cancel = all.cancel;
    const std::string verb = cancel ? "cancel" : "reschedule";
    if (!all.patient_name) {
        r.text = "Please provide the patient's full name as it appears on the appointment so I can " + verb + " it.";
    } else if (!all.doctor) {
        r.text = "Please tell me the full name of the doctor for this appointment.";
    } else if (!all.date) {
        r.text = "Please tell me the date of the appointment.";
    } else {
        r.calls.push_back({std::string(cancel ? kCancelTool : kRescheduleTool),
                           {{"patient_name", *all.patient_name}, {"doctor_name", *all.doctor}, {"date", *all.date}}});
    }
    return r;
}

std::string ScriptedStaff::reason(const ReasoningContext& ctx) {
    static const std::string none = R"({"schedule": {}})";
    if (ctx.hospital == nullptr) return none;
    scheduler::SchedulingRequest req;
    req.department = ctx.department;
    req.not_before = ctx.now;
    req.only_physician_id = ctx.only_physician_id;
    req.before = ctx.before;
    req.ignore_appointment = ctx.ignore_appointment;
    if (!ctx.rescheduling) {
        UtteranceIntent in = read_intent(ctx.utterance);
        if (in.doctor) {
            req.mode = Preference::physician;
            req.preferred_physician = *in.doctor;
        } else if (in.date) {
            req.mode = Preference::date;
            req.valid_from = Date::parse(*in.date);
        }
    }
    try {
        auto p = scheduler::brute_force_earliest(req, ctx.hospital->store());
        return p ? scheduler::proposal_json(*p).dump() : none;
    } catch (const NotFound&) {
        return none;
    }
}

} // namespace hadmin::agents
