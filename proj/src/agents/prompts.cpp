#include "hadmin/agents/prompts.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/synth/disease_kb.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hadmin::agents {

namespace {

bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open prompt file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string lookup(const nlohmann::json& table, std::string_view group, std::string_view key) {
    const auto g = table.find(std::string(group));
    if (g == table.end() || !g->contains(std::string(key))) {
        throw NotFound("persona table has no entry " + std::string(group) + "." + std::string(key));
    }
    return (*g)[std::string(key)].get<std::string>();
}

} // namespace

std::string render(std::string_view tmpl, const Vars& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && ident_char(tmpl[j])) ++j;
            if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
                auto it = vars.find(tmpl.substr(i + 1, j - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = j + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::vector<std::string> placeholders(std::string_view tmpl) {
    std::set<std::string> found;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < tmpl.size() && ident_char(tmpl[j])) ++j;
        if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) found.emplace(tmpl.substr(i + 1, j - i - 1));
    }
    return {found.begin(), found.end()};
}

const std::vector<std::string>& PromptLibrary::template_names() {
    static const std::vector<std::string> names = {
        "intake_patient",  "intake_patient_guideline", "intake_staff",          "intake_extract",
        "schedule_patient", "schedule_patient_reject",  "reschedule_patient",    "cancel_patient",
        "staff_tools",     "schedule_staff_system",    "schedule_staff_user",   "scheduling_rules",
    };
    return names;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (const auto& name : template_names()) lib.texts_[name] = read_file(dir / (name + ".txt"));
    try {
        lib.personas_ = nlohmann::json::parse(read_file(dir / "personas.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("personas.json: ") + e.what());
    }
    return lib;
}

const PromptLibrary& PromptLibrary::standard() {
    static const PromptLibrary lib = load(synth::data_dir() / "prompts");
    return lib;
}

const std::string& PromptLibrary::text(std::string_view name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) throw NotFound("unknown prompt template '" + std::string(name) + "'");
    return it->second;
}

std::string PromptLibrary::personality(std::string_view level) const { return lookup(personas_, "personality", level); }

std::string PromptLibrary::lang_proficiency(std::string_view level) const {
    Vars words;
    for (const auto& [key, list] : personas_.at("words").items()) {
        words[key] = join(list.get<std::vector<std::string>>(), ", ");
    }
    return render(lookup(personas_, "lang_proficiency", level), words);
}

std::string PromptLibrary::confusion(std::string_view level) const { return lookup(personas_, "confusion", level); }

std::string PromptLibrary::recall(HistoryFlag history) const {
    return lookup(personas_, "recall", history == HistoryFlag::with_history ? "high" : "no_history");
}

std::string PromptLibrary::preference_desc(Preference p, const std::optional<Date>& date) const {
    std::string desc = lookup(personas_, "preference_desc", to_string(p));
    return render(desc, {{"date", date ? date->str() : std::string("N/A")}});
}

int PromptLibrary::sentence_limit() const { return personas_.at("defaults").at("sentence_limit").get<int>(); }

std::string department_options(const std::vector<std::string>& departments) {
    std::string out;
    for (std::size_t i = 0; i < departments.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + departments[i];
    }
    return out;
}

std::string intake_patient_prompt(const PromptLibrary& lib, const PatientProfile& p) {
    const auto& defaults = lib.personas().at("defaults");
    const bool history = p.history == HistoryFlag::with_history;
    const std::string limit = std::to_string(lib.sentence_limit());
    Vars v{
        {"name", p.name},
        {"gender", p.gender},
        {"telecom", p.telecom},
        {"birth_date", p.birth_date},
        {"personal_id", p.personal_id},
        {"address", p.address},
        {"allergies", defaults.at("allergies").get<std::string>()},
        {"family_medical_history", defaults.at("family_medical_history").get<std::string>()},
        {"medical_history", history ? "Diagnosed with " + p.disease + " at a previous hospital."
                                    : defaults.at("first_visit_history").get<std::string>()},
        {"diagnosis", history ? p.disease : defaults.at("unknown_diagnosis").get<std::string>()},
        {"chief_complaint", join(p.symptoms, ", ")},
        {"department", join(p.gold_departments, " or ")},
        {"personality", lib.personality()},
        {"lang_proficiency", lib.lang_proficiency()},
        {"recall", lib.recall(p.history)},
        {"confusion", lib.confusion()},
        {"behavioral_guideline", render(lib.text("intake_patient_guideline"), {{"sentence_limit", limit}})},
        {"reminder", lib.personality() + " " + lib.confusion()},
        {"sentence_limit", limit},
    };
    return render(lib.text("intake_patient"), v);
}

std::string intake_staff_prompt(const PromptLibrary& lib, const std::vector<std::string>& departments,
                                int curr_round, int total_rounds) {
    return render(lib.text("intake_staff"), {{"total_idx", std::to_string(total_rounds)},
                                             {"department", department_options(departments)},
                                             {"curr_idx", std::to_string(curr_round)},
                                             {"remain_idx", std::to_string(total_rounds - curr_round)}});
}

namespace {

Vars preference_vars(const PromptLibrary& lib, const PatientProfile& p, Preference pref) {
    return {{"preference", std::string(to_string(pref))},
            {"preference_desc", lib.preference_desc(pref, p.valid_from)},
            {"preferred_doctor", pref == Preference::physician && p.preferred_physician ? *p.preferred_physician
                                                                                        : std::string("N/A")},
            {"personality", lib.personality()}};
}

} // namespace

std::string schedule_patient_prompt(const PromptLibrary& lib, const PatientProfile& p, Preference pref) {
    return render(lib.text("schedule_patient"), preference_vars(lib, p, pref));
}

std::string schedule_reject_prompt(const PromptLibrary& lib, const PatientProfile& p, Preference pref,
                                   Preference rejected) {
    Vars v = preference_vars(lib, p, pref);
    v["rejected_preference"] = lib.preference_desc(rejected, p.valid_from);
    return render(lib.text("schedule_patient_reject"), v);
}

std::string event_patient_prompt(const PromptLibrary& lib, bool cancel, const std::string& patient_name,
                                 const std::string& doctor_name, Date date, int start_minute) {
    return render(lib.text(cancel ? "cancel_patient" : "reschedule_patient"),
                  {{"patient_name", patient_name},
                   {"doctor_name", doctor_name},
                   {"date", date.str()},
                   {"start_time", clock_string(start_minute)},
                   {"personality", lib.personality()}});
}

} // namespace hadmin::agents
