#pragma once

#include "hadmin/core/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hadmin::agents {

using Vars = std::map<std::string, std::string, std::less<>>;

/// Single left-to-right pass: every `{identifier}` whose identifier is a key of `vars` is
/// replaced by its value; substituted text is never rescanned. Unknown identifiers and any
/// other braces (JSON examples) are copied verbatim.
std::string render(std::string_view tmpl, const Vars& vars);

/// Identifiers of the form `{identifier}` appearing in a template, sorted and unique.
std::vector<std::string> placeholders(std::string_view tmpl);

/// Prompt templates and persona tables loaded from `<data>/prompts`.
class PromptLibrary {
public:
    /// Throws NotFound when a template file is missing.
    static PromptLibrary load(const std::filesystem::path& dir);
    /// The library shipped in the data directory; loaded once.
    static const PromptLibrary& standard();

    const std::string& text(std::string_view name) const;  // e.g. "intake_staff"
    const nlohmann::json& personas() const { return personas_; }

    // Persona pieces for the shipped outpatient configuration.
    std::string personality(std::string_view level = "neutral") const;
    std::string lang_proficiency(std::string_view level = "B") const;
    std::string confusion(std::string_view level = "normal") const;
    std::string recall(HistoryFlag history) const;
    std::string preference_desc(Preference p, const std::optional<Date>& date) const;
    int sentence_limit() const;

    static const std::vector<std::string>& template_names();

private:
    std::map<std::string, std::string, std::less<>> texts_;
    nlohmann::json personas_;
};

// Rendered prompts. `departments` is the hospital's department list in display order.
std::string department_options(const std::vector<std::string>& departments);  // "1. cardiology\n2. ..."
std::string intake_patient_prompt(const PromptLibrary& lib, const PatientProfile& p);
std::string intake_staff_prompt(const PromptLibrary& lib, const std::vector<std::string>& departments,
                                int curr_round, int total_rounds);
std::string schedule_patient_prompt(const PromptLibrary& lib, const PatientProfile& p, Preference pref);
std::string schedule_reject_prompt(const PromptLibrary& lib, const PatientProfile& p, Preference pref,
                                   Preference rejected);
std::string event_patient_prompt(const PromptLibrary& lib, bool cancel, const std::string& patient_name,
                                 const std::string& doctor_name, Date date, int start_minute);

} // namespace hadmin::agents
