#include "hadmin/core/model.hpp"

#include "hadmin/core/errors.hpp"

#include <cctype>

namespace hadmin {

const std::array<DepartmentInfo, 9>& department_catalog() {
    static const std::array<DepartmentInfo, 9> catalog{{
        {"gastroenterology", "IMGAS", {"Hepatology", "Pancreatobiliary Disease", "Inflammatory Bowel Disease"}},
        {"cardiology", "IMCAR", {"Heart Failure", "Arrhythmia", "Coronary Artery Disease"}},
        {"pulmonology", "IMPUL", {"Interstitial Lung Disease", "Sleep Medicine", "Airway Disease"}},
        {"endocrinology/metabolism", "IMEND",
         {"Diabetes", "Osteoporosis and Metabolic Bone Disease", "Thyroid Disease"}},
        {"nephrology", "IMNEP", {"Dialysis", "Glomerular Disease", "Kidney Transplantation"}},
        {"hematology/oncology", "IMHEM", {"Leukemia and Lymphoma", "Solid Tumor Oncology", "Benign Hematology"}},
        {"allergy", "IMALL", {"Asthma and Airway Allergy", "Food and Drug Allergy", "Urticaria"}},
        {"infectious diseases", "IMINF", {"Travel Medicine", "Healthcare-Associated Infection", "HIV Medicine"}},
        {"rheumatology", "IMRHE", {"Inflammatory Arthritis", "Connective Tissue Disease", "Vasculitis"}},
    }};
    return catalog;
}

const DepartmentInfo* find_department(std::string_view name) {
    for (const auto& d : department_catalog()) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

bool is_known_department(std::string_view name) { return find_department(name) != nullptr; }

int total_capacity(const Physician& p, const TimeSystem& ts) {
    return static_cast<int>(p.working_days.size()) * ts.slots_per_day() /
           appointment_slot_count(p.capacity_per_hour, ts);
}

std::string_view to_string(Preference p) {
    switch (p) {
        case Preference::asap: return "asap";
        case Preference::physician: return "physician";
        case Preference::date: return "date";
    }
    return "asap";
}

std::string_view to_string(HistoryFlag h) {
    return h == HistoryFlag::with_history ? "with_history" : "without_history";
}

Preference parse_preference(std::string_view s) {
    if (s == "asap") return Preference::asap;
    if (s == "physician") return Preference::physician;
    if (s == "date") return Preference::date;
    throw FormatError("unknown preference type '" + std::string(s) + "'");
}

HistoryFlag parse_history_flag(std::string_view s) {
    if (s == "without_history") return HistoryFlag::without_history;
    if (s == "with_history") return HistoryFlag::with_history;
    throw FormatError("unknown symptom level '" + std::string(s) + "'");
}

std::string_view to_string(AppointmentStatus s) {
    switch (s) {
        case AppointmentStatus::scheduled: return "scheduled";
        case AppointmentStatus::in_progress: return "in-progress";
        case AppointmentStatus::completed: return "completed";
        case AppointmentStatus::cancelled: return "cancelled";
    }
    return "scheduled";
}

std::string id_fragment(std::string_view display_name) {
    std::string out;
    for (char c : display_name) {
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

std::string hospital_prefix(std::string_view hospital_name) {
    std::string out;
    for (char c : hospital_name) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

} // namespace hadmin
