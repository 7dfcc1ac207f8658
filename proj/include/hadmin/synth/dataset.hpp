#pragma once

#include "hadmin/core/model.hpp"
#include "hadmin/core/time.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hadmin::synth {

/// One synthesized hospital: metadata, departments, physicians with their prefilled
/// busy tables, and one patient per prefilled appointment block.
struct HospitalDataset {
    std::string hospital_name;  // "hospital_00"
    std::string level;          // primary / secondary / tertiary / custom
    TimeSystem time;
    std::vector<Department> departments;   // catalog order
    std::vector<Physician> physicians;     // department order, then draw order
    std::vector<PatientProfile> patients;  // physician order, then block order

    const Physician* find_physician(std::string_view name) const;
    const Physician* find_physician_by_id(std::string_view id) const;
    const PatientProfile* find_patient(std::string_view name) const;

    bool operator==(const HospitalDataset&) const = default;
};

std::string physician_id(std::string_view hospital_name, std::string_view dept_code, std::string_view name);
std::string patient_id(std::string_view hospital_name, std::string_view dept_code, std::string_view name);

/// Busy intervals of one day table as [start_hour, end_hour] pairs, merging adjacent slots.
std::vector<std::pair<int, int>> busy_intervals(const std::vector<SlotStatus>& day, const TimeSystem& ts);

/// Serializes to the key layout of the published dataset example (metadata / department /
/// doctor / patient). Extra keys: metadata.level, doctor.working_days, patient.appointment.
nlohmann::ordered_json to_json(const HospitalDataset& ds);
HospitalDataset dataset_from_json(const nlohmann::json& j);

std::string dump_dataset(const HospitalDataset& ds);  // 2-space indented, trailing newline
void save_dataset(const HospitalDataset& ds, const std::filesystem::path& path);
HospitalDataset load_dataset(const std::filesystem::path& path);

} // namespace hadmin::synth
