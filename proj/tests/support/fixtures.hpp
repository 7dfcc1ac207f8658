#pragma once

#include "hadmin/core/model.hpp"
#include "hadmin/synth/dataset.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hadmin::fixtures {

struct PhysicianSpec {
    std::string name;
    std::string department;
    int capacity_per_hour = 4;
    std::vector<int> working_days;                  // day offsets from the start date
    std::vector<std::pair<int, int>> busy;          // (day offset, slot index) prefilled busy
};

inline synth::HospitalDataset make_hospital(const TimeSystem& ts, const std::vector<PhysicianSpec>& specs,
                                            const std::string& hospital = "hospital_00") {
    synth::HospitalDataset ds;
    ds.hospital_name = hospital;
    ds.level = "custom";
    ds.time = ts;
    for (const auto& info : department_catalog()) {
        Department dept{std::string(info.name), std::string(info.code), {}};
        for (const auto& s : specs) {
            if (s.department == info.name) dept.physicians.push_back(s.name);
        }
        if (!dept.physicians.empty()) ds.departments.push_back(dept);
    }
    for (const auto& dept : ds.departments) {
        for (const auto& s : specs) {
            if (s.department != dept.name) continue;
            Physician p;
            p.name = s.name;
            p.id = synth::physician_id(hospital, dept.code, s.name);
            p.gender = "female";
            p.birth_date = "1970-01-01";
            p.telecom = "+821000000000";
            p.department = dept.name;
            p.specialty = {std::string(find_department(dept.name)->subspecialties[0]), dept.code + "-1"};
            p.capacity_per_hour = s.capacity_per_hour;
            for (int off : s.working_days) {
                Date d = ts.start_date().plus_days(off);
                p.working_days.push_back(d);
                p.schedule[d] = std::vector<SlotStatus>(static_cast<std::size_t>(ts.slots_per_day()), SlotStatus::free);
            }
            for (auto [off, idx] : s.busy) {
                p.schedule.at(ts.start_date().plus_days(off))[static_cast<std::size_t>(idx)] = SlotStatus::busy;
            }
            ds.physicians.push_back(std::move(p));
        }
    }
    return ds;
}

inline PatientProfile make_patient(const synth::HospitalDataset& ds, const std::string& name,
                                   const std::string& department) {
    PatientProfile p;
    p.name = name;
    p.id = synth::patient_id(ds.hospital_name, std::string(find_department(department)->code), name);
    p.gender = "male";
    p.birth_date = "1990-05-05";
    p.telecom = "+8212345678";
    p.personal_id = "900505-1234567";
    p.address = "1, Hoedong-ro, Yecheon-gun, Gunsan-si";
    p.department = department;
    p.gold_departments = {department};
    p.disease = "Dehydration";
    p.symptoms = {"Headache"};
    return p;
}

} // namespace hadmin::fixtures
