#pragma once

#include "hadmin/core/model.hpp"
#include "hadmin/core/rng.hpp"
#include "hadmin/synth/config.hpp"
#include "hadmin/synth/dataset.hpp"
#include "hadmin/synth/disease_kb.hpp"

#include <map>
#include <vector>

namespace hadmin::synth {

/// Uniform over the divisors of 1/τ inside `range`. Throws ConfigError if there are none.
int sample_capacity(const Range<int>& range, const TimeSystem& ts, Rng& rng);

struct PrefilledSchedule {
    std::map<Date, std::vector<SlotStatus>> table;  // working days only
    std::vector<SlotRun> blocks;                    // appointment blocks, chronological
};

/// Marks busy slots and carves appointment blocks for each working day.
PrefilledSchedule prefill_schedule(const std::vector<Date>& working_days, int capacity_per_hour,
                                   const TimeSystem& ts, const SynthConfig& cfg, Rng& rng);

/// A prefilled block waiting for a patient.
struct AppointmentBlock {
    const Physician* physician = nullptr;
    SlotRun run;
};

/// One profile per block. `taken_names` collects names already in use in the hospital and
/// is extended with every generated patient.
std::vector<PatientProfile> generate_patients(const std::vector<AppointmentBlock>& blocks,
                                              const std::string& hospital_name, const TimeSystem& ts,
                                              const SynthConfig& cfg,
                                              const DiseaseKb& kb, Rng& rng,
                                              std::vector<std::string>* taken_names = nullptr);

HospitalDataset synthesize_hospital(const SynthConfig& cfg, const DiseaseKb& kb, int index);
std::vector<HospitalDataset> synthesize(const SynthConfig& cfg, const DiseaseKb& kb);

std::string hospital_name(int index);  // "hospital_00"

} // namespace hadmin::synth
