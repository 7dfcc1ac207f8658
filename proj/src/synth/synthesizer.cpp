#include "hadmin/synth/synthesizer.hpp"

#include "demographics.hpp"
#include "hadmin/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hadmin::synth {

namespace {

// Whole hours inside the range are preferred; a range without one collapses to its minimum.
int pick_hour_minute(const Range<double>& range, Rng& rng) {
    int lo = static_cast<int>(std::ceil(range.min - 1e-9));
    int hi = static_cast<int>(std::floor(range.max + 1e-9));
    if (lo <= hi) return static_cast<int>(rng.uniform_int(lo, hi)) * 60;
    return hours_to_minutes(range.min);
}

std::string unique_name(Rng& rng, std::vector<std::string>& taken, bool doctor) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::string name = demo::given_name(rng) + " " + demo::surname(rng);
        if (doctor) name = "Dr. " + name;
        std::string bare = doctor ? name.substr(4) : name;
        bool clash = std::any_of(taken.begin(), taken.end(), [&](const std::string& t) {
            std::string_view v = t;
            if (v.substr(0, 4) == "Dr. ") v.remove_prefix(4);
            return v == bare;
        });
        if (!clash) {
            taken.push_back(name);
            return name;
        }
    }
    throw ConfigError("name space exhausted while generating unique names");
}

int scaled_floor(double ratio, int count, int divisor = 1) {
    return static_cast<int>(std::floor(ratio * count / divisor + 1e-9));
}

} // namespace

std::string hospital_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "hospital_%02d", index);
    return buf;
}

int sample_capacity(const Range<int>& range, const TimeSystem& ts, Rng& rng) {
    const int max_cap = ts.max_capacity();
    std::vector<int> options;
    for (int d = std::max(1, range.min); d <= std::min(range.max, max_cap); ++d) {
        if (max_cap % d == 0) options.push_back(d);
    }
    if (options.empty()) {
        throw ConfigError("capacity range [" + std::to_string(range.min) + ", " + std::to_string(range.max) +
                          "] holds no divisor of " + std::to_string(max_cap));
    }
    return options[static_cast<std::size_t>(rng.below(options.size()))];
}

PrefilledSchedule prefill_schedule(const std::vector<Date>& working_days, int capacity_per_hour,
                                   const TimeSystem& ts, const SynthConfig& cfg, Rng& rng) {
    const int slots = ts.slots_per_day();
    const int len = appointment_slot_count(capacity_per_hour, ts);
    PrefilledSchedule out;
    for (Date day : working_days) {
        std::vector<SlotStatus> table(static_cast<std::size_t>(slots), SlotStatus::free);
        if (rng.bernoulli(cfg.busy_schedule_prob)) {
            double r = rng.uniform(cfg.busy_schedule_ratio.min, cfg.busy_schedule_ratio.max);
            int k = std::clamp(scaled_floor(r, slots), 1, slots);
            for (std::size_t idx : rng.sample(static_cast<std::size_t>(slots), static_cast<std::size_t>(k))) {
                table[idx] = SlotStatus::busy;
            }
        }

        // Maximal free runs and how many whole consultations each can hold.
        std::vector<std::pair<int, int>> runs;  // (first, length)
        int free_count = 0;
        for (int i = 0; i < slots;) {
            if (table[static_cast<std::size_t>(i)] == SlotStatus::busy) {
                ++i;
                continue;
            }
            int j = i;
            while (j < slots && table[static_cast<std::size_t>(j)] == SlotStatus::free) ++j;
            runs.emplace_back(i, j - i);
            free_count += j - i;
            i = j;
        }
        std::vector<int> unit_owner;
        for (std::size_t r = 0; r < runs.size(); ++r) {
            for (int u = 0; u < runs[r].second / len; ++u) unit_owner.push_back(static_cast<int>(r));
        }

        double a = rng.uniform(cfg.appointment_ratio.min, cfg.appointment_ratio.max);
        int blocks = std::min(scaled_floor(a, free_count, len), static_cast<int>(unit_owner.size()));
        std::vector<int> per_run(runs.size(), 0);
        for (std::size_t u : rng.sample(unit_owner.size(), static_cast<std::size_t>(blocks))) {
            ++per_run[static_cast<std::size_t>(unit_owner[u])];
        }

        // Spread the chosen blocks inside each run: choosing c positions out of c + slack
        // distributes the slack uniformly over the c + 1 gaps.
        for (std::size_t r = 0; r < runs.size(); ++r) {
            int c = per_run[r];
            if (c == 0) continue;
            int slack = runs[r].second - c * len;
            auto picks = rng.sample(static_cast<std::size_t>(c + slack), static_cast<std::size_t>(c));
            std::sort(picks.begin(), picks.end());
            for (int i = 0; i < c; ++i) {
                int first = runs[r].first + (static_cast<int>(picks[static_cast<std::size_t>(i)]) - i) + i * len;
                out.blocks.push_back(SlotRun{day, first, len});
            }
        }
        out.table.emplace(day, std::move(table));
    }
    std::sort(out.blocks.begin(), out.blocks.end());
    return out;
}

std::vector<PatientProfile> generate_patients(const std::vector<AppointmentBlock>& blocks,
                                              const std::string& hospital, const TimeSystem& ts,
                                              const SynthConfig& cfg,
                                              const DiseaseKb& kb, Rng& rng,
                                              std::vector<std::string>* taken_names) {
    std::vector<std::string> local_taken;
    std::vector<std::string>& taken = taken_names ? *taken_names : local_taken;
    std::vector<PatientProfile> out;
    out.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const AppointmentBlock& block = blocks[i];
        if (!block.physician) throw NotFound("appointment block without a physician");
        const Physician& doc = *block.physician;
        const DepartmentInfo* dept = find_department(doc.department);
        if (!dept) throw NotFound("unknown department '" + doc.department + "'");

        Rng r = rng.child("patient", i);
        PatientProfile p;
        p.gender = demo::gender(r);
        p.name = unique_name(r, taken, false);
        Date birth = demo::birth_date(r, 1940, 2010);
        p.birth_date = birth.str();
        p.telecom = demo::phone(r);
        p.personal_id = demo::personal_id(birth, p.gender, r);
        p.address = demo::address(r);

        constexpr std::array<Preference, 3> kPrefs{Preference::asap, Preference::physician, Preference::date};
        p.preference_primary = kPrefs[r.weighted(cfg.preference_probs)];
        std::vector<Preference> rest;
        for (Preference q : kPrefs) {
            if (q != p.preference_primary) rest.push_back(q);
        }
        p.preference_secondary = rest[static_cast<std::size_t>(r.below(rest.size()))];
        p.history = r.weighted(cfg.symptom_probs) == 0 ? HistoryFlag::without_history : HistoryFlag::with_history;

        std::vector<const DiseaseEntry*> candidates;
        for (const auto& e : kb) {
            if (e.treated_by(doc.department)) candidates.push_back(&e);
        }
        if (candidates.empty()) throw CoverageError("disease KB has no disease for department '" + doc.department + "'");
        const DiseaseEntry& disease = *candidates[static_cast<std::size_t>(r.below(candidates.size()))];
        p.disease = disease.disease;
        p.gold_departments = disease.departments;
        p.symptoms = disease.symptoms;

        auto wants = [&](Preference q) { return p.preference_primary == q || p.preference_secondary == q; };
        if (wants(Preference::physician)) p.preferred_physician = doc.name;
        if (wants(Preference::date)) {
            int last = ts.days() - 1;
            p.valid_from = ts.start_date().plus_days(last == 0 ? 0 : static_cast<int>(r.uniform_int(1, last)));
        }

        p.attending_physician = doc.name;
        p.department = doc.department;
        p.block = block.run;
        p.id = patient_id(hospital, dept->code, p.name);
        out.push_back(std::move(p));
    }
    return out;
}

HospitalDataset synthesize_hospital(const SynthConfig& cfg, const DiseaseKb& kb, int index) {
    cfg.validate();
    const Rng hospital_rng = Rng(cfg.rng_seed).child("hospital", static_cast<std::uint64_t>(index));
    Rng params = hospital_rng.child("time-system");

    HospitalDataset ds;
    ds.hospital_name = hospital_name(index);
    ds.level = cfg.level;
    Date start = cfg.start_date.min.plus_days(
        static_cast<int>(params.uniform_int(0, cfg.start_date.min.days_until(cfg.start_date.max))));
    int start_min = pick_hour_minute(cfg.start_hour, params);
    int end_min = pick_hour_minute(cfg.end_hour, params);
    ds.time = TimeSystem(start_min, end_min, cfg.time_unit_minutes, start, cfg.days, cfg.utc_offset_minutes);

    const auto& catalog = department_catalog();
    int n_dept = static_cast<int>(params.uniform_int(cfg.department_per_hospital.min, cfg.department_per_hospital.max));
    auto chosen = params.sample(catalog.size(), static_cast<std::size_t>(n_dept));
    std::sort(chosen.begin(), chosen.end());
    {
        std::vector<std::string> names;
        for (std::size_t c : chosen) names.emplace_back(catalog[c].name);
        require_coverage(kb, names);
    }

    std::vector<std::string> taken;
    const std::vector<Date> horizon = ds.time.dates();
    for (std::size_t c : chosen) {
        const DepartmentInfo& info = catalog[c];
        Department dept{std::string(info.name), std::string(info.code), {}};
        Rng dept_rng = hospital_rng.child("department", c);
        int n_phys = static_cast<int>(
            dept_rng.uniform_int(cfg.physician_per_department.min, cfg.physician_per_department.max));

        for (int k = 0; k < n_phys; ++k) {
            const Rng phys_rng = dept_rng.child("physician", static_cast<std::uint64_t>(k));
            Rng demo_rng = phys_rng.child("demographics");
            Physician doc;
            doc.gender = demo::gender(demo_rng);
            doc.name = unique_name(demo_rng, taken, true);
            doc.birth_date = demo::birth_date(demo_rng, 1955, 1990).str();
            doc.telecom = demo::phone(demo_rng);
            doc.department = dept.name;
            auto sub = static_cast<std::size_t>(demo_rng.below(info.subspecialties.size()));
            doc.specialty = {std::string(info.subspecialties[sub]), std::string(info.code) + "-" + std::to_string(sub + 1)};
            doc.id = physician_id(ds.hospital_name, info.code, doc.name);

            Rng sched_rng = phys_rng.child("schedule");
            int n_work = static_cast<int>(sched_rng.uniform_int(cfg.working_days.min, cfg.working_days.max));
            auto day_idx = sched_rng.sample(horizon.size(), static_cast<std::size_t>(n_work));
            std::sort(day_idx.begin(), day_idx.end());
            for (std::size_t d : day_idx) doc.working_days.push_back(horizon[d]);
            doc.capacity_per_hour = sample_capacity(cfg.capacity_per_hour, ds.time, sched_rng);
            PrefilledSchedule pre = prefill_schedule(doc.working_days, doc.capacity_per_hour, ds.time, cfg, sched_rng);
            doc.schedule = std::move(pre.table);

            std::vector<AppointmentBlock> blocks;
            for (const SlotRun& run : pre.blocks) blocks.push_back({&doc, run});
            Rng patient_rng = phys_rng.child("patients");
            auto patients = generate_patients(blocks, ds.hospital_name, ds.time, cfg, kb, patient_rng, &taken);
            for (auto& p : patients) ds.patients.push_back(std::move(p));

            dept.physicians.push_back(doc.name);
            ds.physicians.push_back(std::move(doc));
        }
        ds.departments.push_back(std::move(dept));
    }
    return ds;
}

std::vector<HospitalDataset> synthesize(const SynthConfig& cfg, const DiseaseKb& kb) {
    std::vector<HospitalDataset> out;
    out.reserve(static_cast<std::size_t>(cfg.hospital_n));
    for (int i = 0; i < cfg.hospital_n; ++i) out.push_back(synthesize_hospital(cfg, kb, i));
    return out;
}

} // namespace hadmin::synth
