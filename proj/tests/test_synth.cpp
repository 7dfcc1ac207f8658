#include "hadmin/core/errors.hpp"
#include "hadmin/synth/config.hpp"
#include "hadmin/synth/dataset.hpp"
#include "hadmin/synth/disease_kb.hpp"
#include "hadmin/synth/synthesizer.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "support/synth_bounds.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace hadmin;
using namespace hadmin::synth;

namespace {

const char* kExampleYaml = R"(
hospital_n: 10
start_date:
  min: 2025-03-17
  max: 2025-09-21
days: 7
time_unit: 0.25
start_hour:
  min: 9
  max: 10
end_hour:
  min: 18
  max: 19
department_per_hospital:
  min: 7
  max: 9
physician_per_department:
  min: 2
  max: 3
working_days:
  min: 3
  max: 4
capacity_per_hour:
  min: 1
  max: 4
busy_schedule_prob: 0
busy_schedule_ratio:
  min: 0.4
  max: 0.6
appointment_ratio:
  min: 0.2
  max: 0.5
preference:
  type: [asap, physician, date]
  probs: [0.4, 0.4, 0.2]
symptom:
  type: [without_history, with_history]
  probs: [0.7, 0.3]
)";

const DiseaseKb& bundled_kb() {
    static const DiseaseKb kb = load_disease_kb(default_disease_kb_path());
    return kb;
}

TimeSystem quarter_day(int days = 7) { return TimeSystem::from_hours(9.0, 17.0, 0.25, Date(2025, 3, 17), days); }

} // namespace

TEST(SynthConfig, ParsesExampleYaml) {
    SynthConfig c = parse_synth_config(YAML::Load(kExampleYaml));
    EXPECT_EQ(c.hospital_n, 10);
    EXPECT_EQ(c.start_date.min, Date(2025, 3, 17));
    EXPECT_EQ(c.start_date.max, Date(2025, 9, 21));
    EXPECT_EQ(c.time_unit_minutes, 15);
    EXPECT_EQ(c.department_per_hospital.min, 7);
    EXPECT_EQ(c.physician_per_department.max, 3);
    EXPECT_EQ(c.capacity_per_hour.max, 4);
    EXPECT_DOUBLE_EQ(c.preference_probs[0], 0.4);
    EXPECT_DOUBLE_EQ(c.symptom_probs[1], 0.3);
}

TEST(SynthConfig, AcceptsMisspelledDepartmentKey) {
    std::string text = kExampleYaml;
    text.replace(text.find("department_per_hospital"), 23, "departemnt_per_hospital");
    EXPECT_EQ(parse_synth_config(YAML::Load(text)).department_per_hospital.min, 7);
}

TEST(SynthConfig, ProbabilityVectorsMustSumToOneExactly) {
    std::string text = kExampleYaml;
    text.replace(text.find("[0.4, 0.4, 0.2]"), 15, "[0.3, 0.3, 0.3]");
    EXPECT_THROW(parse_synth_config(YAML::Load(text)), ConfigError);
    // 0.1 + 0.2 + 0.7 is inexact in binary floating point but exact in decimal.
    std::string ok = kExampleYaml;
    ok.replace(ok.find("[0.4, 0.4, 0.2]"), 15, "[0.1, 0.2, 0.7]");
    EXPECT_NO_THROW(parse_synth_config(YAML::Load(ok)));
}

TEST(SynthConfig, RejectsBadRanges) {
    auto with = [](const std::string& from, const std::string& to) {
        std::string t = kExampleYaml;
        t.replace(t.find(from), from.size(), to);
        return YAML::Load(t);
    };
    EXPECT_THROW(parse_synth_config(with("min: 3\n  max: 4", "min: 5\n  max: 4")), ConfigError);
    EXPECT_THROW(parse_synth_config(with("min: 3\n  max: 4", "min: 3\n  max: 8")), ConfigError);  // > days
    EXPECT_THROW(parse_synth_config(with("min: 1\n  max: 4", "min: 3\n  max: 3")), ConfigError);  // no divisor of 4
    EXPECT_THROW(parse_synth_config(with("days: 7", "")), ConfigError);
}

TEST(SynthConfig, LevelPresets) {
    SynthConfig p = level_preset("primary");
    EXPECT_EQ(p.time_unit_minutes, 15);
    EXPECT_EQ(p.department_per_hospital, (Range<int>{2, 3}));
    EXPECT_EQ(p.capacity_per_hour, (Range<int>{4, 4}));
    SynthConfig t = level_preset("tertiary");
    EXPECT_EQ(t.time_unit_minutes, 3);
    EXPECT_EQ(t.capacity_per_hour, (Range<int>{1, 20}));
    EXPECT_DOUBLE_EQ(t.symptom_probs[1], 0.8);
    EXPECT_THROW(level_preset("quaternary"), ConfigError);
}

TEST(DiseaseKb, BundledSampleCoversEveryDepartment) {
    const auto& kb = bundled_kb();
    auto counts = department_counts(kb);
    for (const auto& d : department_catalog()) EXPECT_GT(counts[std::string(d.name)], 0) << d.name;
    bool ckd = false, asthma = false;
    for (const auto& e : kb) {
        if (e.disease == "Chronic kidney disease") ckd = e.treated_by("nephrology");
        if (e.disease == "Asthma") asthma = e.treated_by("pulmonology") && e.treated_by("allergy");
    }
    EXPECT_TRUE(ckd);
    EXPECT_TRUE(asthma);
}

TEST(DiseaseKb, CountsMatchManifest) {
    std::ifstream in(data_dir() / "diseases.manifest.json");
    ASSERT_TRUE(in);
    auto manifest = nlohmann::json::parse(in);
    // Independent recount straight from the raw lines.
    std::ifstream raw(default_disease_kb_path());
    std::map<std::string, int> recount;
    int entries = 0;
    std::string line;
    while (std::getline(raw, line)) {
        if (line.empty()) continue;
        ++entries;
        auto entry = nlohmann::json::parse(line);
        for (const auto& d : entry["departments"]) ++recount[d.get<std::string>()];
    }
    EXPECT_EQ(manifest["entries"].get<int>(), entries);
    EXPECT_EQ(static_cast<int>(bundled_kb().size()), entries);
    for (const auto& [dept, n] : manifest["departments"].items()) EXPECT_EQ(recount[dept], n.get<int>()) << dept;
    EXPECT_EQ(department_counts(bundled_kb()), recount);
}

TEST(DiseaseKb, RejectsMalformedRecords) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_disease_kb(in);
    };
    EXPECT_THROW(parse(R"({"disease": "X", "departments": ["asthma-clinic"], "symptoms": ["a"]})"), FormatError);
    EXPECT_THROW(parse(R"({"disease": "X", "departments": ["allergy"], "symptoms": []})"), FormatError);
    EXPECT_THROW(parse(R"({"disease": "X", "departments": [], "symptoms": ["a"]})"), FormatError);
    EXPECT_THROW(parse("{not json"), FormatError);
    EXPECT_EQ(parse("\n" R"({"disease": "X", "departments": ["allergy"], "symptoms": ["a"]})" "\n").size(), 1u);
}

TEST(SampleCapacity, FixedRangeAndSingleDivisor) {
    Rng rng(5);
    TimeSystem quarter = quarter_day();
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_capacity({4, 4}, quarter, rng), 4);
    TimeSystem hourly = TimeSystem::from_hours(9.0, 17.0, 1.0, Date(2025, 3, 17), 7);
    EXPECT_EQ(sample_capacity({1, 1}, hourly, rng), 1);
    EXPECT_THROW(sample_capacity({3, 3}, quarter, rng), ConfigError);
}

TEST(SampleCapacity, UniformOverDivisors) {
    Rng rng(2024);
    TimeSystem quarter = quarter_day();
    std::map<int, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[sample_capacity({1, 4}, quarter, rng)];
    EXPECT_EQ(counts.size(), 3u);
    EXPECT_EQ(counts.count(3), 0u);
    double chi2 = 0;
    for (auto [cap, k] : counts) chi2 += (k - n / 3.0) * (k - n / 3.0) / (n / 3.0);
    // Two degrees of freedom: survival function is exp(-x/2).
    EXPECT_GT(std::exp(-chi2 / 2), 0.01);
}

TEST(Prefill, NoBusySlotsWhenProbabilityZero) {
    SynthConfig cfg = level_preset("secondary");
    cfg.busy_schedule_prob = 0;
    Rng rng(9);
    TimeSystem ts = quarter_day();
    auto pre = prefill_schedule(ts.dates(), 2, ts, cfg, rng);
    for (const auto& [day, table] : pre.table) {
        for (auto s : table) EXPECT_EQ(s, SlotStatus::free);
    }
}

TEST(Prefill, ZeroAppointmentRatioGivesNoBlocks) {
    SynthConfig cfg = level_preset("secondary");
    cfg.appointment_ratio = {0, 0};
    Rng rng(9);
    TimeSystem ts = quarter_day();
    EXPECT_TRUE(prefill_schedule(ts.dates(), 2, ts, cfg, rng).blocks.empty());
}

TEST(Prefill, HalfRatioOn32SlotDayGivesEightTwoSlotBlocks) {
    SynthConfig cfg = level_preset("secondary");
    cfg.appointment_ratio = {0.5, 0.5};
    cfg.busy_schedule_prob = 0;
    TimeSystem ts = quarter_day(1);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto pre = prefill_schedule(ts.dates(), 2, ts, cfg, rng);
        ASSERT_EQ(pre.blocks.size(), 8u);
        std::set<int> covered;
        for (const auto& b : pre.blocks) {
            EXPECT_EQ(b.length, 2);
            for (int i = b.first; i <= b.last(); ++i) EXPECT_TRUE(covered.insert(i).second);
        }
        EXPECT_EQ(covered.size(), 16u);
        EXPECT_LT(*covered.rbegin(), 32);
    }
}

TEST(Prefill, BlocksAvoidBusySlotsAndBusyFractionFollowsRatio) {
    SynthConfig cfg = level_preset("secondary");
    cfg.busy_schedule_prob = 1.0;
    cfg.busy_schedule_ratio = {0.5, 0.5};
    TimeSystem ts = quarter_day(3);
    Rng rng(77);
    auto pre = prefill_schedule(ts.dates(), 1, ts, cfg, rng);
    for (const auto& [day, table] : pre.table) {
        int busy = 0;
        for (auto s : table) busy += s == SlotStatus::busy;
        EXPECT_EQ(busy, 16);
    }
    for (const auto& b : pre.blocks) {
        EXPECT_EQ(b.length, 4);
        const auto& table = pre.table.at(b.date);
        for (int i = b.first; i <= b.last(); ++i) EXPECT_EQ(table[static_cast<std::size_t>(i)], SlotStatus::free);
    }
}

TEST(GeneratePatients, DegeneratePreferenceVector) {
    SynthConfig cfg = level_preset("primary");
    cfg.preference_probs = {1, 0, 0};
    TimeSystem ts = quarter_day();
    Physician doc;
    doc.name = "Dr. Test Person";
    doc.department = "cardiology";
    std::vector<AppointmentBlock> blocks(200, AppointmentBlock{&doc, SlotRun{ts.start_date(), 0, 1}});
    Rng rng(1);
    auto pts = generate_patients(blocks, "hospital_00", ts, cfg, bundled_kb(), rng);
    ASSERT_EQ(pts.size(), 200u);
    std::set<std::string> names;
    for (const auto& p : pts) {
        EXPECT_EQ(p.preference_primary, Preference::asap);
        EXPECT_NE(p.preference_secondary, Preference::asap);
        EXPECT_TRUE(std::find(p.gold_departments.begin(), p.gold_departments.end(), "cardiology") !=
                    p.gold_departments.end());
        EXPECT_TRUE(names.insert(p.name).second);
        if (p.preference_secondary == Preference::physician) EXPECT_EQ(p.preferred_physician, doc.name);
        if (p.preference_secondary == Preference::date) {
            ASSERT_TRUE(p.valid_from.has_value());
            EXPECT_GT(*p.valid_from, ts.start_date());
            EXPECT_TRUE(ts.in_horizon(*p.valid_from));
        }
    }
}

TEST(GeneratePatients, HistoryFrequencyMatchesConfiguredProbability) {
    SynthConfig cfg = level_preset("tertiary");
    TimeSystem ts = TimeSystem::from_hours(9.0, 18.0, 0.05, Date(2025, 3, 17), 7);
    Physician doc;
    doc.name = "Dr. Test Person";
    doc.department = "nephrology";
    std::vector<AppointmentBlock> blocks(10000, AppointmentBlock{&doc, SlotRun{ts.start_date(), 0, 1}});
    Rng rng(123);
    auto pts = generate_patients(blocks, "hospital_00", ts, cfg, bundled_kb(), rng);
    int with = 0, physician_primary = 0;
    for (const auto& p : pts) {
        with += p.history == HistoryFlag::with_history;
        physician_primary += p.preference_primary == Preference::physician;
        if (p.preference_primary == Preference::physician) EXPECT_TRUE(p.preferred_physician.has_value());
        if (p.preference_primary == Preference::date) EXPECT_TRUE(p.valid_from.has_value());
    }
    EXPECT_NEAR(with / 10000.0, 0.8, 0.01);
    EXPECT_NEAR(physician_primary / 10000.0, 0.4, 0.015);
}

TEST(GeneratePatients, MissingDepartmentIsCoverageError) {
    DiseaseKb kb{{"Gout", {"rheumatology"}, {"Joint pain"}}};
    Physician doc;
    doc.name = "Dr. Test Person";
    doc.department = "cardiology";
    TimeSystem ts = quarter_day();
    std::vector<AppointmentBlock> blocks{{&doc, SlotRun{ts.start_date(), 0, 1}}};
    Rng rng(1);
    EXPECT_THROW(generate_patients(blocks, "hospital_00", ts, level_preset("primary"), kb, rng), CoverageError);
    EXPECT_THROW(synthesize(level_preset("tertiary"), kb), CoverageError);
}

TEST(Synthesize, PrimaryLevelStructure) {
    SynthConfig cfg = level_preset("primary", 11);
    auto hospitals = synthesize(cfg, bundled_kb());
    ASSERT_EQ(hospitals.size(), 3u);
    for (const auto& h : hospitals) {
        EXPECT_GE(h.departments.size(), 2u);
        EXPECT_LE(h.departments.size(), 3u);
        std::size_t blocks = 0;
        for (const auto& d : h.departments) EXPECT_EQ(d.physicians.size(), 1u);
        for (const auto& p : h.physicians) {
            EXPECT_EQ(p.capacity_per_hour, 4);
            EXPECT_GE(p.working_days.size(), 5u);
            EXPECT_LE(p.working_days.size(), 7u);
        }
        for (const auto& pt : h.patients) {
            ++blocks;
            const Physician* doc = h.find_physician(pt.attending_physician);
            ASSERT_NE(doc, nullptr);
            EXPECT_EQ(pt.block.length, appointment_slot_count(doc->capacity_per_hour, h.time));
            EXPECT_TRUE(doc->works_on(pt.block.date));
        }
        EXPECT_EQ(blocks, h.patients.size());
    }
}

TEST(Synthesize, EmptyHorizonYieldsNoPatients) {
    SynthConfig cfg = level_preset("primary", 3);
    cfg.days = 1;
    cfg.working_days = {0, 0};
    for (const auto& h : synthesize(cfg, bundled_kb())) {
        EXPECT_TRUE(h.patients.empty());
        for (const auto& p : h.physicians) EXPECT_TRUE(p.working_days.empty());
    }
}

TEST(Synthesize, SecondaryCapacitiesAreDivisors) {
    SynthConfig cfg = level_preset("secondary", 99);
    cfg.hospital_n = 20;
    for (const auto& h : synthesize(cfg, bundled_kb())) {
        for (const auto& p : h.physicians) {
            EXPECT_TRUE(p.capacity_per_hour == 1 || p.capacity_per_hour == 2 || p.capacity_per_hour == 4);
        }
    }
}

TEST(Synthesize, DeterministicPerSeedAndSeedSensitive) {
    SynthConfig cfg = level_preset("secondary", 5);
    auto a = synthesize(cfg, bundled_kb());
    auto b = synthesize(cfg, bundled_kb());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(dump_dataset(a[i]), dump_dataset(b[i]));
    cfg.rng_seed = 6;
    EXPECT_NE(dump_dataset(synthesize(cfg, bundled_kb())[0]), dump_dataset(a[0]));
}

TEST(Dataset, RoundTripsThroughJson) {
    for (const char* level : {"primary", "secondary", "tertiary"}) {
        auto hospitals = synthesize(level_preset(level, 8), bundled_kb());
        for (const auto& h : hospitals) {
            std::string text = dump_dataset(h);
            HospitalDataset back = dataset_from_json(nlohmann::json::parse(text));
            EXPECT_EQ(back, h) << level;
            EXPECT_EQ(dump_dataset(back), text);
        }
    }
}

TEST(Dataset, ParsesPublishedExampleShape) {
    const char* text = R"({
    "metadata": {
        "hospital_name": "hospital_00",
            "start_date": "2025-04-17",
            "end_date": "2025-04-18",
            "days": 2,
            "department_num": 1,
            "doctor_num": 1,
            "time": {"start_hour": 9.0, "end_hour": 18.0, "time_unit": 0.25}
    },
    "department": {
        "endocrinology/metabolism": {"code": "IMEND", "doctor": ["Dr. Benedict Tomerlin"]}
    },
    "doctor": {
        "Dr. Benedict Tomerlin": {
            "department": "endocrinology/metabolism",
            "specialty": {"name": "Osteoporosis and Metabolic Bone Disease", "code": "IMEND-2"},
            "schedule": {"2025-04-17": [], "2025-04-18": [[9.0, 18.0]]},
            "capacity_per_hour": 4,
            "capacity": 36,
            "gender": "female",
            "telecom": [{"system": "phone", "value": "+82844559851970", "use": "work"}],
            "birthDate": "1961-03-21"
        }
    },
    "patient": [{
        "patient": "Reynaldo Verlotte",
        "gender": "female",
        "telecom": [{"system": "phone", "value": "+8275129708711", "use": "work"}],
        "birthDate": "1982-09-21",
        "identifier": [{"value": "820921-1133985", "use": "official"}],
        "address": [{"type": "postal", "text": "0, Hoedong-ro, Yecheon-gun, Gunsan-si", "use": "home"}],
        "constraint": {
            "preference": ["physician", "asap"],
            "attending_physician": "Dr. Benedict Tomerlin",
            "valid_from": "N/A",
            "symptom_level": "without_history",
            "symptom": {
                "disease": "Dehydration",
                "department": ["endocrinology/metabolism"],
                "symptom": ["Peeing less often than usual", "Headache"]
            }
        }
    }]
})";
    HospitalDataset ds = dataset_from_json(nlohmann::json::parse(text));
    ASSERT_EQ(ds.physicians.size(), 1u);
    const Physician& doc = ds.physicians[0];
    EXPECT_EQ(doc.working_days, std::vector<Date>{Date(2025, 4, 17)});
    EXPECT_EQ(total_capacity(doc, ds.time), 36);
    EXPECT_EQ(doc.id, "hospital00-imend-Dr.BenedictTomerlin");
    ASSERT_EQ(ds.patients.size(), 1u);
    const PatientProfile& p = ds.patients[0];
    EXPECT_EQ(p.preferred_physician, "Dr. Benedict Tomerlin");
    EXPECT_FALSE(p.valid_from.has_value());
    EXPECT_EQ(p.disease, "Dehydration");
    EXPECT_EQ(p.symptoms, (std::vector<std::string>{"Peeing less often than usual", "Headache"}));
    EXPECT_EQ(p.personal_id, "820921-1133985");

    auto out = to_json(ds);
    EXPECT_EQ(out["doctor"]["Dr. Benedict Tomerlin"]["capacity"], 36);
    EXPECT_EQ(out["doctor"]["Dr. Benedict Tomerlin"]["schedule"]["2025-04-18"].dump(), "[[9.0,18.0]]");
    EXPECT_EQ(out["metadata"]["end_date"], "2025-04-18");
}

TEST(Synthesize, EveryLevelFitsItsConfigBounds) {
    for (const char* level : {"primary", "secondary", "tertiary"}) {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const SynthConfig cfg = level_preset(level, seed);
            for (const auto& v : fixtures::synth_violations(cfg, synthesize(cfg, bundled_kb()))) {
                ADD_FAILURE() << level << " seed " << seed << ": " << v;
            }
        }
    }
}

TEST(Synthesize, BusyPrefillAndShippedConfigsFitBounds) {
    SynthConfig cfg = level_preset("secondary", 17);
    cfg.busy_schedule_prob = 0.5;
    for (const auto& v : fixtures::synth_violations(cfg, synthesize(cfg, bundled_kb()))) ADD_FAILURE() << v;
    for (const char* level : {"primary", "secondary", "tertiary"}) {
        const auto path = std::filesystem::path(HADMIN_DATA_DIR).parent_path() / "configs" / (std::string(level) + ".yaml");
        EXPECT_EQ(load_synth_config(path), level_preset(level)) << path;
    }
}
