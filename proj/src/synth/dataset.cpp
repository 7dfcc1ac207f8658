#include "hadmin/synth/dataset.hpp"

#include "hadmin/core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace hadmin::synth {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

double hours(int minute) { return minutes_to_hours(minute); }

int minute_of(const json& v, const char* what) {
    if (!v.is_number()) throw FormatError(std::string("dataset: ") + what + " must be a number of hours");
    int m = 0;
    if (!try_hours_to_minutes(v.get<double>(), m)) {
        throw FormatError(std::string("dataset: ") + what + " is not a whole number of minutes");
    }
    return m;
}

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(std::string("dataset: missing key '") + key + "'");
    return *it;
}

std::string str_field(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_string()) throw FormatError(std::string("dataset: key '") + key + "' must be a string");
    return v.get<std::string>();
}

// First element's "value" from a FHIR-like [{"value": ...}] list.
std::string first_value(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_array() || v.empty() || !v[0].contains("value")) {
        throw FormatError(std::string("dataset: key '") + key + "' must be a list of {value}");
    }
    return v[0]["value"].get<std::string>();
}

ordered_json phone_list(const std::string& value) {
    return ordered_json::array({ordered_json{{"system", "phone"}, {"value", value}, {"use", "work"}}});
}

Date parse_date(const std::string& s) { return Date::parse(s); }

} // namespace

const Physician* HospitalDataset::find_physician(std::string_view name) const {
    for (const auto& p : physicians) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const Physician* HospitalDataset::find_physician_by_id(std::string_view id) const {
    for (const auto& p : physicians) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const PatientProfile* HospitalDataset::find_patient(std::string_view name) const {
    for (const auto& p : patients) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

std::string physician_id(std::string_view hospital, std::string_view dept_code, std::string_view name) {
    return hospital_prefix(hospital) + "-" + lower(dept_code) + "-" + id_fragment(name);
}

std::string patient_id(std::string_view hospital, std::string_view dept_code, std::string_view name) {
    return physician_id(hospital, dept_code, name);
}

std::vector<std::pair<int, int>> busy_intervals(const std::vector<SlotStatus>& day, const TimeSystem& ts) {
    std::vector<std::pair<int, int>> out;
    const int n = static_cast<int>(day.size());
    for (int i = 0; i < n;) {
        if (day[static_cast<std::size_t>(i)] != SlotStatus::busy) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && day[static_cast<std::size_t>(j)] == SlotStatus::busy) ++j;
        out.emplace_back(ts.start_minute() + i * ts.unit_minutes(), ts.start_minute() + j * ts.unit_minutes());
        i = j;
    }
    return out;
}

ordered_json to_json(const HospitalDataset& ds) {
    const TimeSystem& ts = ds.time;
    ordered_json meta;
    meta["hospital_name"] = ds.hospital_name;
    meta["start_date"] = ts.start_date().str();
    meta["end_date"] = ts.last_date().str();
    meta["days"] = ts.days();
    meta["department_num"] = ds.departments.size();
    meta["doctor_num"] = ds.physicians.size();
    meta["time"] = ordered_json{{"start_hour", ts.start_hour()}, {"end_hour", ts.end_hour()}, {"time_unit", ts.time_unit()}};
    meta["level"] = ds.level;
    meta["utc_offset_minutes"] = ts.utc_offset_minutes();

    ordered_json depts = ordered_json::object();
    for (const auto& d : ds.departments) {
        depts[d.name] = ordered_json{{"code", d.code}, {"doctor", d.physicians}};
    }

    ordered_json doctors = ordered_json::object();
    for (const auto& p : ds.physicians) {
        ordered_json schedule = ordered_json::object();
        for (Date day : ts.dates()) {
            ordered_json intervals = ordered_json::array();
            auto it = p.schedule.find(day);
            if (it == p.schedule.end()) {
                intervals.push_back({ts.start_hour(), ts.end_hour()});
            } else {
                for (auto [s, e] : busy_intervals(it->second, ts)) intervals.push_back({hours(s), hours(e)});
            }
            schedule[day.str()] = std::move(intervals);
        }
        ordered_json working = ordered_json::array();
        for (Date d : p.working_days) working.push_back(d.str());
        ordered_json doc;
        doc["department"] = p.department;
        doc["specialty"] = ordered_json{{"name", p.specialty.name}, {"code", p.specialty.code}};
        doc["schedule"] = std::move(schedule);
        doc["capacity_per_hour"] = p.capacity_per_hour;
        doc["capacity"] = total_capacity(p, ts);
        doc["gender"] = p.gender;
        doc["telecom"] = phone_list(p.telecom);
        doc["birthDate"] = p.birth_date;
        doc["working_days"] = std::move(working);
        doctors[p.name] = std::move(doc);
    }

    ordered_json patients = ordered_json::array();
    for (const auto& p : ds.patients) {
        ordered_json c;
        c["preference"] = {to_string(p.preference_primary), to_string(p.preference_secondary)};
        c["attending_physician"] = p.attending_physician;
        c["valid_from"] = p.valid_from ? p.valid_from->str() : "N/A";
        c["symptom_level"] = to_string(p.history);
        c["symptom"] = ordered_json{{"disease", p.disease}, {"department", p.gold_departments}, {"symptom", p.symptoms}};
        ordered_json pt;
        pt["patient"] = p.name;
        pt["gender"] = p.gender;
        pt["telecom"] = phone_list(p.telecom);
        pt["birthDate"] = p.birth_date;
        pt["identifier"] = ordered_json::array({ordered_json{{"value", p.personal_id}, {"use", "official"}}});
        pt["address"] = ordered_json::array({ordered_json{{"type", "postal"}, {"text", p.address}, {"use", "home"}}});
        pt["constraint"] = std::move(c);
        const int first = ts.start_minute() + p.block.first * ts.unit_minutes();
        pt["appointment"] = ordered_json{{"date", p.block.date.str()},
                                         {"start", hours(first)},
                                         {"end", hours(first + p.block.length * ts.unit_minutes())}};
        patients.push_back(std::move(pt));
    }

    ordered_json out;
    out["metadata"] = std::move(meta);
    out["department"] = std::move(depts);
    out["doctor"] = std::move(doctors);
    out["patient"] = std::move(patients);
    return out;
}

HospitalDataset dataset_from_json(const json& j) {
    try {
        HospitalDataset ds;
        const json& meta = field(j, "metadata");
        ds.hospital_name = str_field(meta, "hospital_name");
        ds.level = meta.value("level", std::string("custom"));
        const json& time = field(meta, "time");
        int unit = minute_of(field(time, "time_unit"), "time_unit");
        ds.time = TimeSystem(minute_of(field(time, "start_hour"), "start_hour"),
                             minute_of(field(time, "end_hour"), "end_hour"), unit,
                             parse_date(str_field(meta, "start_date")), field(meta, "days").get<int>(),
                             meta.value("utc_offset_minutes", 9 * 60));
        const TimeSystem& ts = ds.time;

        for (const auto& [name, d] : field(j, "department").items()) {
            Department dept{name, str_field(d, "code"), {}};
            for (const auto& doc : field(d, "doctor")) dept.physicians.push_back(doc.get<std::string>());
            ds.departments.push_back(std::move(dept));
        }
        // JSON objects come back key-sorted; restore catalog order.
        auto rank = [](const std::string& name) {
            const auto& cat = department_catalog();
            for (std::size_t i = 0; i < cat.size(); ++i) {
                if (cat[i].name == name) return i;
            }
            return cat.size();
        };
        std::stable_sort(ds.departments.begin(), ds.departments.end(),
                         [&](const Department& a, const Department& b) { return rank(a.name) < rank(b.name); });

        const json& doctors = field(j, "doctor");
        // Department order, then listing order, so ids and iteration match synthesis.
        for (const auto& dept : ds.departments) {
            for (const auto& name : dept.physicians) {
                auto it = doctors.find(name);
                if (it == doctors.end()) throw FormatError("dataset: doctor '" + name + "' listed but not described");
                const json& d = *it;
                Physician p;
                p.name = name;
                p.department = str_field(d, "department");
                p.specialty = {str_field(field(d, "specialty"), "name"), str_field(field(d, "specialty"), "code")};
                p.capacity_per_hour = field(d, "capacity_per_hour").get<int>();
                if (!is_valid_capacity(p.capacity_per_hour, ts)) {
                    throw FormatError("dataset: capacity_per_hour of '" + name + "' does not divide 1/time_unit");
                }
                p.gender = str_field(d, "gender");
                p.telecom = first_value(d, "telecom");
                p.birth_date = str_field(d, "birthDate");
                p.id = physician_id(ds.hospital_name, dept.code, name);

                const json& schedule = field(d, "schedule");
                std::vector<Date> working;
                if (d.contains("working_days")) {
                    for (const auto& w : d["working_days"]) working.push_back(parse_date(w.get<std::string>()));
                } else {
                    // Without an explicit list, a day whose only interval is the whole day is off.
                    for (const auto& [day, intervals] : schedule.items()) {
                        bool off = intervals.size() == 1 && minute_of(intervals[0][0], "busy start") == ts.start_minute() &&
                                   minute_of(intervals[0][1], "busy end") == ts.end_minute();
                        if (!off) working.push_back(parse_date(day));
                    }
                }
                std::sort(working.begin(), working.end());
                for (Date day : working) {
                    if (!ts.in_horizon(day)) throw FormatError("dataset: working day " + day.str() + " outside horizon");
                    std::vector<SlotStatus> table(static_cast<std::size_t>(ts.slots_per_day()), SlotStatus::free);
                    auto sit = schedule.find(day.str());
                    if (sit != schedule.end()) {
                        for (const auto& iv : *sit) {
                            int s = minute_of(iv.at(0), "busy start");
                            int e = minute_of(iv.at(1), "busy end");
                            if (s < ts.start_minute() || e > ts.end_minute() || e <= s ||
                                (s - ts.start_minute()) % ts.unit_minutes() != 0 ||
                                (e - ts.start_minute()) % ts.unit_minutes() != 0) {
                                throw FormatError("dataset: busy interval off the slot grid for '" + name + "'");
                            }
                            for (int m = s; m < e; m += ts.unit_minutes()) {
                                table[static_cast<std::size_t>((m - ts.start_minute()) / ts.unit_minutes())] = SlotStatus::busy;
                            }
                        }
                    }
                    p.schedule.emplace(day, std::move(table));
                }
                p.working_days = std::move(working);
                ds.physicians.push_back(std::move(p));
            }
        }

        for (const auto& pt : field(j, "patient")) {
            PatientProfile p;
            p.name = str_field(pt, "patient");
            p.gender = str_field(pt, "gender");
            p.telecom = first_value(pt, "telecom");
            p.birth_date = str_field(pt, "birthDate");
            p.personal_id = first_value(pt, "identifier");
            {
                const json& addr = field(pt, "address");
                if (!addr.is_array() || addr.empty()) throw FormatError("dataset: address must be a list");
                p.address = str_field(addr[0], "text");
            }
            const json& c = field(pt, "constraint");
            const json& prefs = field(c, "preference");
            if (!prefs.is_array() || prefs.size() != 2) throw FormatError("dataset: preference must hold two entries");
            p.preference_primary = parse_preference(prefs[0].get<std::string>());
            p.preference_secondary = parse_preference(prefs[1].get<std::string>());
            if (p.preference_primary == p.preference_secondary) {
                throw FormatError("dataset: secondary preference repeats the primary for '" + p.name + "'");
            }
            p.attending_physician = str_field(c, "attending_physician");
            const Physician* doc = ds.find_physician(p.attending_physician);
            if (!doc) throw FormatError("dataset: unknown attending physician '" + p.attending_physician + "'");
            p.department = doc->department;
            if (p.preference_primary == Preference::physician || p.preference_secondary == Preference::physician) {
                p.preferred_physician = p.attending_physician;
            }
            std::string valid = str_field(c, "valid_from");
            if (valid != "N/A") p.valid_from = parse_date(valid);
            p.history = parse_history_flag(str_field(c, "symptom_level"));
            const json& sym = field(c, "symptom");
            p.disease = str_field(sym, "disease");
            for (const auto& d : field(sym, "department")) p.gold_departments.push_back(d.get<std::string>());
            for (const auto& s : field(sym, "symptom")) p.symptoms.push_back(s.get<std::string>());
            if (pt.contains("appointment")) {
                const json& a = pt["appointment"];
                int s = minute_of(field(a, "start"), "appointment start");
                int e = minute_of(field(a, "end"), "appointment end");
                p.block = SlotRun{parse_date(str_field(a, "date")), (s - ts.start_minute()) / ts.unit_minutes(),
                                  (e - s) / ts.unit_minutes()};
            }
            const DepartmentInfo* info = find_department(p.department);
            p.id = patient_id(ds.hospital_name, info ? info->code : std::string_view(p.department), p.name);
            ds.patients.push_back(std::move(p));
        }
        return ds;
    } catch (const json::exception& e) {
        throw FormatError(std::string("dataset: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("dataset: ") + e.what());
    }
}

std::string dump_dataset(const HospitalDataset& ds) { return to_json(ds).dump(2) + "\n"; }

void save_dataset(const HospitalDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BackendError("cannot write dataset file " + path.string());
    out << dump_dataset(ds);
}

HospitalDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open dataset file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("dataset " + path.string() + ": " + e.what());
    }
    return dataset_from_json(j);
}

} // namespace hadmin::synth
