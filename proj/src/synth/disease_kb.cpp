#include "hadmin/synth/disease_kb.hpp"

#include "hadmin/core/errors.hpp"
#include "hadmin/core/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>

#ifndef HADMIN_DATA_DIR
#define HADMIN_DATA_DIR "data"
#endif

namespace hadmin::synth {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* key, int line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->empty()) {
        throw FormatError("disease KB line " + std::to_string(line) + ": '" + key + "' must be a non-empty list");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string() || v.get<std::string>().empty()) {
            throw FormatError("disease KB line " + std::to_string(line) + ": '" + key + "' holds a non-string");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

bool DiseaseEntry::treated_by(std::string_view department) const {
    return std::find(departments.begin(), departments.end(), department) != departments.end();
}

DiseaseKb parse_disease_kb(std::istream& in) {
    DiseaseKb kb;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("disease KB line " + std::to_string(line) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("disease") || !j["disease"].is_string() ||
            j["disease"].get<std::string>().empty()) {
            throw FormatError("disease KB line " + std::to_string(line) + ": missing 'disease' name");
        }
        DiseaseEntry e;
        e.disease = j["disease"].get<std::string>();
        e.departments = string_list(j, "departments", line);
        e.symptoms = string_list(j, "symptoms", line);
        for (const auto& d : e.departments) {
            if (!is_known_department(d)) {
                throw FormatError("disease KB line " + std::to_string(line) + ": unknown department '" + d + "'");
            }
        }
        kb.push_back(std::move(e));
    }
    return kb;
}

DiseaseKb load_disease_kb(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open disease KB " + path.string());
    return parse_disease_kb(in);
}

std::map<std::string, int> department_counts(const DiseaseKb& kb) {
    std::map<std::string, int> counts;
    for (const auto& e : kb) {
        for (const auto& d : e.departments) ++counts[d];
    }
    return counts;
}

void require_coverage(const DiseaseKb& kb, const std::vector<std::string>& departments) {
    for (const auto& d : departments) {
        bool covered = std::any_of(kb.begin(), kb.end(), [&](const DiseaseEntry& e) { return e.treated_by(d); });
        if (!covered) throw CoverageError("disease KB has no disease for department '" + d + "'");
    }
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("HADMIN_DATA_DIR"); env && *env) return env;
    return HADMIN_DATA_DIR;
}

std::filesystem::path default_disease_kb_path() { return data_dir() / "diseases.jsonl"; }

} // namespace hadmin::synth
