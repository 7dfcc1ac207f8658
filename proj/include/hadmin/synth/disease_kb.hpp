#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hadmin::synth {

struct DiseaseEntry {
    std::string disease;
    std::vector<std::string> departments;  // gold labels
    std::vector<std::string> symptoms;

    bool treated_by(std::string_view department) const;
    bool operator==(const DiseaseEntry&) const = default;
};

using DiseaseKb = std::vector<DiseaseEntry>;

/// One JSON object per line: {"disease": ..., "departments": [...], "symptoms": [...]}.
/// Blank lines are skipped. Throws FormatError naming the offending line.
DiseaseKb parse_disease_kb(std::istream& in);
DiseaseKb load_disease_kb(const std::filesystem::path& path);

/// Entries per department, counting a multi-department disease once for each department.
std::map<std::string, int> department_counts(const DiseaseKb& kb);

/// Throws CoverageError unless every named department has at least one disease.
void require_coverage(const DiseaseKb& kb, const std::vector<std::string>& departments);

/// Directory holding the bundled data files (diseases.jsonl, prompts/...). Resolution order:
/// $HADMIN_DATA_DIR, then the source tree location baked in at build time.
std::filesystem::path data_dir();
std::filesystem::path default_disease_kb_path();

} // namespace hadmin::synth
