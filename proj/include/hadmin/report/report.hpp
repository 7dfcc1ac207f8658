#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hadmin::report {

/// Column headers of the error tables, in display order.
const std::vector<std::string>& intake_error_columns();      // "C1-1. IF" ... "C1-3. IDPI"
const std::vector<std::string>& scheduling_error_columns();  // "C2-1. IS" ... "C3-1. FI"

/// "174 / 516 (33.7%)" with thousands separators.
std::string ratio_cell(long part, long whole);
/// "12 (6.9%)" as a share of `errors`, "-" for zero.
std::string share_cell(long n, long errors);
std::string with_commas(long n);

/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(const std::vector<double>& xs);

struct ErrorRow {
    std::string level;
    std::string model;
    std::string mode;
    long tasks = 0;
    long successes = 0;
    long errors = 0;
    std::map<std::string, long> counts;  // column header -> count
};

/// Aggregated tables over transcript records. Rows are keyed by (level, model, mode) and
/// sorted by key.
struct Report {
    nlohmann::ordered_json success;        // mean/std success per task kind across hospitals
    std::vector<ErrorRow> intake;
    std::vector<ErrorRow> scheduling;      // scheduling, reschedule and cancel tasks
    nlohmann::ordered_json department;     // average rounds and unmasked department errors
    nlohmann::ordered_json tools;          // wrong tool, fallback totals and failures
    nlohmann::ordered_json confusion;      // gold -> predicted department counts
    long records = 0;
    long error_records = 0;
};

Report build(const std::vector<nlohmann::json>& records);

/// Accounting violations: code counts that do not sum to Errors, Errors + successes that do
/// not equal the task count, or error records missing from the cells. Empty when consistent.
std::vector<std::string> reconcile(const Report& r);

nlohmann::ordered_json to_json(const Report& r);
/// report.json plus one CSV per table. Returns the written paths.
std::vector<std::filesystem::path> write(const Report& r, const std::filesystem::path& dir);
/// Plain-text rendering of every table.
std::string render_text(const Report& r);

} // namespace hadmin::report
