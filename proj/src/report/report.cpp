#include "hadmin/report/report.hpp"

#include "hadmin/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace hadmin::report {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Key = std::tuple<std::string, std::string, std::string>;

Key key_of(const json& r) {
    return {r.value("level", std::string()), r.value("model", std::string()), r.value("mode", std::string())};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string column_for(const std::string& code, const std::string& criterion) { return criterion + ". " + code; }

bool is_intake(const json& r) { return r.value("task", std::string()) == "intake"; }

const std::vector<std::string> kTaskKinds = {"intake", "scheduling", "reschedule", "cancel"};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

std::vector<std::string> error_header(const std::vector<std::string>& cols) {
    std::vector<std::string> h = {"Level", "Model", "Mode", "Tasks", "Errors"};
    h.insert(h.end(), cols.begin(), cols.end());
    return h;
}

std::vector<std::vector<std::string>> error_rows(const std::vector<ErrorRow>& rows, const std::vector<std::string>& cols) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) {
        std::vector<std::string> cells = {r.level, r.model, r.mode, with_commas(r.tasks), ratio_cell(r.errors, r.tasks)};
        for (const auto& c : cols) {
            auto it = r.counts.find(c);
            cells.push_back(share_cell(it == r.counts.end() ? 0 : it->second, r.errors));
        }
        out.push_back(std::move(cells));
    }
    return out;
}

std::vector<std::vector<std::string>> json_rows(const ordered_json& rows, const std::vector<std::string>& header) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (const auto& h : header) {
            const auto& v = r.at(h);
            cells.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
        out.push_back(std::move(cells));
    }
    return out;
}

// Code points, so "±" counts as one column.
std::size_t display_width(const std::string& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string text_table(const std::string& title, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> w(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = display_width(header[i]);
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], display_width(r[i]));
    }
    std::ostringstream out;
    out << title << '\n';
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "  " : "") << cells[i] << std::string(w[i] - display_width(cells[i]), ' ');
        }
        out << '\n';
    };
    line(header);
    if (rows.empty()) out << "(no tasks)\n";
    for (const auto& r : rows) line(r);
    return out.str();
}

const std::vector<std::string> kSuccessHeader = {"Level", "Model", "Mode", "Hospitals", "Intake", "Scheduling",
                                                 "Reschedule", "Cancel"};
const std::vector<std::string> kDeptHeader = {"Level", "Model", "Mode", "Tasks", "Avg Rounds", "Dept Errors (unmasked)",
                                              "With History", "Without History"};
const std::vector<std::string> kToolsHeader = {"Level", "Model", "Mode", "Tasks", "Wrong Tool", "Fallback Total",
                                               "Fallback Fail"};
const std::vector<std::string> kConfusionHeader = {"Level", "Model", "Mode", "Gold", "Predicted", "Count"};

} // namespace

const std::vector<std::string>& intake_error_columns() {
    static const std::vector<std::string> c = {"C1-1. IF", "C1-2. IS", "C1-3. ID", "C1-3. IPI", "C1-3. IDPI"};
    return c;
}

const std::vector<std::string>& scheduling_error_columns() {
    static const std::vector<std::string> c = {"C2-1. IS", "C2-2. IF",  "C2-3. PC",  "C2-4. IVS", "C2-5. WD",
                                               "C2-6. TC", "C2-7. IP",  "C2-7. IDT", "C2-8. NET", "C3-1. FI"};
    return c;
}

std::string with_commas(long n) {
    std::string s = std::to_string(std::labs(n));
    for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
    return n < 0 ? "-" + s : s;
}

std::string ratio_cell(long part, long whole) {
    const double p = whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
    return with_commas(part) + " / " + with_commas(whole) + " (" + fmt("%.1f", p) + "%)";
}

std::string share_cell(long n, long errors) {
    if (n == 0) return "-";
    const double p = errors == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(errors);
    return with_commas(n) + " (" + fmt("%.1f", p) + "%)";
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

Report build(const std::vector<json>& records) {
    Report rep;
    rep.records = static_cast<long>(records.size());

    std::map<Key, ErrorRow> intake;
    std::map<Key, ErrorRow> sched;
    // key -> task -> hospital -> (success, total)
    std::map<Key, std::map<std::string, std::map<std::string, std::pair<long, long>>>> per_hospital;
    std::map<Key, std::set<std::string>> hospitals;
    struct Dept {
        long tasks = 0;
        long rounds = 0;
        long wrong = 0;
        long with_h = 0, with_h_wrong = 0, without_h = 0, without_h_wrong = 0;
    };
    std::map<Key, Dept> dept;
    struct Tools {
        long tasks = 0, wrong = 0, fb = 0, fb_fail = 0;
    };
    std::map<Key, Tools> tools;
    std::map<Key, std::map<std::pair<std::string, std::string>, long>> confusion;

    for (const auto& r : records) {
        const Key k = key_of(r);
        const std::string task = r.value("task", std::string());
        if (std::find(kTaskKinds.begin(), kTaskKinds.end(), task) == kTaskKinds.end()) {
            throw FormatError("transcript record with unknown task '" + task + "'");
        }
        const json& rub = r.at("rubric");
        const bool ok = rub.value("result", std::string()) == "success";
        const std::string hospital = r.value("hospital", std::string());
        hospitals[k].insert(hospital);
        auto& ph = per_hospital[k][task][hospital];
        ph.second++;
        if (ok) ph.first++;

        ErrorRow& row = is_intake(r) ? intake[k] : sched[k];
        std::tie(row.level, row.model, row.mode) = k;
        row.tasks++;
        if (ok) {
            row.successes++;
        } else {
            row.errors++;
            rep.error_records++;
            row.counts[column_for(rub.at("code").get<std::string>(), rub.value("criterion", std::string()))]++;
        }

        const json& stats = r.value("stats", json::object());
        if (is_intake(r)) {
            Dept& d = dept[k];
            d.tasks++;
            d.rounds += stats.value("rounds", 0);
            const bool wrong = stats.value("department_wrong_unmasked", false);
            d.wrong += wrong;
            const json& out = r.value("outputs", json::object());
            if (out.value("history", std::string()) == "with_history") {
                d.with_h++;
                d.with_h_wrong += wrong;
            } else {
                d.without_h++;
                d.without_h_wrong += wrong;
            }
            std::vector<std::string> gold = out.value("gold_departments", std::vector<std::string>{});
            std::string predicted = out.value("recommended_department", std::string());
            if (predicted.empty()) predicted = "none";
            std::string g = std::find(gold.begin(), gold.end(), predicted) != gold.end()
                                ? predicted
                                : (gold.empty() ? std::string("unknown") : gold.front());
            confusion[k][{g, predicted}]++;
        } else {
            Tools& t = tools[k];
            t.tasks++;
            t.wrong += stats.value("wrong_tool", false);
            if (stats.value("used_fallback", false)) {
                t.fb++;
                if (!ok) t.fb_fail++;
            }
        }
    }

    for (auto& [k, row] : intake) rep.intake.push_back(row);
    for (auto& [k, row] : sched) rep.scheduling.push_back(row);

    rep.success = ordered_json::array();
    for (const auto& [k, tasks] : per_hospital) {
        ordered_json row;
        row["Level"] = std::get<0>(k);
        row["Model"] = std::get<1>(k);
        row["Mode"] = std::get<2>(k);
        row["Hospitals"] = hospitals[k].size();
        for (const auto& task : kTaskKinds) {
            auto it = tasks.find(task);
            std::string col = task;
            col[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(col[0])));
            if (it == tasks.end()) {
                row[col] = "-";
                continue;
            }
            std::vector<double> rates;
            for (const auto& [h, sc] : it->second) rates.push_back(100.0 * static_cast<double>(sc.first) / static_cast<double>(sc.second));
            const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
            row[col] = fmt("%.1f", mean) + " ± " + fmt("%.1f", sample_std(rates));
        }
        rep.success.push_back(std::move(row));
    }

    rep.department = ordered_json::array();
    for (const auto& [k, d] : dept) {
        ordered_json row;
        row["Level"] = std::get<0>(k);
        row["Model"] = std::get<1>(k);
        row["Mode"] = std::get<2>(k);
        row["Tasks"] = d.tasks;
        row["Avg Rounds"] = fmt("%.2f", d.tasks ? static_cast<double>(d.rounds) / static_cast<double>(d.tasks) : 0.0);
        row["Dept Errors (unmasked)"] = ratio_cell(d.wrong, d.tasks);
        row["With History"] = ratio_cell(d.with_h_wrong, d.with_h);
        row["Without History"] = ratio_cell(d.without_h_wrong, d.without_h);
        rep.department.push_back(std::move(row));
    }

    rep.tools = ordered_json::array();
    for (const auto& [k, t] : tools) {
        ordered_json row;
        row["Level"] = std::get<0>(k);
        row["Model"] = std::get<1>(k);
        row["Mode"] = std::get<2>(k);
        row["Tasks"] = t.tasks;
        row["Wrong Tool"] = ratio_cell(t.wrong, t.tasks);
        row["Fallback Total"] = ratio_cell(t.fb, t.tasks);
        row["Fallback Fail"] = ratio_cell(t.fb_fail, t.fb);
        rep.tools.push_back(std::move(row));
    }

    rep.confusion = ordered_json::array();
    for (const auto& [k, cells] : confusion) {
        for (const auto& [gp, n] : cells) {
            rep.confusion.push_back({{"Level", std::get<0>(k)},
                                     {"Model", std::get<1>(k)},
                                     {"Mode", std::get<2>(k)},
                                     {"Gold", gp.first},
                                     {"Predicted", gp.second},
                                     {"Count", n}});
        }
    }
    return rep;
}

std::vector<std::string> reconcile(const Report& r) {
    std::vector<std::string> problems;
    long cells = 0;
    auto check = [&](const std::vector<ErrorRow>& rows, const std::vector<std::string>& cols, const char* table) {
        for (const auto& row : rows) {
            long sum = 0;
            for (const auto& [col, n] : row.counts) {
                if (std::find(cols.begin(), cols.end(), col) == cols.end()) {
                    problems.push_back(std::string(table) + " row " + row.level + "/" + row.model +
                                       ": code outside the table (" + col + ")");
                }
                sum += n;
            }
            cells += sum;
            if (sum != row.errors) {
                problems.push_back(std::string(table) + " row " + row.level + "/" + row.model + ": codes sum to " +
                                   std::to_string(sum) + ", Errors is " + std::to_string(row.errors));
            }
            if (row.errors + row.successes != row.tasks) {
                problems.push_back(std::string(table) + " row " + row.level + "/" + row.model +
                                   ": Errors + successes != tasks");
            }
        }
    };
    check(r.intake, intake_error_columns(), "intake");
    check(r.scheduling, scheduling_error_columns(), "scheduling");
    if (cells != r.error_records) {
        problems.push_back("error records " + std::to_string(r.error_records) + " but " + std::to_string(cells) +
                           " counted in cells");
    }
    return problems;
}

ordered_json to_json(const Report& r) {
    auto rows = [](const std::vector<ErrorRow>& rows, const std::vector<std::string>& cols) {
        ordered_json out = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json j;
            j["Level"] = row.level;
            j["Model"] = row.model;
            j["Mode"] = row.mode;
            j["Tasks"] = row.tasks;
            j["Successes"] = row.successes;
            j["Errors"] = ratio_cell(row.errors, row.tasks);
            ordered_json counts = ordered_json::object();
            for (const auto& c : cols) {
                auto it = row.counts.find(c);
                const long n = it == row.counts.end() ? 0 : it->second;
                j[c] = share_cell(n, row.errors);
                counts[c] = n;
            }
            j["counts"] = {{"errors", row.errors}, {"codes", counts}};
            out.push_back(std::move(j));
        }
        return out;
    };
    ordered_json j;
    j["records"] = r.records;
    j["success"] = r.success;
    j["intake_errors"] = rows(r.intake, intake_error_columns());
    j["scheduling_errors"] = rows(r.scheduling, scheduling_error_columns());
    j["department"] = r.department;
    j["tools"] = r.tools;
    j["confusion"] = r.confusion;
    return j;
}

std::vector<std::filesystem::path> write(const Report& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    {
        auto p = dir / "report.json";
        std::ofstream out(p);
        if (!out) throw Error("cannot write " + p.string());
        out << to_json(r).dump(2) << '\n';
        paths.push_back(p);
    }
    auto csv = [&](const char* name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
        auto p = dir / name;
        write_csv(p, header, rows);
        paths.push_back(p);
    };
    csv("success.csv", kSuccessHeader, json_rows(r.success, kSuccessHeader));
    csv("intake_errors.csv", error_header(intake_error_columns()), error_rows(r.intake, intake_error_columns()));
    csv("scheduling_errors.csv", error_header(scheduling_error_columns()),
        error_rows(r.scheduling, scheduling_error_columns()));
    csv("department.csv", kDeptHeader, json_rows(r.department, kDeptHeader));
    csv("tools.csv", kToolsHeader, json_rows(r.tools, kToolsHeader));
    csv("confusion.csv", kConfusionHeader, json_rows(r.confusion, kConfusionHeader));
    return paths;
}

std::string render_text(const Report& r) {
    std::string out;
    out += text_table("Success rate (%, mean ± std across hospitals)", kSuccessHeader, json_rows(r.success, kSuccessHeader));
    out += '\n';
    out += text_table("Intake errors", error_header(intake_error_columns()), error_rows(r.intake, intake_error_columns()));
    out += '\n';
    out += text_table("Scheduling errors", error_header(scheduling_error_columns()),
                      error_rows(r.scheduling, scheduling_error_columns()));
    out += '\n';
    out += text_table("Department assignment", kDeptHeader, json_rows(r.department, kDeptHeader));
    out += '\n';
    out += text_table("Tool use", kToolsHeader, json_rows(r.tools, kToolsHeader));
    return out;
}

} // namespace hadmin::report
