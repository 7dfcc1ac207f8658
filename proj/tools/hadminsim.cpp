// hadminsim: synthesize hospitals, upload them to a FHIR backend, simulate patient
// interactions and aggregate the transcripts into report tables.

#include "hadmin/agents/chat.hpp"
#include "hadmin/core/errors.hpp"
#include "hadmin/fhir/hospital.hpp"
#include "hadmin/fhir/rest.hpp"
#include "hadmin/report/report.hpp"
#include "hadmin/sim/simulation.hpp"
#include "hadmin/synth/config.hpp"
#include "hadmin/synth/dataset.hpp"
#include "hadmin/synth/disease_kb.hpp"
#include "hadmin/synth/synthesizer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace hadmin;

namespace {

enum Exit { ok = 0, unexpected = 1, usage = 2, config = 3, format = 4, missing = 5, backend = 6, other = 7 };

struct Backend {
    std::string spec = "memory";

    bool memory() const { return spec == "memory"; }
    std::string url() const { return spec.substr(5); }
};

Backend parse_backend(const std::string& s) {
    if (s == "memory") return {s};
    if (s.rfind("fhir:", 0) == 0 && s.size() > 5) return {s};
    throw ConfigError("backend must be 'memory' or 'fhir:<url>', got '" + s + "'");
}

sim::StoreFactory store_factory(const Backend& b) {
    if (b.memory()) return [](const synth::HospitalDataset&) { return std::make_unique<fhir::MemoryStore>(); };
    const std::string url = b.url();
    return [url](const synth::HospitalDataset&) {
        auto s = std::make_unique<fhir::RestStore>(fhir::RestOptions{url});
        if (!s->ping()) throw BackendError("FHIR server at " + url + " is unreachable");
        return s;
    };
}

// Dataset files from a mix of directories (every *.json inside, sorted) and files.
std::vector<fs::path> dataset_files(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        fs::path p(in);
        if (!fs::exists(p)) throw NotFound("no such dataset path: " + in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    if (out.empty()) throw NotFound("no dataset files found");
    return out;
}

synth::SynthConfig synth_config(const std::string& config_path, const std::string& level,
                                std::optional<std::uint64_t> seed) {
    if (config_path.empty() == level.empty()) throw ConfigError("give exactly one of --config or --level");
    synth::SynthConfig cfg;
    if (!config_path.empty()) {
        if (!fs::exists(config_path)) throw NotFound("no such config file: " + config_path);
        cfg = synth::load_synth_config(config_path);
    } else {
        cfg = synth::level_preset(level);
    }
    if (seed) cfg.rng_seed = *seed;
    return cfg;
}

std::vector<synth::HospitalDataset> synthesize(const synth::SynthConfig& cfg, const std::string& kb_path) {
    const fs::path kb = kb_path.empty() ? synth::default_disease_kb_path() : fs::path(kb_path);
    if (!fs::exists(kb)) throw NotFound("no such disease knowledge base: " + kb.string());
    return synth::synthesize(cfg, synth::load_disease_kb(kb));
}

void print_counts(const std::string& hospital, const fhir::UploadCounts& c) {
    std::cout << hospital << ": " << c.practitioners << " practitioners, " << c.roles << " roles, " << c.schedules
              << " schedules, " << c.slots << " slots, " << c.patients << " patients, " << c.appointments
              << " appointments\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Hospital administration simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string level;
    std::optional<std::uint64_t> seed;
    std::string kb_path;
    std::string backend_spec = "memory";

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate hospital datasets");
    std::string synth_out = "datasets";
    synth_cmd->add_option("--config", config_path, "YAML synthesis config");
    synth_cmd->add_option("--level", level, "Built-in preset")->check(CLI::IsMember({"primary", "secondary", "tertiary"}));
    synth_cmd->add_option("--seed", seed, "Overrides rng_seed");
    synth_cmd->add_option("--disease-kb", kb_path, "Disease knowledge base (JSONL)");
    synth_cmd->add_option("--out", synth_out, "Output directory");

    // upload
    auto* upload_cmd = app.add_subcommand("upload", "Load datasets into a FHIR backend");
    std::vector<std::string> upload_data;
    bool book_blocks = false;
    upload_cmd->add_option("--data", upload_data, "Dataset files or directories")->required();
    upload_cmd->add_option("--backend", backend_spec, "memory or fhir:<url>");
    upload_cmd->add_flag("--book-blocks", book_blocks, "Book the synthesized appointment blocks");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run the intake, scheduling and event tasks");
    std::vector<std::string> sim_data;
    std::string mode = "tools";
    std::string agent_kind = "scripted";
    std::string endpoint;
    std::string model;
    std::string reasoning_effort;
    std::string sim_out = "transcripts.jsonl";
    int jobs = 1;
    std::optional<double> p_reschedule;
    std::optional<double> p_cancel;
    double reject_prob = 0.3;
    int max_rounds = 5;
    int max_patients = 0;
    sim_cmd->add_option("--data", sim_data, "Dataset files or directories");
    sim_cmd->add_option("--config", config_path, "Synthesize from this YAML config instead of --data");
    sim_cmd->add_option("--level", level, "Synthesize from a built-in preset instead of --data")
        ->check(CLI::IsMember({"primary", "secondary", "tertiary"}));
    sim_cmd->add_option("--disease-kb", kb_path, "Disease knowledge base (JSONL)");
    sim_cmd->add_option("--seed", seed, "Simulation seed (also the synthesis seed with --config/--level)");
    sim_cmd->add_option("--backend", backend_spec, "memory or fhir:<url>");
    sim_cmd->add_option("--mode", mode, "tools or reasoning")->check(CLI::IsMember({"tools", "reasoning"}));
    sim_cmd->add_option("--agents", agent_kind, "scripted, llm or stub")->check(CLI::IsMember({"scripted", "llm", "stub"}));
    sim_cmd->add_option("--endpoint", endpoint, "Chat completions base URL for --agents llm");
    sim_cmd->add_option("--model", model, "Model name for --agents llm");
    sim_cmd->add_option("--reasoning-effort", reasoning_effort, "Forwarded to the chat endpoint");
    sim_cmd->add_option("--reschedule-prob", p_reschedule, "Overrides the level default");
    sim_cmd->add_option("--cancel-prob", p_cancel, "Overrides the level default");
    sim_cmd->add_option("--reject-prob", reject_prob, "Proposal rejection probability");
    sim_cmd->add_option("--max-rounds", max_rounds, "Dialogue round cap");
    sim_cmd->add_option("--max-patients", max_patients, "Simulate only the first N patients of each hospital");
    sim_cmd->add_option("--jobs", jobs, "Hospitals simulated in parallel")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out", sim_out, "Transcript file (JSON lines)");

    // report
    auto* report_cmd = app.add_subcommand("report", "Aggregate transcripts into tables");
    std::vector<std::string> report_in;
    std::string report_out = "report";
    report_cmd->add_option("--in", report_in, "Transcript files")->required();
    report_cmd->add_option("--out", report_out, "Output directory");

    // serve-fhir
    auto* serve_cmd = app.add_subcommand("serve-fhir", "Serve an in-memory FHIR endpoint");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--port", port);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    if (synth_cmd->parsed()) {
        const auto cfg = synth_config(config_path, level, seed);
        const auto datasets = synthesize(cfg, kb_path);
        fs::create_directories(synth_out);
        for (const auto& ds : datasets) {
            synth::save_dataset(ds, fs::path(synth_out) / (ds.hospital_name + ".json"));
            std::cout << ds.hospital_name << ": " << ds.departments.size() << " departments, "
                      << ds.physicians.size() << " physicians, " << ds.patients.size() << " patients\n";
        }
        return ok;
    }

    if (upload_cmd->parsed()) {
        const Backend b = parse_backend(backend_spec);
        const auto stores = store_factory(b);
        for (const auto& path : dataset_files(upload_data)) {
            const auto ds = synth::load_dataset(path);
            auto store = stores(ds);
            fhir::Hospital h(ds, *store);
            fhir::UploadOptions opt;
            opt.book_prefilled_blocks = book_blocks;
            print_counts(ds.hospital_name, h.upload(opt));
        }
        return ok;
    }

    if (sim_cmd->parsed()) {
        std::vector<synth::HospitalDataset> datasets;
        std::vector<std::string> sources;
        if (!sim_data.empty()) {
            if (!config_path.empty() || !level.empty()) throw ConfigError("give --data or --config/--level, not both");
            for (const auto& p : dataset_files(sim_data)) {
                datasets.push_back(synth::load_dataset(p));
                sources.push_back(p.string());
            }
        } else {
            const auto cfg = synth_config(config_path, level, seed);
            datasets = synthesize(cfg, kb_path);
            sources.push_back(config_path.empty() ? "preset:" + level : config_path);
        }

        if (max_patients > 0) {
            for (auto& ds : datasets) {
                if (static_cast<int>(ds.patients.size()) > max_patients) ds.patients.resize(static_cast<std::size_t>(max_patients));
            }
        }

        sim::SimOptions opt;
        opt.seed = seed.value_or(0);
        opt.workflow.mode = agents::parse_scheduling_mode(mode);
        opt.workflow.reject_prob = reject_prob;
        opt.workflow.max_rounds = max_rounds;
        if (p_reschedule || p_cancel) {
            auto def = sim::event_probabilities_for(datasets.front().level);
            opt.events = sim::EventProbabilities{p_reschedule.value_or(def.reschedule), p_cancel.value_or(def.cancel)};
        }

        std::unique_ptr<agents::StubChatServer> stub;
        sim::AgentFactory factory = sim::scripted_agents;
        if (agent_kind != "scripted") {
            agents::ChatConfig chat;
            chat.reasoning_effort = reasoning_effort;
            if (agent_kind == "stub") {
                stub = std::make_unique<agents::StubChatServer>();
                stub->start();
                chat.endpoint = stub->base_url();
                chat.model = model.empty() ? "prompt-echo" : model;
            } else {
                chat.endpoint = endpoint.empty() ? "https://api.openai.com/v1" : endpoint;
                chat.model = model;
                if (chat.model.empty()) throw ConfigError("--agents llm needs --model");
                if (!std::getenv(chat.api_key_env.c_str())) {
                    throw ConfigError("--agents llm needs credentials in $" + chat.api_key_env);
                }
            }
            opt.model = chat.model;
            factory = [chat] { return sim::llm_agents(chat); };
        }

        const Backend b = parse_backend(backend_spec);
        const auto runs = sim::run_hospitals(datasets, store_factory(b), factory, opt, jobs);

        const fs::path out(sim_out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        {
            std::ofstream f(out, std::ios::binary);
            if (!f) throw Error("cannot write " + out.string());
            sim::write_jsonl(f, runs);
        }
        nlohmann::ordered_json manifest = {
            {"sources", sources},
            {"backend", b.spec},
            {"seed", opt.seed},
            {"mode", mode},
            {"agents", agent_kind},
            {"model", opt.model},
            {"reject_prob", reject_prob},
            {"max_rounds", max_rounds},
            {"max_patients", max_patients},
            {"init_offset_days", opt.init_offset_days},
            {"events", opt.events ? nlohmann::ordered_json{{"reschedule", opt.events->reschedule},
                                                           {"cancel", opt.events->cancel}}
                                  : nlohmann::ordered_json("level default")},
        };
        std::ofstream(out.string() + ".manifest.json") << manifest.dump(2) << '\n';

        for (const auto& r : runs) {
            std::cout << r.hospital << " (" << r.level << "): " << r.patients << " patients, " << r.records.size()
                      << " tasks, " << r.bookings << " bookings, " << r.waiting_list << " waiting\n";
        }
        std::cout << "transcripts: " << out.string() << "\n";
        return ok;
    }

    if (report_cmd->parsed()) {
        std::vector<nlohmann::json> records;
        for (const auto& in : report_in) {
            std::ifstream f(in);
            if (!f) throw NotFound("no such transcript file: " + in);
            auto part = sim::read_jsonl(f);
            records.insert(records.end(), part.begin(), part.end());
        }
        const auto rep = report::build(records);
        const auto problems = report::reconcile(rep);
        if (!problems.empty()) {
            for (const auto& p : problems) std::cerr << "reconcile: " << p << "\n";
            throw FormatError("report tables do not reconcile");
        }
        report::write(rep, report_out);
        std::cout << report::render_text(rep);
        return ok;
    }

    if (serve_cmd->parsed()) {
        fhir::StubFhirServer server;
        std::cout << "serving FHIR on http://" << host << ":" << port << "/fhir" << std::endl;
        server.run(host, port);
        return ok;
    }
    return usage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const CoverageError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return format;
    } catch (const NotFound& e) {
        std::cerr << "not found: " << e.what() << "\n";
        return missing;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return backend;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return other;
    } catch (const std::exception& e) {
        std::cerr << "unexpected: " << e.what() << "\n";
        return unexpected;
    }
}
