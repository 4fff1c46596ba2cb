// Command-line entry point: configuration loading, subcommands, run
// lifecycle (start/resume), report emission.
//
// Exit codes: 0 success, 1 validation error, 2 runtime/backend terminal
// error.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advisor/advisor.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
    std::string config_path;
    std::string seed_data;
    std::string out;
    std::string templates_dir;
    bool resume = false;
    bool mock = false;
    bool dry_run = false;
    long long target_count = 0;
    unsigned long long rng_seed = 0;
    bool has_target_count = false;
    bool has_rng_seed = false;
};

void add_common_flags(CLI::App* sub, CommonFlags& flags, bool with_run_flags) {
    sub->add_option("--config", flags.config_path, "configuration file");
    sub->add_flag("--mock", flags.mock, "force the deterministic mock for every backend role");
    sub->add_flag("--dry-run", flags.dry_run,
                  "validate the configuration and print the plan without backend calls");
    if (with_run_flags) {
        sub->add_option("--seed-data", flags.seed_data, "seed dataset (line-delimited records)");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--templates-dir", flags.templates_dir,
                        "directory with prompt template files");
        sub->add_flag("--resume", flags.resume, "continue from the checkpoint in the output dir");
        sub->add_option("--target-count", flags.target_count, "datapoints to generate")
            ->check(CLI::PositiveNumber);
        sub->add_option("--rng-seed", flags.rng_seed, "run seed");
    }
}

advisor::AppConfig load_config(const CommonFlags& flags) {
    advisor::AppConfig cfg;
    if (!flags.config_path.empty()) cfg = advisor::AppConfig::from_file(flags.config_path);
    if (!flags.seed_data.empty()) cfg.seeds_path = flags.seed_data;
    if (!flags.out.empty()) cfg.output_dir = flags.out;
    if (!flags.templates_dir.empty()) cfg.templates_dir = flags.templates_dir;
    if (flags.mock) cfg.force_mock = true;
    if (flags.has_target_count) cfg.loop.target_count = static_cast<int>(flags.target_count);
    if (flags.has_rng_seed) cfg.loop.rng_seed = flags.rng_seed;
    return cfg;
}

std::unique_ptr<advisor::TextBackend> make_backend(const advisor::RoleBinding& binding) {
    if (binding.network) return std::make_unique<advisor::HttpBackend>(*binding.network);
    if (binding.mock) return std::make_unique<advisor::MockBackend>(*binding.mock);
    throw advisor::ValidationError("role '" + binding.role + "' unresolved");
}

void print_errors(const std::vector<std::string>& errors) {
    std::fprintf(stderr, "%zu problem(s):\n", errors.size());
    for (const std::string& e : errors) std::fprintf(stderr, "  %s\n", e.c_str());
}

// ---------------------------------------------------------------------------
// generate / baseline
// ---------------------------------------------------------------------------

int run_generation(const CommonFlags& flags, advisor::Mode mode) {
    advisor::AppConfig cfg;
    advisor::LoopConfig loop;
    advisor::RoleBinding generator_binding;
    advisor::RoleBinding responder_binding;
    try {
        cfg = load_config(flags);
        loop = cfg.loop_config(mode);
        std::vector<std::string> errors;
        for (const std::string& problem : loop.problems())
            errors.push_back("config: [loop] " + problem);
        generator_binding = cfg.resolve_role("generator", errors);
        responder_binding = cfg.resolve_role("responder", errors);
        if (cfg.seeds_path.empty())
            errors.push_back("config: seeds path missing (set [paths] seeds or --seed-data)");
        if (!errors.empty()) {
            print_errors(errors);
            return kExitValidation;
        }
    } catch (const advisor::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    }

    const std::string dataset_path = cfg.resolved_dataset();
    const std::string checkpoint_path = cfg.resolved_checkpoint();

    advisor::PromptLibrary lib;
    std::vector<advisor::DataPoint> seeds;
    std::optional<advisor::ResumeState> resume;
    try {
        lib = cfg.load_templates();
        if (flags.resume) {
            advisor::ResumeState rs;
            rs.state = advisor::load_checkpoint(checkpoint_path);
            for (advisor::DataPoint& p : advisor::read_dataset(dataset_path)) {
                if (p.source == advisor::Source::seed)
                    seeds.push_back(std::move(p));
                else
                    rs.generated.push_back(std::move(p));
            }
            resume = std::move(rs);
        } else {
            seeds = advisor::load_seed_file(cfg.seeds_path);
            if (mode == advisor::Mode::advisor) {
                std::vector<std::string> unlabeled;
                for (const advisor::DataPoint& p : seeds)
                    if (advisor::trim(p.category).empty()) unlabeled.push_back(p.id);
                if (!unlabeled.empty())
                    throw advisor::ValidationError(
                        "seeds without categories: [" + advisor::join(unlabeled, ", ") +
                        "]; run the label subcommand first");
            }
        }
    } catch (const advisor::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    }

    if (flags.dry_run) {
        std::printf("plan: mode=%s target_count=%d exemplars_per_call=%d calls_per_iteration=%d\n",
                    advisor::to_string(mode).c_str(), loop.target_count, loop.exemplars_per_call,
                    loop.calls_per_iteration);
        std::printf("  rng_seed=%llu max_in_flight=%d\n",
                    static_cast<unsigned long long>(loop.rng_seed), loop.max_in_flight);
        std::printf("  %s\n", generator_binding.describe().c_str());
        std::printf("  %s\n", responder_binding.describe().c_str());
        std::printf("  seeds: %zu record(s) from %s\n", seeds.size(),
                    flags.resume ? dataset_path.c_str() : cfg.seeds_path.c_str());
        std::printf("  dataset: %s\n  checkpoint: %s\n", dataset_path.c_str(),
                    checkpoint_path.c_str());
        if (resume)
            std::printf("  resume: iteration=%d generated=%zu\n", resume->state.iteration,
                        resume->state.counters.generated);
        return kExitOk;
    }

    if (resume && resume->state.counters.generated >= static_cast<size_t>(loop.target_count)) {
        std::printf("already complete: %zu generated datapoint(s) at %s\n",
                    resume->state.counters.generated, dataset_path.c_str());
        return kExitOk;
    }

    try {
        std::unique_ptr<advisor::TextBackend> generator = make_backend(generator_binding);
        std::unique_ptr<advisor::TextBackend> responder = make_backend(responder_binding);
        if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);
        fs::create_directories(fs::path(dataset_path).parent_path().empty()
                                   ? fs::path(".")
                                   : fs::path(dataset_path).parent_path());

        advisor::RunSink sink = [&](const std::vector<advisor::DataPoint>& dataset,
                                    const advisor::RunState& state) {
            advisor::write_dataset(dataset, dataset_path);
            advisor::save_checkpoint(state, checkpoint_path);
        };

        advisor::RunResult result =
            mode == advisor::Mode::advisor
                ? advisor::run_advisor(loop, seeds, *generator, *responder, lib, resume, sink)
                : advisor::run_self_instruct(loop, seeds, *generator, *responder, lib, resume,
                                             sink);

        std::printf("mode=%s generated=%zu rejected=%zu repaired=%zu iterations=%d\n",
                    result.state.mode.c_str(), result.state.counters.generated,
                    result.state.counters.rejected, result.state.counters.repaired,
                    result.state.iteration);
        if (mode == advisor::Mode::advisor)
            std::printf("summary: %zu line(s), version %d\n", result.state.summary.size(),
                        result.state.summary.version);
        std::printf("dataset: %s\ncheckpoint: %s\n", dataset_path.c_str(),
                    checkpoint_path.c_str());
        return kExitOk;
    } catch (const advisor::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------------------
// label
// ---------------------------------------------------------------------------

int run_label(const CommonFlags& flags, const std::string& out_path) {
    advisor::AppConfig cfg;
    advisor::RoleBinding generator_binding;
    std::vector<advisor::DataPoint> seeds;
    try {
        cfg = load_config(flags);
        std::vector<std::string> errors;
        generator_binding = cfg.resolve_role("generator", errors);
        if (cfg.seeds_path.empty())
            errors.push_back("config: seeds path missing (set [paths] seeds or --seed-data)");
        if (out_path.empty()) errors.push_back("label: --out file is required");
        if (!errors.empty()) {
            print_errors(errors);
            return kExitValidation;
        }
        seeds = advisor::load_seed_file(cfg.seeds_path);
    } catch (const advisor::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    }

    size_t unlabeled = 0;
    for (const advisor::DataPoint& p : seeds)
        if (advisor::trim(p.category).empty()) ++unlabeled;

    if (flags.dry_run) {
        std::printf("plan: label %zu of %zu seed(s) from %s\n  %s\n  out: %s\n", unlabeled,
                    seeds.size(), cfg.seeds_path.c_str(), generator_binding.describe().c_str(),
                    out_path.c_str());
        return kExitOk;
    }

    try {
        std::unique_ptr<advisor::TextBackend> generator = make_backend(generator_binding);
        const size_t labeled = advisor::label_seed_categories(seeds, *generator);
        advisor::write_dataset(seeds, out_path);
        std::printf("labeled %zu of %zu seed(s); wrote %s\n", labeled, seeds.size(),
                    out_path.c_str());
        return kExitOk;
    } catch (const advisor::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct DatasetAnalysis {
    std::string path;
    size_t records = 0;
    size_t generated = 0;
    advisor::DiversityReport diversity;
    std::map<std::string, size_t> histogram;
    std::optional<advisor::AuditReport> audit;
    std::string checkpoint_path;
};

DatasetAnalysis analyze_one(const std::string& path, const std::string& checkpoint_flag,
                            int window) {
    DatasetAnalysis a;
    a.path = path;
    const std::vector<advisor::DataPoint> points = advisor::read_dataset(path);
    a.records = points.size();
    for (const advisor::DataPoint& p : points)
        if (p.source != advisor::Source::seed) ++a.generated;
    a.diversity = advisor::diversity_report(advisor::prompts_of(points));
    a.histogram = advisor::category_histogram(points);

    std::string checkpoint = checkpoint_flag;
    if (checkpoint.empty()) {
        const fs::path sibling = fs::path(path).parent_path() / "checkpoint.json";
        if (fs::exists(sibling)) checkpoint = sibling.string();
    }
    if (!checkpoint.empty()) {
        const advisor::RunState state = advisor::load_checkpoint(checkpoint);
        if (state.mode == "advisor") {
            a.audit = advisor::audit_run(state, window);
            a.checkpoint_path = checkpoint;
        }
    }
    return a;
}

void print_analysis(const DatasetAnalysis& a) {
    std::printf("== %s: %zu record(s), %zu generated ==\n", a.path.c_str(), a.records,
                a.generated);
    std::printf("diversity:\n%s", advisor::render_diversity_table(a.diversity).c_str());
    std::printf("categories:\n%s", advisor::render_histogram_table(a.histogram).c_str());
    if (a.audit) {
        std::printf("audit (%s):\n", a.checkpoint_path.c_str());
        std::printf("  summary_accuracy=%.4f (n=%zu)  weakness_novelty=%.4f (n=%zu)\n",
                    a.audit->summary_accuracy, a.audit->summary_total, a.audit->weakness_novelty,
                    a.audit->weakness_total);
        for (const advisor::AuditWindow& w : a.audit->windows)
            std::printf("  [%s] iterations %d..%d: summary_accuracy=%.4f weakness_novelty=%.4f\n",
                        w.label.c_str(), w.first_iteration, w.last_iteration, w.summary_accuracy,
                        w.weakness_novelty);
    }
}

void print_diversity_comparison(const DatasetAnalysis& a, const DatasetAnalysis& b) {
    std::printf("== distinct-n comparison ==\n  n  %-24.24s  %-24.24s\n", a.path.c_str(),
                b.path.c_str());
    for (size_t n = 1; n <= 8; ++n) {
        std::string left = a.diversity.per_n.count(n)
                               ? std::to_string(a.diversity.per_n.at(n)).substr(0, 6)
                               : std::string("-");
        std::string right = b.diversity.per_n.count(n)
                                ? std::to_string(b.diversity.per_n.at(n)).substr(0, 6)
                                : std::string("-");
        std::printf("%3zu  %-24s  %-24s\n", n, left.c_str(), right.c_str());
    }
}

advisor::ordered_json analysis_to_json(const DatasetAnalysis& a) {
    advisor::ordered_json j;
    j["path"] = a.path;
    j["records"] = a.records;
    j["generated"] = a.generated;
    j["diversity"] = advisor::diversity_to_json(a.diversity);
    j["histogram"] = advisor::histogram_to_json(a.histogram);
    if (a.audit) {
        j["audit"] = advisor::audit_to_json(*a.audit);
        j["checkpoint"] = a.checkpoint_path;
    }
    return j;
}

int run_analyze(const std::vector<std::string>& datasets, const std::string& checkpoint_flag,
                int window, const std::string& report_path) {
    try {
        std::vector<DatasetAnalysis> analyses;
        for (const std::string& path : datasets)
            analyses.push_back(analyze_one(path, checkpoint_flag, window));
        for (const DatasetAnalysis& a : analyses) print_analysis(a);
        if (analyses.size() == 2) print_diversity_comparison(analyses[0], analyses[1]);
        if (!report_path.empty()) {
            advisor::ordered_json j;
            advisor::ordered_json list = advisor::ordered_json::array();
            for (const DatasetAnalysis& a : analyses) list.push_back(analysis_to_json(a));
            j["datasets"] = std::move(list);
            advisor::write_text_file_atomic(report_path, j.dump(2) + "\n");
            std::printf("report: %s\n", report_path.c_str());
        }
        return kExitOk;
    } catch (const advisor::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------------------
// mix
// ---------------------------------------------------------------------------

int run_mix(const advisor::MixSpec& spec, const std::string& out_path) {
    try {
        if (out_path.empty()) throw advisor::ValidationError("mix: --out file is required");
        const std::vector<advisor::MixedPoint> mixed = advisor::mix_datasets(spec);
        advisor::write_mixed(mixed, out_path);
        std::printf("mixed %zu + %zu record(s) with shuffle_seed=%llu; wrote %s\n",
                    spec.safety_count, spec.instruction_count,
                    static_cast<unsigned long long>(spec.shuffle_seed), out_path.c_str());
        return kExitOk;
    } catch (const advisor::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int run_eval(const CommonFlags& flags, const std::string& eval_set_flag,
             const std::string& report_path, const std::string& judged_path) {
    advisor::AppConfig cfg;
    advisor::RoleBinding model_binding;
    advisor::RoleBinding judge_binding;
    std::vector<advisor::EvalItem> items;
    try {
        cfg = load_config(flags);
        if (!eval_set_flag.empty()) cfg.eval_set_path = eval_set_flag;
        std::vector<std::string> errors;
        model_binding = cfg.resolve_role("model", errors);
        judge_binding = cfg.resolve_role("judge", errors);
        if (cfg.eval_set_path.empty())
            errors.push_back("config: eval set missing (set [eval] eval_set or --eval-set)");
        try {
            cfg.eval.validate();
        } catch (const advisor::Error& e) {
            errors.push_back(e.what());
        }
        if (!errors.empty()) {
            print_errors(errors);
            return kExitValidation;
        }
        items = advisor::read_eval_items(cfg.eval_set_path);
    } catch (const advisor::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    }

    if (flags.dry_run) {
        std::printf("plan: eval %zu item(s) from %s\n  %s\n  %s\n", items.size(),
                    cfg.eval_set_path.c_str(), model_binding.describe().c_str(),
                    judge_binding.describe().c_str());
        std::printf("  model decode: temperature=%.2f max_tokens=%d\n",
                    cfg.eval.model_temperature, cfg.eval.model_max_tokens);
        return kExitOk;
    }

    try {
        std::unique_ptr<advisor::TextBackend> model = make_backend(model_binding);
        std::unique_ptr<advisor::TextBackend> judge = make_backend(judge_binding);
        const advisor::EvalResult result = advisor::evaluate(std::move(items), *model, *judge,
                                                             cfg.eval);
        std::printf("%s", advisor::render_safety_table(result.report).c_str());
        if (!report_path.empty()) {
            advisor::write_text_file_atomic(
                report_path, advisor::safety_report_to_json(result.report).dump(2) + "\n");
            std::printf("report: %s\n", report_path.c_str());
        }
        if (!judged_path.empty()) {
            std::string out;
            for (const advisor::EvalItem& item : result.items) {
                advisor::ordered_json j;
                j["prompt"] = item.prompt;
                j["category"] = item.category;
                if (item.response) j["response"] = *item.response;
                j["verdict"] = advisor::to_string(*item.verdict);
                out += j.dump();
                out += '\n';
            }
            advisor::write_text_file_atomic(judged_path, out);
            std::printf("judged items: %s\n", judged_path.c_str());
        }
        return kExitOk;
    } catch (const advisor::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safety alignment data curation: advised generation, baseline generation, "
                 "dataset analysis, mixing and judge-based evaluation"};
    app.require_subcommand(1);

    CommonFlags flags;

    CLI::App* generate = app.add_subcommand(
        "generate", "run the advised generation loop (summary, weakness, advised prompts)");
    add_common_flags(generate, flags, true);

    CLI::App* baseline =
        app.add_subcommand("baseline", "run the self-instruct baseline (no advice signal)");
    add_common_flags(baseline, flags, true);

    std::string label_out;
    CLI::App* label = app.add_subcommand("label", "fill in missing seed categories");
    add_common_flags(label, flags, false);
    label->add_option("--seed-data", flags.seed_data, "seed dataset to label");
    label->add_option("--out", label_out, "labeled output file");

    std::vector<std::string> analyze_datasets;
    std::string analyze_checkpoint;
    std::string analyze_report;
    int analyze_window = 500;
    CLI::App* analyze =
        app.add_subcommand("analyze", "diversity, category histogram and run audit");
    analyze->add_option("datasets", analyze_datasets, "one dataset, or two for a comparison")
        ->required()
        ->expected(1, 2);
    analyze->add_option("--checkpoint", analyze_checkpoint,
                        "checkpoint for the audit (default: checkpoint.json beside the dataset)");
    analyze->add_option("--window", analyze_window, "audit window size in iterations")
        ->check(CLI::PositiveNumber);
    analyze->add_option("--out", analyze_report, "write the structured report here");

    advisor::MixSpec mix_spec;
    std::string mix_out;
    std::string mix_safety;
    std::string mix_instruction;
    unsigned long long mix_seed = 0;
    long long mix_safety_count = 0;
    long long mix_instruction_count = 0;
    CLI::App* mix = app.add_subcommand("mix", "mix a safety dataset with an instruction dataset");
    mix->add_option("--safety", mix_safety, "safety dataset")->required();
    mix->add_option("--instruction", mix_instruction, "instruction dataset")->required();
    mix->add_option("--safety-count", mix_safety_count, "records to take from the safety file")
        ->required()
        ->check(CLI::NonNegativeNumber);
    mix->add_option("--instruction-count", mix_instruction_count,
                    "records to take from the instruction file")
        ->required()
        ->check(CLI::NonNegativeNumber);
    mix->add_option("--shuffle-seed", mix_seed, "shuffle seed");
    mix->add_option("--out", mix_out, "mixed output file")->required();

    std::string eval_set;
    std::string eval_report;
    std::string eval_judged;
    CLI::App* eval = app.add_subcommand("eval", "judge-based safety evaluation");
    add_common_flags(eval, flags, false);
    eval->add_option("--eval-set", eval_set, "eval items (prompt + category per line)");
    eval->add_option("--out", eval_report, "write the structured report here");
    eval->add_option("--judged-out", eval_judged, "write per-item responses and verdicts here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    flags.has_target_count = generate->count("--target-count") > 0 ||
                             baseline->count("--target-count") > 0;
    flags.has_rng_seed = generate->count("--rng-seed") > 0 || baseline->count("--rng-seed") > 0;

    if (generate->parsed()) return run_generation(flags, advisor::Mode::advisor);
    if (baseline->parsed()) return run_generation(flags, advisor::Mode::self_instruct);
    if (label->parsed()) return run_label(flags, label_out);
    if (analyze->parsed())
        return run_analyze(analyze_datasets, analyze_checkpoint, analyze_window, analyze_report);
    if (mix->parsed()) {
        mix_spec.safety_path = mix_safety;
        mix_spec.instruction_path = mix_instruction;
        mix_spec.safety_count = static_cast<size_t>(mix_safety_count);
        mix_spec.instruction_count = static_cast<size_t>(mix_instruction_count);
        mix_spec.shuffle_seed = mix_seed;
        return run_mix(mix_spec, mix_out);
    }
    if (eval->parsed()) return run_eval(flags, eval_set, eval_report, eval_judged);
    return kExitValidation;
}
