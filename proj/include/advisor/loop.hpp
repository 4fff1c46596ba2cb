#pragma once
/// @file loop.hpp
/// @brief Orchestration of the two generation pipelines.
///
/// The advisor loop repeats: identify a weakness of the data generated so
/// far, generate a batch of prompts advised by that weakness, pair each with
/// a response, grow the pool, update the summary, checkpoint.  The
/// self-instruct baseline is the same skeleton without the advice: exemplars
/// in, prompt out, no category signal.
///
/// Within one iteration the generation calls and the response pairings run
/// concurrently (bounded); iterations themselves are strictly sequential
/// because the summary update is a serialization point.  All randomness is
/// drawn on the orchestration thread before any dispatch, so a run is a pure
/// function of (seeds, config) under a deterministic backend.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "advisor/backend.hpp"
#include "advisor/common.hpp"
#include "advisor/data_point.hpp"
#include "advisor/exemplar_pool.hpp"
#include "advisor/parallel.hpp"
#include "advisor/prompt_kit.hpp"
#include "advisor/run_state.hpp"
#include "advisor/summary.hpp"

namespace advisor {

enum class Mode { advisor, self_instruct };

inline std::string to_string(Mode m) {
    return m == Mode::advisor ? "advisor" : "self_instruct";
}

inline Mode mode_from_string(const std::string& s) {
    if (s == "advisor") return Mode::advisor;
    if (s == "self_instruct") return Mode::self_instruct;
    throw ValidationError("unknown mode '" + s + "'");
}

inline std::vector<std::string> default_fallback_categories() {
    return {"misinformation", "harassment", "financial fraud", "dangerous activities",
            "privacy invasion"};
}

// Iterations that accept zero datapoints in a row before the run aborts
// (still resumable; the checkpoint of the last iteration is on disk).
inline constexpr int kStallLimit = 100;

struct LoopConfig {
    Mode mode = Mode::advisor;
    int target_count = 10000;
    int exemplars_per_call = 3;
    int calls_per_iteration = 10;
    double generation_temperature = 1.0;
    int generation_max_tokens = 128;
    double response_temperature = 0.0;
    int response_max_tokens = 256;
    std::uint64_t rng_seed = 42;
    int max_in_flight = 4;
    std::vector<std::string> fallback_categories = default_fallback_categories();

    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        if (target_count < 1) out.push_back("target_count must be >= 1");
        if (exemplars_per_call < 1) out.push_back("exemplars_per_call must be >= 1");
        if (calls_per_iteration < 1) out.push_back("calls_per_iteration must be >= 1");
        if (generation_temperature < 0.0) out.push_back("generation_temperature must be >= 0");
        if (generation_max_tokens < 1) out.push_back("generation_max_tokens must be >= 1");
        if (response_temperature < 0.0) out.push_back("response_temperature must be >= 0");
        if (response_max_tokens < 1) out.push_back("response_max_tokens must be >= 1");
        if (max_in_flight < 1) out.push_back("max_in_flight must be >= 1");
        if (fallback_categories.empty()) out.push_back("fallback_categories must not be empty");
        return out;
    }

    void validate() const {
        const std::vector<std::string> found = problems();
        if (!found.empty()) throw ValidationError("loop config: " + join(found, "; "));
    }

    static LoopConfig advisor_defaults() { return LoopConfig{}; }

    static LoopConfig self_instruct_defaults() {
        LoopConfig cfg;
        cfg.mode = Mode::self_instruct;
        cfg.exemplars_per_call = 5;
        cfg.calls_per_iteration = 1;
        return cfg;
    }
};

/// Invoked after the initial checkpoint and after every completed iteration
/// with the full dataset (seeds first) and the state to persist.
using RunSink = std::function<void(const std::vector<DataPoint>&, const RunState&)>;

inline void null_sink(const std::vector<DataPoint>&, const RunState&) {}

struct RunResult {
    std::vector<DataPoint> dataset;  // seeds followed by generated points
    RunState state;
};

/// Checkpointed state plus the generated (non-seed) records read back from
/// the dataset file.  Records from iterations past the checkpoint are
/// dropped on resume; the loop regenerates them identically.
struct ResumeState {
    RunState state;
    std::vector<DataPoint> generated;
};

/// Asks the responder for a safe response to one generated prompt.  An empty
/// completion is retried once; a second empty completion leaves the
/// datapoint response-absent.  Terminal backend failures propagate.
inline std::optional<std::string> pair_response(const std::string& prompt, TextBackend& responder,
                                                const PromptLibrary& lib, double temperature,
                                                int max_tokens) {
    if (trim(prompt).empty()) throw ValidationError("pair_response: empty prompt");
    GenerationRequest request;
    request.prompt = render(lib.respond, {{"QUERY", prompt}});
    request.temperature = temperature;
    request.max_tokens = max_tokens;
    request.role_hint = RoleHint::respond;
    std::string text = trim(responder.complete(request).text);
    if (text.empty()) text = trim(responder.complete(request).text);
    if (text.empty()) return std::nullopt;
    return text;
}

namespace detail {

inline void validate_seeds(const std::vector<DataPoint>& seeds) {
    if (seeds.empty()) throw ValidationError("run: seed set is empty");
    std::unordered_set<std::string> ids;
    for (const DataPoint& p : seeds) {
        p.validate();
        if (p.source != Source::seed)
            throw ValidationError("run: datapoint '" + p.id + "' in the seed set has source '" +
                                  to_string(p.source) + "'");
        if (!ids.insert(p.id).second)
            throw ValidationError("run: duplicate seed id '" + p.id + "'");
    }
}

inline RunState resume_checks(const LoopConfig& cfg, const std::vector<DataPoint>& seeds,
                              const ResumeState& resume, std::vector<DataPoint>& kept) {
    RunState state = resume.state;
    if (state.mode != to_string(cfg.mode))
        throw ValidationError("resume: checkpoint mode '" + state.mode +
                              "' does not match configured mode '" + to_string(cfg.mode) + "'");
    if (state.rng_seed != cfg.rng_seed)
        throw ValidationError("resume: checkpoint rng_seed " + std::to_string(state.rng_seed) +
                              " does not match configured rng_seed " +
                              std::to_string(cfg.rng_seed));
    if (state.seed_count != seeds.size())
        throw ValidationError("resume: checkpoint expects " + std::to_string(state.seed_count) +
                              " seeds, got " + std::to_string(seeds.size()));
    const Source want = cfg.mode == Mode::advisor ? Source::advisor : Source::self_instruct;
    for (const DataPoint& p : resume.generated) {
        p.validate();
        if (p.source != want)
            throw ValidationError("resume: generated record '" + p.id + "' has source '" +
                                  to_string(p.source) + "'");
        if (p.iteration <= state.iteration) kept.push_back(p);
    }
    if (kept.size() != state.counters.generated)
        throw ValidationError("resume: dataset holds " + std::to_string(kept.size()) +
                              " generated records up to iteration " +
                              std::to_string(state.iteration) + " but the checkpoint counts " +
                              std::to_string(state.counters.generated));
    state.target_count = cfg.target_count;
    return state;
}

inline RunResult run_loop(const LoopConfig& cfg, const std::vector<DataPoint>& seeds,
                          TextBackend& generator, TextBackend& responder,
                          const PromptLibrary& lib, const std::optional<ResumeState>& resume,
                          const RunSink& sink) {
    cfg.validate();
    validate_seeds(seeds);
    const bool advising = cfg.mode == Mode::advisor;
    const Source source = advising ? Source::advisor : Source::self_instruct;
    const PromptTemplate generation = advising ? lib.generate_prompt : lib.generation_baseline();

    std::vector<DataPoint> dataset = seeds;
    RunState state;
    Rng rng;
    DataSummary summary;

    if (resume) {
        std::vector<DataPoint> kept;
        state = resume_checks(cfg, seeds, *resume, kept);
        dataset.insert(dataset.end(), kept.begin(), kept.end());
        rng = restore_rng(state.rng_state);
        summary = state.summary;
    } else {
        rng = Rng{cfg.rng_seed};
        state.mode = to_string(cfg.mode);
        state.target_count = cfg.target_count;
        state.rng_seed = cfg.rng_seed;
        state.seed_count = seeds.size();
        if (advising) {
            summary = init_summary(seeds, generator, lib, [&state](const UpdateOutcome& o) {
                AuditEvent e;
                e.iteration = 0;
                e.kind = "summary_init";
                e.raw_pass = o.raw_pass;
                e.repaired = o.repaired;
                e.no_op = o.no_op;
                if (!o.violations.empty()) e.detail = o.violations;
                if (o.repaired) ++state.counters.repaired;
                state.audit_log.push_back(std::move(e));
            });
            state.summary = summary;
        }
        state.rng_state = save_rng(rng);
        sink(dataset, state);
    }

    ExemplarPool pool{dataset, cfg.rng_seed};
    std::unordered_set<std::string> prompt_seen;
    for (const DataPoint& p : dataset) prompt_seen.insert(p.prompt);
    size_t id_counter = state.counters.generated;
    int stalled = 0;

    while (state.counters.generated < static_cast<size_t>(cfg.target_count)) {
        const int iteration = state.iteration + 1;

        std::string category;
        std::optional<std::string> weakness_id;
        if (advising) {
            WeaknessOutcome wo =
                identify_weakness(summary, generator, lib, iteration, cfg.fallback_categories,
                                  rng);
            AuditEvent e;
            e.iteration = iteration;
            e.kind = "weakness";
            e.phrase = wo.weakness.phrase;
            e.novel = wo.weakness.novel;
            e.fallback = wo.fallback_used;
            state.audit_log.push_back(std::move(e));
            category = wo.weakness.phrase;
            weakness_id = make_weakness_id(iteration);
        }

        const size_t remaining = static_cast<size_t>(cfg.target_count) - state.counters.generated;
        const size_t plan =
            std::min<size_t>(static_cast<size_t>(cfg.calls_per_iteration), remaining);

        // All sampling happens here, before dispatch.
        std::vector<std::string> rendered;
        rendered.reserve(plan);
        for (size_t c = 0; c < plan; ++c) {
            const std::vector<DataPoint> exemplars =
                sample_exemplars(pool, static_cast<size_t>(cfg.exemplars_per_call), rng);
            std::map<std::string, std::string> bindings{
                {"IN_CONTEXT_EXAMPLES", format_exemplars(exemplars)}};
            if (advising) bindings["IDENTIFIED_WEAKNESS"] = category;
            rendered.push_back(render(generation, bindings));
        }

        std::vector<std::function<std::string()>> calls;
        calls.reserve(rendered.size());
        for (const std::string& prompt : rendered) {
            calls.push_back([&generator, &cfg, prompt]() {
                GenerationRequest request;
                request.prompt = prompt;
                request.temperature = cfg.generation_temperature;
                request.max_tokens = cfg.generation_max_tokens;
                request.role_hint = RoleHint::generate_prompt;
                std::string text = trim(generator.complete(request).text);
                if (text.empty()) text = trim(generator.complete(request).text);
                return text;
            });
        }
        const std::vector<std::string> raw = run_indexed(calls, cfg.max_in_flight);

        std::vector<std::string> accepted;
        accepted.reserve(raw.size());
        for (const std::string& text : raw) {
            std::string reason;
            if (text.empty()) {
                reason = "empty completion";
            } else if (!prompt_seen.insert(text).second) {
                reason = "duplicate prompt";
            } else {
                accepted.push_back(text);
                continue;
            }
            ++state.counters.rejected;
            AuditEvent e;
            e.iteration = iteration;
            e.kind = "generation";
            e.detail = reason;
            state.audit_log.push_back(std::move(e));
        }

        std::vector<std::function<std::optional<std::string>()>> pairings;
        pairings.reserve(accepted.size());
        for (const std::string& prompt : accepted) {
            pairings.push_back([&responder, &lib, &cfg, prompt]() {
                return pair_response(prompt, responder, lib, cfg.response_temperature,
                                     cfg.response_max_tokens);
            });
        }
        const std::vector<std::optional<std::string>> responses =
            run_indexed(pairings, cfg.max_in_flight);

        for (size_t i = 0; i < accepted.size(); ++i) {
            DataPoint p;
            p.id = make_point_id(source, ++id_counter);
            p.prompt = accepted[i];
            p.response = responses[i];
            p.category = category;
            p.iteration = iteration;
            p.source = source;
            p.weakness_id = weakness_id;
            p.validate();
            pool.add(p);
            dataset.push_back(std::move(p));
            ++state.counters.generated;
        }

        if (advising) {
            UpdateOutcome uo = update_summary(summary, category, generator, lib, iteration);
            summary = std::move(uo.summary);
            if (uo.repaired) ++state.counters.repaired;
            AuditEvent e;
            e.iteration = iteration;
            e.kind = "summary_update";
            e.raw_pass = uo.raw_pass;
            e.repaired = uo.repaired;
            e.no_op = uo.no_op;
            if (!uo.violations.empty()) e.detail = uo.violations;
            state.audit_log.push_back(std::move(e));
            state.summary = summary;
        }

        state.iteration = iteration;
        state.rng_state = save_rng(rng);
        sink(dataset, state);

        stalled = accepted.empty() ? stalled + 1 : 0;
        if (stalled >= kStallLimit)
            throw Error("run: no datapoint accepted for " + std::to_string(kStallLimit) +
                        " consecutive iterations");
    }
    return RunResult{std::move(dataset), std::move(state)};
}

}  // namespace detail

inline RunResult run_advisor(const LoopConfig& cfg, const std::vector<DataPoint>& seeds,
                             TextBackend& generator, TextBackend& responder,
                             const PromptLibrary& lib,
                             const std::optional<ResumeState>& resume = std::nullopt,
                             const RunSink& sink = null_sink) {
    if (cfg.mode != Mode::advisor) throw ValidationError("run_advisor: config mode is not advisor");
    return detail::run_loop(cfg, seeds, generator, responder, lib, resume, sink);
}

inline RunResult run_self_instruct(const LoopConfig& cfg, const std::vector<DataPoint>& seeds,
                                   TextBackend& generator, TextBackend& responder,
                                   const PromptLibrary& lib,
                                   const std::optional<ResumeState>& resume = std::nullopt,
                                   const RunSink& sink = null_sink) {
    if (cfg.mode != Mode::self_instruct)
        throw ValidationError("run_self_instruct: config mode is not self_instruct");
    return detail::run_loop(cfg, seeds, generator, responder, lib, resume, sink);
}

/// Pre-run convenience: fills in missing seed categories with a one-shot
/// labeling call per unlabeled seed.  Returns the number of seeds labeled.
inline size_t label_seed_categories(std::vector<DataPoint>& points, TextBackend& backend) {
    size_t labeled = 0;
    for (DataPoint& p : points) {
        if (!trim(p.category).empty()) continue;
        GenerationRequest request;
        request.prompt =
            "Assign a short harmfulness category (no more than five words) to the following "
            "user query.\n\nQuery: " +
            p.prompt + "\n\nCategory:";
        request.temperature = kAdvisorTemperature;
        request.max_tokens = 32;
        request.role_hint = RoleHint::identify_weakness;
        std::string phrase;
        for (const std::string& raw : split_lines(backend.complete(request).text)) {
            std::string t = trim(raw);
            if (!t.empty()) {
                phrase = std::move(t);
                break;
            }
        }
        if (phrase.empty())
            throw ValidationError("label: empty category completion for seed '" + p.id + "'");
        p.category = phrase;
        ++labeled;
    }
    return labeled;
}

}  // namespace advisor
