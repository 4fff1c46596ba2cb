#pragma once
/// @file run_state.hpp
/// @brief Checkpointable run state: counters, RNG, summary, audit log.
///
/// A checkpoint contains everything needed to continue a run and reproduce
/// the bytes an uninterrupted run would have produced.  It deliberately
/// carries no wall-clock data.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advisor/common.hpp"
#include "advisor/dataset_io.hpp"
#include "advisor/summary.hpp"

namespace advisor {

inline constexpr int kCheckpointSchemaVersion = 1;

/// One entry of the append-only audit log.  kind is one of "summary_init",
/// "summary_update", "weakness" or "generation"; the optional fields are
/// populated per kind.
struct AuditEvent {
    int iteration = 0;
    std::string kind;
    std::optional<bool> raw_pass;       // summary events
    std::optional<bool> repaired;       // summary events
    std::optional<bool> no_op;          // summary events
    std::optional<std::string> phrase;  // weakness events
    std::optional<bool> novel;          // weakness events
    std::optional<bool> fallback;       // weakness events
    std::optional<std::string> detail;  // violations, rejection reasons

    ordered_json to_json() const {
        ordered_json j;
        j["iteration"] = iteration;
        j["kind"] = kind;
        if (raw_pass) j["raw_pass"] = *raw_pass;
        if (repaired) j["repaired"] = *repaired;
        if (no_op) j["no_op"] = *no_op;
        if (phrase) j["phrase"] = *phrase;
        if (novel) j["novel"] = *novel;
        if (fallback) j["fallback"] = *fallback;
        if (detail) j["detail"] = *detail;
        return j;
    }

    static AuditEvent from_json(const ordered_json& j) {
        AuditEvent e;
        e.iteration = j.at("iteration").get<int>();
        e.kind = j.at("kind").get<std::string>();
        if (j.contains("raw_pass")) e.raw_pass = j.at("raw_pass").get<bool>();
        if (j.contains("repaired")) e.repaired = j.at("repaired").get<bool>();
        if (j.contains("no_op")) e.no_op = j.at("no_op").get<bool>();
        if (j.contains("phrase")) e.phrase = j.at("phrase").get<std::string>();
        if (j.contains("novel")) e.novel = j.at("novel").get<bool>();
        if (j.contains("fallback")) e.fallback = j.at("fallback").get<bool>();
        if (j.contains("detail")) e.detail = j.at("detail").get<std::string>();
        return e;
    }
};

struct Counters {
    size_t generated = 0;  // accepted datapoints (excludes seeds)
    size_t rejected = 0;   // dropped candidates (duplicates, empty completions)
    size_t repaired = 0;   // summary updates that needed the repair path
};

struct RunState {
    int schema_version = kCheckpointSchemaVersion;
    std::string mode;  // "advisor" or "self_instruct"
    int target_count = 0;
    std::uint64_t rng_seed = 0;
    size_t seed_count = 0;
    int iteration = 0;  // last completed iteration
    std::string rng_state;
    DataSummary summary;  // empty in self_instruct mode
    Counters counters;
    std::vector<AuditEvent> audit_log;

    bool complete() const { return counters.generated >= static_cast<size_t>(target_count); }

    ordered_json to_json() const {
        ordered_json j;
        j["schema_version"] = schema_version;
        j["mode"] = mode;
        j["target_count"] = target_count;
        j["rng_seed"] = rng_seed;
        j["seed_count"] = seed_count;
        j["iteration"] = iteration;
        j["rng_state"] = rng_state;
        ordered_json s;
        s["version"] = summary.version;
        s["lines"] = summary.phrases();
        j["summary"] = std::move(s);
        ordered_json c;
        c["generated"] = counters.generated;
        c["rejected"] = counters.rejected;
        c["repaired"] = counters.repaired;
        j["counters"] = std::move(c);
        ordered_json log = ordered_json::array();
        for (const AuditEvent& e : audit_log) log.push_back(e.to_json());
        j["audit_log"] = std::move(log);
        return j;
    }

    static RunState from_json(const ordered_json& j) {
        RunState s;
        s.schema_version = j.at("schema_version").get<int>();
        if (s.schema_version != kCheckpointSchemaVersion)
            throw ValidationError("checkpoint schema_version " +
                                  std::to_string(s.schema_version) + " is not supported");
        s.mode = j.at("mode").get<std::string>();
        s.target_count = j.at("target_count").get<int>();
        s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        s.seed_count = j.at("seed_count").get<size_t>();
        s.iteration = j.at("iteration").get<int>();
        s.rng_state = j.at("rng_state").get<std::string>();
        const ordered_json& sum = j.at("summary");
        s.summary = DataSummary::from_phrases(sum.at("lines").get<std::vector<std::string>>(),
                                              sum.at("version").get<int>());
        const ordered_json& c = j.at("counters");
        s.counters.generated = c.at("generated").get<size_t>();
        s.counters.rejected = c.at("rejected").get<size_t>();
        s.counters.repaired = c.at("repaired").get<size_t>();
        for (const ordered_json& e : j.at("audit_log"))
            s.audit_log.push_back(AuditEvent::from_json(e));
        return s;
    }
};

inline void save_checkpoint(const RunState& state, const std::string& path) {
    write_text_file_atomic(path, state.to_json().dump(2) + "\n");
}

inline RunState load_checkpoint(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const ordered_json::parse_error& e) {
        throw ValidationError(path + ": malformed checkpoint: " + std::string(e.what()));
    }
    try {
        return RunState::from_json(j);
    } catch (const ordered_json::exception& e) {
        throw ValidationError(path + ": malformed checkpoint: " + std::string(e.what()));
    }
}

}  // namespace advisor
