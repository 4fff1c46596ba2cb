#pragma once
/// @file data_point.hpp
/// @brief The core record of the pipeline: one prompt/response pair with its
///        safety-issue category and provenance.

#include <cstdio>
#include <optional>
#include <string>

#include "advisor/common.hpp"

namespace advisor {

enum class Source { seed, advisor, self_instruct };

inline std::string to_string(Source s) {
    switch (s) {
        case Source::seed: return "seed";
        case Source::advisor: return "advisor";
        case Source::self_instruct: return "self_instruct";
    }
    return "seed";
}

inline Source source_from_string(const std::string& s) {
    if (s == "seed") return Source::seed;
    if (s == "advisor") return Source::advisor;
    if (s == "self_instruct") return Source::self_instruct;
    throw ValidationError("unknown source '" + s + "'");
}

struct DataPoint {
    std::string id;
    std::string prompt;
    std::optional<std::string> response;  // absent until paired
    std::string category;                 // free-form short phrase, may be empty
    int iteration = 0;                    // 0 reserved for seed data
    Source source = Source::seed;
    std::optional<std::string> weakness_id;  // advisor points only

    /// Checks the per-record invariants; throws ValidationError with the
    /// offending field.  Id uniqueness is a dataset-level concern and is
    /// checked by the readers/writers.
    void validate() const {
        if (id.empty()) throw ValidationError("datapoint has empty id");
        if (trim(prompt).empty())
            throw ValidationError("datapoint '" + id + "': prompt is empty after trimming");
        if (iteration < 0)
            throw ValidationError("datapoint '" + id + "': negative iteration");
        const bool is_seed = source == Source::seed;
        if (is_seed != (iteration == 0)) {
            throw ValidationError("datapoint '" + id + "': source " + to_string(source) +
                                  " is inconsistent with iteration " + std::to_string(iteration) +
                                  " (seed data and only seed data has iteration 0)");
        }
        if (source == Source::advisor && !weakness_id.has_value())
            throw ValidationError("datapoint '" + id + "': advisor point missing weakness_id");
        if (source != Source::advisor && weakness_id.has_value())
            throw ValidationError("datapoint '" + id + "': weakness_id is only valid on advisor points");
    }
};

inline bool field_equal(const DataPoint& a, const DataPoint& b) {
    return a.id == b.id && a.prompt == b.prompt && a.response == b.response &&
           a.category == b.category && a.iteration == b.iteration &&
           a.source == b.source && a.weakness_id == b.weakness_id;
}

/// Monotone, content-independent record ids: "<source>-000001", ...
inline std::string make_point_id(Source source, size_t counter) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", counter);
    return to_string(source) + "-" + buf;
}

/// One weakness is identified per iteration, so the iteration number is the
/// stable reference for weakness_id.
inline std::string make_weakness_id(int iteration) {
    return "w" + std::to_string(iteration);
}

}  // namespace advisor
