#pragma once
/// @file mixer.hpp
/// @brief Deterministic mixing of a safety dataset with an instruction-tuning
///        dataset into one shuffled training file.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "advisor/common.hpp"
#include "advisor/dataset_io.hpp"

namespace advisor {

struct MixSpec {
    std::filesystem::path safety_path;
    std::filesystem::path instruction_path;
    size_t safety_count = 0;
    size_t instruction_count = 0;
    std::uint64_t shuffle_seed = 0;
};

struct MixedPoint {
    DataPoint point;
    std::string source_file;
};

/// Takes the first safety_count records of the safety file and the first
/// instruction_count of the instruction file (file order), concatenates
/// safety-first, then applies the full front Fisher-Yates shuffle under
/// shuffle_seed.  Each output record is tagged with its source file.
inline std::vector<MixedPoint> mix_datasets(const MixSpec& spec) {
    std::vector<DataPoint> safety = read_dataset(spec.safety_path);
    std::vector<DataPoint> instruction = read_dataset(spec.instruction_path);
    if (safety.size() < spec.safety_count) {
        throw ValidationError("mix: safety source " + spec.safety_path.string() + " holds " +
                              std::to_string(safety.size()) + " records, " +
                              std::to_string(spec.safety_count) + " requested");
    }
    if (instruction.size() < spec.instruction_count) {
        throw ValidationError("mix: instruction source " + spec.instruction_path.string() +
                              " holds " + std::to_string(instruction.size()) + " records, " +
                              std::to_string(spec.instruction_count) + " requested");
    }
    std::vector<MixedPoint> combined;
    combined.reserve(spec.safety_count + spec.instruction_count);
    for (size_t i = 0; i < spec.safety_count; ++i)
        combined.push_back({safety[i], spec.safety_path.string()});
    for (size_t i = 0; i < spec.instruction_count; ++i)
        combined.push_back({instruction[i], spec.instruction_path.string()});

    Rng rng(spec.shuffle_seed);
    std::vector<std::size_t> order = sample_indices(rng, combined.size(), combined.size());
    std::vector<MixedPoint> out;
    out.reserve(combined.size());
    for (std::size_t i : order) out.push_back(std::move(combined[i]));
    return out;
}

/// Writes the mixed records as dataset lines plus a "source_file" tag.
/// Ids must be unique per source file (two inputs may legitimately share id
/// schemes, hence the pairwise check).
inline size_t write_mixed(const std::vector<MixedPoint>& mixed, const std::filesystem::path& path) {
    std::string out;
    std::set<std::pair<std::string, std::string>> seen;
    for (size_t i = 0; i < mixed.size(); ++i) {
        const MixedPoint& m = mixed[i];
        m.point.validate();
        if (!seen.insert({m.source_file, m.point.id}).second) {
            throw ValidationError("mixed record " + std::to_string(i) + ": duplicate id '" +
                                  m.point.id + "' from " + m.source_file);
        }
        ordered_json j = point_to_json(m.point);
        j["source_file"] = m.source_file;
        out += j.dump();
        out += '\n';
    }
    write_text_file_atomic(path, out);
    return mixed.size();
}

}  // namespace advisor
