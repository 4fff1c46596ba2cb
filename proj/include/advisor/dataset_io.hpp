#pragma once
/// @file dataset_io.hpp
/// @brief Line-delimited JSON persistence for datasets.
///
/// One self-describing record per line with the fixed field names
/// id, prompt, response, category, iteration, source, weakness_id.
/// Optional fields (response, weakness_id) are omitted when absent.
/// Files are streamable, diffable and byte-stable: the same records always
/// serialize to the same bytes.

#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "advisor/common.hpp"
#include "advisor/data_point.hpp"

namespace advisor {

using ordered_json = nlohmann::ordered_json;

inline ordered_json point_to_json(const DataPoint& p) {
    ordered_json j;
    j["id"] = p.id;
    j["prompt"] = p.prompt;
    if (p.response) j["response"] = *p.response;
    j["category"] = p.category;
    j["iteration"] = p.iteration;
    j["source"] = to_string(p.source);
    if (p.weakness_id) j["weakness_id"] = *p.weakness_id;
    return j;
}

inline DataPoint point_from_json(const ordered_json& j) {
    DataPoint p;
    if (!j.is_object()) throw ValidationError("record is not an object");
    if (!j.contains("id") || !j["id"].is_string())
        throw ValidationError("record missing string field 'id'");
    p.id = j["id"].get<std::string>();
    if (!j.contains("prompt") || !j["prompt"].is_string())
        throw ValidationError("record missing string field 'prompt'");
    p.prompt = j["prompt"].get<std::string>();
    if (j.contains("response") && !j["response"].is_null())
        p.response = j["response"].get<std::string>();
    if (j.contains("category") && !j["category"].is_null())
        p.category = j["category"].get<std::string>();
    if (!j.contains("iteration") || !j["iteration"].is_number_integer())
        throw ValidationError("record missing integer field 'iteration'");
    p.iteration = j["iteration"].get<int>();
    if (!j.contains("source") || !j["source"].is_string())
        throw ValidationError("record missing string field 'source'");
    p.source = source_from_string(j["source"].get<std::string>());
    if (j.contains("weakness_id") && !j["weakness_id"].is_null())
        p.weakness_id = j["weakness_id"].get<std::string>();
    return p;
}

inline std::string serialize_dataset(const std::vector<DataPoint>& points) {
    std::string out;
    std::unordered_set<std::string> seen_ids;
    for (size_t i = 0; i < points.size(); ++i) {
        const DataPoint& p = points[i];
        try {
            p.validate();
        } catch (const ValidationError& e) {
            throw ValidationError("record " + std::to_string(i) + ": " + e.what());
        }
        if (!seen_ids.insert(p.id).second)
            throw ValidationError("record " + std::to_string(i) + ": duplicate id '" + p.id + "'");
        out += point_to_json(p).dump();
        out += '\n';
    }
    return out;
}

/// Writes the dataset atomically (temp file + rename), one record per line in
/// input order.  Returns the record count.
inline size_t write_dataset(const std::vector<DataPoint>& points,
                            const std::filesystem::path& path) {
    write_text_file_atomic(path, serialize_dataset(points));
    return points.size();
}

/// Reads records in file order and validates per-record invariants plus id
/// uniqueness.  Blank lines are ignored; any malformed line is reported with
/// its 1-based line number.
inline std::vector<DataPoint> read_dataset(const std::filesystem::path& path) {
    std::string content = read_text_file(path);
    std::vector<DataPoint> points;
    std::unordered_set<std::string> seen_ids;
    size_t line_no = 0;
    for (const std::string& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed record: " + e.what());
        }
        DataPoint p;
        try {
            p = point_from_json(j);
            p.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen_ids.insert(p.id).second) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": duplicate id '" + p.id + "'");
        }
        points.push_back(std::move(p));
    }
    return points;
}

/// Lenient loader for user-supplied seed files: records only need a prompt.
/// Missing id/source/iteration default to seed provenance with assigned ids;
/// category defaults to empty (the advisor pipeline rejects uncategorized
/// seeds later, naming the record).
inline std::vector<DataPoint> load_seed_file(const std::filesystem::path& path) {
    std::string content = read_text_file(path);
    std::vector<DataPoint> points;
    std::unordered_set<std::string> seen_ids;
    size_t line_no = 0;
    size_t counter = 0;
    for (const std::string& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed record: " + e.what());
        }
        if (!j.is_object() || !j.contains("prompt") || !j["prompt"].is_string()) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": seed record needs a string field 'prompt'");
        }
        DataPoint p;
        p.prompt = j["prompt"].get<std::string>();
        p.id = (j.contains("id") && j["id"].is_string()) ? j["id"].get<std::string>()
                                                         : make_point_id(Source::seed, ++counter);
        if (j.contains("category") && j["category"].is_string())
            p.category = j["category"].get<std::string>();
        if (j.contains("response") && j["response"].is_string())
            p.response = j["response"].get<std::string>();
        p.iteration = 0;
        p.source = Source::seed;
        try {
            p.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen_ids.insert(p.id).second) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": duplicate id '" + p.id + "'");
        }
        points.push_back(std::move(p));
    }
    return points;
}

}  // namespace advisor
