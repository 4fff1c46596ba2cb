#pragma once
/// @file analysis.hpp
/// @brief Dataset diagnostics: distinct n-gram diversity, category coverage,
///        and audits of the run's intermediate outputs.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "advisor/common.hpp"
#include "advisor/data_point.hpp"
#include "advisor/dataset_io.hpp"
#include "advisor/run_state.hpp"
#include "advisor/summary.hpp"
#include "advisor/text.hpp"

namespace advisor {

inline constexpr const char* kUncategorized = "(uncategorized)";

// ---------------------------------------------------------------------------
// diversity
// ---------------------------------------------------------------------------

/// Pools all n-grams across all prompts (shared tokenization: lowercase,
/// punctuation stripped, whitespace split) and returns |unique| / |total|.
/// Absent when no prompt yields an n-gram.
inline std::optional<double> distinct_ngram_ratio(const std::vector<std::string>& prompts,
                                                  size_t n) {
    if (n < 1) throw ValidationError("distinct_ngram_ratio: n must be >= 1");
    size_t total = 0;
    std::unordered_set<std::string> unique;
    for (const std::string& prompt : prompts) {
        const std::vector<std::string> tokens = tokenize_words(prompt);
        if (tokens.size() < n) continue;
        for (size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (size_t j = 1; j < n; ++j) {
                gram += '\x1f';
                gram += tokens[i + j];
            }
            unique.insert(std::move(gram));
            ++total;
        }
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

struct DiversityReport {
    std::map<size_t, double> per_n;        // defined ratios only
    std::map<size_t, size_t> total_ngrams;  // totals for every n, including 0
};

inline DiversityReport diversity_report(const std::vector<std::string>& prompts,
                                        size_t max_n = 8) {
    if (max_n < 1) throw ValidationError("diversity_report: max_n must be >= 1");
    DiversityReport report;
    for (size_t n = 1; n <= max_n; ++n) {
        size_t total = 0;
        for (const std::string& prompt : prompts) {
            const size_t tokens = tokenize_words(prompt).size();
            if (tokens >= n) total += tokens - n + 1;
        }
        report.total_ngrams[n] = total;
        if (const std::optional<double> ratio = distinct_ngram_ratio(prompts, n))
            report.per_n[n] = *ratio;
    }
    return report;
}

inline std::vector<std::string> prompts_of(const std::vector<DataPoint>& points) {
    std::vector<std::string> out;
    out.reserve(points.size());
    for (const DataPoint& p : points) out.push_back(p.prompt);
    return out;
}

// ---------------------------------------------------------------------------
// novelty and coverage
// ---------------------------------------------------------------------------

/// True iff the weakness shares no normalized content word with any summary
/// line (stopwords removed; same normalization as the summary engine).
inline bool keyword_novelty(const std::string& weakness, const DataSummary& summary) {
    if (trim(weakness).empty()) throw ValidationError("keyword_novelty: empty weakness");
    return keywords_disjoint(weakness, summary.phrases());
}

/// Counts by normalized category; uncategorized points land in the
/// "(uncategorized)" bucket.
inline std::map<std::string, size_t> category_histogram(const std::vector<DataPoint>& points) {
    std::map<std::string, size_t> histogram;
    for (const DataPoint& p : points) {
        std::string key = normalize_phrase(p.category);
        if (key.empty()) key = kUncategorized;
        ++histogram[key];
    }
    return histogram;
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

struct AuditWindow {
    std::string label;
    int first_iteration = 0;
    int last_iteration = 0;
    double summary_accuracy = 0.0;
    size_t summary_total = 0;
    double weakness_novelty = 0.0;
    size_t weakness_total = 0;
};

struct AuditReport {
    double summary_accuracy = 0.0;  // fraction of iterations whose raw completion passed
    size_t summary_total = 0;
    double weakness_novelty = 0.0;  // fraction of weaknesses flagged novel
    size_t weakness_total = 0;
    std::vector<AuditWindow> windows;
};

namespace detail {

inline AuditWindow audit_window(const std::map<int, bool>& passes, const std::map<int, bool>& novel,
                                int first, int last, std::string label) {
    AuditWindow w;
    w.label = std::move(label);
    w.first_iteration = first;
    w.last_iteration = last;
    size_t pass_count = 0;
    size_t novel_count = 0;
    for (int i = first; i <= last; ++i) {
        if (passes.at(i)) ++pass_count;
        if (novel.at(i)) ++novel_count;
    }
    w.summary_total = w.weakness_total = static_cast<size_t>(last - first + 1);
    w.summary_accuracy = static_cast<double>(pass_count) / static_cast<double>(w.summary_total);
    w.weakness_novelty = static_cast<double>(novel_count) / static_cast<double>(w.weakness_total);
    return w;
}

inline std::string list_iterations(const std::vector<int>& v) {
    std::vector<std::string> parts;
    parts.reserve(v.size());
    for (int i : v) parts.push_back(std::to_string(i));
    return join(parts, ", ");
}

}  // namespace detail

/// Summary-update accuracy and weakness novelty over the whole run, plus
/// first/last windows of window_size iterations when the run is longer than
/// one window.  Requires one summary_update and one weakness event per
/// iteration 1..N.
inline AuditReport audit_run(const RunState& state, int window_size = 500) {
    if (window_size < 1) throw ValidationError("audit: window_size must be >= 1");
    if (state.mode != "advisor")
        throw ValidationError("audit: checkpoint mode '" + state.mode +
                              "' carries no advisor audit log");

    std::map<int, bool> passes;
    std::map<int, bool> novel;
    for (const AuditEvent& e : state.audit_log) {
        if (e.iteration < 1 || e.iteration > state.iteration) continue;
        if (e.kind == "summary_update" && e.raw_pass && !passes.count(e.iteration))
            passes[e.iteration] = *e.raw_pass;
        if (e.kind == "weakness" && e.novel && !novel.count(e.iteration))
            novel[e.iteration] = *e.novel;
    }

    std::vector<int> missing_updates;
    std::vector<int> missing_weaknesses;
    for (int i = 1; i <= state.iteration; ++i) {
        if (!passes.count(i)) missing_updates.push_back(i);
        if (!novel.count(i)) missing_weaknesses.push_back(i);
    }
    if (!missing_updates.empty() || !missing_weaknesses.empty()) {
        std::vector<std::string> parts;
        if (!missing_updates.empty())
            parts.push_back("missing summary_update for iterations [" +
                            detail::list_iterations(missing_updates) + "]");
        if (!missing_weaknesses.empty())
            parts.push_back("missing weakness for iterations [" +
                            detail::list_iterations(missing_weaknesses) + "]");
        throw ValidationError("audit: incomplete log: " + join(parts, "; "));
    }

    AuditReport report;
    if (state.iteration == 0) return report;
    AuditWindow whole = detail::audit_window(passes, novel, 1, state.iteration, "all");
    report.summary_accuracy = whole.summary_accuracy;
    report.summary_total = whole.summary_total;
    report.weakness_novelty = whole.weakness_novelty;
    report.weakness_total = whole.weakness_total;
    if (state.iteration > window_size) {
        report.windows.push_back(detail::audit_window(
            passes, novel, 1, window_size, "first " + std::to_string(window_size)));
        report.windows.push_back(detail::audit_window(
            passes, novel, state.iteration - window_size + 1, state.iteration,
            "last " + std::to_string(window_size)));
    }
    return report;
}

// ---------------------------------------------------------------------------
// report rendering
// ---------------------------------------------------------------------------

inline ordered_json diversity_to_json(const DiversityReport& report) {
    ordered_json per_n = ordered_json::object();
    for (const auto& [n, ratio] : report.per_n) per_n[std::to_string(n)] = ratio;
    ordered_json totals = ordered_json::object();
    for (const auto& [n, total] : report.total_ngrams) totals[std::to_string(n)] = total;
    ordered_json j;
    j["distinct_ngram_ratio"] = std::move(per_n);
    j["total_ngrams"] = std::move(totals);
    return j;
}

inline ordered_json histogram_to_json(const std::map<std::string, size_t>& histogram) {
    ordered_json j = ordered_json::object();
    for (const auto& [category, count] : histogram) j[category] = count;
    return j;
}

inline ordered_json audit_to_json(const AuditReport& report) {
    auto window_json = [](double accuracy, size_t summary_total, double novelty,
                          size_t weakness_total) {
        ordered_json j;
        j["summary_accuracy"] = accuracy;
        j["summary_total"] = summary_total;
        j["weakness_novelty"] = novelty;
        j["weakness_total"] = weakness_total;
        return j;
    };
    ordered_json j = window_json(report.summary_accuracy, report.summary_total,
                                 report.weakness_novelty, report.weakness_total);
    ordered_json windows = ordered_json::array();
    for (const AuditWindow& w : report.windows) {
        ordered_json wj = window_json(w.summary_accuracy, w.summary_total, w.weakness_novelty,
                                      w.weakness_total);
        wj["label"] = w.label;
        wj["first_iteration"] = w.first_iteration;
        wj["last_iteration"] = w.last_iteration;
        windows.push_back(std::move(wj));
    }
    j["windows"] = std::move(windows);
    return j;
}

inline std::string render_diversity_table(const DiversityReport& report) {
    std::string out = "  n  distinct-n  total\n";
    for (const auto& [n, total] : report.total_ngrams) {
        char line[64];
        if (report.per_n.count(n))
            std::snprintf(line, sizeof(line), "%3zu      %6.4f  %zu\n", n, report.per_n.at(n),
                          total);
        else
            std::snprintf(line, sizeof(line), "%3zu           -  %zu\n", n, total);
        out += line;
    }
    return out;
}

inline std::string render_histogram_table(const std::map<std::string, size_t>& histogram) {
    size_t width = 8;
    for (const auto& [category, count] : histogram) width = std::max(width, category.size());
    std::string out;
    for (const auto& [category, count] : histogram) {
        out += category;
        out.append(width - category.size() + 2, ' ');
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

}  // namespace advisor
