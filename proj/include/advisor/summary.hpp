#pragma once
/// @file summary.hpp
/// @brief The iterative data-summary state machine.
///
/// The summary is an ordered list of short safety-issue category lines.  It
/// starts from the seed categories and grows by at most one line per update.
/// Every completion that claims to update it is checked against structural
/// rules (containment, delta <= 1, five-word cap, coverage of the new
/// category); a violating completion never aborts the run.  A deterministic
/// repair restores the invariants and the failure is recorded for the audit
/// statistics.

#include <string>
#include <unordered_set>
#include <vector>

#include "advisor/backend.hpp"
#include "advisor/common.hpp"
#include "advisor/data_point.hpp"
#include "advisor/prompt_kit.hpp"
#include "advisor/text.hpp"

namespace advisor {

// Decode parameters for the summarize / identify-weakness roles.  These are
// structured, minimal-update completions, so greedy decoding.
inline constexpr double kAdvisorTemperature = 0.0;
inline constexpr int kAdvisorMaxTokens = 256;

struct SummaryLine {
    std::string phrase;
    size_t words = 0;  // derived

    static SummaryLine make(std::string phrase_text) {
        SummaryLine line;
        line.phrase = trim(phrase_text);
        line.words = word_count(line.phrase);
        return line;
    }
};

struct DataSummary {
    std::vector<SummaryLine> lines;
    int version = 0;  // iteration at which last updated

    bool empty() const { return lines.empty(); }
    size_t size() const { return lines.size(); }

    std::vector<std::string> phrases() const {
        std::vector<std::string> out;
        out.reserve(lines.size());
        for (const SummaryLine& l : lines) out.push_back(l.phrase);
        return out;
    }

    /// Prompt form: one phrase per line.
    std::string to_text() const { return join(phrases(), "\n"); }

    std::unordered_set<std::string> normalized_set() const {
        std::unordered_set<std::string> out;
        for (const SummaryLine& l : lines) out.insert(normalize_phrase(l.phrase));
        return out;
    }

    bool contains(std::string_view phrase) const {
        const std::string norm = normalize_phrase(phrase);
        for (const SummaryLine& l : lines) {
            if (normalize_phrase(l.phrase) == norm) return true;
        }
        return false;
    }

    static DataSummary from_phrases(const std::vector<std::string>& phrases, int version) {
        DataSummary s;
        s.version = version;
        for (const std::string& p : phrases) {
            if (!s.contains(p)) s.lines.push_back(SummaryLine::make(p));
        }
        return s;
    }
};

// ---------------------------------------------------------------------------
// rule check
// ---------------------------------------------------------------------------

struct RuleCheckResult {
    std::vector<std::string> missing_lines;   // previous lines absent from the candidate
    size_t added_count = 0;                   // candidate lines not in the previous summary
    std::vector<std::string> oversize_lines;  // candidate lines longer than five words
    bool covered = false;                     // new category present in prev or candidate

    bool containment_ok() const { return missing_lines.empty(); }
    bool delta_ok() const { return added_count <= 1; }
    bool word_cap_ok() const { return oversize_lines.empty(); }
    bool coverage_ok() const { return covered; }
    bool pass() const {
        return containment_ok() && delta_ok() && word_cap_ok() && coverage_ok();
    }

    std::string describe() const {
        std::vector<std::string> parts;
        if (!containment_ok())
            parts.push_back("containment: dropped [" + join(missing_lines, "; ") + "]");
        if (!delta_ok())
            parts.push_back("delta: added " + std::to_string(added_count) + " lines");
        if (!word_cap_ok())
            parts.push_back("word cap: [" + join(oversize_lines, "; ") + "]");
        if (!coverage_ok()) parts.push_back("coverage: new category absent");
        return join(parts, "; ");
    }
};

/// Checks a candidate completion (already split into lines) against the
/// structural rules, each reported independently.  Total function.
inline RuleCheckResult check_summary_update(const DataSummary& prev,
                                            const std::vector<std::string>& candidate,
                                            const std::string& new_category) {
    RuleCheckResult result;
    std::unordered_set<std::string> candidate_norm;
    for (const std::string& line : candidate) candidate_norm.insert(normalize_phrase(line));

    const std::unordered_set<std::string> prev_norm = prev.normalized_set();
    for (const SummaryLine& line : prev.lines) {
        if (!candidate_norm.count(normalize_phrase(line.phrase)))
            result.missing_lines.push_back(line.phrase);
    }
    std::unordered_set<std::string> counted;
    for (const std::string& line : candidate) {
        const std::string norm = normalize_phrase(line);
        if (!prev_norm.count(norm) && counted.insert(norm).second) ++result.added_count;
        if (word_count(line) > 5) result.oversize_lines.push_back(line);
    }
    const std::string cat_norm = normalize_phrase(new_category);
    result.covered = prev_norm.count(cat_norm) || candidate_norm.count(cat_norm);
    return result;
}

// ---------------------------------------------------------------------------
// update
// ---------------------------------------------------------------------------

struct UpdateOutcome {
    DataSummary summary;
    bool raw_pass = false;   // the pre-repair completion passed the rule check
    bool repaired = false;
    bool no_op = false;      // lines unchanged (category already covered)
    std::string violations;  // rule-check description when raw_pass is false
};

/// Lines of a summarization completion: trimmed, non-empty, minus the
/// terminator and a possible header echo, deduplicated by normalization.
inline std::vector<std::string> parse_summary_completion(const std::string& text) {
    std::vector<std::string> lines;
    std::unordered_set<std::string> seen;
    for (const std::string& raw : split_lines(text)) {
        std::string t = trim(raw);
        if (t.empty() || t == "---" || t == "Harmfulness Scenario Summary:") continue;
        if (seen.insert(normalize_phrase(t)).second) lines.push_back(std::move(t));
    }
    return lines;
}

/// Renders the summarization prompt (stop sequence "---"), parses the
/// completion and applies the rule check.  On violation the deterministic
/// repair takes over: previous summary plus the normalized new category
/// truncated to five words, if not already covered.
inline UpdateOutcome update_summary(const DataSummary& prev, const std::string& new_category,
                                    TextBackend& backend, const PromptLibrary& lib,
                                    int iteration) {
    if (trim(new_category).empty())
        throw ValidationError("update_summary: empty new_category");

    GenerationRequest request;
    request.prompt = render(lib.summarize, {{"PREVIOUS_SUMMARY", prev.to_text()},
                                            {"NEW_INSTANCE_CATEGORY", new_category}});
    request.temperature = kAdvisorTemperature;
    request.max_tokens = kAdvisorMaxTokens;
    request.stop_sequences = {"---"};
    request.role_hint = RoleHint::summarize;

    const GenerationResult completion = backend.complete(request);
    const std::vector<std::string> candidate = parse_summary_completion(completion.text);
    const RuleCheckResult check = check_summary_update(prev, candidate, new_category);

    UpdateOutcome outcome;
    outcome.raw_pass = check.pass();
    if (check.pass() && !candidate.empty()) {
        outcome.summary = DataSummary::from_phrases(candidate, iteration);
        outcome.no_op = outcome.summary.size() == prev.size();
    } else {
        outcome.repaired = true;
        outcome.violations = candidate.empty() ? "empty completion" : check.describe();
        outcome.summary = prev;
        outcome.summary.version = iteration;
        // Containment is tested on the phrase actually inserted; a category
        // beyond the word cap is truncated first, and the truncated line must
        // not be re-added on a later repair.
        const std::string repair_phrase = truncate_words(new_category, 5);
        if (!prev.contains(repair_phrase)) {
            outcome.summary.lines.push_back(SummaryLine::make(repair_phrase));
        } else {
            outcome.no_op = true;
        }
    }
    return outcome;
}

/// Builds the initial summary by folding update_summary over each seed
/// category, starting from an empty summary.  Every seed must carry a
/// category.  on_init is invoked once per fold step (for the audit log).
template <typename OnInit>
DataSummary init_summary(const std::vector<DataPoint>& seed_points, TextBackend& backend,
                         const PromptLibrary& lib, OnInit&& on_init) {
    if (seed_points.empty())
        throw ValidationError("init_summary: seed set is empty; the loop requires a non-empty pool");
    for (const DataPoint& p : seed_points) {
        if (trim(p.category).empty())
            throw ValidationError("init_summary: seed datapoint '" + p.id + "' has no category");
    }
    DataSummary summary;
    for (const DataPoint& p : seed_points) {
        UpdateOutcome outcome = update_summary(summary, p.category, backend, lib, 0);
        on_init(outcome);
        summary = std::move(outcome.summary);
    }
    summary.version = 0;
    return summary;
}

inline DataSummary init_summary(const std::vector<DataPoint>& seed_points, TextBackend& backend,
                                const PromptLibrary& lib) {
    return init_summary(seed_points, backend, lib, [](const UpdateOutcome&) {});
}

// ---------------------------------------------------------------------------
// weakness identification
// ---------------------------------------------------------------------------

struct Weakness {
    std::string phrase;
    int iteration = 0;
    bool novel = false;  // no normalized content-word overlap with the summary
};

struct WeaknessOutcome {
    Weakness weakness;
    bool fallback_used = false;  // completion was empty twice; seeded fallback chosen
};

/// True when the phrase shares no normalized content word with any of the
/// given lines.  Shared by weakness novelty here and in the analysis module.
inline bool keywords_disjoint(std::string_view phrase, const std::vector<std::string>& lines) {
    const std::unordered_set<std::string> words = content_words(phrase);
    for (const std::string& line : lines) {
        for (const std::string& word : content_words(line)) {
            if (words.count(word)) return false;
        }
    }
    return true;
}

/// Asks the advisor for a category missing from the summary.  The first
/// non-empty completion line is the phrase; an empty completion is retried
/// once, then a seeded choice from the fallback list is used (flagged for
/// the audit log).
inline WeaknessOutcome identify_weakness(const DataSummary& summary, TextBackend& backend,
                                         const PromptLibrary& lib, int iteration,
                                         const std::vector<std::string>& fallback_categories,
                                         Rng& rng) {
    if (summary.empty())
        throw ValidationError("identify_weakness: summary is empty");

    GenerationRequest request;
    request.prompt = render(lib.identify_weakness, {{"DATA_SUMMARY", summary.to_text()}});
    request.temperature = kAdvisorTemperature;
    request.max_tokens = kAdvisorMaxTokens;
    request.role_hint = RoleHint::identify_weakness;

    std::string phrase;
    for (int attempt = 0; attempt < 2 && phrase.empty(); ++attempt) {
        const GenerationResult completion = backend.complete(request);
        for (const std::string& raw : split_lines(completion.text)) {
            std::string t = trim(raw);
            if (!t.empty()) {
                phrase = std::move(t);
                break;
            }
        }
    }

    WeaknessOutcome outcome;
    if (phrase.empty()) {
        if (fallback_categories.empty())
            throw ValidationError("identify_weakness: empty completion and no fallback categories");
        phrase = fallback_categories[static_cast<size_t>(
            uniform_below(rng, fallback_categories.size()))];
        outcome.fallback_used = true;
    }
    outcome.weakness.phrase = phrase;
    outcome.weakness.iteration = iteration;
    outcome.weakness.novel = keywords_disjoint(phrase, summary.phrases());
    return outcome;
}

}  // namespace advisor
