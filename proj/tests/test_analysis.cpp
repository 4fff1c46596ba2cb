// Dataset diagnostics: n-gram diversity ratios, keyword novelty, category
// histograms, and the run audit.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "advisor/analysis.hpp"
#include "test_util.hpp"

using namespace advisor;
using Catch::Matchers::ContainsSubstring;

// ---------------------------------------------------------------------------
// diversity
// ---------------------------------------------------------------------------

TEST_CASE("distinct n-gram ratios on hand-checked corpora") {
    CHECK(distinct_ngram_ratio({"a b a b"}, 1) == 0.5);
    CHECK(distinct_ngram_ratio({"a b c"}, 3) == 1.0);
    CHECK(distinct_ngram_ratio({"x y", "x y"}, 1) == 0.5);
    CHECK(distinct_ngram_ratio({"x y", "x y"}, 2) == 0.5);
    CHECK(distinct_ngram_ratio({"a b a b"}, 2) == 2.0 / 3.0);  // ab, ba, ab
    CHECK(distinct_ngram_ratio({"a a a a"}, 2) == 1.0 / 3.0);

    // Tokenization is shared with the rest of the pipeline: case and
    // punctuation insensitive.
    CHECK(distinct_ngram_ratio({"A b!", "a B"}, 1) == 0.5);

    CHECK_FALSE(distinct_ngram_ratio({}, 1).has_value());
    CHECK_FALSE(distinct_ngram_ratio({"a"}, 2).has_value());
    CHECK_FALSE(distinct_ngram_ratio({"", "  "}, 1).has_value());
    CHECK_THROWS_AS(distinct_ngram_ratio({"a"}, 0), ValidationError);
}

namespace {

// Brute-force oracle: materialize every n-gram as a token vector.
std::pair<size_t, size_t> oracle_ngrams(const std::vector<std::string>& prompts, size_t n) {
    std::set<std::vector<std::string>> unique;
    size_t total = 0;
    for (const std::string& prompt : prompts) {
        const std::vector<std::string> tokens = tokenize_words(prompt);
        for (size_t i = 0; i + n <= tokens.size(); ++i) {
            unique.insert(std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n));
            ++total;
        }
    }
    return {unique.size(), total};
}

std::vector<std::string> random_corpus(Rng& rng) {
    static const std::vector<std::string> words{"how", "to", "make", "find", "hide",
                                                "money", "data", "rumor", "malware", "poison"};
    std::vector<std::string> prompts;
    const size_t count = uniform_below(rng, 8);
    for (size_t i = 0; i < count; ++i) {
        const size_t len = uniform_below(rng, 12);
        std::vector<std::string> tokens;
        for (size_t j = 0; j < len; ++j) tokens.push_back(words[uniform_below(rng, words.size())]);
        prompts.push_back(join(tokens, " "));
    }
    return prompts;
}

}  // namespace

TEST_CASE("distinct n-gram ratios match a brute-force oracle") {
    Rng rng(777);
    for (int round = 0; round < 60; ++round) {
        const std::vector<std::string> prompts = random_corpus(rng);
        for (size_t n = 1; n <= 8; ++n) {
            const auto [unique, total] = oracle_ngrams(prompts, n);
            const auto ratio = distinct_ngram_ratio(prompts, n);
            if (total == 0) {
                CHECK_FALSE(ratio.has_value());
            } else {
                REQUIRE(ratio.has_value());
                CHECK(*ratio == static_cast<double>(unique) / static_cast<double>(total));
            }
        }
    }
}

TEST_CASE("distinct n-gram ratios are permutation invariant") {
    Rng rng(88);
    std::vector<std::string> prompts = random_corpus(rng);
    while (prompts.size() < 3) prompts = random_corpus(rng);
    std::vector<std::string> shuffled = prompts;
    std::reverse(shuffled.begin(), shuffled.end());
    for (size_t n = 1; n <= 4; ++n) {
        CHECK(distinct_ngram_ratio(prompts, n) == distinct_ngram_ratio(shuffled, n));
    }
}

TEST_CASE("duplicating a prompt never increases the ratio") {
    const std::vector<std::string> base{"how to make money", "how to hide data",
                                        "find the rumor source"};
    std::vector<std::string> doubled = base;
    doubled.push_back(base[0]);
    for (size_t n = 1; n <= 4; ++n) {
        const auto before = distinct_ngram_ratio(base, n);
        const auto after = distinct_ngram_ratio(doubled, n);
        if (before && after) CHECK(*after <= *before);
    }
}

TEST_CASE("diversity_report covers 1..max_n and omits undefined ratios") {
    const std::vector<std::string> prompts{"a b", "b c"};
    auto report = diversity_report(prompts, 3);
    CHECK(report.total_ngrams == std::map<size_t, size_t>{{1, 4}, {2, 2}, {3, 0}});
    REQUIRE(report.per_n.count(1) == 1);
    REQUIRE(report.per_n.count(2) == 1);
    CHECK(report.per_n.count(3) == 0);
    CHECK(report.per_n.at(1) == 0.75);  // a, b, b, c
    CHECK(report.per_n.at(2) == 1.0);

    CHECK_THROWS_AS(diversity_report(prompts, 0), ValidationError);

    DataPoint p;
    p.id = "seed-000001";
    p.prompt = "a b";
    CHECK(prompts_of({p}) == std::vector<std::string>{"a b"});
}

TEST_CASE("diversity reports render as a table and JSON") {
    auto report = diversity_report({"a b", "b c"}, 3);
    const std::string table = render_diversity_table(report);
    CHECK_THAT(table, ContainsSubstring("n  distinct-n  total"));
    CHECK_THAT(table, ContainsSubstring("0.7500"));
    CHECK_THAT(table, ContainsSubstring("1.0000"));
    CHECK_THAT(table, ContainsSubstring("-"));  // the undefined n=3 row

    auto j = diversity_to_json(report);
    CHECK(j["distinct_ngram_ratio"]["1"].get<double>() == 0.75);
    CHECK(j["total_ngrams"]["3"].get<size_t>() == 0);
    CHECK_FALSE(j["distinct_ngram_ratio"].contains("3"));
}

// ---------------------------------------------------------------------------
// novelty
// ---------------------------------------------------------------------------

TEST_CASE("keyword novelty separates fresh categories from rephrasings") {
    // Categories in the style of a long advisor run, in discovery order.
    auto summary = DataSummary::from_phrases(
        {"Spatiotemporal Manipulation", "Algorithmic Discrimination", "Biological Harm",
         "Virtual Identity Attack", "Conceptual Discombobulation", "Social Isolation",
         "Existential Crisis", "Threat to Linguistic Diversity"},
        853);

    CHECK(keyword_novelty("Moral Dilemma Inducing", summary));
    CHECK(keyword_novelty("moral dilemma inducing!", summary));

    // Shares "identity" with an existing line.
    CHECK_FALSE(keyword_novelty("Trans Identity Incongruence", summary));
    // Shares "harm" (exact word, not a stem).
    CHECK_FALSE(keyword_novelty("biological HARM amplification", summary));
    CHECK(keyword_novelty("harmful persuasion", summary));  // "harmful" != "harm"

    // Stopwords do not create overlap ("to" appears in an existing line).
    CHECK(keyword_novelty("how to gaslight", summary));

    CHECK(keyword_novelty("anything", DataSummary{}));
    CHECK_THROWS_WITH(keyword_novelty("  ", summary), ContainsSubstring("empty weakness"));
}

// ---------------------------------------------------------------------------
// histogram
// ---------------------------------------------------------------------------

namespace {

DataPoint categorized(const std::string& id, const std::string& category) {
    DataPoint p;
    p.id = id;
    p.prompt = "prompt for " + id;
    p.category = category;
    return p;
}

}  // namespace

TEST_CASE("category_histogram counts normalized categories") {
    std::vector<DataPoint> points{
        categorized("a", "Hate Speech!"), categorized("b", "hate speech"),
        categorized("c", "Doxxing"), categorized("d", ""), categorized("e", "  ")};
    auto histogram = category_histogram(points);
    CHECK(histogram ==
          std::map<std::string, size_t>{
              {"hate speech", 2}, {"doxxing", 1}, {kUncategorized, 2}});
    CHECK(category_histogram({}).empty());

    const std::string table = render_histogram_table(histogram);
    CHECK_THAT(table, ContainsSubstring("hate speech"));
    CHECK_THAT(table, ContainsSubstring("2"));
    auto j = histogram_to_json(histogram);
    CHECK(j["(uncategorized)"].get<size_t>() == 2);
    CHECK(j["doxxing"].get<size_t>() == 1);
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

namespace {

RunState audit_state(int iterations, const std::function<bool(int)>& pass,
                     const std::function<bool(int)>& novel) {
    RunState state;
    state.mode = "advisor";
    state.iteration = iterations;
    state.target_count = iterations;
    for (int i = 1; i <= iterations; ++i) {
        AuditEvent w;
        w.iteration = i;
        w.kind = "weakness";
        w.phrase = "category " + std::to_string(i);
        w.novel = novel(i);
        w.fallback = false;
        state.audit_log.push_back(std::move(w));
        AuditEvent u;
        u.iteration = i;
        u.kind = "summary_update";
        u.raw_pass = pass(i);
        u.repaired = !pass(i);
        u.no_op = false;
        state.audit_log.push_back(std::move(u));
    }
    return state;
}

}  // namespace

TEST_CASE("audit_run reports exact fractions") {
    auto all_good = audit_state(10, [](int) { return true; }, [](int) { return true; });
    auto report = audit_run(all_good);
    CHECK(report.summary_accuracy == 1.0);
    CHECK(report.weakness_novelty == 1.0);
    CHECK(report.summary_total == 10);
    CHECK(report.weakness_total == 10);
    CHECK(report.windows.empty());  // 10 <= 500

    // 84 of 100 passing updates: the fraction is exact, not approximate.
    auto mostly = audit_state(
        100, [](int i) { return i > 16; }, [](int i) { return i % 4 != 0; });
    auto r2 = audit_run(mostly);
    CHECK(r2.summary_accuracy == 84.0 / 100.0);
    CHECK(r2.weakness_novelty == 75.0 / 100.0);
}

TEST_CASE("audit_run emits first/last windows for long runs") {
    // Pass pattern: iterations 1..400 and 751..1000 pass; novelty alternates.
    auto state = audit_state(
        1000, [](int i) { return i <= 400 || i > 750; }, [](int i) { return i % 2 == 0; });
    auto report = audit_run(state, 500);
    CHECK(report.summary_accuracy == 650.0 / 1000.0);
    CHECK(report.weakness_novelty == 0.5);
    REQUIRE(report.windows.size() == 2);

    const AuditWindow& first = report.windows[0];
    CHECK(first.label == "first 500");
    CHECK(first.first_iteration == 1);
    CHECK(first.last_iteration == 500);
    CHECK(first.summary_accuracy == 400.0 / 500.0);
    CHECK(first.weakness_novelty == 0.5);

    const AuditWindow& last = report.windows[1];
    CHECK(last.label == "last 500");
    CHECK(last.first_iteration == 501);
    CHECK(last.last_iteration == 1000);
    CHECK(last.summary_accuracy == 250.0 / 500.0);
    CHECK(last.weakness_novelty == 0.5);

    auto j = audit_to_json(report);
    CHECK(j["summary_accuracy"].get<double>() == 0.65);
    REQUIRE(j["windows"].size() == 2);
    CHECK(j["windows"][0]["label"] == "first 500");
    CHECK(j["windows"][1]["summary_accuracy"].get<double>() == 0.5);
}

TEST_CASE("audit windows appear only when the run exceeds one window") {
    auto exact = audit_state(5, [](int) { return true; }, [](int) { return true; });
    CHECK(audit_run(exact, 5).windows.empty());

    auto longer = audit_state(6, [](int i) { return i != 6; }, [](int) { return true; });
    auto report = audit_run(longer, 5);
    REQUIRE(report.windows.size() == 2);
    CHECK(report.windows[0].first_iteration == 1);
    CHECK(report.windows[0].last_iteration == 5);
    CHECK(report.windows[0].summary_accuracy == 1.0);
    CHECK(report.windows[1].first_iteration == 2);
    CHECK(report.windows[1].last_iteration == 6);
    CHECK(report.windows[1].summary_accuracy == 4.0 / 5.0);
}

TEST_CASE("audit_run takes the first event per iteration") {
    auto state = audit_state(2, [](int) { return true; }, [](int) { return true; });
    // A stray second update for iteration 1 with the opposite outcome.
    AuditEvent dup;
    dup.iteration = 1;
    dup.kind = "summary_update";
    dup.raw_pass = false;
    state.audit_log.push_back(dup);
    CHECK(audit_run(state).summary_accuracy == 1.0);
}

TEST_CASE("audit_run validates the log and the mode") {
    auto state = audit_state(5, [](int) { return true; }, [](int) { return true; });
    // Remove the summary_update for iteration 3 and the weakness for 2 and 4.
    std::vector<AuditEvent> pruned;
    for (const AuditEvent& e : state.audit_log) {
        if (e.kind == "summary_update" && e.iteration == 3) continue;
        if (e.kind == "weakness" && (e.iteration == 2 || e.iteration == 4)) continue;
        pruned.push_back(e);
    }
    state.audit_log = std::move(pruned);
    CHECK_THROWS_WITH(audit_run(state),
                      ContainsSubstring("audit: incomplete log: missing summary_update for "
                                        "iterations [3]; missing weakness for iterations "
                                        "[2, 4]"));

    RunState baseline;
    baseline.mode = "self_instruct";
    CHECK_THROWS_WITH(audit_run(baseline),
                      ContainsSubstring("mode 'self_instruct' carries no advisor audit log"));

    auto ok = audit_state(3, [](int) { return true; }, [](int) { return true; });
    CHECK_THROWS_AS(audit_run(ok, 0), ValidationError);

    RunState fresh;
    fresh.mode = "advisor";
    auto empty_report = audit_run(fresh);
    CHECK(empty_report.summary_total == 0);
    CHECK(empty_report.summary_accuracy == 0.0);
    CHECK(empty_report.windows.empty());

    // summary_init events at iteration 0 are outside the audit range.
    AuditEvent init;
    init.iteration = 0;
    init.kind = "summary_init";
    init.raw_pass = false;
    auto with_init = audit_state(2, [](int) { return true; }, [](int) { return true; });
    with_init.audit_log.insert(with_init.audit_log.begin(), init);
    CHECK(audit_run(with_init).summary_accuracy == 1.0);
}
