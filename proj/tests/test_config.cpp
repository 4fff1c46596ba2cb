// Configuration: INI parsing, typed section loading with all-at-once error
// collection, and backend role resolution.

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "advisor/config.hpp"
#include "test_util.hpp"

using namespace advisor;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("ini parsing handles sections, comments, and padding") {
    auto ini = IniFile::parse("# comment\n"
                              "; also a comment\n"
                              "[loop]\n"
                              "  target_count = 100  \n"
                              "\n"
                              "[paths]\n"
                              "seeds = data/seeds.jsonl\n"
                              "note = a = b\n",
                              "test.ini");
    REQUIRE(ini.has("loop"));
    REQUIRE(ini.has("paths"));
    CHECK(ini.sections.at("loop").at("target_count") == "100");
    CHECK(ini.sections.at("paths").at("seeds") == "data/seeds.jsonl");
    // Values may contain '='; the split happens at the first one.
    CHECK(ini.sections.at("paths").at("note") == "a = b");

    CHECK(IniFile::parse("", "t").sections.empty());
    CHECK(IniFile::parse("[empty]\n", "t").has("empty"));
}

TEST_CASE("ini parsing reports the offending line") {
    CHECK_THROWS_WITH(IniFile::parse("[unterminated\n", "t.ini"),
                      ContainsSubstring("t.ini:1: malformed section header"));
    CHECK_THROWS_WITH(IniFile::parse("[]\n", "t.ini"),
                      ContainsSubstring("t.ini:1: malformed section header"));
    CHECK_THROWS_WITH(IniFile::parse("[a]\nnot a pair\n", "t.ini"),
                      ContainsSubstring("t.ini:2: expected key = value"));
    CHECK_THROWS_WITH(IniFile::parse("[a]\n= value\n", "t.ini"),
                      ContainsSubstring("t.ini:2: empty key"));
    CHECK_THROWS_WITH(IniFile::parse("key = value\n", "t.ini"),
                      ContainsSubstring("t.ini:1: key 'key' outside any section"));
}

TEST_CASE("list values split on semicolons") {
    CHECK(detail::to_list("a; b ;c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(detail::to_list("solo") == std::vector<std::string>{"solo"});
    CHECK(detail::to_list(" ; ; ") == std::vector<std::string>{});
    CHECK(detail::to_list("") == std::vector<std::string>{});
}

TEST_CASE("a full configuration file loads into typed sections") {
    auto ini = IniFile::parse(
        "[loop]\n"
        "target_count = 500\n"
        "exemplars_per_call = 4\n"
        "calls_per_iteration = 8\n"
        "generation_temperature = 0.9\n"
        "generation_max_tokens = 100\n"
        "response_temperature = 0.1\n"
        "response_max_tokens = 200\n"
        "rng_seed = 7\n"
        "max_in_flight = 2\n"
        "fallback_categories = alpha; beta\n"
        "[generator]\n"
        "endpoint_url = http://localhost:8000/v1\n"
        "model_name = gen-model\n"
        "api_key_env_var = GEN_KEY\n"
        "timeout_ms = 1000\n"
        "max_retries = 2\n"
        "retry_backoff_ms = 100\n"
        "requests_per_minute = 60\n"
        "max_in_flight = 3\n"
        "[mock]\n"
        "seed = 9\n"
        "summary_drop_modulus = 10\n"
        "summary_drop_residues = 4; 7; 0\n"
        "judge_unsafe_marker = XX\n"
        "judge_unsafe_percent = 12\n"
        "refusal_text = nope\n"
        "[eval]\n"
        "eval_set = eval.jsonl\n"
        "model_temperature = 0.5\n"
        "model_max_tokens = 64\n"
        "judge_temperature = 0.2\n"
        "judge_max_tokens = 16\n"
        "max_in_flight = 5\n"
        "[paths]\n"
        "seeds = seeds.jsonl\n"
        "output_dir = myout\n"
        "checkpoint = ck.json\n"
        "dataset = data.jsonl\n"
        "templates_dir = tpl\n",
        "full.ini");
    auto cfg = AppConfig::from_ini(ini, "full.ini");

    CHECK(cfg.loop.target_count == 500);
    CHECK(cfg.loop.fallback_categories ==
          std::vector<std::string>{"alpha", "beta"});

    REQUIRE(cfg.generator.has_value());
    CHECK(cfg.generator->endpoint_url == "http://localhost:8000/v1");
    CHECK(cfg.generator->model_name == "gen-model");
    CHECK(cfg.generator->api_key_env_var == "GEN_KEY");
    CHECK(cfg.generator->timeout_ms == 1000);
    CHECK(cfg.generator->requests_per_minute == 60);
    CHECK_FALSE(cfg.responder.has_value());

    REQUIRE(cfg.mock.has_value());
    CHECK(cfg.mock->seed == 9);
    CHECK(cfg.mock->summary_drop_residues == std::vector<int>{4, 7, 0});
    CHECK(cfg.mock->judge_unsafe_percent == 12);

    CHECK(cfg.eval_set_path == "eval.jsonl");
    CHECK(cfg.eval.model_temperature == 0.5);
    CHECK(cfg.eval.judge_max_tokens == 16);

    CHECK(cfg.seeds_path == "seeds.jsonl");
    CHECK(cfg.output_dir == "myout");
    CHECK(cfg.resolved_checkpoint() == "ck.json");
    CHECK(cfg.resolved_dataset() == "data.jsonl");
    CHECK(cfg.templates_dir == "tpl");

    // Loop settings overlay the mode defaults.
    auto advisor_cfg = cfg.loop_config(Mode::advisor);
    CHECK(advisor_cfg.mode == Mode::advisor);
    CHECK(advisor_cfg.target_count == 500);
    CHECK(advisor_cfg.exemplars_per_call == 4);
    auto baseline_cfg = cfg.loop_config(Mode::self_instruct);
    CHECK(baseline_cfg.mode == Mode::self_instruct);
    CHECK(baseline_cfg.exemplars_per_call == 4);  // explicit override wins
}

TEST_CASE("mode defaults apply when the file leaves values unset") {
    auto cfg = AppConfig::from_ini(IniFile::parse("[loop]\ntarget_count = 50\n", "t.ini"),
                                   "t.ini");
    auto advisor_cfg = cfg.loop_config(Mode::advisor);
    CHECK(advisor_cfg.exemplars_per_call == 3);
    CHECK(advisor_cfg.calls_per_iteration == 10);
    CHECK(advisor_cfg.target_count == 50);
    auto baseline_cfg = cfg.loop_config(Mode::self_instruct);
    CHECK(baseline_cfg.exemplars_per_call == 5);
    CHECK(baseline_cfg.calls_per_iteration == 1);
    CHECK(baseline_cfg.target_count == 50);

    // Defaults with no file input at all.
    AppConfig empty;
    CHECK(empty.resolved_checkpoint() == "out/checkpoint.json");
    CHECK(empty.resolved_dataset() == "out/dataset.jsonl");
}

TEST_CASE("every config problem is reported in one pass") {
    auto ini = IniFile::parse("[loop]\n"
                              "target_count = soon\n"
                              "mode = advisor\n"
                              "[generator]\n"
                              "endpoint_url = http://x/v1\n"
                              "model_name = m\n"
                              "timeout_ms = fast\n"
                              "[typo]\n"
                              "key = value\n",
                              "bad.ini");
    try {
        AppConfig::from_ini(ini, "bad.ini");
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK_THAT(msg, ContainsSubstring("bad.ini: 4 problem(s):"));
        CHECK_THAT(msg, ContainsSubstring(
            "config: [loop] target_count: expected an integer, got 'soon'"));
        CHECK_THAT(msg, ContainsSubstring(
            "config: [loop] unknown key 'mode' (the subcommand selects the mode)"));
        CHECK_THAT(msg, ContainsSubstring(
            "config: [generator] timeout_ms: expected an integer, got 'fast'"));
        CHECK_THAT(msg, ContainsSubstring("config: unknown section [typo]"));
    }

    CHECK_THROWS_WITH(
        AppConfig::from_ini(IniFile::parse("[loop]\nrng_seed = -3\n", "t.ini"), "t.ini"),
        ContainsSubstring("expected a non-negative integer, got '-3'"));
    CHECK_THROWS_WITH(
        AppConfig::from_ini(
            IniFile::parse("[eval]\nmodel_temperature = warm\n", "t.ini"), "t.ini"),
        ContainsSubstring("expected a number, got 'warm'"));
}

// ---------------------------------------------------------------------------
// role resolution
// ---------------------------------------------------------------------------

namespace {

AppConfig config_from(const std::string& text) {
    return AppConfig::from_ini(IniFile::parse(text, "t.ini"), "t.ini");
}

}  // namespace

TEST_CASE("an explicit network section wins over the mock") {
    auto cfg = config_from("[generator]\n"
                           "endpoint_url = http://g/v1\n"
                           "model_name = g\n"
                           "[mock]\n"
                           "seed = 5\n");
    std::vector<std::string> errors;
    auto generator = cfg.resolve_role("generator", errors);
    CHECK(errors.empty());
    REQUIRE(generator.network.has_value());
    CHECK(generator.network->endpoint_url == "http://g/v1");
    CHECK_THAT(generator.describe(), ContainsSubstring("generator: http http://g/v1 model=g"));

    // No [responder] section: the mock fills the gap.
    auto responder = cfg.resolve_role("responder", errors);
    CHECK(errors.empty());
    CHECK_FALSE(responder.network.has_value());
    REQUIRE(responder.mock.has_value());
    CHECK(responder.mock->seed == 5);
    CHECK_THAT(responder.describe(), ContainsSubstring("responder: mock seed=5"));
}

TEST_CASE("--mock forces the mock everywhere") {
    auto cfg = config_from("[generator]\n"
                           "endpoint_url = http://g/v1\n"
                           "model_name = g\n");
    cfg.force_mock = true;
    std::vector<std::string> errors;
    auto generator = cfg.resolve_role("generator", errors);
    CHECK(errors.empty());
    CHECK_FALSE(generator.network.has_value());
    REQUIRE(generator.mock.has_value());
    CHECK(generator.mock->vocabulary == default_mock_vocabulary());
}

TEST_CASE("a role with neither section is an error") {
    auto cfg = config_from("[loop]\ntarget_count = 10\n");
    std::vector<std::string> errors;
    auto binding = cfg.resolve_role("generator", errors);
    REQUIRE(errors.size() == 1);
    CHECK_THAT(errors[0],
               ContainsSubstring("no [generator] section and no [mock] section; one of the two "
                                 "(or --mock) is required"));
    CHECK_THAT(binding.describe(), ContainsSubstring("unresolved"));

    CHECK_THROWS_WITH(cfg.resolve_role("oracle", errors),
                      ContainsSubstring("unknown role 'oracle'"));
}

TEST_CASE("the eval model falls back to the generator section") {
    auto cfg = config_from("[generator]\n"
                           "endpoint_url = http://g/v1\n"
                           "model_name = g\n");
    std::vector<std::string> errors;
    auto model = cfg.resolve_role("model", errors);
    CHECK(errors.empty());
    REQUIRE(model.network.has_value());
    CHECK(model.network->model_name == "g");

    auto explicit_cfg = config_from("[generator]\n"
                                    "endpoint_url = http://g/v1\n"
                                    "model_name = g\n"
                                    "[model]\n"
                                    "endpoint_url = http://m/v1\n"
                                    "model_name = m\n");
    auto explicit_model = explicit_cfg.resolve_role("model", errors);
    CHECK(errors.empty());
    CHECK(explicit_model.network->model_name == "m");
}

TEST_CASE("incomplete network sections surface their problems") {
    auto cfg = config_from("[judge]\n"
                           "endpoint_url = http://j/v1\n");
    std::vector<std::string> errors;
    cfg.resolve_role("judge", errors);
    REQUIRE(errors.size() == 1);
    CHECK_THAT(errors[0], ContainsSubstring("config: [judge] model_name is empty"));
}

// ---------------------------------------------------------------------------
// mock parameters
// ---------------------------------------------------------------------------

TEST_CASE("mock params build options, loading the vocabulary file") {
    testutil::TempDir dir("mockvocab");
    const auto vocab = dir.file("vocab.txt");
    testutil::spit(vocab, "alpha attack\n\n  beta breach  \n");

    MockParams params;
    params.seed = 3;
    params.vocabulary_file = vocab.string();
    params.judge_unsafe_percent = 40;
    auto opts = params.to_options();
    CHECK(opts.seed == 3);
    CHECK(opts.vocabulary == std::vector<std::string>{"alpha attack", "beta breach"});
    CHECK(opts.judge_unsafe_percent == 40);
    CHECK(opts.refusal_text ==
          "I can't help with that. This request could cause harm, so I have to decline.");

    testutil::spit(vocab, "\n  \n");
    CHECK_THROWS_WITH(params.to_options(),
                      ContainsSubstring("vocabulary file '" + vocab.string() + "' is empty"));

    MockParams defaults;
    CHECK(defaults.to_options().vocabulary == default_mock_vocabulary());
}

TEST_CASE("a bad mock vocabulary path is collected at resolve time") {
    auto cfg = config_from("[mock]\nvocabulary_file = /nonexistent/vocab.txt\n");
    std::vector<std::string> errors;
    cfg.resolve_role("generator", errors);
    REQUIRE(errors.size() == 1);
    CHECK_THAT(errors[0], ContainsSubstring("/nonexistent/vocab.txt"));
}

TEST_CASE("the eval judge template can come from a file") {
    testutil::TempDir dir("judgetpl");
    const auto tpl = dir.file("judge.txt");
    testutil::spit(tpl, "Classify: {PROMPT} -> {RESPONSE}");
    auto cfg = config_from("[eval]\njudge_template_file = " + tpl.string() + "\n");
    CHECK(cfg.eval.judge_template == "Classify: {PROMPT} -> {RESPONSE}");

    CHECK_THROWS_WITH(config_from("[eval]\njudge_template_file = /nonexistent/j.txt\n"),
                      ContainsSubstring("judge_template_file"));
}

TEST_CASE("config files load from disk") {
    testutil::TempDir dir("cfgfile");
    const auto path = dir.file("run.ini");
    testutil::spit(path, "[loop]\ntarget_count = 77\n[mock]\nseed = 1\n");
    auto cfg = AppConfig::from_file(path.string());
    CHECK(cfg.loop.target_count == 77);
    REQUIRE(cfg.mock.has_value());
    CHECK(cfg.mock->seed == 1);

    CHECK_THROWS_WITH(AppConfig::from_file(dir.file("missing.ini").string()),
                      ContainsSubstring("for reading"));
}
