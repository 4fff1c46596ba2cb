#pragma once
/// @file config.hpp
/// @brief Plain-text run configuration: one file, one section per backend
///        role, flags override file values.
///
/// Sections: [loop], [generator], [responder], [judge], [model] (the model
/// under test for eval; defaults to [generator]), [mock], [eval], [paths].
/// For every backend role exactly one of {network section, mock section} is
/// active: an explicit network section wins, the mock fills the gaps, and
/// the --mock flag forces the mock everywhere.  API keys are never stored in
/// the file; a section names the environment variable that holds the key.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "advisor/backend.hpp"
#include "advisor/common.hpp"
#include "advisor/eval.hpp"
#include "advisor/loop.hpp"
#include "advisor/mock_backend.hpp"

namespace advisor {

struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section) const { return sections.count(section) > 0; }

    static IniFile parse(const std::string& text, const std::string& origin) {
        IniFile ini;
        std::string section;
        size_t line_number = 0;
        for (const std::string& raw : split_lines(text)) {
            ++line_number;
            const std::string line = trim(raw);
            const std::string at = origin + ":" + std::to_string(line_number);
            if (line.empty() || line[0] == '#' || line[0] == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']' || line.size() < 3)
                    throw ValidationError(at + ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                ini.sections[section];
                continue;
            }
            const size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ValidationError(at + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ValidationError(at + ": empty key");
            if (section.empty())
                throw ValidationError(at + ": key '" + key + "' outside any section");
            ini.sections[section][key] = trim(line.substr(eq + 1));
        }
        return ini;
    }

    static IniFile load(const std::string& path) { return parse(read_text_file(path), path); }
};

namespace detail {

inline long long to_int(const std::string& value, const std::string& where,
                        std::vector<std::string>& errors) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos == value.size()) return v;
    } catch (const std::exception&) {
    }
    errors.push_back(where + ": expected an integer, got '" + value + "'");
    return 0;
}

inline std::uint64_t to_uint64(const std::string& value, const std::string& where,
                               std::vector<std::string>& errors) {
    try {
        size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos == value.size() && value.find('-') == std::string::npos) return v;
    } catch (const std::exception&) {
    }
    errors.push_back(where + ": expected a non-negative integer, got '" + value + "'");
    return 0;
}

inline double to_double(const std::string& value, const std::string& where,
                        std::vector<std::string>& errors) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos == value.size()) return v;
    } catch (const std::exception&) {
    }
    errors.push_back(where + ": expected a number, got '" + value + "'");
    return 0.0;
}

inline std::vector<std::string> to_list(const std::string& value) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= value.size()) {
        size_t end = value.find(';', start);
        if (end == std::string::npos) end = value.size();
        const std::string item = trim(value.substr(start, end - start));
        if (!item.empty()) out.push_back(item);
        if (end == value.size()) break;
        start = end + 1;
    }
    return out;
}

}  // namespace detail

/// Explicit [loop] values; unset fields keep the mode's defaults.
struct LoopOverrides {
    std::optional<int> target_count;
    std::optional<int> exemplars_per_call;
    std::optional<int> calls_per_iteration;
    std::optional<double> generation_temperature;
    std::optional<int> generation_max_tokens;
    std::optional<double> response_temperature;
    std::optional<int> response_max_tokens;
    std::optional<std::uint64_t> rng_seed;
    std::optional<int> max_in_flight;
    std::optional<std::vector<std::string>> fallback_categories;

    void apply(LoopConfig& cfg) const {
        if (target_count) cfg.target_count = *target_count;
        if (exemplars_per_call) cfg.exemplars_per_call = *exemplars_per_call;
        if (calls_per_iteration) cfg.calls_per_iteration = *calls_per_iteration;
        if (generation_temperature) cfg.generation_temperature = *generation_temperature;
        if (generation_max_tokens) cfg.generation_max_tokens = *generation_max_tokens;
        if (response_temperature) cfg.response_temperature = *response_temperature;
        if (response_max_tokens) cfg.response_max_tokens = *response_max_tokens;
        if (rng_seed) cfg.rng_seed = *rng_seed;
        if (max_in_flight) cfg.max_in_flight = *max_in_flight;
        if (fallback_categories) cfg.fallback_categories = *fallback_categories;
    }
};

/// [mock] section: deterministic backend parameters.
struct MockParams {
    std::uint64_t seed = 0;
    std::string vocabulary_file;  // one phrase per line; built-in vocabulary when empty
    int summary_drop_modulus = 0;
    std::vector<int> summary_drop_residues;
    std::string refusal_text;  // built-in refusal when empty
    std::string judge_unsafe_marker;
    int judge_unsafe_percent = 0;

    MockOptions to_options() const {
        MockOptions opts;
        opts.seed = seed;
        if (!vocabulary_file.empty()) {
            std::vector<std::string> vocabulary;
            for (const std::string& line : split_lines(read_text_file(vocabulary_file))) {
                const std::string phrase = trim(line);
                if (!phrase.empty()) vocabulary.push_back(phrase);
            }
            if (vocabulary.empty())
                throw ValidationError("mock: vocabulary file '" + vocabulary_file + "' is empty");
            opts.vocabulary = std::move(vocabulary);
        }
        opts.summary_drop_modulus = summary_drop_modulus;
        opts.summary_drop_residues = summary_drop_residues;
        if (!refusal_text.empty()) opts.refusal_text = refusal_text;
        opts.judge_unsafe_marker = judge_unsafe_marker;
        opts.judge_unsafe_percent = judge_unsafe_percent;
        opts.validate();
        return opts;
    }
};

/// One backend role resolved to exactly one implementation.
struct RoleBinding {
    std::string role;
    std::optional<BackendConfig> network;
    std::optional<MockOptions> mock;

    std::string describe() const {
        if (network)
            return role + ": http " + network->endpoint_url + " model=" + network->model_name;
        if (mock)
            return role + ": mock seed=" + std::to_string(mock->seed) +
                   " vocabulary=" + std::to_string(mock->vocabulary.size());
        return role + ": unresolved";
    }
};

struct AppConfig {
    LoopOverrides loop;
    std::optional<BackendConfig> generator;
    std::optional<BackendConfig> responder;
    std::optional<BackendConfig> judge;
    std::optional<BackendConfig> model;  // model under test; falls back to generator
    std::optional<MockParams> mock;
    EvalParams eval;
    std::string eval_set_path;

    std::string seeds_path;
    std::string output_dir = "out";
    std::string checkpoint_path;  // default <output_dir>/checkpoint.json
    std::string dataset_path;     // default <output_dir>/dataset.jsonl
    std::string templates_dir;    // built-in templates when empty

    bool force_mock = false;  // --mock

    std::string resolved_checkpoint() const {
        return checkpoint_path.empty() ? output_dir + "/checkpoint.json" : checkpoint_path;
    }
    std::string resolved_dataset() const {
        return dataset_path.empty() ? output_dir + "/dataset.jsonl" : dataset_path;
    }

    PromptLibrary load_templates() const {
        return templates_dir.empty() ? PromptLibrary::builtin()
                                     : PromptLibrary::from_directory(templates_dir);
    }

    LoopConfig loop_config(Mode mode) const {
        LoopConfig cfg = mode == Mode::advisor ? LoopConfig::advisor_defaults()
                                               : LoopConfig::self_instruct_defaults();
        cfg.mode = mode;
        loop.apply(cfg);
        return cfg;
    }

    /// Picks the implementation for one role.  An explicit network section
    /// wins unless --mock forces the mock; a missing section falls back to
    /// the mock when one is configured.
    RoleBinding resolve_role(const std::string& role, std::vector<std::string>& errors) const {
        const std::optional<BackendConfig>* section = nullptr;
        if (role == "generator") section = &generator;
        else if (role == "responder") section = &responder;
        else if (role == "judge") section = &judge;
        else if (role == "model") section = &model;
        else throw ValidationError("resolve_role: unknown role '" + role + "'");

        RoleBinding binding;
        binding.role = role;
        const std::optional<BackendConfig>& network =
            (role == "model" && !model) ? generator : *section;
        if (!force_mock && network) {
            binding.network = network;
            for (const std::string& problem : network->problems())
                errors.push_back("config: [" + role + "] " + problem);
            return binding;
        }
        if (mock || force_mock) {
            try {
                binding.mock = mock ? mock->to_options() : MockOptions{};
            } catch (const Error& e) {
                errors.push_back(std::string("config: ") + e.what());
            }
            return binding;
        }
        errors.push_back("config: no [" + role + "] section and no [mock] section; one of the "
                         "two (or --mock) is required");
        return binding;
    }

    static AppConfig from_ini(const IniFile& ini, const std::string& origin);

    static AppConfig from_file(const std::string& path) {
        return from_ini(IniFile::load(path), path);
    }
};

namespace detail {

inline std::optional<BackendConfig> parse_backend_section(const IniFile& ini,
                                                          const std::string& section,
                                                          std::vector<std::string>& errors) {
    if (!ini.has(section)) return std::nullopt;
    BackendConfig cfg;
    for (const auto& [key, value] : ini.sections.at(section)) {
        const std::string where = "config: [" + section + "] " + key;
        if (key == "endpoint_url") cfg.endpoint_url = value;
        else if (key == "model_name") cfg.model_name = value;
        else if (key == "api_key_env_var") cfg.api_key_env_var = value;
        else if (key == "timeout_ms") cfg.timeout_ms = static_cast<int>(to_int(value, where, errors));
        else if (key == "max_retries") cfg.max_retries = static_cast<int>(to_int(value, where, errors));
        else if (key == "retry_backoff_ms")
            cfg.retry_backoff_ms = static_cast<int>(to_int(value, where, errors));
        else if (key == "requests_per_minute")
            cfg.requests_per_minute = static_cast<int>(to_int(value, where, errors));
        else if (key == "max_in_flight")
            cfg.max_in_flight = static_cast<int>(to_int(value, where, errors));
        else errors.push_back("config: [" + section + "] unknown key '" + key + "'");
    }
    return cfg;
}

}  // namespace detail

inline AppConfig AppConfig::from_ini(const IniFile& ini, const std::string& origin) {
    AppConfig cfg;
    std::vector<std::string> errors;

    static const std::set<std::string> known_sections = {
        "loop", "generator", "responder", "judge", "model", "mock", "eval", "paths"};
    for (const auto& [section, kv] : ini.sections) {
        if (!known_sections.count(section))
            errors.push_back("config: unknown section [" + section + "]");
    }

    if (ini.has("loop")) {
        for (const auto& [key, value] : ini.sections.at("loop")) {
            const std::string where = "config: [loop] " + key;
            if (key == "target_count")
                cfg.loop.target_count = static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "exemplars_per_call")
                cfg.loop.exemplars_per_call = static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "calls_per_iteration")
                cfg.loop.calls_per_iteration =
                    static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "generation_temperature")
                cfg.loop.generation_temperature = detail::to_double(value, where, errors);
            else if (key == "generation_max_tokens")
                cfg.loop.generation_max_tokens =
                    static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "response_temperature")
                cfg.loop.response_temperature = detail::to_double(value, where, errors);
            else if (key == "response_max_tokens")
                cfg.loop.response_max_tokens =
                    static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "rng_seed")
                cfg.loop.rng_seed = detail::to_uint64(value, where, errors);
            else if (key == "max_in_flight")
                cfg.loop.max_in_flight = static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "fallback_categories")
                cfg.loop.fallback_categories = detail::to_list(value);
            else if (key == "mode")
                errors.push_back("config: [loop] unknown key 'mode' (the subcommand selects the "
                                 "mode)");
            else errors.push_back("config: [loop] unknown key '" + key + "'");
        }
    }

    cfg.generator = detail::parse_backend_section(ini, "generator", errors);
    cfg.responder = detail::parse_backend_section(ini, "responder", errors);
    cfg.judge = detail::parse_backend_section(ini, "judge", errors);
    cfg.model = detail::parse_backend_section(ini, "model", errors);

    if (ini.has("mock")) {
        MockParams mock;
        for (const auto& [key, value] : ini.sections.at("mock")) {
            const std::string where = "config: [mock] " + key;
            if (key == "seed") mock.seed = detail::to_uint64(value, where, errors);
            else if (key == "vocabulary_file") mock.vocabulary_file = value;
            else if (key == "summary_drop_modulus")
                mock.summary_drop_modulus = static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "summary_drop_residues") {
                for (const std::string& item : detail::to_list(value))
                    mock.summary_drop_residues.push_back(
                        static_cast<int>(detail::to_int(item, where, errors)));
            } else if (key == "refusal_text") mock.refusal_text = value;
            else if (key == "judge_unsafe_marker") mock.judge_unsafe_marker = value;
            else if (key == "judge_unsafe_percent")
                mock.judge_unsafe_percent = static_cast<int>(detail::to_int(value, where, errors));
            else errors.push_back("config: [mock] unknown key '" + key + "'");
        }
        cfg.mock = std::move(mock);
    }

    if (ini.has("eval")) {
        for (const auto& [key, value] : ini.sections.at("eval")) {
            const std::string where = "config: [eval] " + key;
            if (key == "eval_set") cfg.eval_set_path = value;
            else if (key == "judge_template_file") {
                try {
                    cfg.eval.judge_template = read_text_file(value);
                } catch (const Error& e) {
                    errors.push_back(where + ": " + e.what());
                }
            } else if (key == "model_temperature")
                cfg.eval.model_temperature = detail::to_double(value, where, errors);
            else if (key == "model_max_tokens")
                cfg.eval.model_max_tokens = static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "judge_temperature")
                cfg.eval.judge_temperature = detail::to_double(value, where, errors);
            else if (key == "judge_max_tokens")
                cfg.eval.judge_max_tokens = static_cast<int>(detail::to_int(value, where, errors));
            else if (key == "max_in_flight")
                cfg.eval.max_in_flight = static_cast<int>(detail::to_int(value, where, errors));
            else errors.push_back("config: [eval] unknown key '" + key + "'");
        }
    }

    if (ini.has("paths")) {
        for (const auto& [key, value] : ini.sections.at("paths")) {
            if (key == "seeds") cfg.seeds_path = value;
            else if (key == "output_dir") cfg.output_dir = value;
            else if (key == "checkpoint") cfg.checkpoint_path = value;
            else if (key == "dataset") cfg.dataset_path = value;
            else if (key == "templates_dir") cfg.templates_dir = value;
            else errors.push_back("config: [paths] unknown key '" + key + "'");
        }
    }

    if (!errors.empty())
        throw ValidationError(origin + ": " + std::to_string(errors.size()) +
                              " problem(s):\n  " + join(errors, "\n  "));
    return cfg;
}

}  // namespace advisor
