#include "apikg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "apikg/construct.hpp"
#include "apikg/corpus.hpp"
#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/eval.hpp"
#include "apikg/explore.hpp"
#include "apikg/util.hpp"

namespace fs = std::filesystem;

namespace apikg {

namespace {

std::string join_path(const std::string& base, const std::string& leaf) {
    return (fs::path(base) / leaf).string();
}

std::string resolve(const std::string& config_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(config_dir) / p).lexically_normal().string();
}

void require_exists(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw ConfigError(what + " does not exist: " + path);
    }
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

std::string PipelineConfig::schema_potential_path() const {
    return join_path(out_dir, "schema_potential.json");
}
std::string PipelineConfig::kg_unreliable_path() const {
    return join_path(out_dir, "kg_unreliable.json");
}
std::string PipelineConfig::schema_validated_path() const {
    return join_path(out_dir, "schema_validated.json");
}
std::string PipelineConfig::kg_reliable_path() const { return join_path(out_dir, "kg_reliable.json"); }
std::string PipelineConfig::metrics_path() const { return join_path(out_dir, "metrics.json"); }
std::string PipelineConfig::eval_report_path() const { return join_path(out_dir, "eval_report.json"); }
std::string PipelineConfig::explore_trace_path() const {
    return join_path(out_dir, "explore_trace.jsonl");
}
std::string PipelineConfig::construct_trace_path() const {
    return join_path(out_dir, "construct_trace.jsonl");
}
std::string PipelineConfig::manifest_path() const { return join_path(out_dir, "manifest.json"); }

PipelineConfig load_config(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config " + path + " must be a JSON object");

    PipelineConfig cfg;
    cfg.config_dir = fs::absolute(fs::path(path)).parent_path().string();

    const auto get_string = [&](const char* key, std::string& out) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
        out = doc[key].get<std::string>();
    };
    std::string seed, target, gold, annotations, templates, out_dir;
    get_string("seed_corpus", seed);
    get_string("target_corpus", target);
    get_string("gold", gold);
    get_string("annotations", annotations);
    get_string("template_dir", templates);
    get_string("out_dir", out_dir);
    cfg.seed_corpus = resolve(cfg.config_dir, seed);
    cfg.target_corpus = resolve(cfg.config_dir, target);
    cfg.gold = resolve(cfg.config_dir, gold);
    cfg.annotations = resolve(cfg.config_dir, annotations);
    cfg.template_dir = resolve(cfg.config_dir, templates);
    if (!out_dir.empty()) cfg.out_dir = resolve(cfg.config_dir, out_dir);

    if (doc.contains("provider")) {
        const auto& p = doc["provider"];
        if (!p.is_object()) throw ConfigError("config key 'provider' must be an object");
        cfg.provider.mode = p.value("mode", cfg.provider.mode);
        if (p.contains("fixture_file")) {
            cfg.provider.fixture_file = resolve(cfg.config_dir, p["fixture_file"].get<std::string>());
        }
        cfg.provider.endpoint = p.value("endpoint", cfg.provider.endpoint);
        cfg.provider.model = p.value("model", cfg.provider.model);
        cfg.provider.max_in_flight = p.value("max_in_flight", cfg.provider.max_in_flight);
        cfg.provider.budget = p.value("budget", cfg.provider.budget);
        cfg.provider.timeout_seconds = p.value("timeout_seconds", cfg.provider.timeout_seconds);
        cfg.provider.attempts = p.value("attempts", cfg.provider.attempts);
        cfg.provider.backoff_base_ms = p.value("backoff_base_ms", cfg.provider.backoff_base_ms);
    }
    if (doc.contains("thresholds")) {
        const auto& t = doc["thresholds"];
        if (!t.is_object()) throw ConfigError("config key 'thresholds' must be an object");
        cfg.thresholds.support_min = t.value("support", cfg.thresholds.support_min);
        cfg.thresholds.confidence_min = t.value("confidence", cfg.thresholds.confidence_min);
        cfg.thresholds.lift_min = t.value("lift", cfg.thresholds.lift_min);
    }
    cfg.inclusive = doc.value("inclusive", cfg.inclusive);
    if (doc.contains("count_mode")) {
        cfg.count_mode = count_mode_from_string(doc["count_mode"].get<std::string>());
    }
    if (doc.contains("eval_thresholds")) {
        if (!doc["eval_thresholds"].is_array() || doc["eval_thresholds"].empty()) {
            throw ConfigError("config key 'eval_thresholds' must be a non-empty array");
        }
        cfg.eval_thresholds.clear();
        for (const auto& v : doc["eval_thresholds"]) cfg.eval_thresholds.push_back(v.get<double>());
    }
    cfg.trace = doc.value("trace", cfg.trace);
    cfg.strict = doc.value("strict", cfg.strict);
    cfg.workers = doc.value("workers", cfg.workers);

    // Validation: modes, thresholds, and the existence of every
    // referenced input path.
    if (cfg.provider.mode != "fixture" && cfg.provider.mode != "http") {
        throw ConfigError("provider mode must be 'fixture' or 'http', got '" + cfg.provider.mode +
                          "'");
    }
    if (cfg.thresholds.support_min < 0 || cfg.thresholds.confidence_min < 0 ||
        cfg.thresholds.lift_min < 0) {
        throw ConfigError("thresholds must be non-negative");
    }
    for (double t : cfg.eval_thresholds) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw ConfigError("eval thresholds must lie in (0, 1]");
        }
    }
    if (cfg.provider.budget < 0) throw ConfigError("provider budget must be >= 0");
    if (!cfg.seed_corpus.empty()) require_exists(cfg.seed_corpus, "seed_corpus");
    if (!cfg.target_corpus.empty()) require_exists(cfg.target_corpus, "target_corpus");
    if (!cfg.gold.empty()) require_exists(cfg.gold, "gold");
    if (!cfg.annotations.empty()) require_exists(cfg.annotations, "annotations");
    if (!cfg.template_dir.empty()) require_exists(cfg.template_dir, "template_dir");
    if (!cfg.provider.fixture_file.empty()) {
        require_exists(cfg.provider.fixture_file, "provider.fixture_file");
    }
    return cfg;
}

void apply_overrides(PipelineConfig& config, const ConfigOverrides& overrides) {
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
    if (overrides.provider_mode) {
        if (*overrides.provider_mode != "fixture" && *overrides.provider_mode != "http") {
            throw ConfigError("provider mode must be 'fixture' or 'http', got '" +
                              *overrides.provider_mode + "'");
        }
        config.provider.mode = *overrides.provider_mode;
    }
    if (overrides.trace) config.trace = *overrides.trace;
    if (overrides.strict) config.strict = *overrides.strict;
    if (overrides.support_min) config.thresholds.support_min = *overrides.support_min;
    if (overrides.confidence_min) config.thresholds.confidence_min = *overrides.confidence_min;
    if (overrides.lift_min) config.thresholds.lift_min = *overrides.lift_min;
    if (overrides.inclusive) config.inclusive = *overrides.inclusive;
    if (overrides.count_mode) config.count_mode = count_mode_from_string(*overrides.count_mode);
    if (config.thresholds.support_min < 0 || config.thresholds.confidence_min < 0 ||
        config.thresholds.lift_min < 0) {
        throw ConfigError("thresholds must be non-negative");
    }
}

std::string template_dir_digest(const std::string& template_dir) {
    std::vector<std::string> names;
    if (fs::is_directory(template_dir)) {
        for (const auto& entry : fs::directory_iterator(template_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".prompt") {
                names.push_back(entry.path().filename().string());
            }
        }
    }
    std::sort(names.begin(), names.end());
    std::string acc;
    for (const auto& name : names) {
        acc += name + ":" + digest_file(join_path(template_dir, name)) + ";";
    }
    return digest_hex(acc);
}

// ---- PipelineRunner ----

PipelineRunner::PipelineRunner(PipelineConfig config) : config_(std::move(config)) {}
PipelineRunner::PipelineRunner(PipelineConfig config, Provider& injected)
    : config_(std::move(config)), injected_provider_(&injected) {}
PipelineRunner::~PipelineRunner() = default;

Provider& PipelineRunner::provider() {
    if (!budgeted_provider_) {
        if (injected_provider_) {
            budgeted_provider_ =
                std::make_unique<BudgetedProvider>(*injected_provider_, config_.provider.budget);
            return *budgeted_provider_;
        }
        if (config_.provider.mode == "fixture") {
            if (config_.provider.fixture_file.empty()) {
                throw ConfigError("provider mode is 'fixture' but no fixture_file is configured");
            }
            base_provider_ = std::make_unique<FixtureProvider>(
                FixtureProvider::from_file(config_.provider.fixture_file));
        } else {
            if (config_.provider.endpoint.empty() || config_.provider.model.empty()) {
                throw ConfigError("provider mode is 'http' but endpoint/model are not configured");
            }
            HttpProviderOptions options;
            options.endpoint = config_.provider.endpoint;
            options.model = config_.provider.model;
            if (const char* key = std::getenv("APIKG_API_KEY")) options.api_key = key;
            options.max_in_flight = config_.provider.max_in_flight;
            options.attempts = config_.provider.attempts;
            options.backoff_base_ms = config_.provider.backoff_base_ms;
            options.timeout_seconds = config_.provider.timeout_seconds;
            base_provider_ = std::make_unique<HttpProvider>(std::move(options));
        }
        budgeted_provider_ =
            std::make_unique<BudgetedProvider>(*base_provider_, config_.provider.budget);
    }
    return *budgeted_provider_;
}

nlohmann::json PipelineRunner::load_manifest() const {
    if (!fs::exists(config_.manifest_path())) return nlohmann::json::object();
    try {
        auto doc = nlohmann::json::parse(read_file(config_.manifest_path()));
        return doc.is_object() ? doc : nlohmann::json::object();
    } catch (const std::exception&) {
        return nlohmann::json::object();  // corrupt manifest = nothing is fresh
    }
}

void PipelineRunner::store_manifest_entry(const std::string& stage, const nlohmann::json& inputs,
                                          const std::vector<std::string>& outputs) {
    nlohmann::json manifest = load_manifest();
    nlohmann::json entry;
    entry["inputs"] = inputs;
    entry["outputs"] = outputs;
    entry["timestamp"] = now_iso8601();
    manifest[stage] = entry;
    write_file(config_.manifest_path(), manifest.dump(2) + "\n");
}

bool PipelineRunner::run_stage(const std::string& name, const nlohmann::json& inputs,
                               const std::vector<std::string>& outputs, bool upstream_ran,
                               const std::function<void()>& body) {
    if (!upstream_ran) {
        const nlohmann::json manifest = load_manifest();
        if (manifest.contains(name) && manifest[name].contains("inputs") &&
            manifest[name]["inputs"] == inputs) {
            const bool all_present = std::all_of(outputs.begin(), outputs.end(),
                                                 [](const std::string& p) { return fs::exists(p); });
            if (all_present) {
                std::cout << name << ": up to date\n";
                return false;
            }
        }
    }
    body();
    store_manifest_entry(name, inputs, outputs);
    return true;
}

namespace {

std::string provider_signature(const PipelineConfig& cfg) {
    if (cfg.provider.mode == "fixture") {
        return "fixture:" + (cfg.provider.fixture_file.empty()
                                 ? std::string("-")
                                 : digest_file(cfg.provider.fixture_file));
    }
    return "http:" + cfg.provider.endpoint + ":" + cfg.provider.model;
}

void write_trace(const std::vector<TraceEntry>& trace, const std::string& path) {
    std::ostringstream out;
    for (const auto& entry : trace) {
        nlohmann::ordered_json obj;
        obj["unit"] = entry.unit;
        obj["source_id"] = entry.source_id;
        obj["input_digest"] = entry.input_digest;
        obj["output"] = entry.output;
        out << obj.dump() << "\n";
    }
    write_file(path, out.str());
}

}  // namespace

nlohmann::json PipelineRunner::explore_inputs() const {
    if (config_.seed_corpus.empty()) throw ConfigError("config has no seed_corpus");
    if (config_.template_dir.empty()) throw ConfigError("config has no template_dir");
    return nlohmann::json{{"seed_corpus", digest_file(config_.seed_corpus)},
                          {"templates", template_dir_digest(config_.template_dir)},
                          {"provider", provider_signature(config_)},
                          {"strict", config_.strict},
                          {"trace", config_.trace}};
}

nlohmann::json PipelineRunner::construct_inputs() const {
    if (config_.target_corpus.empty()) throw ConfigError("config has no target_corpus");
    if (config_.template_dir.empty()) throw ConfigError("config has no template_dir");
    if (!fs::exists(config_.schema_potential_path())) {
        throw DataError("missing input artifact " + config_.schema_potential_path() +
                        " (run the explore stage first)");
    }
    return nlohmann::json{{"target_corpus", digest_file(config_.target_corpus)},
                          {"schema", digest_file(config_.schema_potential_path())},
                          {"templates", template_dir_digest(config_.template_dir)},
                          {"provider", provider_signature(config_)},
                          {"strict", config_.strict},
                          {"trace", config_.trace}};
}

nlohmann::json PipelineRunner::filter_inputs() const {
    if (!fs::exists(config_.schema_potential_path()) ||
        !fs::exists(config_.kg_unreliable_path())) {
        throw DataError("missing input artifacts in " + config_.out_dir +
                        " (run explore and construct first)");
    }
    return nlohmann::json{{"schema", digest_file(config_.schema_potential_path())},
                          {"kg", digest_file(config_.kg_unreliable_path())},
                          {"support", config_.thresholds.support_min},
                          {"confidence", config_.thresholds.confidence_min},
                          {"lift", config_.thresholds.lift_min},
                          {"inclusive", config_.inclusive},
                          {"count_mode", to_string(config_.count_mode)}};
}

nlohmann::json PipelineRunner::eval_inputs() const {
    if (config_.gold.empty()) throw ConfigError("config has no gold file; nothing to evaluate");
    if (!fs::exists(config_.kg_reliable_path())) {
        throw DataError("missing input artifact " + config_.kg_reliable_path() +
                        " (run the filter stage first)");
    }
    nlohmann::json inputs{{"kg", digest_file(config_.kg_reliable_path())},
                          {"gold", digest_file(config_.gold)},
                          {"eval_thresholds", config_.eval_thresholds}};
    if (!config_.annotations.empty()) {
        inputs["annotations"] = digest_file(config_.annotations);
        inputs["schema"] = fs::exists(config_.schema_validated_path())
                               ? digest_file(config_.schema_validated_path())
                               : "-";
    }
    return inputs;
}

void PipelineRunner::do_explore() {
    const Corpus seeds = read_corpus_jsonl(config_.seed_corpus);
    ExploreOptions options;
    options.workers = config_.workers;
    options.strict = config_.strict;
    options.trace = config_.trace;
    ExploreResult result = run_exploration(seeds, config_.template_dir, provider(), options);
    write_schema(result.schema, config_.schema_potential_path());
    if (config_.trace) write_trace(result.trace, config_.explore_trace_path());
    std::cout << "explore: wrote " << config_.schema_potential_path() << " ("
              << result.schema.type_triples.size() << " potential type triples)\n";
}

void PipelineRunner::do_construct() {
    const Corpus target = read_corpus_jsonl(config_.target_corpus);
    const KGSchema schema = read_schema(config_.schema_potential_path());
    ConstructOptions options;
    options.workers = config_.workers;
    options.strict = config_.strict;
    options.trace = config_.trace;
    ConstructResult result =
        run_construction(target, schema, digest_file(config_.schema_potential_path()),
                         config_.template_dir, provider(), options);
    write_kg(result.kg, config_.kg_unreliable_path());
    if (config_.trace) write_trace(result.trace, config_.construct_trace_path());
    std::cout << "construct: wrote " << config_.kg_unreliable_path() << " ("
              << result.kg.entities.size() << " entities, " << result.kg.triples.size()
              << " instance triples from " << result.texts_after_filter << " filtered texts)\n";
}

void PipelineRunner::do_filter() {
    const KGSchema schema = read_schema(config_.schema_potential_path());
    const KnowledgeGraph kg = read_kg(config_.kg_unreliable_path());
    if (kg.schema_digest != digest_file(config_.schema_potential_path())) {
        warn("the knowledge graph was built against a different schema file");
    }
    std::vector<MetricRow> rows = compute_metrics(kg, config_.count_mode);
    apply_thresholds(rows, config_.thresholds, config_.inclusive);
    const KGSchema validated = update_schema(schema, rows);
    const KnowledgeGraph reliable = update_kg(kg, validated);
    write_metrics(rows, config_.metrics_path());
    write_schema(validated, config_.schema_validated_path());
    write_kg(reliable, config_.kg_reliable_path());
    std::cout << "filter: kept " << validated.type_triples.size() << " of "
              << schema.type_triples.size() << " type triples, " << reliable.triples.size()
              << " of " << kg.triples.size() << " instance triples\n";
}

void PipelineRunner::do_eval() {
    const KnowledgeGraph kg = read_kg(config_.kg_reliable_path());
    const GoldSet gold = read_gold_jsonl(config_.gold);
    EvalReport report = score(kg, gold, config_.eval_thresholds);
    if (!config_.annotations.empty()) {
        const auto annotations = read_annotations(config_.annotations);
        const KGSchema validated = read_schema(config_.schema_validated_path());
        report.type_triple_accuracy = type_triple_accuracy(validated.type_triples, annotations);
    }
    write_report(report, config_.eval_report_path());
    std::cout << "eval: wrote " << config_.eval_report_path() << "\n"
              << report_to_table(report);
}

namespace {

std::vector<std::string> with_trace(std::string main_output, bool trace, std::string trace_output) {
    std::vector<std::string> outputs{std::move(main_output)};
    if (trace) outputs.push_back(std::move(trace_output));
    return outputs;
}

}  // namespace

bool PipelineRunner::explore_stage(bool upstream_ran) {
    return run_stage("explore", explore_inputs(),
                     with_trace(config_.schema_potential_path(), config_.trace,
                                config_.explore_trace_path()),
                     upstream_ran, [this] { do_explore(); });
}

bool PipelineRunner::construct_stage(bool upstream_ran) {
    return run_stage("construct", construct_inputs(),
                     with_trace(config_.kg_unreliable_path(), config_.trace,
                                config_.construct_trace_path()),
                     upstream_ran, [this] { do_construct(); });
}

bool PipelineRunner::filter_stage(bool upstream_ran) {
    return run_stage("filter", filter_inputs(),
                     {config_.metrics_path(), config_.schema_validated_path(),
                      config_.kg_reliable_path()},
                     upstream_ran, [this] { do_filter(); });
}

bool PipelineRunner::eval_stage(bool upstream_ran) {
    return run_stage("eval", eval_inputs(), {config_.eval_report_path()}, upstream_ran,
                     [this] { do_eval(); });
}

bool PipelineRunner::explore() { return explore_stage(false); }
bool PipelineRunner::construct() { return construct_stage(false); }
bool PipelineRunner::filter() { return filter_stage(false); }
bool PipelineRunner::eval() { return eval_stage(false); }

RunOutcome PipelineRunner::run() {
    RunOutcome outcome;
    outcome.explore_ran = explore_stage(false);
    outcome.construct_ran = construct_stage(outcome.explore_ran);
    outcome.filter_ran = filter_stage(outcome.construct_ran);
    if (!config_.gold.empty()) {
        outcome.eval_ran = eval_stage(outcome.filter_ran);
    }
    return outcome;
}

GoldenDiff verify_golden(const PipelineConfig& config, const std::string& golden_dir) {
    PipelineRunner runner(config);
    runner.run();

    GoldenDiff diff;
    std::vector<std::pair<std::string, std::string>> files = {
        {"schema_potential.json", config.schema_potential_path()},
        {"kg_unreliable.json", config.kg_unreliable_path()},
        {"schema_validated.json", config.schema_validated_path()},
        {"kg_reliable.json", config.kg_reliable_path()},
        {"metrics.json", config.metrics_path()},
    };
    if (!config.gold.empty()) files.emplace_back("eval_report.json", config.eval_report_path());

    for (const auto& [name, produced] : files) {
        const std::string expected_path = join_path(golden_dir, name);
        if (!fs::exists(expected_path)) {
            diff.pass = false;
            diff.mismatches.push_back(name + ": missing from " + golden_dir);
            continue;
        }
        if (!fs::exists(produced)) {
            diff.pass = false;
            diff.mismatches.push_back(name + ": pipeline produced no file at " + produced);
            continue;
        }
        if (read_file(expected_path) != read_file(produced)) {
            diff.pass = false;
            diff.mismatches.push_back(name + ": bytes differ from " + expected_path);
        }
    }
    return diff;
}

}  // namespace apikg
