#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apikg/filter.hpp"
#include "apikg/provider.hpp"

namespace apikg {

struct ProviderSettings {
    std::string mode = "fixture";  // fixture | http
    std::string fixture_file;
    std::string endpoint;
    std::string model;
    int max_in_flight = 4;
    long long budget = 0;  // total provider calls per run; 0 = unlimited
    int timeout_seconds = 60;
    int attempts = 3;
    int backoff_base_ms = 500;
};

struct PipelineConfig {
    std::string config_dir;  // directory the config file lives in
    std::string seed_corpus;
    std::string target_corpus;
    std::string gold;         // optional; enables the eval stage
    std::string annotations;  // optional; adds type-triple accuracy to eval
    std::string template_dir;
    std::string out_dir = "out";
    ProviderSettings provider;
    Thresholds thresholds;
    bool inclusive = false;
    CountMode count_mode = CountMode::kOccurrence;
    std::vector<double> eval_thresholds = {0.9, 0.92, 0.94};
    bool trace = false;
    bool strict = false;
    size_t workers = 4;

    // Artifact locations under out_dir.
    std::string schema_potential_path() const;
    std::string kg_unreliable_path() const;
    std::string schema_validated_path() const;
    std::string kg_reliable_path() const;
    std::string metrics_path() const;
    std::string eval_report_path() const;
    std::string explore_trace_path() const;
    std::string construct_trace_path() const;
    std::string manifest_path() const;
};

// Loads and validates a JSON config. Relative paths are resolved against
// the config file's directory, so runs work from any working directory.
// Violations (missing files, bad thresholds, unknown modes) raise
// ConfigError.
PipelineConfig load_config(const std::string& path);

// Command-line overrides; set fields win over the config file.
struct ConfigOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::string> provider_mode;
    std::optional<bool> trace;
    std::optional<bool> strict;
    std::optional<double> support_min;
    std::optional<double> confidence_min;
    std::optional<double> lift_min;
    std::optional<bool> inclusive;
    std::optional<std::string> count_mode;
};

void apply_overrides(PipelineConfig& config, const ConfigOverrides& overrides);

struct RunOutcome {
    bool explore_ran = false;
    bool construct_ran = false;
    bool filter_ran = false;
    bool eval_ran = false;
};

// Executes stages against the config, persisting every artifact as a
// file. Stages resume: one whose recorded input digests match, whose
// outputs still exist, and whose upstream stages were all skipped is not
// re-run. The provider (and its per-run request budget) is shared by all
// stages of one runner.
class PipelineRunner {
public:
    explicit PipelineRunner(PipelineConfig config);
    // Uses `injected` (not owned) instead of building a provider from the
    // config. The request budget from the config still applies.
    PipelineRunner(PipelineConfig config, Provider& injected);
    ~PipelineRunner();

    // Each returns true when the stage actually executed (false = resumed).
    bool explore();
    bool construct();
    bool filter();
    bool eval();

    // explore -> construct -> filter -> eval (eval only when gold is set).
    RunOutcome run();

    const PipelineConfig& config() const { return config_; }

private:
    bool run_stage(const std::string& name, const nlohmann::json& inputs,
                   const std::vector<std::string>& outputs, bool upstream_ran,
                   const std::function<void()>& body);
    bool explore_stage(bool upstream_ran);
    bool construct_stage(bool upstream_ran);
    bool filter_stage(bool upstream_ran);
    bool eval_stage(bool upstream_ran);
    Provider& provider();
    nlohmann::json load_manifest() const;
    void store_manifest_entry(const std::string& stage, const nlohmann::json& inputs,
                              const std::vector<std::string>& outputs);

    void do_explore();
    void do_construct();
    void do_filter();
    void do_eval();

    nlohmann::json explore_inputs() const;
    nlohmann::json construct_inputs() const;
    nlohmann::json filter_inputs() const;
    nlohmann::json eval_inputs() const;

    PipelineConfig config_;
    Provider* injected_provider_ = nullptr;
    std::unique_ptr<Provider> base_provider_;
    std::unique_ptr<BudgetedProvider> budgeted_provider_;
};

// Digest of every *.prompt file in the directory (sorted by file name),
// so editing any template invalidates dependent stages.
std::string template_dir_digest(const std::string& template_dir);

struct GoldenDiff {
    bool pass = true;
    std::vector<std::string> mismatches;  // "file: reason"
};

// Runs the full pipeline for `config` and byte-compares each produced
// artifact with its counterpart in golden_dir.
GoldenDiff verify_golden(const PipelineConfig& config, const std::string& golden_dir);

}  // namespace apikg
