// apikg — schema induction, schema-guided extraction, association-rule
// filtering, and evaluation for API knowledge graphs, as a staged
// pipeline over serialized artifacts.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "apikg/errors.hpp"
#include "apikg/pipeline.hpp"

namespace {

struct CliFlags {
    std::string config_path;
    std::string out_dir;
    std::string provider_mode;
    bool trace = false;
    bool strict = false;
    // filter knobs
    double support = -1.0;
    double confidence = -1.0;
    double lift = -1.0;
    bool inclusive = false;
    std::string count_mode;
};

apikg::PipelineConfig build_config(const CliFlags& flags) {
    apikg::PipelineConfig config = apikg::load_config(flags.config_path);
    apikg::ConfigOverrides overrides;
    if (!flags.out_dir.empty()) overrides.out_dir = flags.out_dir;
    if (!flags.provider_mode.empty()) overrides.provider_mode = flags.provider_mode;
    if (flags.trace) overrides.trace = true;
    if (flags.strict) overrides.strict = true;
    if (flags.support >= 0.0) overrides.support_min = flags.support;
    if (flags.confidence >= 0.0) overrides.confidence_min = flags.confidence;
    if (flags.lift >= 0.0) overrides.lift_min = flags.lift;
    if (flags.inclusive) overrides.inclusive = true;
    if (!flags.count_mode.empty()) overrides.count_mode = flags.count_mode;
    apikg::apply_overrides(config, overrides);
    return config;
}

void add_filter_flags(CLI::App* cmd, CliFlags& flags) {
    cmd->add_option("--support", flags.support, "Minimum support (default 0.005)");
    cmd->add_option("--confidence", flags.confidence, "Minimum confidence (default 0.02)");
    cmd->add_option("--lift", flags.lift, "Minimum lift (default 1.0)");
    cmd->add_flag("--inclusive", flags.inclusive,
                  "Compare thresholds with >= instead of the default strict >");
    cmd->add_option("--count-mode", flags.count_mode,
                    "Evidence counting: occurrence (default) or distinct")
        ->check(CLI::IsMember({"occurrence", "distinct"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"API knowledge-graph pipeline: induce a schema from seed texts, extract a "
                 "schema-guided graph, validate it with association metrics, and score it"};
    app.require_subcommand(1);

    CliFlags flags;
    app.add_option("--config", flags.config_path, "Pipeline config file (JSON)")
        ->required();
    app.add_option("--out", flags.out_dir, "Output directory (overrides the config)");
    app.add_option("--provider", flags.provider_mode, "Provider backend")
        ->check(CLI::IsMember({"fixture", "http"}));
    app.add_flag("--trace", flags.trace, "Write a JSONL transcript of every model call");
    app.add_flag("--strict", flags.strict,
                 "Make recoverable data problems (unknown types, fusion gaps) fatal");

    CLI::App* cmd_explore =
        app.add_subcommand("explore", "Induce the potential schema from the seed corpus");
    CLI::App* cmd_construct = app.add_subcommand(
        "construct", "Extract the schema-guided (unvalidated) knowledge graph");
    CLI::App* cmd_filter = app.add_subcommand(
        "filter", "Validate type triples by support/confidence/lift and prune the graph");
    CLI::App* cmd_eval =
        app.add_subcommand("eval", "Score the reliable graph against gold triples");
    CLI::App* cmd_run = app.add_subcommand("run", "Run all stages in order");
    add_filter_flags(cmd_filter, flags);
    add_filter_flags(cmd_run, flags);
    for (CLI::App* cmd : {cmd_explore, cmd_construct, cmd_filter, cmd_eval, cmd_run}) {
        cmd->fallthrough();  // accept the global flags after the subcommand too
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad invocation = configuration error
    }

    try {
        apikg::PipelineRunner runner(build_config(flags));
        if (cmd_explore->parsed()) {
            runner.explore();
        } else if (cmd_construct->parsed()) {
            runner.construct();
        } else if (cmd_filter->parsed()) {
            runner.filter();
        } else if (cmd_eval->parsed()) {
            runner.eval();
        } else if (cmd_run->parsed()) {
            runner.run();
        }
        return 0;
    } catch (const apikg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
