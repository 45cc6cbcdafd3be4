// Regenerates fixtures/responses.json (and optionally the golden output
// files) from fixtures/responses.source.json.
//
// The source file is editable: each entry is {"unit", "match",
// "response"}, where `match` is a substring that must identify exactly
// one rendered prompt of that unit. This tool replays the whole pipeline
// against those scripted answers and records the (unit, prompt hash) ->
// response table the replay provider needs. Rendered prompts embed the
// template text, so editing any template only requires re-running this
// tool, not recomputing hashes by hand.

#include <unistd.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/pipeline.hpp"
#include "apikg/provider.hpp"

namespace fs = std::filesystem;

namespace {

struct ScriptEntry {
    std::string unit;
    std::string match;
    std::string response;
};

class ScriptProvider : public apikg::Provider {
public:
    explicit ScriptProvider(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}

    apikg::ProviderResponse complete(const apikg::ProviderRequest& request) override {
        const ScriptEntry* hit = nullptr;
        for (const auto& entry : entries_) {
            if (entry.unit != request.unit_name) continue;
            if (request.rendered_prompt.find(entry.match) == std::string::npos) continue;
            if (hit) {
                throw apikg::DataError("script entries with match '" + hit->match + "' and '" +
                                       entry.match + "' both hit one " + request.unit_name +
                                       " prompt; make the matches more specific");
            }
            hit = &entry;
        }
        if (!hit) {
            throw apikg::DataError("no script entry matches this " + request.unit_name +
                                   " prompt:\n---\n" + request.rendered_prompt + "\n---");
        }
        return apikg::ProviderResponse{hit->response, "script", std::nullopt};
    }

private:
    std::vector<ScriptEntry> entries_;
};

std::vector<ScriptEntry> load_script(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(apikg::read_file(path));
    if (!doc.is_array()) throw apikg::DataError(path + " must be a JSON array");
    std::vector<ScriptEntry> entries;
    for (const auto& e : doc) {
        entries.push_back(ScriptEntry{e.at("unit").get<std::string>(),
                                      e.at("match").get<std::string>(),
                                      e.at("response").get<std::string>()});
    }
    return entries;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rebuild the recorded provider responses (and golden artifacts) from the "
                 "response script"};
    std::string config_path, source_path, out_path, golden_dir;
    app.add_option("--config", config_path, "Pipeline config to replay")->required();
    app.add_option("--source", source_path, "Response script (unit/match/response entries)")
        ->required();
    app.add_option("--out", out_path, "Fixture file to write")->required();
    app.add_option("--golden", golden_dir,
                   "Also copy the produced artifacts into this directory");
    CLI11_PARSE(app, argc, argv);

    try {
        // First bake: the fixture file named by the config may not exist
        // yet. An empty one satisfies config validation; we overwrite it.
        {
            nlohmann::json probe = nlohmann::json::parse(apikg::read_file(config_path));
            if (probe.contains("provider") && probe["provider"].contains("fixture_file")) {
                fs::path fixture = fs::path(config_path).parent_path() /
                                   probe["provider"]["fixture_file"].get<std::string>();
                if (!fs::exists(fixture)) apikg::write_file(fixture.string(), "[]\n");
            }
        }

        apikg::PipelineConfig config = apikg::load_config(config_path);
        const fs::path work_dir =
            fs::temp_directory_path() / ("apikg_bake_" + std::to_string(::getpid()));
        fs::remove_all(work_dir);
        config.out_dir = work_dir.string();

        ScriptProvider script(load_script(source_path));
        apikg::RecordingProvider recorder(script);
        apikg::PipelineRunner runner(config, recorder);
        runner.run();

        auto records = recorder.records();
        std::map<std::pair<std::string, std::string>, std::string> table;
        for (const auto& r : records) {
            auto [it, inserted] = table.emplace(std::make_pair(r.unit, r.prompt_hash), r.response);
            if (!inserted && it->second != r.response) {
                throw apikg::DataError("two different responses recorded for " + r.unit +
                                       " prompt hash " + r.prompt_hash);
            }
        }
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& [key, response] : table) {
            out.push_back(nlohmann::ordered_json{
                {"unit", key.first}, {"prompt_hash", key.second}, {"response", response}});
        }
        apikg::write_file(out_path, out.dump(2) + "\n");
        std::cout << "wrote " << table.size() << " recorded responses to " << out_path << "\n";

        if (!golden_dir.empty()) {
            fs::create_directories(golden_dir);
            std::vector<std::string> names = {"schema_potential.json", "kg_unreliable.json",
                                              "schema_validated.json", "kg_reliable.json",
                                              "metrics.json"};
            if (!config.gold.empty()) names.push_back("eval_report.json");
            for (const auto& name : names) {
                fs::copy_file(work_dir / name, fs::path(golden_dir) / name,
                              fs::copy_options::overwrite_existing);
            }
            std::cout << "copied " << names.size() << " golden artifacts to " << golden_dir
                      << "\n";
        }
        fs::remove_all(work_dir);
        return 0;
    } catch (const apikg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
