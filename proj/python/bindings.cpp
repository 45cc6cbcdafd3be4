#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "apikg/corpus.hpp"
#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/eval.hpp"
#include "apikg/explore.hpp"
#include "apikg/filter.hpp"
#include "apikg/pipeline.hpp"
#include "apikg/prompt.hpp"

namespace py = pybind11;

namespace {

std::vector<std::tuple<std::string, std::string, std::string>> full_schema_triples(
    const std::vector<std::string>& entity_types, const std::vector<std::string>& relation_types) {
    auto lift = [](const std::vector<std::string>& names) {
        std::vector<apikg::FusedType> out;
        for (const auto& name : names) out.push_back(apikg::FusedType{name, name, {name}});
        return out;
    };
    apikg::KGSchema schema = apikg::generate_full_schema(lift(entity_types), lift(relation_types));
    std::vector<std::tuple<std::string, std::string, std::string>> triples;
    for (const auto& t : schema.type_triples)
        triples.emplace_back(t.head_type, t.relation_type, t.tail_type);
    return triples;
}

py::list association_metrics(const std::string& kg_json, double support, double confidence,
                             double lift, bool inclusive, const std::string& count_mode) {
    apikg::KnowledgeGraph kg = apikg::kg_from_json(kg_json, "<python>");
    auto rows = apikg::compute_metrics(kg, apikg::count_mode_from_string(count_mode));
    apikg::apply_thresholds(rows, apikg::Thresholds{support, confidence, lift}, inclusive);
    py::list out;
    for (const auto& row : rows) {
        py::dict d;
        d["type_triple"] = py::make_tuple(row.type_triple.head_type, row.type_triple.relation_type,
                                          row.type_triple.tail_type);
        d["count"] = row.count;
        d["support"] = row.support;
        d["confidence"] = row.confidence;
        d["lift"] = row.lift;
        d["kept"] = row.kept;
        out.append(d);
    }
    return out;
}

py::dict run_pipeline(const std::string& config_path, const std::string& out_dir) {
    apikg::PipelineConfig config = apikg::load_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    apikg::PipelineRunner runner(config);
    runner.run();
    py::dict artifacts;
    artifacts["schema_potential"] = runner.config().schema_potential_path();
    artifacts["kg_unreliable"] = runner.config().kg_unreliable_path();
    artifacts["schema_validated"] = runner.config().schema_validated_path();
    artifacts["kg_reliable"] = runner.config().kg_reliable_path();
    artifacts["metrics"] = runner.config().metrics_path();
    if (!runner.config().gold.empty())
        artifacts["eval_report"] = runner.config().eval_report_path();
    return artifacts;
}

std::string render_template(const std::string& template_text,
                            const std::map<std::string, std::string>& bindings) {
    apikg::PromptTemplate tpl = apikg::parse_template(template_text, "<python>");
    return apikg::render(tpl, bindings);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core operations of the API knowledge-graph pipeline";

    py::register_exception<apikg::ConfigError>(m, "ConfigError");
    py::register_exception<apikg::ProviderError>(m, "ProviderError");
    py::register_exception<apikg::DataError>(m, "DataError");

    m.def("tokenize", [](const std::string& text) { return apikg::tokenize(text); },
          py::arg("text"), "Split text on Unicode whitespace");
    m.def("passes_filter",
          [](const std::string& text) {
              return apikg::passes_filter(apikg::TextUnit{"", "", text});
          },
          py::arg("text"),
          "True when the text is long enough and shows an API usage signal");
    m.def("digest", [](const std::string& data) { return apikg::digest_hex(data); },
          py::arg("data"), "64-bit FNV-1a digest as 16 hex digits");
    m.def("render_template", &render_template, py::arg("template_text"), py::arg("bindings"),
          "Parse a prompt template and render it with the given slot bindings");
    m.def("full_schema_triples", &full_schema_triples, py::arg("entity_types"),
          py::arg("relation_types"),
          "Every (head type, relation type, tail type) combination, in schema order");
    m.def("embed", [](const std::string& text) { return apikg::embed(text); }, py::arg("text"),
          "Deterministic trigram embedding (512 dimensions, L2-normalized)");
    m.def("cosine", &apikg::cosine, py::arg("a"), py::arg("b"),
          "Cosine similarity; 0 for zero vectors, exactly 1 for identical ones");
    m.def("association_metrics", &association_metrics, py::arg("kg_json"),
          py::arg("support") = 0.005, py::arg("confidence") = 0.02, py::arg("lift") = 1.0,
          py::arg("inclusive") = false, py::arg("count_mode") = "occurrence",
          "Support/confidence/lift per type triple of a serialized knowledge graph");
    m.def("run_pipeline", &run_pipeline, py::arg("config_path"), py::arg("out_dir") = "",
          "Run explore, construct, filter (and eval when gold data is configured); "
          "returns the artifact paths");
}
