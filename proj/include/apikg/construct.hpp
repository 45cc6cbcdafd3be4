#pragma once

#include <string>
#include <vector>

#include "apikg/corpus.hpp"
#include "apikg/explore.hpp"
#include "apikg/prompt.hpp"
#include "apikg/provider.hpp"

namespace apikg {

struct TypedEntity {
    Entity entity;
    std::string entity_type;  // a schema entity type name
};

struct KgTriple {
    Entity head;
    std::string relation_phrase;
    Entity tail;
    std::string relation_type;  // a schema relation type name
    TypeTriple type_triple;     // (head's entity type, relation_type, tail's entity type)
    std::string source_id;
};

struct KnowledgeGraph {
    std::string schema_digest;          // digest of the schema file this KG was built against
    std::vector<TypedEntity> entities;  // unique by normalized surface
    std::vector<KgTriple> triples;
};

// Per-text extraction result, the unit `collect` folds over.
struct TextExtraction {
    std::string source_id;
    std::vector<TypedEntity> entities;
    std::vector<KgTriple> triples;
};

// Extracts entities that belong to one of the schema's entity types.
// Labels outside the schema drop the entity with a warning, or are fatal
// when strict.
std::vector<TypedEntity> schema_guided_extract_entities(const TextUnit& unit,
                                                        const KGSchema& schema,
                                                        const PromptTemplate& tpl,
                                                        Provider& provider, bool strict,
                                                        std::vector<TraceEntry>* trace = nullptr);

// Extracts relations between previously typed entities. Each surviving
// triple carries its relation type and the fully resolved type triple.
// Triples whose type triple is not admitted by the (fully connected)
// schema are kept — pruning is the filter stage's job.
std::vector<KgTriple> schema_guided_extract_relations(
    const TextUnit& unit, const std::vector<TypedEntity>& typed_entities, const KGSchema& schema,
    const PromptTemplate& tpl, Provider& provider, bool strict,
    std::vector<TraceEntry>* trace = nullptr);

// Deterministic fold: entities deduplicated by normalized surface with
// the first-seen type winning (first in source-id order, so the result is
// independent of gather order); triples deduplicated exactly; triples
// whose endpoint types disagree with the stored entity types are dropped
// with a warning; output sorted by (source_id, head, relation, tail).
KnowledgeGraph collect(std::vector<TextExtraction> results, std::string schema_digest);

struct ConstructOptions {
    size_t workers = 4;
    bool strict = false;
    bool trace = false;
};

struct ConstructResult {
    KnowledgeGraph kg;
    std::vector<TraceEntry> trace;
    size_t texts_after_filter = 0;
};

// Filters the target corpus, runs both schema-guided units per surviving
// text (in parallel up to `workers`), and collects the knowledge graph.
ConstructResult run_construction(const Corpus& target, const KGSchema& schema,
                                 std::string schema_digest, const std::string& template_dir,
                                 Provider& provider, const ConstructOptions& options);

// ---- KG file I/O ----

std::string kg_to_json(const KnowledgeGraph& kg);
KnowledgeGraph kg_from_json(const std::string& text, const std::string& origin);
void write_kg(const KnowledgeGraph& kg, const std::string& path);
KnowledgeGraph read_kg(const std::string& path);

}  // namespace apikg
