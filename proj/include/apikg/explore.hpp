#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "apikg/corpus.hpp"
#include "apikg/prompt.hpp"
#include "apikg/provider.hpp"

namespace apikg {

struct Entity {
    std::string surface;     // exactly as written, e.g. "Collections.sort()"
    std::string normalized;  // comparison form (trimmed, call parens stripped)
};

// Trim, then drop one trailing "()" — "print" and "print()" name the same
// API. Everything else is case-sensitive: merging "list" with "List"
// would conflate distinct things.
std::string normalize_entity(std::string_view surface);

Entity make_entity(std::string surface);

// Pre-schema fact from a seed text; only its relation phrase feeds the
// type system, but the whole triple is kept for tracing.
struct RawTriple {
    std::string head;
    std::string relation_phrase;
    std::string tail;
    std::string source_id;
};

struct FusedType {
    std::string name;
    std::string definition;
    std::vector<std::string> members;  // low-level type names, lower-cased
};

struct TypeTriple {
    std::string head_type;
    std::string relation_type;
    std::string tail_type;

    friend bool operator==(const TypeTriple&, const TypeTriple&) = default;
    friend auto operator<=>(const TypeTriple&, const TypeTriple&) = default;
};

struct KGSchema {
    std::vector<FusedType> entity_types;
    std::vector<FusedType> relation_types;
    std::vector<TypeTriple> type_triples;
    bool validated = false;

    bool has_entity_type(const std::string& name) const;
    bool has_relation_type(const std::string& name) const;
};

// ---- per-text units ----

std::vector<Entity> extract_entities(const TextUnit& unit, const PromptTemplate& tpl,
                                     Provider& provider, std::vector<TraceEntry>* trace = nullptr);

// All C(n,2) unordered pairs in (first index, second index) order.
std::vector<std::pair<Entity, Entity>> pair_entities(const std::vector<Entity>& entities);

std::vector<RawTriple> extract_relations(const TextUnit& unit,
                                         const std::vector<std::pair<Entity, Entity>>& pairs,
                                         const PromptTemplate& tpl, Provider& provider,
                                         std::vector<TraceEntry>* trace = nullptr);

// Maps each entity (by normalized surface) to one low-level entity type.
std::map<std::string, std::string> label_entity_types(const TextUnit& unit,
                                                      const std::vector<Entity>& entities,
                                                      const PromptTemplate& tpl, Provider& provider,
                                                      std::vector<TraceEntry>* trace = nullptr);

// Deterministic: the low-level relation type of a triple is its relation
// phrase, lower-cased. Returned parallel to the input.
std::vector<std::string> label_relation_types(const std::vector<RawTriple>& triples);

// ---- corpus-global units ----

// Groups low-level types into named, defined categories. Every input type
// must land in exactly one category; gaps are repaired with singleton
// categories and a warning (fatal when strict). Types the model invents
// are dropped with a warning. `unit_name` is entity_type_fusion or
// relation_type_fusion (they share this logic).
std::vector<FusedType> fuse_types(const std::set<std::string>& low_dim_types,
                                  const std::string& unit_name, const PromptTemplate& tpl,
                                  Provider& provider, bool strict,
                                  std::vector<TraceEntry>* trace = nullptr);

// Every (entity type, relation type, entity type) combination, ordered by
// (head index, relation index, tail index); |E|^2 * |R| triples.
KGSchema generate_full_schema(std::vector<FusedType> entity_types,
                              std::vector<FusedType> relation_types);

// ---- whole-module driver ----

struct ExploreOptions {
    size_t workers = 4;
    bool strict = false;
    bool trace = false;
};

struct ExploreResult {
    KGSchema schema;
    std::vector<TraceEntry> trace;
};

// Entity/relation extraction and type labeling run per seed text (in
// parallel up to `workers`); the two fusion steps are global barriers
// that run once over the gathered low-level types.
ExploreResult run_exploration(const Corpus& seeds, const std::string& template_dir,
                              Provider& provider, const ExploreOptions& options);

// ---- schema file I/O ----

std::string schema_to_json(const KGSchema& schema);
KGSchema schema_from_json(const std::string& text, const std::string& origin);
void write_schema(const KGSchema& schema, const std::string& path);
KGSchema read_schema(const std::string& path);

}  // namespace apikg
