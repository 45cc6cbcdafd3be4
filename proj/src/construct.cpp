#include "apikg/construct.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/output_parse.hpp"
#include "apikg/util.hpp"

namespace apikg {

namespace {

std::string type_lines(const std::vector<FusedType>& types) {
    std::string out;
    for (const auto& t : types) {
        if (!out.empty()) out += "\n";
        out += t.name + ": " + t.definition;
    }
    return out;
}

std::string typed_pair_lines(const std::vector<std::pair<TypedEntity, TypedEntity>>& pairs) {
    std::string out;
    for (const auto& [a, b] : pairs) {
        if (!out.empty()) out += "\n";
        out += "(" + a.entity.surface + " [" + a.entity_type + "], " + b.entity.surface + " [" +
               b.entity_type + "])";
    }
    return out;
}

}  // namespace

std::vector<TypedEntity> schema_guided_extract_entities(const TextUnit& unit,
                                                        const KGSchema& schema,
                                                        const PromptTemplate& tpl,
                                                        Provider& provider, bool strict,
                                                        std::vector<TraceEntry>* trace) {
    TracingProvider traced(provider, unit.id, trace);
    auto request = make_request(
        "schema_guided_entity_extraction",
        render(tpl, {{"text", unit.content}, {"entity_types", type_lines(schema.entity_types)}}));
    auto labeled = complete_and_parse<std::vector<std::pair<std::string, std::string>>>(
        traced, request, [](const std::string& raw) { return parse_labeled_lines(raw); });

    std::vector<TypedEntity> out;
    std::set<std::string> seen;
    for (auto& [surface, label] : labeled) {
        const std::string type = trim(label);
        if (!schema.has_entity_type(type)) {
            if (strict) {
                throw UnknownType(unit.id + ": entity type '" + type +
                                  "' is not part of the schema");
            }
            warn(unit.id + ": entity '" + surface + "' labeled with unknown type '" + type +
                 "', dropped");
            continue;
        }
        TypedEntity te{make_entity(std::move(surface)), type};
        if (te.entity.normalized.empty()) continue;
        if (seen.insert(te.entity.normalized).second) out.push_back(std::move(te));
    }
    return out;
}

std::vector<KgTriple> schema_guided_extract_relations(
    const TextUnit& unit, const std::vector<TypedEntity>& typed_entities, const KGSchema& schema,
    const PromptTemplate& tpl, Provider& provider, bool strict,
    std::vector<TraceEntry>* trace) {
    if (typed_entities.size() < 2) return {};

    std::vector<std::pair<TypedEntity, TypedEntity>> pairs;
    for (size_t i = 0; i < typed_entities.size(); ++i) {
        for (size_t j = i + 1; j < typed_entities.size(); ++j) {
            pairs.emplace_back(typed_entities[i], typed_entities[j]);
        }
    }

    TracingProvider traced(provider, unit.id, trace);
    auto request = make_request(
        "schema_guided_relation_extraction",
        render(tpl, {{"text", unit.content},
                     {"pairs", typed_pair_lines(pairs)},
                     {"relation_types", type_lines(schema.relation_types)}}));
    auto parsed = complete_and_parse<std::vector<ParsedTypedTriple>>(
        traced, request, [](const std::string& raw) { return parse_typed_triple_lines(raw); });

    std::map<std::string, const TypedEntity*> by_normalized;
    for (const auto& te : typed_entities) by_normalized[te.entity.normalized] = &te;

    std::vector<KgTriple> out;
    for (auto& entry : parsed) {
        const std::string head_norm = normalize_entity(entry.triple.head);
        const std::string tail_norm = normalize_entity(entry.triple.tail);
        auto head_it = by_normalized.find(head_norm);
        auto tail_it = by_normalized.find(tail_norm);
        if (head_it == by_normalized.end() || tail_it == by_normalized.end()) {
            warn(unit.id + ": relation references an entity that was not extracted: (" +
                 entry.triple.head + ", " + entry.triple.relation + ", " + entry.triple.tail +
                 "), dropped");
            continue;
        }
        if (head_norm == tail_norm) {
            warn(unit.id + ": dropping self-relation on '" + entry.triple.head + "'");
            continue;
        }
        const std::string rtype = trim(entry.type);
        if (!schema.has_relation_type(rtype)) {
            if (strict) {
                throw UnknownType(unit.id + ": relation type '" + rtype +
                                  "' is not part of the schema");
            }
            warn(unit.id + ": relation type '" + rtype + "' is not in the schema, triple dropped");
            continue;
        }
        KgTriple triple;
        triple.head = head_it->second->entity;
        triple.relation_phrase = trim(entry.triple.relation);
        triple.tail = tail_it->second->entity;
        triple.relation_type = rtype;
        triple.type_triple =
            TypeTriple{head_it->second->entity_type, rtype, tail_it->second->entity_type};
        triple.source_id = unit.id;
        out.push_back(std::move(triple));
    }
    return out;
}

KnowledgeGraph collect(std::vector<TextExtraction> results, std::string schema_digest) {
    std::sort(results.begin(), results.end(),
              [](const TextExtraction& a, const TextExtraction& b) {
                  return a.source_id < b.source_id;
              });

    KnowledgeGraph kg;
    kg.schema_digest = std::move(schema_digest);

    std::map<std::string, TypedEntity> entities;  // normalized -> first-seen entity
    for (const auto& r : results) {
        for (const auto& te : r.entities) {
            auto [it, inserted] = entities.emplace(te.entity.normalized, te);
            if (!inserted && it->second.entity_type != te.entity_type) {
                warn(r.source_id + ": entity '" + te.entity.surface + "' typed '" +
                     te.entity_type + "' here but already recorded as '" +
                     it->second.entity_type + "'; keeping the first type");
            }
        }
    }

    using TripleKey = std::tuple<std::string, std::string, std::string, std::string>;
    std::set<TripleKey> seen;
    for (const auto& r : results) {
        for (const auto& t : r.triples) {
            auto head = entities.find(t.head.normalized);
            auto tail = entities.find(t.tail.normalized);
            if (head == entities.end() || tail == entities.end()) {
                warn(t.source_id + ": triple endpoint missing from the entity table, dropped");
                continue;
            }
            if (head->second.entity_type != t.type_triple.head_type ||
                tail->second.entity_type != t.type_triple.tail_type) {
                warn(t.source_id + ": type mismatch for (" + t.head.surface + ", " +
                     t.relation_phrase + ", " + t.tail.surface +
                     "): entity table says (" + head->second.entity_type + ", " +
                     tail->second.entity_type + "), triple says (" + t.type_triple.head_type +
                     ", " + t.type_triple.tail_type + "); triple dropped");
                continue;
            }
            TripleKey key{t.head.normalized, t.relation_phrase, t.tail.normalized, t.source_id};
            if (!seen.insert(key).second) continue;
            kg.triples.push_back(t);
        }
    }

    std::sort(kg.triples.begin(), kg.triples.end(), [](const KgTriple& a, const KgTriple& b) {
        return std::tie(a.source_id, a.head.normalized, a.relation_phrase, a.tail.normalized) <
               std::tie(b.source_id, b.head.normalized, b.relation_phrase, b.tail.normalized);
    });

    kg.entities.reserve(entities.size());
    for (auto& [_, te] : entities) kg.entities.push_back(std::move(te));
    return kg;
}

ConstructResult run_construction(const Corpus& target, const KGSchema& schema,
                                 std::string schema_digest, const std::string& template_dir,
                                 Provider& provider, const ConstructOptions& options) {
    if (schema.validated) {
        warn("constructing against an already validated schema; "
             "extraction normally uses the fully connected one");
    }
    if (schema.entity_types.empty() || schema.relation_types.empty()) {
        throw EmptyVocabulary("the guiding schema has an empty type vocabulary");
    }

    const PromptTemplate see = load_template(template_dir, "schema_guided_entity_extraction");
    const PromptTemplate sre = load_template(template_dir, "schema_guided_relation_extraction");

    const Corpus filtered = filter_corpus(target);
    std::vector<TextExtraction> results(filtered.units.size());
    std::vector<std::vector<TraceEntry>> traces(filtered.units.size());

    parallel_for(filtered.units.size(), options.workers, [&](size_t i) {
        const TextUnit& unit = filtered.units[i];
        std::vector<TraceEntry>* trace = options.trace ? &traces[i] : nullptr;
        TextExtraction& r = results[i];
        r.source_id = unit.id;
        r.entities =
            schema_guided_extract_entities(unit, schema, see, provider, options.strict, trace);
        r.triples = schema_guided_extract_relations(unit, r.entities, schema, sre, provider,
                                                    options.strict, trace);
    });

    ConstructResult out;
    out.texts_after_filter = filtered.units.size();
    if (options.trace) {
        for (auto& t : traces) out.trace.insert(out.trace.end(), t.begin(), t.end());
    }
    out.kg = collect(std::move(results), std::move(schema_digest));
    return out;
}

// ---- KG file I/O ----

std::string kg_to_json(const KnowledgeGraph& kg) {
    nlohmann::ordered_json doc;
    doc["schema_digest"] = kg.schema_digest;
    doc["entities"] = nlohmann::ordered_json::array();
    for (const auto& te : kg.entities) {
        doc["entities"].push_back(nlohmann::ordered_json{{"surface", te.entity.surface},
                                                         {"normalized", te.entity.normalized},
                                                         {"type", te.entity_type}});
    }
    doc["triples"] = nlohmann::ordered_json::array();
    for (const auto& t : kg.triples) {
        doc["triples"].push_back(nlohmann::ordered_json{
            {"head", t.head.surface},
            {"relation", t.relation_phrase},
            {"tail", t.tail.surface},
            {"relation_type", t.relation_type},
            {"type_triple",
             {t.type_triple.head_type, t.type_triple.relation_type, t.type_triple.tail_type}},
            {"source_id", t.source_id}});
    }
    return doc.dump(2) + "\n";
}

KnowledgeGraph kg_from_json(const std::string& text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(origin + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_digest") || !doc.contains("entities") ||
        !doc.contains("triples")) {
        throw DataError(origin + ": knowledge graph needs schema_digest, entities, triples");
    }
    KnowledgeGraph kg;
    kg.schema_digest = doc["schema_digest"].get<std::string>();
    std::map<std::string, std::string> type_of;
    for (const auto& e : doc["entities"]) {
        TypedEntity te;
        te.entity.surface = e.at("surface").get<std::string>();
        te.entity.normalized = e.at("normalized").get<std::string>();
        te.entity_type = e.at("type").get<std::string>();
        type_of[te.entity.normalized] = te.entity_type;
        kg.entities.push_back(std::move(te));
    }
    for (const auto& t : doc["triples"]) {
        KgTriple triple;
        triple.head = make_entity(t.at("head").get<std::string>());
        triple.relation_phrase = t.at("relation").get<std::string>();
        triple.tail = make_entity(t.at("tail").get<std::string>());
        triple.relation_type = t.at("relation_type").get<std::string>();
        const auto& tt = t.at("type_triple");
        if (!tt.is_array() || tt.size() != 3) {
            throw DataError(origin + ": type_triple must be [head, relation, tail]");
        }
        triple.type_triple = TypeTriple{tt[0].get<std::string>(), tt[1].get<std::string>(),
                                        tt[2].get<std::string>()};
        triple.source_id = t.at("source_id").get<std::string>();
        if (type_of.find(triple.head.normalized) == type_of.end() ||
            type_of.find(triple.tail.normalized) == type_of.end()) {
            throw DataError(origin + ": triple endpoint missing from the entity table: (" +
                            triple.head.surface + ", " + triple.relation_phrase + ", " +
                            triple.tail.surface + ")");
        }
        kg.triples.push_back(std::move(triple));
    }
    return kg;
}

void write_kg(const KnowledgeGraph& kg, const std::string& path) {
    write_file(path, kg_to_json(kg));
}

KnowledgeGraph read_kg(const std::string& path) { return kg_from_json(read_file(path), path); }

}  // namespace apikg
