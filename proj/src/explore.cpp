#include "apikg/explore.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/output_parse.hpp"
#include "apikg/util.hpp"

namespace apikg {

std::string normalize_entity(std::string_view surface) {
    std::string s = trim(surface);
    if (s.size() > 2 && s.ends_with("()")) s.resize(s.size() - 2);
    return s;
}

Entity make_entity(std::string surface) {
    Entity e;
    e.normalized = normalize_entity(surface);
    e.surface = std::move(surface);
    return e;
}

bool KGSchema::has_entity_type(const std::string& name) const {
    return std::any_of(entity_types.begin(), entity_types.end(),
                       [&](const FusedType& t) { return t.name == name; });
}

bool KGSchema::has_relation_type(const std::string& name) const {
    return std::any_of(relation_types.begin(), relation_types.end(),
                       [&](const FusedType& t) { return t.name == name; });
}

namespace {

std::string join_surfaces(const std::vector<Entity>& entities) {
    std::string out;
    for (const auto& e : entities) {
        if (!out.empty()) out += ", ";
        out += e.surface;
    }
    return out;
}

std::string join_pairs(const std::vector<std::pair<Entity, Entity>>& pairs) {
    std::string out;
    for (const auto& [a, b] : pairs) {
        if (!out.empty()) out += "\n";
        out += "(" + a.surface + ", " + b.surface + ")";
    }
    return out;
}

std::string join_lines(const std::set<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += "\n";
        out += item;
    }
    return out;
}

}  // namespace

std::vector<Entity> extract_entities(const TextUnit& unit, const PromptTemplate& tpl,
                                     Provider& provider, std::vector<TraceEntry>* trace) {
    TracingProvider traced(provider, unit.id, trace);
    auto request = make_request("entity_extraction", render(tpl, {{"text", unit.content}}));
    auto surfaces = complete_and_parse<std::vector<std::string>>(
        traced, request, [](const std::string& raw) { return parse_list_output(raw); });

    std::vector<Entity> entities;
    std::set<std::string> seen;
    for (auto& surface : surfaces) {
        Entity e = make_entity(std::move(surface));
        if (e.normalized.empty()) continue;
        if (seen.insert(e.normalized).second) entities.push_back(std::move(e));
    }
    return entities;
}

std::vector<std::pair<Entity, Entity>> pair_entities(const std::vector<Entity>& entities) {
    std::vector<std::pair<Entity, Entity>> pairs;
    pairs.reserve(entities.size() < 2 ? 0 : entities.size() * (entities.size() - 1) / 2);
    for (size_t i = 0; i < entities.size(); ++i) {
        for (size_t j = i + 1; j < entities.size(); ++j) {
            pairs.emplace_back(entities[i], entities[j]);
        }
    }
    return pairs;
}

std::vector<RawTriple> extract_relations(const TextUnit& unit,
                                         const std::vector<std::pair<Entity, Entity>>& pairs,
                                         const PromptTemplate& tpl, Provider& provider,
                                         std::vector<TraceEntry>* trace) {
    if (pairs.empty()) return {};
    TracingProvider traced(provider, unit.id, trace);
    auto request = make_request(
        "relation_extraction",
        render(tpl, {{"text", unit.content}, {"pairs", join_pairs(pairs)}}));
    auto parsed = complete_and_parse<std::vector<ParsedTriple>>(
        traced, request, [](const std::string& raw) { return parse_triple_lines(raw); });

    std::vector<RawTriple> triples;
    for (auto& t : parsed) {
        if (normalize_entity(t.head) == normalize_entity(t.tail)) {
            warn(unit.id + ": dropping self-relation (" + t.head + ", " + t.relation + ", " +
                 t.tail + ")");
            continue;
        }
        triples.push_back(RawTriple{std::move(t.head), std::move(t.relation), std::move(t.tail),
                                    unit.id});
    }
    return triples;
}

std::map<std::string, std::string> label_entity_types(const TextUnit& unit,
                                                      const std::vector<Entity>& entities,
                                                      const PromptTemplate& tpl,
                                                      Provider& provider,
                                                      std::vector<TraceEntry>* trace) {
    if (entities.empty()) return {};
    TracingProvider traced(provider, unit.id, trace);
    auto request = make_request(
        "entity_type_labeling",
        render(tpl, {{"text", unit.content}, {"entities", join_surfaces(entities)}}));
    auto labeled = complete_and_parse<std::vector<std::pair<std::string, std::string>>>(
        traced, request, [](const std::string& raw) { return parse_labeled_lines(raw); });

    std::set<std::string> known;
    for (const auto& e : entities) known.insert(e.normalized);

    std::map<std::string, std::string> labels;
    for (auto& [key, value] : labeled) {
        const std::string normalized = normalize_entity(key);
        if (known.find(normalized) == known.end()) {
            warn(unit.id + ": type label for unknown entity '" + key + "' ignored");
            continue;
        }
        labels[normalized] = lower_ascii(trim(value));
    }
    for (const auto& e : entities) {
        if (labels.find(e.normalized) == labels.end()) {
            warn(unit.id + ": entity '" + e.surface + "' received no type label");
        }
    }
    return labels;
}

std::vector<std::string> label_relation_types(const std::vector<RawTriple>& triples) {
    std::vector<std::string> out;
    out.reserve(triples.size());
    for (const auto& t : triples) out.push_back(lower_ascii(trim(t.relation_phrase)));
    return out;
}

std::vector<FusedType> fuse_types(const std::set<std::string>& low_dim_types,
                                  const std::string& unit_name, const PromptTemplate& tpl,
                                  Provider& provider, bool strict,
                                  std::vector<TraceEntry>* trace) {
    TracingProvider traced(provider, "*", trace);
    auto request = make_request(unit_name, render(tpl, {{"types", join_lines(low_dim_types)}}));
    auto groups = complete_and_parse<std::vector<ParsedFusion>>(
        traced, request, [](const std::string& raw) { return parse_fusion_output(raw); });

    std::vector<FusedType> fused;
    std::set<std::string> assigned;  // low-dim types placed so far
    for (auto& group : groups) {
        FusedType type;
        type.name = trim(group.name);
        type.definition = trim(group.definition);
        for (auto& member : group.members) {
            std::string m = lower_ascii(trim(member));
            if (low_dim_types.find(m) == low_dim_types.end()) {
                warn(unit_name + ": fused type '" + type.name + "' lists unknown member '" + m +
                     "', dropped");
                continue;
            }
            if (!assigned.insert(m).second) {
                warn(unit_name + ": member '" + m + "' assigned twice; keeping first placement");
                continue;
            }
            type.members.push_back(std::move(m));
        }
        if (type.members.empty()) {
            warn(unit_name + ": fused type '" + type.name + "' has no surviving members, dropped");
            continue;
        }
        auto existing = std::find_if(fused.begin(), fused.end(),
                                     [&](const FusedType& f) { return f.name == type.name; });
        if (existing != fused.end()) {
            warn(unit_name + ": duplicate fused type '" + type.name + "', merging members");
            existing->members.insert(existing->members.end(), type.members.begin(),
                                     type.members.end());
            continue;
        }
        fused.push_back(std::move(type));
    }

    std::vector<std::string> missing;
    for (const auto& low : low_dim_types) {
        if (assigned.find(low) == assigned.end()) missing.push_back(low);
    }
    if (!missing.empty()) {
        std::string listed;
        for (const auto& m : missing) listed += (listed.empty() ? "" : ", ") + m;
        if (strict) {
            throw CoverageGap(unit_name + ": fusion left low-level types uncovered: " + listed);
        }
        for (const auto& m : missing) {
            warn(unit_name + ": low-level type '" + m +
                 "' was not covered; adding a singleton category");
            fused.push_back(FusedType{
                m, "Automatically added category covering the single low-level type '" + m + "'.",
                {m}});
        }
    }
    return fused;
}

KGSchema generate_full_schema(std::vector<FusedType> entity_types,
                              std::vector<FusedType> relation_types) {
    if (entity_types.empty()) throw EmptyVocabulary("no entity types to build a schema from");
    if (relation_types.empty()) throw EmptyVocabulary("no relation types to build a schema from");
    const auto check_unique = [](const std::vector<FusedType>& types, const char* kind) {
        std::set<std::string> names;
        for (const auto& t : types) {
            if (!names.insert(t.name).second) {
                throw DataError(std::string("duplicate ") + kind + " type '" + t.name + "'");
            }
        }
    };
    check_unique(entity_types, "entity");
    check_unique(relation_types, "relation");

    KGSchema schema;
    schema.entity_types = std::move(entity_types);
    schema.relation_types = std::move(relation_types);
    schema.validated = false;
    schema.type_triples.reserve(schema.entity_types.size() * schema.entity_types.size() *
                                schema.relation_types.size());
    for (const auto& head : schema.entity_types) {
        for (const auto& rel : schema.relation_types) {
            for (const auto& tail : schema.entity_types) {
                schema.type_triples.push_back(TypeTriple{head.name, rel.name, tail.name});
            }
        }
    }
    return schema;
}

ExploreResult run_exploration(const Corpus& seeds, const std::string& template_dir,
                              Provider& provider, const ExploreOptions& options) {
    const PromptTemplate ee = load_template(template_dir, "entity_extraction");
    const PromptTemplate re = load_template(template_dir, "relation_extraction");
    const PromptTemplate etl = load_template(template_dir, "entity_type_labeling");
    const PromptTemplate etf = load_template(template_dir, "entity_type_fusion");
    const PromptTemplate rtf = load_template(template_dir, "relation_type_fusion");

    struct PerText {
        std::vector<Entity> entities;
        std::vector<RawTriple> triples;
        std::map<std::string, std::string> labels;
        std::vector<TraceEntry> trace;
    };
    std::vector<PerText> results(seeds.units.size());

    parallel_for(seeds.units.size(), options.workers, [&](size_t i) {
        const TextUnit& unit = seeds.units[i];
        PerText& r = results[i];
        std::vector<TraceEntry>* trace = options.trace ? &r.trace : nullptr;
        r.entities = extract_entities(unit, ee, provider, trace);
        r.triples = extract_relations(unit, pair_entities(r.entities), re, provider, trace);
        r.labels = label_entity_types(unit, r.entities, etl, provider, trace);
    });

    std::set<std::string> entity_low_dims;
    std::set<std::string> relation_low_dims;
    for (const auto& r : results) {
        for (const auto& [_, label] : r.labels) entity_low_dims.insert(label);
        for (const auto& name : label_relation_types(r.triples)) relation_low_dims.insert(name);
    }
    if (entity_low_dims.empty()) {
        throw EmptyVocabulary("the seed corpus produced no entity type labels");
    }
    if (relation_low_dims.empty()) {
        throw EmptyVocabulary("the seed corpus produced no relation phrases");
    }

    ExploreResult out;
    std::vector<TraceEntry>* global_trace = options.trace ? &out.trace : nullptr;
    // Gather per-text traces in corpus order before the global units.
    if (options.trace) {
        for (auto& r : results) {
            out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
        }
    }
    auto entity_types =
        fuse_types(entity_low_dims, "entity_type_fusion", etf, provider, options.strict,
                   global_trace);
    auto relation_types =
        fuse_types(relation_low_dims, "relation_type_fusion", rtf, provider, options.strict,
                   global_trace);
    out.schema = generate_full_schema(std::move(entity_types), std::move(relation_types));
    return out;
}

// ---- schema file I/O ----

namespace {

nlohmann::ordered_json fused_to_json(const FusedType& type) {
    nlohmann::ordered_json obj;
    obj["name"] = type.name;
    obj["definition"] = type.definition;
    obj["members"] = type.members;
    return obj;
}

FusedType fused_from_json(const nlohmann::json& obj, const std::string& origin) {
    if (!obj.is_object() || !obj.contains("name") || !obj.contains("definition") ||
        !obj.contains("members") || !obj["members"].is_array()) {
        throw DataError(origin + ": type entries need {\"name\", \"definition\", \"members\"}");
    }
    FusedType type;
    type.name = obj["name"].get<std::string>();
    type.definition = obj["definition"].get<std::string>();
    for (const auto& m : obj["members"]) type.members.push_back(m.get<std::string>());
    if (type.name.empty() || type.definition.empty() || type.members.empty()) {
        throw DataError(origin + ": type '" + type.name +
                        "' must have a non-empty name, definition and member list");
    }
    return type;
}

}  // namespace

std::string schema_to_json(const KGSchema& schema) {
    nlohmann::ordered_json doc;
    doc["entity_types"] = nlohmann::ordered_json::array();
    for (const auto& t : schema.entity_types) doc["entity_types"].push_back(fused_to_json(t));
    doc["relation_types"] = nlohmann::ordered_json::array();
    for (const auto& t : schema.relation_types) doc["relation_types"].push_back(fused_to_json(t));
    doc["type_triples"] = nlohmann::ordered_json::array();
    for (const auto& t : schema.type_triples) {
        doc["type_triples"].push_back({t.head_type, t.relation_type, t.tail_type});
    }
    doc["validated"] = schema.validated;
    return doc.dump(2) + "\n";
}

KGSchema schema_from_json(const std::string& text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(origin + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("entity_types") || !doc.contains("relation_types") ||
        !doc.contains("type_triples") || !doc.contains("validated")) {
        throw DataError(origin +
                        ": schema needs entity_types, relation_types, type_triples, validated");
    }
    KGSchema schema;
    for (const auto& t : doc["entity_types"]) schema.entity_types.push_back(fused_from_json(t, origin));
    for (const auto& t : doc["relation_types"]) {
        schema.relation_types.push_back(fused_from_json(t, origin));
    }
    for (const auto& t : doc["type_triples"]) {
        if (!t.is_array() || t.size() != 3) {
            throw DataError(origin + ": type triples are [head, relation, tail] arrays");
        }
        TypeTriple tt{t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>()};
        if (!schema.has_entity_type(tt.head_type) || !schema.has_relation_type(tt.relation_type) ||
            !schema.has_entity_type(tt.tail_type)) {
            throw DataError(origin + ": type triple (" + tt.head_type + ", " + tt.relation_type +
                            ", " + tt.tail_type + ") names a type missing from the vocabularies");
        }
        schema.type_triples.push_back(std::move(tt));
    }
    schema.validated = doc["validated"].get<bool>();
    return schema;
}

void write_schema(const KGSchema& schema, const std::string& path) {
    write_file(path, schema_to_json(schema));
}

KGSchema read_schema(const std::string& path) {
    return schema_from_json(read_file(path), path);
}

}  // namespace apikg
