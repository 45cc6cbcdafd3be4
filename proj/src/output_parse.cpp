#include "apikg/output_parse.hpp"

#include <sstream>

#include "apikg/errors.hpp"
#include "apikg/util.hpp"

namespace apikg {

namespace {

std::vector<std::string> nonblank_lines(const std::string& raw) {
    std::vector<std::string> lines;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty()) lines.push_back(std::move(t));
    }
    return lines;
}

[[noreturn]] void malformed(const std::string& what, const std::string& line) {
    const std::string excerpt = line.size() > 80 ? line.substr(0, 77) + "..." : line;
    throw MalformedOutput(what + ": '" + excerpt + "'");
}

// "(A | B | C)" -> {A, B, C}
ParsedTriple parse_paren_triple(const std::string& line, const std::string& inner) {
    size_t p1 = inner.find('|');
    size_t p2 = p1 == std::string::npos ? std::string::npos : inner.find('|', p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos ||
        inner.find('|', p2 + 1) != std::string::npos) {
        malformed("expected '(head | relation | tail)'", line);
    }
    ParsedTriple t;
    t.head = trim(inner.substr(0, p1));
    t.relation = trim(inner.substr(p1 + 1, p2 - p1 - 1));
    t.tail = trim(inner.substr(p2 + 1));
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
        malformed("empty component in triple", line);
    }
    return t;
}

}  // namespace

std::vector<std::string> parse_list_output(const std::string& raw) { return nonblank_lines(raw); }

std::vector<ParsedTriple> parse_triple_lines(const std::string& raw) {
    std::vector<ParsedTriple> out;
    for (const auto& line : nonblank_lines(raw)) {
        if (line.front() != '(' || line.back() != ')') {
            malformed("expected '(head | relation | tail)'", line);
        }
        out.push_back(parse_paren_triple(line, line.substr(1, line.size() - 2)));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_labeled_lines(const std::string& raw) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& line : nonblank_lines(raw)) {
        size_t colon = line.find(':');
        if (colon == std::string::npos) malformed("expected 'name: label'", line);
        std::string key = trim(line.substr(0, colon));
        std::string value = trim(line.substr(colon + 1));
        if (key.empty() || value.empty()) malformed("expected 'name: label'", line);
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

std::vector<ParsedTypedTriple> parse_typed_triple_lines(const std::string& raw) {
    std::vector<ParsedTypedTriple> out;
    for (const auto& line : nonblank_lines(raw)) {
        if (line.front() != '(') malformed("expected '(head | relation | tail): type'", line);
        size_t close = line.rfind(')');
        if (close == std::string::npos) {
            malformed("expected '(head | relation | tail): type'", line);
        }
        size_t colon = line.find(':', close);
        if (colon == std::string::npos) {
            malformed("missing ': type' after the triple", line);
        }
        ParsedTypedTriple entry;
        entry.triple = parse_paren_triple(line, line.substr(1, close - 1));
        entry.type = trim(line.substr(colon + 1));
        if (entry.type.empty()) malformed("missing ': type' after the triple", line);
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<ParsedFusion> parse_fusion_output(const std::string& raw) {
    std::vector<ParsedFusion> out;
    const auto lines = nonblank_lines(raw);
    size_t i = 0;
    while (i < lines.size()) {
        const std::string& head = lines[i];
        size_t colon = head.find(':');
        if (colon == std::string::npos) malformed("expected 'name: [member, ...]'", head);
        ParsedFusion group;
        group.name = trim(head.substr(0, colon));
        std::string rest = trim(head.substr(colon + 1));
        if (group.name.empty() || rest.size() < 2 || rest.front() != '[' || rest.back() != ']') {
            malformed("expected 'name: [member, ...]'", head);
        }
        std::string inner = rest.substr(1, rest.size() - 2);
        size_t start = 0;
        while (start <= inner.size()) {
            size_t comma = inner.find(',', start);
            std::string member = trim(comma == std::string::npos
                                          ? inner.substr(start)
                                          : inner.substr(start, comma - start));
            if (!member.empty()) group.members.push_back(std::move(member));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (group.members.empty()) malformed("fused type lists no members", head);
        if (i + 1 >= lines.size()) malformed("missing 'definition:' line after", head);
        const std::string& def_line = lines[i + 1];
        if (def_line.rfind("definition:", 0) != 0) {
            malformed("expected 'definition: ...' line, got", def_line);
        }
        group.definition = trim(def_line.substr(std::string("definition:").size()));
        if (group.definition.empty()) malformed("empty definition", def_line);
        out.push_back(std::move(group));
        i += 2;
    }
    return out;
}

}  // namespace apikg
