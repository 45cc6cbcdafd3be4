#pragma once

#include <string>
#include <utility>
#include <vector>

namespace apikg {

// Parsers for the output grammars the unit prompts demand (each prompt's
// example pins one of these shapes). All of them trim whitespace and skip
// blank lines; a line that cannot be parsed raises MalformedOutput with
// an excerpt, which triggers the single repair retry upstream.

// One item per line.
std::vector<std::string> parse_list_output(const std::string& raw);

struct ParsedTriple {
    std::string head;
    std::string relation;
    std::string tail;
};

// "(head | relation phrase | tail)" per line.
std::vector<ParsedTriple> parse_triple_lines(const std::string& raw);

// "key: value" per line; split at the first colon.
std::vector<std::pair<std::string, std::string>> parse_labeled_lines(const std::string& raw);

struct ParsedTypedTriple {
    ParsedTriple triple;
    std::string type;
};

// "(head | relation phrase | tail): relation_type" per line.
std::vector<ParsedTypedTriple> parse_typed_triple_lines(const std::string& raw);

struct ParsedFusion {
    std::string name;
    std::vector<std::string> members;
    std::string definition;
};

// Two-line blocks:
//   <fused name>: [member, member, ...]
//   definition: <one line of text>
std::vector<ParsedFusion> parse_fusion_output(const std::string& raw);

}  // namespace apikg
