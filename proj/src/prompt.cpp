#include "apikg/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"
#include "apikg/util.hpp"

namespace apikg {

bool PromptTemplate::declares(const std::string& slot) const {
    return std::any_of(input_variables.begin(), input_variables.end(),
                       [&](const Slot& s) { return s.name == slot; });
}

namespace {

bool is_slot_name(std::string_view name) {
    if (name.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

// Collects {{name}} references in a command string.
std::vector<std::string> slot_refs(const std::string& text) {
    std::vector<std::string> refs;
    size_t pos = 0;
    while ((pos = text.find("{{", pos)) != std::string::npos) {
        size_t end = text.find("}}", pos + 2);
        if (end == std::string::npos) break;
        refs.push_back(text.substr(pos + 2, end - pos - 2));
        pos = end + 2;
    }
    return refs;
}

PromptTemplate::Slot parse_slot(const std::string& value, const std::string& origin,
                                const char* directive) {
    size_t colon = value.find(':');
    PromptTemplate::Slot slot;
    if (colon == std::string::npos) {
        slot.name = trim(value);
    } else {
        slot.name = trim(value.substr(0, colon));
        slot.description = trim(value.substr(colon + 1));
    }
    if (!is_slot_name(slot.name)) {
        throw MalformedTemplate(origin + ": " + directive + " needs 'name: description' with an identifier name, got '" + value + "'");
    }
    return slot;
}

}  // namespace

PromptTemplate parse_template(const std::string& text, const std::string& origin) {
    PromptTemplate tpl;
    std::string* open_text = nullptr;        // directive accepting continuation lines
    std::string pending_example_input;
    bool have_pending_example = false;
    bool have_output_variable = false;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (trim(raw).empty()) continue;
        if (raw[0] != '@') {
            if (!open_text) {
                throw MalformedTemplate(origin + ": text before the first directive: '" + raw + "'");
            }
            *open_text += "\n" + raw;
            continue;
        }
        size_t colon = raw.find(':');
        if (colon == std::string::npos) {
            throw MalformedTemplate(origin + ": directive without ':': '" + raw + "'");
        }
        const std::string key = raw.substr(0, colon);
        const std::string value = trim(raw.substr(colon + 1));
        open_text = nullptr;
        if (key == "@Description") {
            tpl.persona_description = value;
            open_text = &tpl.persona_description;
        } else if (key == "@Terminology") {
            tpl.terminology.push_back(value);
            open_text = &tpl.terminology.back();
        } else if (key == "@ContextRule") {
            tpl.context_rules.push_back(value);
            open_text = &tpl.context_rules.back();
        } else if (key == "@InputVariable") {
            auto slot = parse_slot(value, origin, "@InputVariable");
            if (tpl.declares(slot.name)) {
                throw MalformedTemplate(origin + ": duplicate input variable '" + slot.name + "'");
            }
            tpl.input_variables.push_back(std::move(slot));
        } else if (key == "@Command") {
            tpl.commands.push_back(value);
            open_text = &tpl.commands.back();
        } else if (key == "@OutputVariable") {
            if (have_output_variable) {
                throw MalformedTemplate(origin + ": more than one @OutputVariable");
            }
            tpl.output_variable = parse_slot(value, origin, "@OutputVariable");
            have_output_variable = true;
        } else if (key == "@InstructionRule") {
            tpl.instruction_rules.push_back(value);
            open_text = &tpl.instruction_rules.back();
        } else if (key == "@ExampleInput") {
            if (have_pending_example) {
                throw MalformedTemplate(origin + ": @ExampleInput without a matching @ExampleOutput");
            }
            pending_example_input = value;
            have_pending_example = true;
            open_text = &pending_example_input;
        } else if (key == "@ExampleOutput") {
            if (!have_pending_example) {
                throw MalformedTemplate(origin + ": @ExampleOutput without a preceding @ExampleInput");
            }
            tpl.examples.push_back({pending_example_input, value});
            have_pending_example = false;
            open_text = &tpl.examples.back().output;
        } else {
            throw MalformedTemplate(origin + ": unknown directive '" + key + "'");
        }
    }

    if (have_pending_example) {
        throw MalformedTemplate(origin + ": trailing @ExampleInput without @ExampleOutput");
    }
    if (tpl.persona_description.empty()) {
        throw MalformedTemplate(origin + ": missing @Description");
    }
    if (tpl.commands.empty()) {
        throw MalformedTemplate(origin + ": at least one @Command is required");
    }
    if (!have_output_variable) {
        throw MalformedTemplate(origin + ": missing @OutputVariable");
    }
    if (tpl.examples.empty()) {
        throw MalformedTemplate(origin + ": at least one @ExampleInput/@ExampleOutput pair is required");
    }
    for (const auto& cmd : tpl.commands) {
        for (const auto& ref : slot_refs(cmd)) {
            if (!tpl.declares(ref)) {
                throw MalformedTemplate(origin + ": command references undeclared input variable '" + ref + "'");
            }
        }
    }
    return tpl;
}

PromptTemplate load_template(const std::string& template_dir, const std::string& unit) {
    const std::string path = template_dir + "/" + unit + ".prompt";
    return parse_template(read_file(path), path);
}

std::string render(const PromptTemplate& tpl, const std::map<std::string, std::string>& bindings) {
    for (const auto& [name, _] : bindings) {
        if (!tpl.declares(name)) throw UnknownSlot(name);
    }
    for (const auto& slot : tpl.input_variables) {
        if (bindings.find(slot.name) == bindings.end()) throw MissingBinding(slot.name);
    }

    std::ostringstream out;
    out << "@Persona\n";
    out << "@Description: " << tpl.persona_description << "\n";
    for (const auto& term : tpl.terminology) out << "@Terminology: " << term << "\n";
    if (!tpl.context_rules.empty()) {
        out << "@ContextControl\n@Rules:\n";
        for (const auto& rule : tpl.context_rules) out << "- " << rule << "\n";
    }
    out << "@Instruction\n";
    for (const auto& slot : tpl.input_variables) {
        out << "@InputVariable: " << slot.name;
        if (!slot.description.empty()) out << ": " << slot.description;
        out << "\n";
    }
    out << "@Commands:\n";
    for (const auto& cmd : tpl.commands) out << "- " << cmd << "\n";
    out << "@OutputVariable: " << tpl.output_variable.name;
    if (!tpl.output_variable.description.empty()) out << ": " << tpl.output_variable.description;
    out << "\n";
    if (!tpl.instruction_rules.empty()) {
        out << "@Rules:\n";
        for (const auto& rule : tpl.instruction_rules) out << "- " << rule << "\n";
    }
    for (const auto& ex : tpl.examples) {
        out << "@Example\nInput:\n" << ex.input << "\nOutput:\n" << ex.output << "\n";
    }

    // Single substitution pass; replacement text is inserted verbatim and
    // never re-scanned, so braces inside bound values are inert.
    const std::string serialized = out.str();
    std::string result;
    result.reserve(serialized.size());
    size_t pos = 0;
    while (pos < serialized.size()) {
        size_t open = serialized.find("{{", pos);
        if (open == std::string::npos) {
            result.append(serialized, pos, std::string::npos);
            break;
        }
        size_t close = serialized.find("}}", open + 2);
        if (close == std::string::npos) {
            result.append(serialized, pos, std::string::npos);
            break;
        }
        const std::string name = serialized.substr(open + 2, close - open - 2);
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            // Not a declared slot (e.g. literal braces in prose): keep as-is.
            result.append(serialized, pos, close + 2 - pos);
        } else {
            result.append(serialized, pos, open - pos);
            result.append(it->second);
        }
        pos = close + 2;
    }
    return result;
}

}  // namespace apikg
