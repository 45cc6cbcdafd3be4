#pragma once

#include <map>
#include <string>
#include <vector>

namespace apikg {

// Structured prompt, mirrored from the template file layout:
//
//   @Persona        — @Description: plus optional @Terminology: entries
//   @ContextControl — optional @ContextRule: entries
//   @Instruction    — @InputVariable: declarations, @Command: lines,
//                     @OutputVariable:, optional @InstructionRule: lines,
//                     and @ExampleInput:/@ExampleOutput: pairs
//
// Non-directive lines continue the previous directive's text. Commands
// reference declared input variables as {{name}}; rendering substitutes
// the bound values there.
struct PromptTemplate {
    struct Slot {
        std::string name;
        std::string description;
    };
    struct Example {
        std::string input;
        std::string output;
    };

    std::string persona_description;
    std::vector<std::string> terminology;
    std::vector<std::string> context_rules;
    std::vector<Slot> input_variables;
    std::vector<std::string> commands;
    Slot output_variable;
    std::vector<std::string> instruction_rules;
    std::vector<Example> examples;

    bool declares(const std::string& slot) const;
};

// Parses and validates template text. Invariants enforced here: a
// persona description, at least one command, at least one example, an
// output variable, and every {{slot}} referenced by a command declared
// as an input variable. Violations throw MalformedTemplate.
PromptTemplate parse_template(const std::string& text, const std::string& origin);

// Loads <dir>/<unit>.prompt.
PromptTemplate load_template(const std::string& template_dir, const std::string& unit);

// Deterministic serialization with every {{slot}} replaced by its
// binding. Throws MissingBinding when a declared variable is unbound and
// UnknownSlot when a binding names an undeclared variable. Byte-identical
// output for identical inputs.
std::string render(const PromptTemplate& tpl, const std::map<std::string, std::string>& bindings);

}  // namespace apikg
