// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahd/dsl/ast.hpp"
#include "ahd/dsl/source.hpp"

namespace ahd::dsl {

// Where in the text the derivation died, and what would have let it continue.
struct ParseFailure {
    std::size_t offset = 0;
    std::vector<std::string> expected;
    std::string message;
};

struct ParseResult {
    std::optional<Ast> ast;
    ParseFailure failure;
    bool ok() const { return ast.has_value(); }
};

// Recursive-descent parse of the heuristic DSL. The accepted language is a
// deliberate superset of what validate() blesses: hole tokens, nested blocks,
// statements in expression positions (parenthesized) and arbitrary elements
// in fn parameter lists all parse, so that every tree the destruction
// operators can produce unparses to text this function accepts.
ParseResult parse(const SourceText& source);
ParseResult parse(std::string_view text);

} // namespace ahd::dsl
