// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ahd/dsl/ast.hpp"
#include "ahd/dsl/source.hpp"

namespace ahd::dsl {

// Deterministic tree-to-text serialization, total over every tree the
// destruction operators can reach. Hole nodes and missing required children
// come out as the hole token; statements grafted into expression slots are
// parenthesized so the result always re-parses. For trees produced by
// parse(), the emitted text parses back to a structurally identical tree.
SourceText unparse(const Ast& ast);
std::string unparse_text(const Ast& ast);

// Canonical numeric literal formatting (shortest text that reads back to the
// same double); exposed for tests and the instance writers.
std::string format_number(double value);

} // namespace ahd::dsl
