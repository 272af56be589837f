// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ahd/dsl/ast.hpp"

namespace ahd::dsl {

enum class ViolationKind {
    UnboundIdentifier,
    MissingReturn,
    BadArity,
    HolePresent,
    UnknownCall,
    EmptyBlock,
};

const char* violation_name(ViolationKind k);

struct Violation {
    int node_id = 0;
    ViolationKind kind = ViolationKind::BadArity;
    std::string message;
};

struct ValidityReport {
    bool is_valid = true;
    std::vector<Violation> violations;
};

// Structural validity: one fn under the program, every identifier bound by a
// parameter, an enclosing let or the builtin table, every control path
// through the body ending in a return, kind arities respected, no holes.
// Collects every violation, not just the first. is_valid=true means the
// interpreter can begin execution; runtime errors remain possible.
ValidityReport validate(const Ast& ast);

std::string summarize(const ValidityReport& report);

// True when every control path through the block ends in a return.
bool block_returns_on_all_paths(const AstNode& block);

} // namespace ahd::dsl
