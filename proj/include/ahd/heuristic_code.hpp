// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahd/dsl/ast.hpp"
#include "ahd/dsl/parser.hpp"
#include "ahd/dsl/source.hpp"
#include "ahd/dsl/validate.hpp"

namespace ahd {

struct LineageEvent {
    std::string op;
    std::vector<std::string> parent_fingerprints;
};

// The unit populations hold: source text plus its validity status. Text that
// does not even lex is kept too (unparseable=true) so Algorithm-2-style
// repair can route any provider output back through itself.
struct HeuristicCode {
    dsl::SourceText source;
    bool unparseable = false;
    dsl::ValidityReport validity;     // meaningful iff !unparseable
    std::optional<dsl::Ast> ast;      // cached parse, present iff !unparseable
    std::string parse_error;          // set iff unparseable
    std::string fingerprint;          // pure function of source.text
    std::vector<LineageEvent> lineage;
    std::optional<std::string> repaired_from;

    bool is_valid() const { return !unparseable && validity.is_valid; }
    bool is_parseable() const { return !unparseable; }

    // I-Code in the operator-taxonomy sense: anything not directly executable.
    bool is_icode() const { return !is_valid(); }

    std::string violations_summary() const;
};

HeuristicCode make_heuristic_code(dsl::SourceText source);
HeuristicCode make_heuristic_code(std::string text, dsl::Origin origin);

} // namespace ahd
