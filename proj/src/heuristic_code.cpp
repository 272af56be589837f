// SPDX-License-Identifier: Apache-2.0
#include "ahd/heuristic_code.hpp"

#include "ahd/fingerprint.hpp"

namespace ahd {

std::string HeuristicCode::violations_summary() const {
    if (unparseable)
        return "unparseable: " + parse_error;
    return dsl::summarize(validity);
}

HeuristicCode make_heuristic_code(dsl::SourceText source) {
    HeuristicCode code;
    code.fingerprint = fingerprint_of(source.text);
    dsl::ParseResult parsed = dsl::parse(source);
    if (parsed.ok()) {
        code.ast = std::move(parsed.ast);
        code.validity = dsl::validate(*code.ast);
    } else {
        code.unparseable = true;
        code.validity.is_valid = false;
        code.parse_error = parsed.failure.message + " at byte " +
                           std::to_string(parsed.failure.offset);
    }
    code.source = std::move(source);
    return code;
}

HeuristicCode make_heuristic_code(std::string text, dsl::Origin origin) {
    return make_heuristic_code(dsl::SourceText{std::move(text), origin});
}

} // namespace ahd
