// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace ahd::dsl {

// U+27E8 '?' U+27E9. Marks structurally missing code in unparsed trees.
// Reserved: only unparser output may legitimately contain it; hole-bearing
// LLM candidates are dropped at extraction time.
inline constexpr std::string_view kHoleToken = "\xE2\x9F\xA8?\xE2\x9F\xA9";

enum class Origin { Seed, Llm, Unparser };

struct SourceText {
    std::string text;
    Origin origin = Origin::Seed;
};

inline bool contains_hole_token(std::string_view text) {
    return text.find(kHoleToken) != std::string_view::npos;
}

inline const char* origin_name(Origin o) {
    switch (o) {
    case Origin::Seed: return "seed";
    case Origin::Llm: return "llm";
    case Origin::Unparser: return "unparser";
    }
    return "seed";
}

} // namespace ahd::dsl
