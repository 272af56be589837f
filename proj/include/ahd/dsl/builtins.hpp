// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace ahd::dsl {

struct Builtin {
    std::string_view name;
    int arity;
};

// The fixed builtin table. Normative copy lives in docs/grammar.ebnf.
inline constexpr std::array<Builtin, 8> kBuiltins = {{
    {"min", 2},
    {"max", 2},
    {"abs", 1},
    {"sqrt", 1},
    {"exp", 1},
    {"log", 1},
    {"pow", 2},
    {"floor", 1},
}};

inline std::optional<int> builtin_arity(std::string_view name) {
    for (const Builtin& b : kBuiltins)
        if (b.name == name)
            return b.arity;
    return std::nullopt;
}

inline bool is_builtin(std::string_view name) { return builtin_arity(name).has_value(); }

} // namespace ahd::dsl
