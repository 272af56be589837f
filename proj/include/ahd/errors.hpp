// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace ahd {

// Contract breaches and external failures. In-contract outcomes (runtime
// errors of evaluated heuristics, invalid code, parse failures of LLM text)
// are ordinary return values, never exceptions.

struct DegenerateTreeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnparseableInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArityMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidHeuristicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProviderFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ahd
