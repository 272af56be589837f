// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ahd/dsl/ast.hpp"
#include "ahd/errors.hpp"

namespace ahd::interp {

enum class SchemaId { TspNext, ObpBin };

struct FeatureVector {
    std::vector<double> values;
    SchemaId schema_id = SchemaId::TspNext;
};

// Hard per-call budget; generous for a loop-free language where evaluation
// is bounded by tree size anyway.
struct ExecLimits {
    long max_steps = 100000;
};

enum class ExecError { NonFiniteResult, StepLimitExceeded, DomainError };

// Every in-contract result of running a heuristic: either a finite score or
// a classified runtime error. Math domain violations (log of a non-positive,
// division by zero, pow yielding NaN) all normalize to NonFiniteResult.
struct ExecOutcome {
    bool ok = false;
    double score = 0.0;
    ExecError error = ExecError::NonFiniteResult;

    static ExecOutcome success(double value) { return {true, value, ExecError::NonFiniteResult}; }
    static ExecOutcome failure(ExecError e) { return {false, 0.0, e}; }
};

const char* exec_error_name(ExecError e);

// Evaluates a validated heuristic on one feature vector. Pure, deterministic,
// total: returns within max_steps node evaluations and never returns a
// non-finite score. Throws ArityMismatchError when the feature vector length
// disagrees with the function's parameter count (a wiring bug, not a
// heuristic flaw).
ExecOutcome eval_heuristic(const dsl::Ast& ast, const FeatureVector& features,
                           const ExecLimits& limits);

// Parameter count of the program's fn definition; -1 if the tree has no
// well-formed parameter list.
int fn_param_count(const dsl::Ast& ast);

} // namespace ahd::interp
