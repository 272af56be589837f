// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "ahd/dsl/parser.hpp"
#include "ahd/dsl/unparse.hpp"
#include "ahd/interp.hpp"
#include "oracles.hpp"

using namespace ahd;

namespace {

dsl::Ast must_parse(const std::string& text) {
    dsl::ParseResult r = dsl::parse(text);
    REQUIRE(r.ok());
    return std::move(*r.ast);
}

interp::ExecOutcome run(const std::string& source, std::vector<double> features,
                        long max_steps = 100000) {
    dsl::Ast ast = must_parse(source);
    interp::FeatureVector fv{std::move(features), interp::SchemaId::TspNext};
    return interp::eval_heuristic(ast, fv, interp::ExecLimits{max_steps});
}

} // namespace

TEST_CASE("eval: plain arithmetic") {
    interp::ExecOutcome out = run("fn score(a, b) { return a + b }", {2.0, 3.0});
    REQUIRE(out.ok);
    CHECK(out.score == 5.0);
}

TEST_CASE("eval: division by zero normalizes to NonFiniteResult") {
    interp::ExecOutcome out = run("fn score(a, b) { return a / b }", {1.0, 0.0});
    REQUIRE(!out.ok);
    CHECK(out.error == interp::ExecError::NonFiniteResult);
}

TEST_CASE("eval: log of a negative normalizes to NonFiniteResult") {
    interp::ExecOutcome out = run("fn score(a, b) { return log(a) }", {-1.0, 0.0});
    REQUIRE(!out.ok);
    CHECK(out.error == interp::ExecError::NonFiniteResult);
}

TEST_CASE("eval: control flow, bindings, comparisons, short-circuit") {
    CHECK(run("fn score(a, b) { if (a < b) { return 1 } return 2 }", {1.0, 2.0}).score == 1.0);
    CHECK(run("fn score(a, b) { if (a < b) { return 1 } return 2 }", {3.0, 2.0}).score == 2.0);
    CHECK(run("fn score(a, b) { let t = a * 2 return t + b }", {2.0, 1.0}).score == 5.0);
    CHECK(run("fn score(a, b) { return a % b }", {7.0, 4.0}).score == 3.0);
    CHECK(run("fn score(a, b) { return not (a > b) }", {1.0, 2.0}).score == 1.0);
    // short-circuit: the diverging right operand is never evaluated
    CHECK(run("fn score(a, b) { if (a > 0 or 1 / b > 0) { return 1 } return 0 }", {1.0, 0.0})
              .score == 1.0);
    CHECK(run("fn score(a, b) { if (a > 0 and 1 / b > 0) { return 1 } return 0 }", {0.0, 0.0})
              .score == 0.0);
}

TEST_CASE("eval: builtins") {
    CHECK(run("fn score(a, b) { return min(a, b) }", {4.0, 2.0}).score == 2.0);
    CHECK(run("fn score(a, b) { return max(a, b) }", {4.0, 2.0}).score == 4.0);
    CHECK(run("fn score(a, b) { return pow(a, b) }", {2.0, 10.0}).score == 1024.0);
    CHECK(run("fn score(a, b) { return floor(a / b) }", {7.0, 2.0}).score == 3.0);
    CHECK(run("fn score(a, b) { return sqrt(a) + abs(-b) }", {9.0, 2.0}).score == 5.0);
}

TEST_CASE("eval: step limit makes every call terminate") {
    interp::ExecOutcome out = run("fn score(a, b) { return a + b }", {1.0, 1.0}, 3);
    REQUIRE(!out.ok);
    CHECK(out.error == interp::ExecError::StepLimitExceeded);
}

TEST_CASE("eval: arity mismatch is a wiring bug, not a runtime error") {
    dsl::Ast ast = must_parse("fn score(a, b) { return a }");
    interp::FeatureVector fv{{1.0, 2.0, 3.0}, interp::SchemaId::TspNext};
    CHECK_THROWS_AS(interp::eval_heuristic(ast, fv, interp::ExecLimits{}), ArityMismatchError);
}

TEST_CASE("eval: purity, two identical calls agree exactly") {
    dsl::Ast ast = must_parse("fn score(a, b) { let t = a / b return t * t }");
    interp::FeatureVector fv{{3.0, 7.0}, interp::SchemaId::TspNext};
    const interp::ExecOutcome first = interp::eval_heuristic(ast, fv, interp::ExecLimits{});
    const interp::ExecOutcome second = interp::eval_heuristic(ast, fv, interp::ExecLimits{});
    REQUIRE(first.ok);
    CHECK(first.score == second.score);
}

TEST_CASE("referential check: 50 random trees x 50 feature vectors vs oracle") {
    Rng tree_rng(RngSeed{2026});
    Rng feat_rng(RngSeed{810});
    const std::vector<std::string> params{"x0", "x1", "x2", "x3"};
    int scored = 0;
    for (int t = 0; t < 50; ++t) {
        dsl::Ast tree = oracle::random_valid_tree(tree_rng, params);
        // sanity: the generated tree is really in the valid language
        REQUIRE(dsl::parse(dsl::unparse_text(tree)).ok());
        for (int f = 0; f < 50; ++f) {
            std::vector<double> values;
            for (std::size_t i = 0; i < params.size(); ++i)
                values.push_back(0.1 + feat_rng.next_double() * 9.9);
            interp::FeatureVector fv{values, interp::SchemaId::TspNext};
            const interp::ExecOutcome mine = interp::eval_heuristic(tree, fv, interp::ExecLimits{});
            const oracle::RefResult ref = oracle::reference_eval(tree, values);
            REQUIRE(mine.ok == ref.ok);
            if (mine.ok) {
                ++scored;
                CHECK(std::isfinite(mine.score));
                const double tol = 1e-12 * std::max(1.0, std::fabs(ref.value));
                CHECK(std::fabs(mine.score - ref.value) <= tol);
            }
        }
    }
    CHECK(scored > 500); // most draws stay in-domain
}
