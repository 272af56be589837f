// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ahd/dsl/ast.hpp"
#include "ahd/errors.hpp"
#include "ahd/interp.hpp"
#include "ahd/rng.hpp"

namespace ahd::problems {

enum class Problem { Tsp, Obp };

const char* problem_name(Problem p);
Problem problem_from_name(const std::string& name);

struct TspInstance {
    std::vector<std::pair<double, double>> coords; // in [0,1]^2
    int n_cities = 0;
    RngSeed seed;
};

struct ObpInstance {
    std::vector<int> item_sizes; // arrival order, immutable
    int capacity = 0;
    RngSeed seed;
};

// Feature encodings of the "select the next city" / "select a suitable bin"
// interfaces. Score direction: TSP picks the argmin-score city, OBP the
// argmax-score feasible bin; ties go to the lowest index. docs/features.md
// is the normative description.
struct FeatureSchema {
    interp::SchemaId schema_id;
    std::vector<std::string> feature_names;
    int arity = 0;
};

const FeatureSchema& tsp_schema();
const FeatureSchema& obp_schema();
const FeatureSchema& schema_for(Problem p);

struct InstanceObjective {
    int instance_id = 0;
    double objective = 0.0;
    int runtime_errors = 0;
};

struct EvalReport {
    std::vector<InstanceObjective> per_instance;
    double mean_objective = 0.0;
};

// --- instance generators ---

// Single-instance factories: coordinates / sizes are a pure function of the
// given seed. The suite generators below derive one seed per instance.
TspInstance make_tsp_instance(int n_cities, RngSeed seed);
ObpInstance make_obp_instance(int n_items, int capacity, RngSeed seed);

std::vector<TspInstance> gen_tsp_training(int count, RngSeed seed);

enum class TspTestSetting { C50, C100, C200 };
std::vector<TspInstance> gen_tsp_test(TspTestSetting setting, int count, RngSeed seed);

std::vector<ObpInstance> gen_obp_training(int count, RngSeed seed);

enum class ObpTestSetting { N1kC200, N5kC200, N10kC200, N1kC500, N5kC500, N10kC500 };
ObpInstance gen_obp_test(ObpTestSetting setting, RngSeed seed);

// --- objective evaluation ---

struct RunStats {
    double objective = 0.0;
    int runtime_errors = 0;
    std::vector<int> tour;      // TSP: visit order, starts at city 0
    std::vector<int> bin_loads; // OBP: final load per bin
};

// Constructive tour: start at city 0, repeatedly visit the feasible city with
// the lowest heuristic score, close the tour; objective is total Euclidean
// length. Candidates whose evaluation fails score +inf; if every candidate of
// a step fails the whole run collapses to the penalty objective n*sqrt(2).
RunStats run_tsp_detail(const dsl::Ast& heuristic, const TspInstance& inst,
                        const interp::ExecLimits& limits);
double run_tsp(const dsl::Ast& heuristic, const TspInstance& inst,
               const interp::ExecLimits& limits);

// Online packing: each arriving item goes to the feasible open bin with the
// highest score (new bin when none is feasible or all fail); objective is
// (bins_used - LB) / LB.
RunStats run_obp_detail(const dsl::Ast& heuristic, const ObpInstance& inst,
                        const interp::ExecLimits& limits);
double run_obp(const dsl::Ast& heuristic, const ObpInstance& inst,
               const interp::ExecLimits& limits);

// L1 bound: ceil(sum of sizes / capacity). Never exceeds the optimum.
long lower_bound_obp(const ObpInstance& inst);

// Desk-scale oracles; throw TooLargeError beyond 10 cities / 10 items.
double brute_force_tsp(const TspInstance& inst);
int brute_force_obp(const ObpInstance& inst);

double tsp_penalty(const TspInstance& inst);
double obp_penalty(const ObpInstance& inst);

double euclidean(const std::pair<double, double>& a, const std::pair<double, double>& b);

// --- suites: the unit the evolution loop and the CLI evaluate against ---

struct ProblemSuite {
    std::string name;
    Problem problem = Problem::Tsp;
    RngSeed seed;
    std::vector<TspInstance> tsp;
    std::vector<ObpInstance> obp;

    std::size_t size() const { return problem == Problem::Tsp ? tsp.size() : obp.size(); }
    const FeatureSchema& schema() const { return schema_for(problem); }

    // Mean objective over all instances; throws InvalidHeuristicError if the
    // tree is not executable (callers must gate on validate()).
    EvalReport evaluate(const dsl::Ast& heuristic, const interp::ExecLimits& limits) const;

    // Mean of the per-instance penalty objectives; the fitness fallback when
    // no executable twin can be obtained.
    double penalty_mean() const;
};

ProblemSuite make_tsp_suite(std::string name, std::vector<TspInstance> instances, RngSeed seed);
ProblemSuite make_obp_suite(std::string name, std::vector<ObpInstance> instances, RngSeed seed);

std::string suite_to_json(const ProblemSuite& suite);
ProblemSuite suite_from_json(const std::string& text);
void write_suite(const ProblemSuite& suite, const std::string& path);
ProblemSuite read_suite(const std::string& path);

} // namespace ahd::problems
