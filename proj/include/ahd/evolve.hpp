// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahd/heuristic_code.hpp"
#include "ahd/problems.hpp"
#include "ahd/repair.hpp"
#include "ahd/rng.hpp"

namespace ahd::evolve {

enum class Framework { EohI, ReevoI, EohSI, EohBaseline };

const char* framework_name(Framework f);
Framework framework_from_name(const std::string& name);

struct Individual {
    HeuristicCode code;
    std::optional<double> fitness; // lower is better
    std::optional<problems::EvalReport> eval_report;
    std::optional<std::string> repaired_twin; // the v of the two-branch fitness
    int generation_born = 0;
    long tokens_spent = 0;
    long seq = 0; // creation order; breaks fitness ties toward older individuals
};

struct Population {
    std::vector<Individual> members;
    int capacity = 5;
};

struct RunConfig {
    Framework framework = Framework::EohI;
    problems::Problem problem = problems::Problem::Tsp;
    int pop_size = 5;
    int iterations = 10;
    int ii_repetitions = 2;
    int budget = 400; // reevo-i: max heuristics generated
    int set_size = 3; // eohs-i: output set size
    RngSeed seed{1};
    interp::ExecLimits limits;
    long reflection_cap = 2000; // long-term reflection length bound, bytes
};

// Framework defaults: eoh-i 10 iterations / population 5, reevo-i a
// 400-heuristic budget, eohs-i 50 iterations / population 10.
RunConfig default_config(Framework framework, problems::Problem problem);
void check_config(const RunConfig& config); // throws ConfigError

struct LedgerEntry {
    int gen = 0;
    std::string kind; // "ast" | "baseline" | "reflect"
    long tokens_in = 0;
    long tokens_out = 0;
};

struct TokenLedger {
    long total_in = 0;
    long total_out = 0;
    long ast_in = 0;
    long ast_out = 0;
    long baseline_in = 0;
    long baseline_out = 0;
    long reflect_in = 0;
    long reflect_out = 0;
    long heuristics_generated = 0;
    long provider_failures = 0;
    std::vector<LedgerEntry> entries;

    void add(int gen, const std::string& kind, long in, long out);
};

struct ReflectionState {
    std::string short_term;
    std::string long_term;
};

struct RunResult {
    RunConfig config;
    std::string suite_name;
    Individual best;
    std::vector<Individual> final_population;
    std::vector<Individual> selected_set; // eohs-i output
    double set_objective = 0.0;
    TokenLedger ledger;
    std::vector<std::string> jsonl_lines; // one per generation
    std::vector<Individual> archive;      // every individual ever created
    std::vector<double> best_series;
    double wall_seconds = 0.0;
};

// Bundled per-problem seed corpus; all sources are valid and match the
// problem's feature schema.
std::vector<std::string> seed_sources(problems::Problem problem);

// Complementary set objective: mean over instances of the minimum objective
// across the set (lower is better). Reports must share instance counts.
double complementary_objective(const std::vector<const problems::EvalReport*>& reports);

// Greedy forward selection of k reports minimizing the set objective.
std::vector<std::size_t>
greedy_complementary_selection(const std::vector<const problems::EvalReport*>& reports,
                               std::size_t k);

class Engine {
  public:
    Engine(RunConfig config, repair::Provider& provider, const problems::ProblemSuite& suite);

    RunResult run();

    // Individual steps, exposed for tests.
    Population seed_population();
    Population eoh_i_generation(const Population& pop);
    Population reevo_i_generation(const Population& pop, ReflectionState& reflection);
    Population eohs_i_generation(const Population& pop);
    Population baseline_semantic_generation(const Population& pop);

    // Two-branch fitness: valid code scores the suite mean; invalid code is
    // repaired once and inherits its twin's fitness exactly. Twins created
    // along the way are appended to `created`.
    double fitness(Individual& individual, std::vector<Individual>& created);

    const TokenLedger& ledger() const { return ledger_; }
    const std::vector<Individual>& archive() const { return archive_; }
    int generation() const { return generation_; }

  private:
    Individual make_individual(HeuristicCode code);
    Individual* tournament(Population& pop, bool valid_only);
    HeuristicCode run_iv(const HeuristicCode& icode, repair::RepairContext context,
                         const std::string& reflection, long& tokens_spent);
    HeuristicCode ii_step(const HeuristicCode& icode, int repetition_index);
    void insert_with_fitness(Population& pop, Individual individual);
    void survive_truncation(Population& pop);
    void survive_complementary(Population& pop);
    void record_generation(const Population& pop);
    const problems::EvalReport* report_of(const Individual& individual,
                                          const Population& pop) const;
    bool budget_exhausted(int headroom) const;

    RunConfig config_;
    repair::Provider& provider_;
    const problems::ProblemSuite& suite_;
    Rng rng_;
    TokenLedger ledger_;
    std::vector<Individual> archive_;
    std::vector<std::string> jsonl_lines_;
    std::vector<double> best_series_;
    std::optional<Individual> best_ever_;
    long next_seq_ = 0;
    int generation_ = 0;
};

RunResult run(const RunConfig& config, repair::Provider& provider,
              const problems::ProblemSuite& suite);

// Manifest and log writers used by the CLI; deterministic except for the
// timestamp and wall-time fields of the manifest.
std::string result_manifest_json(const RunResult& result, const std::string& timestamp_utc);
void write_run_files(const RunResult& result, const std::string& out_dir,
                     const std::string& run_name);

} // namespace ahd::evolve
