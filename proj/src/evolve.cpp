// SPDX-License-Identifier: Apache-2.0
#include "ahd/evolve.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ahd/astops.hpp"
#include "ahd/dsl/unparse.hpp"

namespace ahd::evolve {

using nlohmann::json;

const char* framework_name(Framework f) {
    switch (f) {
    case Framework::EohI: return "eoh-i";
    case Framework::ReevoI: return "reevo-i";
    case Framework::EohSI: return "eohs-i";
    case Framework::EohBaseline: return "eoh-baseline";
    }
    return "?";
}

Framework framework_from_name(const std::string& name) {
    if (name == "eoh-i") return Framework::EohI;
    if (name == "reevo-i") return Framework::ReevoI;
    if (name == "eohs-i") return Framework::EohSI;
    if (name == "eoh-baseline") return Framework::EohBaseline;
    throw ConfigError("unknown framework '" + name + "'");
}

RunConfig default_config(Framework framework, problems::Problem problem) {
    RunConfig config;
    config.framework = framework;
    config.problem = problem;
    switch (framework) {
    case Framework::EohI:
    case Framework::EohBaseline:
        config.pop_size = 5;
        config.iterations = 10;
        break;
    case Framework::ReevoI:
        config.pop_size = 5;
        config.budget = 400;
        config.iterations = 0; // budget-driven
        break;
    case Framework::EohSI:
        config.pop_size = 10;
        config.iterations = 50;
        break;
    }
    return config;
}

void check_config(const RunConfig& config) {
    if (config.pop_size < 1)
        throw ConfigError("population size must be at least 1");
    if (config.ii_repetitions < 0)
        throw ConfigError("ii repetitions cannot be negative");
    if (config.framework == Framework::ReevoI && config.budget < 1)
        throw ConfigError("reevo-i needs a positive heuristics budget");
    if (config.framework != Framework::ReevoI && config.iterations < 0)
        throw ConfigError("iterations cannot be negative");
    if (config.framework == Framework::EohSI) {
        if (config.set_size < 1)
            throw ConfigError("set size must be at least 1");
        if (config.set_size > config.pop_size)
            throw ConfigError("set size cannot exceed the population capacity");
    }
}

void TokenLedger::add(int gen, const std::string& kind, long in, long out) {
    entries.push_back({gen, kind, in, out});
    total_in += in;
    total_out += out;
    if (kind == "ast") {
        ast_in += in;
        ast_out += out;
    } else if (kind == "baseline") {
        baseline_in += in;
        baseline_out += out;
    } else {
        reflect_in += in;
        reflect_out += out;
    }
}

std::vector<std::string> seed_sources(problems::Problem problem) {
    if (problem == problems::Problem::Tsp) {
        const char* params =
            "d_cur, d_start, d_mean_unvis, d_min_unvis, d_max_unvis, frac_remaining";
        return {
            // nearest neighbor
            "fn score(" + std::string(params) + ") { return d_cur }",
            // weighted lookahead: hug the remaining cluster, drift home late
            "fn score(" + std::string(params) +
                ") { let look = d_cur + 0.5 * d_min_unvis "
                "if (frac_remaining < 0.15) { return d_cur + 0.3 * d_start } return look }",
            // blend of step cost and center of mass of the rest
            "fn score(" + std::string(params) + ") { return 0.7 * d_cur + 0.3 * d_mean_unvis }",
        };
    }
    const char* params = "item_size, remaining_cap, residual_after, bin_utilization";
    return {
        // best fit: tightest feasible bin
        "fn score(" + std::string(params) + ") { return -residual_after }",
        // first fit: constant score, tie-break picks the lowest index
        "fn score(" + std::string(params) + ") { return 1 }",
        // worst fit: most room left
        "fn score(" + std::string(params) + ") { return remaining_cap }",
        // near-full preference with a fallback to best fit
        "fn score(" + std::string(params) +
            ") { let frac = residual_after / remaining_cap "
            "if (frac < 0.2) { return 2 - frac } return -frac }",
    };
}

double complementary_objective(const std::vector<const problems::EvalReport*>& reports) {
    if (reports.empty())
        return std::numeric_limits<double>::infinity();
    const std::size_t n = reports.front()->per_instance.size();
    if (n == 0)
        return 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        for (const problems::EvalReport* report : reports)
            lo = std::min(lo, report->per_instance[j].objective);
        total += lo;
    }
    return total / static_cast<double>(n);
}

std::vector<std::size_t>
greedy_complementary_selection(const std::vector<const problems::EvalReport*>& reports,
                               std::size_t k) {
    std::vector<std::size_t> selected;
    if (reports.empty())
        return selected;
    const std::size_t n = reports.front()->per_instance.size();
    std::vector<double> min_vec(n, std::numeric_limits<double>::infinity());
    std::vector<bool> taken(reports.size(), false);
    while (selected.size() < k) {
        std::size_t best_idx = reports.size();
        double best_obj = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (taken[i] || reports[i]->per_instance.size() != n)
                continue;
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                total += std::min(min_vec[j], reports[i]->per_instance[j].objective);
            const double obj = n ? total / static_cast<double>(n) : 0.0;
            if (obj < best_obj) { // strict: ties stay with the earlier candidate
                best_obj = obj;
                best_idx = i;
            }
        }
        if (best_idx == reports.size())
            break;
        taken[best_idx] = true;
        selected.push_back(best_idx);
        for (std::size_t j = 0; j < n; ++j)
            min_vec[j] = std::min(min_vec[j], reports[best_idx]->per_instance[j].objective);
    }
    return selected;
}

// --- engine ---

Engine::Engine(RunConfig config, repair::Provider& provider, const problems::ProblemSuite& suite)
    : config_(config), provider_(provider), suite_(suite), rng_(config.seed) {
    check_config(config_);
    if (suite_.problem != config_.problem)
        throw ConfigError("suite problem does not match the run configuration");
}

Individual Engine::make_individual(HeuristicCode code) {
    Individual individual;
    individual.code = std::move(code);
    individual.generation_born = generation_;
    individual.seq = next_seq_++;
    ledger_.heuristics_generated += 1;
    return individual;
}

double Engine::fitness(Individual& individual, std::vector<Individual>& created) {
    if (individual.fitness)
        return *individual.fitness;

    if (individual.code.is_valid()) {
        try {
            problems::EvalReport report = suite_.evaluate(*individual.code.ast, config_.limits);
            individual.fitness = report.mean_objective;
            individual.eval_report = std::move(report);
        } catch (const ArityMismatchError&) {
            // executable but wired for a different schema: penalized, not fatal
            individual.fitness = suite_.penalty_mean();
        }
        return *individual.fitness;
    }

    // Invalid code: repair once and inherit the twin's fitness exactly.
    long tokens = 0;
    HeuristicCode twin_code;
    try {
        twin_code = run_iv(individual.code, repair::RepairContext::Plain, "", tokens);
    } catch (const ProviderFailureError&) {
        ledger_.provider_failures += 1;
        individual.tokens_spent += tokens;
        individual.fitness = suite_.penalty_mean();
        return *individual.fitness;
    }
    individual.tokens_spent += tokens;

    Individual twin = make_individual(std::move(twin_code));
    if (twin.code.is_valid()) {
        try {
            problems::EvalReport report = suite_.evaluate(*twin.code.ast, config_.limits);
            twin.fitness = report.mean_objective;
            twin.eval_report = std::move(report);
        } catch (const ArityMismatchError&) {
            twin.fitness = suite_.penalty_mean();
        }
    } else {
        // the twin did not validate; no second repair round
        twin.fitness = suite_.penalty_mean();
    }
    individual.fitness = *twin.fitness;
    individual.repaired_twin = twin.code.fingerprint;
    individual.eval_report = twin.eval_report; // the twin's vector speaks for the I-Code
    created.push_back(std::move(twin));
    return *individual.fitness;
}

HeuristicCode Engine::run_iv(const HeuristicCode& icode, repair::RepairContext context,
                             const std::string& reflection, long& tokens_spent) {
    repair::RepairRequest request;
    request.icode = icode;
    request.violations_summary = icode.violations_summary();
    request.context = context;
    request.reflection = reflection;
    request.feature_schema = suite_.schema();
    request.want_variants = 1;
    repair::RepairResponse response = repair::repair(request, provider_);
    ledger_.add(generation_, "ast", response.tokens_in, response.tokens_out);
    tokens_spent += response.tokens_in + response.tokens_out;
    if (response.candidates.empty())
        throw ProviderFailureError("provider returned no usable candidate");
    HeuristicCode out = make_heuristic_code(response.candidates.front());
    out.lineage = icode.lineage;
    out.lineage.push_back({"iv-repair", {icode.fingerprint}});
    out.repaired_from = icode.fingerprint;
    return out;
}

HeuristicCode Engine::ii_step(const HeuristicCode& icode, int repetition_index) {
    astops::IiStrategy strategy = (repetition_index % 2 == 0)
                                      ? astops::IiStrategy::StructuralOnly
                                      : astops::IiStrategy::RepairThenDestroy;
    if (!icode.is_parseable())
        strategy = astops::IiStrategy::RepairThenDestroy; // the only applicable route
    if (strategy == astops::IiStrategy::StructuralOnly && icode.is_valid()) {
        // a destruction product that happened to stay valid
        return astops::apply_vi(icode, rng_);
    }
    astops::RepairFn repair_fn = [this](const HeuristicCode& code) {
        long spent = 0;
        try {
            return run_iv(code, repair::RepairContext::Plain, "", spent);
        } catch (const ProviderFailureError&) {
            ledger_.provider_failures += 1;
            return code; // II degrades to a no-op on provider failure
        }
    };
    return astops::apply_ii(icode, rng_, strategy,
                            strategy == astops::IiStrategy::RepairThenDestroy ? repair_fn
                                                                              : astops::RepairFn{});
}

void Engine::insert_with_fitness(Population& pop, Individual individual) {
    std::vector<Individual> created;
    fitness(individual, created);

    auto consider_best = [this](const Individual& candidate) {
        if (!best_ever_ || *candidate.fitness < *best_ever_->fitness)
            best_ever_ = candidate;
    };
    consider_best(individual);

    const auto present = [&pop](const std::string& fp) {
        return std::any_of(pop.members.begin(), pop.members.end(),
                           [&fp](const Individual& m) { return m.code.fingerprint == fp; });
    };
    archive_.push_back(individual);
    if (!present(individual.code.fingerprint))
        pop.members.push_back(std::move(individual));
    for (Individual& twin : created) {
        consider_best(twin);
        archive_.push_back(twin);
        if (!present(twin.code.fingerprint))
            pop.members.push_back(std::move(twin));
    }
}

std::optional<std::size_t> tournament_index(Population& pop, Rng& rng, bool valid_only) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < pop.members.size(); ++i)
        if (!valid_only || pop.members[i].code.is_valid())
            pool.push_back(i);
    if (pool.empty())
        return std::nullopt;
    const std::size_t a = pool[rng.next_below(pool.size())];
    const std::size_t b = pool[rng.next_below(pool.size())];
    const Individual& ia = pop.members[a];
    const Individual& ib = pop.members[b];
    if (*ia.fitness != *ib.fitness)
        return *ia.fitness < *ib.fitness ? a : b;
    return ia.seq <= ib.seq ? a : b;
}

Individual* Engine::tournament(Population& pop, bool valid_only) {
    const auto idx = tournament_index(pop, rng_, valid_only);
    return idx ? &pop.members[*idx] : nullptr;
}

void Engine::survive_truncation(Population& pop) {
    auto& members = pop.members;
    std::stable_sort(members.begin(), members.end(),
                     [](const Individual& a, const Individual& b) { return a.seq < b.seq; });
    // unique fingerprints, older individual wins
    std::vector<Individual> unique;
    for (Individual& m : members) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&m](const Individual& u) {
            return u.code.fingerprint == m.code.fingerprint;
        });
        if (!dup)
            unique.push_back(std::move(m));
    }
    std::stable_sort(unique.begin(), unique.end(), [](const Individual& a, const Individual& b) {
        if (*a.fitness != *b.fitness)
            return *a.fitness < *b.fitness;
        if (a.generation_born != b.generation_born)
            return a.generation_born < b.generation_born;
        return a.seq < b.seq;
    });
    if (unique.size() > static_cast<std::size_t>(pop.capacity))
        unique.resize(static_cast<std::size_t>(pop.capacity));
    if (best_ever_) {
        const bool kept = std::any_of(unique.begin(), unique.end(), [this](const Individual& u) {
            return u.code.fingerprint == best_ever_->code.fingerprint;
        });
        if (!kept && !unique.empty())
            unique.back() = *best_ever_; // elitism 1
    }
    members = std::move(unique);
}

void Engine::survive_complementary(Population& pop) {
    auto& members = pop.members;
    std::stable_sort(members.begin(), members.end(),
                     [](const Individual& a, const Individual& b) { return a.seq < b.seq; });
    std::vector<Individual> unique;
    for (Individual& m : members) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&m](const Individual& u) {
            return u.code.fingerprint == m.code.fingerprint;
        });
        if (!dup)
            unique.push_back(std::move(m));
    }
    std::vector<std::size_t> with_report;
    std::vector<const problems::EvalReport*> reports;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        if (unique[i].eval_report) {
            with_report.push_back(i);
            reports.push_back(&*unique[i].eval_report);
        }
    }
    std::vector<std::size_t> chosen =
        greedy_complementary_selection(reports, static_cast<std::size_t>(pop.capacity));
    std::vector<bool> keep(unique.size(), false);
    for (std::size_t pick : chosen)
        keep[with_report[pick]] = true;
    std::vector<Individual> survivors;
    for (std::size_t pick : chosen)
        survivors.push_back(unique[with_report[pick]]);
    // pad with the best remaining individuals when reports are scarce
    if (survivors.size() < static_cast<std::size_t>(pop.capacity)) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < unique.size(); ++i)
            if (!keep[i])
                rest.push_back(i);
        std::stable_sort(rest.begin(), rest.end(), [&unique](std::size_t a, std::size_t b) {
            if (*unique[a].fitness != *unique[b].fitness)
                return *unique[a].fitness < *unique[b].fitness;
            return unique[a].seq < unique[b].seq;
        });
        for (std::size_t idx : rest) {
            if (survivors.size() >= static_cast<std::size_t>(pop.capacity))
                break;
            survivors.push_back(unique[idx]);
        }
    }
    members = std::move(survivors);
}

Population Engine::seed_population() {
    Population pop;
    pop.capacity = config_.pop_size;
    for (const std::string& source : seed_sources(config_.problem)) {
        if (static_cast<int>(pop.members.size()) >= config_.pop_size)
            break;
        HeuristicCode code = make_heuristic_code(source, dsl::Origin::Seed);
        code.lineage.push_back({"seed", {}});
        insert_with_fitness(pop, make_individual(std::move(code)));
    }
    return pop;
}

namespace {

struct ParentPick {
    HeuristicCode code;
    std::string fingerprint;
    double fitness = 0.0;
    std::string text;
};

} // namespace

Population Engine::eoh_i_generation(const Population& pop) {
    Population next = pop;
    for (int slot = 0; slot < config_.pop_size; ++slot) {
        auto a_idx = tournament_index(next, rng_, true);
        if (!a_idx) {
            // every member is an I-Code: rescue by repairing the tournament
            // winner before running the VI stage
            auto any_idx = tournament_index(next, rng_, false);
            if (!any_idx)
                break;
            long spent = 0;
            try {
                HeuristicCode fixed = run_iv(next.members[*any_idx].code,
                                             repair::RepairContext::Plain, "", spent);
                Individual rescued = make_individual(std::move(fixed));
                rescued.tokens_spent = spent;
                insert_with_fitness(next, std::move(rescued));
            } catch (const ProviderFailureError&) {
                ledger_.provider_failures += 1;
                continue;
            }
            a_idx = tournament_index(next, rng_, true);
            if (!a_idx)
                continue;
        }
        const HeuristicCode parent_a = next.members[*a_idx].code;

        HeuristicCode vi_product;
        if (rng_.next_coin()) {
            const auto b_idx = tournament_index(next, rng_, true);
            const HeuristicCode parent_b = next.members[*b_idx].code;
            vi_product = astops::apply_vi(parent_a, parent_b, rng_);
        } else {
            vi_product = astops::apply_vi(parent_a, rng_);
        }
        insert_with_fitness(next, make_individual(vi_product));

        HeuristicCode current = vi_product;
        for (int k = 0; k < config_.ii_repetitions; ++k) {
            current = ii_step(current, k);
            insert_with_fitness(next, make_individual(current));
        }

        if (current.is_icode()) {
            long spent = 0;
            try {
                HeuristicCode candidate =
                    run_iv(current, repair::RepairContext::Plain, "", spent);
                Individual offspring = make_individual(std::move(candidate));
                offspring.tokens_spent = spent;
                insert_with_fitness(next, std::move(offspring));
            } catch (const ProviderFailureError&) {
                ledger_.provider_failures += 1;
                // the slot's invalid chain already competes via its twins
            }
        }
    }
    survive_truncation(next);
    return next;
}

Population Engine::reevo_i_generation(const Population& pop, ReflectionState& reflection) {
    Population next = pop;
    // crossover offspring, guided by short-term reflection
    for (int slot = 0; slot < config_.pop_size; ++slot) {
        if (budget_exhausted(3))
            break;
        const auto a_idx = tournament_index(next, rng_, true);
        if (!a_idx)
            break;
        const auto b_idx = tournament_index(next, rng_, true);
        ParentPick a{next.members[*a_idx].code, next.members[*a_idx].code.fingerprint,
                     *next.members[*a_idx].fitness, next.members[*a_idx].code.source.text};
        ParentPick b{next.members[*b_idx].code, next.members[*b_idx].code.fingerprint,
                     *next.members[*b_idx].fitness, next.members[*b_idx].code.source.text};

        HeuristicCode icode = astops::apply_vi(a.code, b.code, rng_);

        repair::PromptJob job;
        job.kind = repair::PromptJob::Kind::ReflectShort;
        job.reflection = {a.fingerprint, b.fingerprint, a.fitness, b.fitness};
        job.prompt = repair::build_short_reflection_prompt(job.reflection, a.text, b.text);
        try {
            const repair::Completion note = provider_.complete(job);
            ledger_.add(generation_, "reflect", note.tokens_in, note.tokens_out);
            if (!note.texts.empty())
                reflection.short_term = note.texts.front();
        } catch (const ProviderFailureError&) {
            ledger_.provider_failures += 1;
            reflection.short_term.clear();
        }

        long spent = 0;
        try {
            HeuristicCode candidate = run_iv(icode, repair::RepairContext::ShortTermReflection,
                                             reflection.short_term, spent);
            Individual offspring = make_individual(std::move(candidate));
            offspring.tokens_spent = spent;
            insert_with_fitness(next, std::move(offspring));
        } catch (const ProviderFailureError&) {
            ledger_.provider_failures += 1;
        }
    }
    // mutation offspring, guided by long-term reflection
    for (int slot = 0; slot < config_.pop_size; ++slot) {
        if (budget_exhausted(3))
            break;
        const auto a_idx = tournament_index(next, rng_, true);
        if (!a_idx)
            break;
        const HeuristicCode parent = next.members[*a_idx].code;
        HeuristicCode icode = astops::apply_vi(parent, rng_);

        repair::PromptJob job;
        job.kind = repair::PromptJob::Kind::ReflectLong;
        job.accumulated = reflection.long_term;
        const std::string latest =
            reflection.short_term.empty() ? "structural mutation of the current best" :
                                            reflection.short_term;
        job.prompt = repair::build_long_reflection_prompt(reflection.long_term, latest);
        try {
            const repair::Completion note = provider_.complete(job);
            ledger_.add(generation_, "reflect", note.tokens_in, note.tokens_out);
            if (!note.texts.empty()) {
                if (!reflection.long_term.empty())
                    reflection.long_term += "\n";
                reflection.long_term += note.texts.front();
                if (static_cast<long>(reflection.long_term.size()) > config_.reflection_cap)
                    reflection.long_term.erase(
                        0, reflection.long_term.size() -
                               static_cast<std::size_t>(config_.reflection_cap));
            }
        } catch (const ProviderFailureError&) {
            ledger_.provider_failures += 1;
        }

        long spent = 0;
        try {
            HeuristicCode candidate = run_iv(icode, repair::RepairContext::LongTermReflection,
                                             reflection.long_term, spent);
            Individual offspring = make_individual(std::move(candidate));
            offspring.tokens_spent = spent;
            insert_with_fitness(next, std::move(offspring));
        } catch (const ProviderFailureError&) {
            ledger_.provider_failures += 1;
        }
    }
    survive_truncation(next);
    return next;
}

Population Engine::eohs_i_generation(const Population& pop) {
    Population next = pop;
    for (int slot = 0; slot < config_.pop_size; ++slot) {
        const auto a_idx = tournament_index(next, rng_, true);
        if (!a_idx)
            break;
        const HeuristicCode parent_a = next.members[*a_idx].code;
        HeuristicCode vi_product;
        if (rng_.next_coin()) {
            const auto b_idx = tournament_index(next, rng_, true);
            const HeuristicCode parent_b = next.members[*b_idx].code;
            vi_product = astops::apply_vi(parent_a, parent_b, rng_);
        } else {
            vi_product = astops::apply_vi(parent_a, rng_);
        }
        insert_with_fitness(next, make_individual(vi_product));

        HeuristicCode current = vi_product;
        for (int k = 0; k < config_.ii_repetitions; ++k) {
            current = ii_step(current, k);
            insert_with_fitness(next, make_individual(current));
        }
        if (current.is_icode()) {
            long spent = 0;
            try {
                HeuristicCode candidate =
                    run_iv(current, repair::RepairContext::Plain, "", spent);
                Individual offspring = make_individual(std::move(candidate));
                offspring.tokens_spent = spent;
                insert_with_fitness(next, std::move(offspring));
            } catch (const ProviderFailureError&) {
            }
        }
    }
    survive_complementary(next);
    return next;
}

Population Engine::baseline_semantic_generation(const Population& pop) {
    Population next = pop;
    for (int slot = 0; slot < config_.pop_size; ++slot) {
        const auto a_idx = tournament_index(next, rng_, true);
        if (!a_idx)
            break;
        const auto b_idx = tournament_index(next, rng_, true);
        const HeuristicCode parent_a = next.members[*a_idx].code;
        const HeuristicCode parent_b = next.members[*b_idx].code;

        repair::BaselineRequest request;
        request.parent_a = parent_a;
        request.parent_b = parent_b;
        request.feature_schema = suite_.schema();

        repair::PromptJob job;
        job.kind = repair::PromptJob::Kind::Baseline;
        job.prompt = repair::build_baseline_prompt(request);
        job.parent_a = &parent_a;
        job.parent_b = &parent_b;
        job.schema = &request.feature_schema;
        try {
            const repair::Completion completion = provider_.complete(job);
            ledger_.add(generation_, "baseline", completion.tokens_in, completion.tokens_out);
            if (completion.texts.empty())
                continue;
            std::string candidate = repair::extract_candidate(completion.texts.front());
            if (candidate.empty() || dsl::contains_hole_token(candidate))
                continue;
            HeuristicCode code = make_heuristic_code(std::move(candidate), dsl::Origin::Llm);
            code.lineage.push_back({"baseline", {parent_a.fingerprint, parent_b.fingerprint}});
            Individual offspring = make_individual(std::move(code));
            offspring.tokens_spent = completion.tokens_in + completion.tokens_out;
            insert_with_fitness(next, std::move(offspring));
        } catch (const ProviderFailureError&) {
            ledger_.provider_failures += 1;
        }
    }
    survive_truncation(next);
    return next;
}

bool Engine::budget_exhausted(int headroom) const {
    return ledger_.heuristics_generated + headroom > config_.budget;
}

void Engine::record_generation(const Population& pop) {
    double best = std::numeric_limits<double>::infinity();
    for (const Individual& m : pop.members)
        if (m.fitness)
            best = std::min(best, *m.fitness);
    best_series_.push_back(best);

    json line;
    line["gen"] = generation_;
    line["best_fitness"] = best;
    json members = json::array();
    for (const Individual& m : pop.members) {
        json entry;
        entry["fingerprint"] = m.code.fingerprint;
        entry["valid"] = m.code.is_valid();
        entry["fitness"] = m.fitness ? *m.fitness : 0.0;
        entry["tokens_spent"] = m.tokens_spent;
        json lineage = json::array();
        for (const LineageEvent& event : m.code.lineage)
            lineage.push_back(json{{"op", event.op}, {"parents", event.parent_fingerprints}});
        entry["lineage"] = std::move(lineage);
        members.push_back(std::move(entry));
    }
    line["population"] = std::move(members);
    line["ledger_snapshot"] = json{{"total_in", ledger_.total_in},
                          {"total_out", ledger_.total_out},
                          {"ast_in", ledger_.ast_in},
                          {"ast_out", ledger_.ast_out},
                          {"baseline_in", ledger_.baseline_in},
                          {"baseline_out", ledger_.baseline_out},
                          {"reflect_in", ledger_.reflect_in},
                          {"reflect_out", ledger_.reflect_out},
                          {"heuristics_generated", ledger_.heuristics_generated},
                          {"provider_failures", ledger_.provider_failures}};
    jsonl_lines_.push_back(line.dump());
}

RunResult Engine::run() {
    const auto start = std::chrono::steady_clock::now();
    Population pop = seed_population();
    record_generation(pop);

    switch (config_.framework) {
    case Framework::EohI:
        for (int g = 1; g <= config_.iterations; ++g) {
            generation_ = g;
            pop = eoh_i_generation(pop);
            record_generation(pop);
        }
        break;
    case Framework::EohBaseline:
        for (int g = 1; g <= config_.iterations; ++g) {
            generation_ = g;
            pop = baseline_semantic_generation(pop);
            record_generation(pop);
        }
        break;
    case Framework::EohSI:
        for (int g = 1; g <= config_.iterations; ++g) {
            generation_ = g;
            pop = eohs_i_generation(pop);
            record_generation(pop);
        }
        break;
    case Framework::ReevoI: {
        ReflectionState reflection;
        int g = 1;
        while (!budget_exhausted(3) && g <= config_.budget) {
            generation_ = g;
            pop = reevo_i_generation(pop, reflection);
            record_generation(pop);
            ++g;
        }
        break;
    }
    }

    RunResult result;
    result.config = config_;
    result.suite_name = suite_.name;
    result.final_population = pop.members;
    result.ledger = ledger_;
    result.jsonl_lines = jsonl_lines_;
    result.archive = archive_;
    result.best_series = best_series_;

    // best usable heuristic: lowest fitness among valid individuals
    const Individual* best = nullptr;
    for (const Individual& m : archive_) {
        if (!m.code.is_valid() || !m.fitness)
            continue;
        if (!best || *m.fitness < *best->fitness)
            best = &m;
    }
    if (!best && best_ever_)
        best = &*best_ever_;
    if (best)
        result.best = *best;

    if (config_.framework == Framework::EohSI) {
        std::vector<std::size_t> candidate_idx;
        std::vector<const problems::EvalReport*> reports;
        for (std::size_t i = 0; i < pop.members.size(); ++i) {
            const Individual& m = pop.members[i];
            if (m.code.is_valid() && m.eval_report) {
                candidate_idx.push_back(i);
                reports.push_back(&*m.eval_report);
            }
        }
        std::vector<std::size_t> chosen =
            greedy_complementary_selection(reports, static_cast<std::size_t>(config_.set_size));
        std::vector<const problems::EvalReport*> chosen_reports;
        for (std::size_t pick : chosen) {
            result.selected_set.push_back(pop.members[candidate_idx[pick]]);
            chosen_reports.push_back(reports[pick]);
        }
        result.set_objective = complementary_objective(chosen_reports);
    }

    const auto end = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(end - start).count();
    return result;
}

RunResult run(const RunConfig& config, repair::Provider& provider,
              const problems::ProblemSuite& suite) {
    Engine engine(config, provider, suite);
    return engine.run();
}

std::string result_manifest_json(const RunResult& result, const std::string& timestamp_utc) {
    json doc;
    doc["framework"] = framework_name(result.config.framework);
    doc["problem"] = problems::problem_name(result.config.problem);
    doc["pop_size"] = result.config.pop_size;
    doc["iterations"] = result.config.iterations;
    doc["ii_repetitions"] = result.config.ii_repetitions;
    doc["budget"] = result.config.budget;
    doc["set_size"] = result.config.set_size;
    doc["seed"] = result.config.seed.value;
    doc["suite_name"] = result.suite_name;
    doc["best"] = json{{"fingerprint", result.best.code.fingerprint},
                       {"fitness", result.best.fitness ? *result.best.fitness : 0.0},
                       {"valid", result.best.code.is_valid()},
                       {"source", result.best.code.source.text}};
    if (!result.selected_set.empty()) {
        json set = json::array();
        for (const Individual& m : result.selected_set)
            set.push_back(json{{"fingerprint", m.code.fingerprint},
                               {"fitness", m.fitness ? *m.fitness : 0.0},
                               {"source", m.code.source.text}});
        doc["set"] = std::move(set);
        doc["set_objective"] = result.set_objective;
    }
    doc["tokens"] = json{{"total_in", result.ledger.total_in},
                         {"total_out", result.ledger.total_out},
                         {"total", result.ledger.total_in + result.ledger.total_out},
                         {"ast_in", result.ledger.ast_in},
                         {"ast_out", result.ledger.ast_out},
                         {"baseline_in", result.ledger.baseline_in},
                         {"baseline_out", result.ledger.baseline_out},
                         {"reflect_in", result.ledger.reflect_in},
                         {"reflect_out", result.ledger.reflect_out},
                         {"heuristics_generated", result.ledger.heuristics_generated},
                         {"provider_failures", result.ledger.provider_failures}};
    doc["best_series"] = result.best_series;
    doc["wall_seconds"] = result.wall_seconds;
    doc["timestamp_utc"] = timestamp_utc;
    return doc.dump(2) + "\n";
}

void write_run_files(const RunResult& result, const std::string& out_dir,
                     const std::string& run_name) {
    const std::string base = out_dir.empty() ? run_name : out_dir + "/" + run_name;
    {
        std::ofstream log(base + ".run.jsonl", std::ios::binary);
        if (!log)
            throw std::runtime_error("cannot write run log: " + base + ".run.jsonl");
        for (const std::string& line : result.jsonl_lines)
            log << line << "\n";
    }
    {
        char stamp[32] = "1970-01-01T00:00:00Z";
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        std::ofstream manifest(base + ".manifest.json", std::ios::binary);
        if (!manifest)
            throw std::runtime_error("cannot write manifest: " + base + ".manifest.json");
        manifest << result_manifest_json(result, stamp);
    }
}

} // namespace ahd::evolve
