// SPDX-License-Identifier: Apache-2.0
#include "ahd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ahd/evolve.hpp"
#include "ahd/fingerprint.hpp"
#include "ahd/heuristic_code.hpp"
#include "ahd/problems.hpp"
#include "ahd/repair.hpp"

namespace ahd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitInvalidHeuristic = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

problems::ProblemSuite build_suite(problems::Problem problem, const std::string& setting,
                                   int count, RngSeed seed) {
    using problems::Problem;
    if (problem == Problem::Tsp) {
        if (setting == "train")
            return problems::make_tsp_suite("tsp-train",
                                            problems::gen_tsp_training(count, seed), seed);
        problems::TspTestSetting ts;
        if (setting == "c50") ts = problems::TspTestSetting::C50;
        else if (setting == "c100") ts = problems::TspTestSetting::C100;
        else if (setting == "c200") ts = problems::TspTestSetting::C200;
        else throw ConfigError("unknown tsp setting '" + setting + "'");
        return problems::make_tsp_suite("tsp-" + setting,
                                        problems::gen_tsp_test(ts, count, seed), seed);
    }
    if (setting == "train")
        return problems::make_obp_suite("obp-train", problems::gen_obp_training(count, seed),
                                        seed);
    problems::ObpTestSetting os;
    if (setting == "n1k_c200") os = problems::ObpTestSetting::N1kC200;
    else if (setting == "n5k_c200") os = problems::ObpTestSetting::N5kC200;
    else if (setting == "n10k_c200") os = problems::ObpTestSetting::N10kC200;
    else if (setting == "n1k_c500") os = problems::ObpTestSetting::N1kC500;
    else if (setting == "n5k_c500") os = problems::ObpTestSetting::N5kC500;
    else if (setting == "n10k_c500") os = problems::ObpTestSetting::N10kC500;
    else throw ConfigError("unknown obp setting '" + setting + "'");
    return problems::make_obp_suite("obp-" + setting, {problems::gen_obp_test(os, seed)}, seed);
}

// Small training suite sized for interactive runs; full-scale suites come
// from gen-instances + --suite.
problems::ProblemSuite desk_suite(problems::Problem problem, RngSeed seed) {
    if (problem == problems::Problem::Tsp) {
        std::vector<problems::TspInstance> instances;
        for (int i = 0; i < 8; ++i) {
            const RngSeed s = derive_seed(seed, "desk-tsp", static_cast<std::uint64_t>(i));
            Rng pick(s);
            const int n = 10 + static_cast<int>(pick.next_below(11)); // {10..20}
            instances.push_back(problems::make_tsp_instance(n, RngSeed{pick.next_u64()}));
        }
        return problems::make_tsp_suite("tsp-desk", std::move(instances), seed);
    }
    std::vector<problems::ObpInstance> instances;
    for (int i = 0; i < 8; ++i) {
        const RngSeed s = derive_seed(seed, "desk-obp", static_cast<std::uint64_t>(i));
        Rng pick(s);
        const int n = 100 + static_cast<int>(pick.next_below(101)); // {100..200}
        instances.push_back(problems::make_obp_instance(n, 100, RngSeed{pick.next_u64()}));
    }
    return problems::make_obp_suite("obp-desk", std::move(instances), seed);
}

std::unique_ptr<repair::Provider> build_provider(const std::string& provider,
                                                 const std::string& cassette,
                                                 const std::string& cassette_mode) {
    std::unique_ptr<repair::Provider> base;
    if (provider == "mock")
        base = repair::make_mock_provider();
    else if (provider == "remote")
        base = repair::make_remote_provider(repair::remote_config_from_env());
    else
        throw ConfigError("unknown provider '" + provider + "'");
    if (cassette.empty())
        return base;
    if (cassette_mode == "record")
        return repair::make_cassette_provider(std::move(base), cassette,
                                              repair::CassetteMode::Record);
    if (cassette_mode == "replay")
        return repair::make_cassette_provider(nullptr, cassette, repair::CassetteMode::Replay);
    throw ConfigError("cassette mode must be record or replay");
}

int cmd_gen_instances(const std::string& problem_name, const std::string& setting, int count,
                      std::uint64_t seed, const std::string& out_path) {
    const problems::Problem problem = problems::problem_from_name(problem_name);
    const problems::ProblemSuite suite = build_suite(problem, setting, count, RngSeed{seed});
    const std::string text = problems::suite_to_json(suite);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return kExitIo;
    }
    out << text;
    std::cout << suite.name << " instances=" << suite.size() << " fingerprint "
              << fingerprint_of(text) << " -> " << out_path << "\n";
    return kExitOk;
}

int cmd_evolve(const std::string& framework_name, const std::string& problem_name, int pop,
               int iters, int ii_reps, int budget, int set_size, std::uint64_t seed,
               const std::string& provider_name, const std::string& suite_path,
               const std::string& out_dir, std::string run_name, const std::string& cassette,
               const std::string& cassette_mode) {
    const evolve::Framework framework = evolve::framework_from_name(framework_name);
    const problems::Problem problem = problems::problem_from_name(problem_name);

    evolve::RunConfig config = evolve::default_config(framework, problem);
    config.seed = RngSeed{seed};
    if (pop >= 0)
        config.pop_size = pop;
    if (iters >= 0)
        config.iterations = iters;
    if (ii_reps >= 0)
        config.ii_repetitions = ii_reps;
    if (budget >= 0)
        config.budget = budget;
    if (set_size >= 0)
        config.set_size = set_size;

    problems::ProblemSuite suite = suite_path.empty()
                                       ? desk_suite(problem, derive_seed(config.seed, "suite"))
                                       : problems::read_suite(suite_path);
    if (suite.problem != problem)
        throw ConfigError("suite file holds " +
                          std::string(problems::problem_name(suite.problem)) +
                          " instances, run wants " + problems::problem_name(problem));

    std::unique_ptr<repair::Provider> provider =
        build_provider(provider_name, cassette, cassette_mode);

    evolve::RunResult result = evolve::run(config, *provider, suite);

    if (!out_dir.empty())
        fs::create_directories(out_dir);
    if (run_name.empty()) {
        std::ostringstream name;
        name << framework_name << "_" << problems::problem_name(problem) << "_seed"
             << config.seed.value;
        run_name = name.str();
    }
    evolve::write_run_files(result, out_dir, run_name);

    std::cout << "run " << run_name << " finished: best fitness "
              << (result.best.fitness ? *result.best.fitness : 0.0) << ", tokens "
              << (result.ledger.total_in + result.ledger.total_out) << ", heuristics "
              << result.ledger.heuristics_generated << "\n";
    if (!result.selected_set.empty())
        std::cout << "complementary set of " << result.selected_set.size() << ", set objective "
                  << result.set_objective << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& heuristic_path, const std::string& suite_path,
                 const std::string& out_path) {
    const std::string source = read_file(heuristic_path);
    const HeuristicCode code = make_heuristic_code(source, dsl::Origin::Seed);
    if (!code.is_valid()) {
        std::cerr << "heuristic is not valid: " << code.violations_summary() << "\n";
        return kExitInvalidHeuristic;
    }
    const problems::ProblemSuite suite = problems::read_suite(suite_path);
    const problems::EvalReport report = suite.evaluate(*code.ast, interp::ExecLimits{});

    json doc;
    doc["heuristic_fingerprint"] = code.fingerprint;
    doc["heuristic_source"] = code.source.text;
    doc["suite_name"] = suite.name;
    doc["mean_objective"] = report.mean_objective;
    json rows = json::array();
    for (const problems::InstanceObjective& row : report.per_instance)
        rows.push_back(json{{"instance_id", row.instance_id},
                            {"objective", row.objective},
                            {"runtime_errors", row.runtime_errors}});
    doc["per_instance"] = std::move(rows);

    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return kExitIo;
        }
        out << doc.dump(2) << "\n";
    }
    std::cout << "mean objective " << report.mean_objective << " over " << suite.size()
              << " instance(s)\n";
    return kExitOk;
}

struct ReportRow {
    std::string method;
    std::string problem;
    std::map<std::string, std::vector<double>> objectives; // suite -> per-run best
    std::vector<double> tokens;
};

int cmd_report(const std::string& dir, const std::string& out_base) {
    std::vector<fs::path> manifests;
    if (!fs::exists(dir)) {
        std::cerr << "no such directory: " << dir << "\n";
        return kExitIo;
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().string().ends_with(".manifest.json"))
            manifests.push_back(entry.path());
    std::sort(manifests.begin(), manifests.end());
    if (manifests.empty()) {
        std::cerr << "no manifests under " << dir << "\n";
        return kExitIo;
    }

    std::map<std::string, ReportRow> rows; // keyed by method|problem
    std::vector<std::string> suite_order;
    for (const fs::path& path : manifests) {
        json doc = json::parse(read_file(path.string()));
        const std::string method = doc.at("framework").get<std::string>();
        const std::string problem = doc.at("problem").get<std::string>();
        const std::string suite = doc.at("suite_name").get<std::string>();
        const double best = doc.at("best").at("fitness").get<double>();
        const double tokens = doc.at("tokens").at("total").get<double>();
        ReportRow& row = rows[method + "|" + problem];
        row.method = method;
        row.problem = problem;
        row.objectives[suite].push_back(best);
        row.tokens.push_back(tokens);
        if (std::find(suite_order.begin(), suite_order.end(), suite) == suite_order.end())
            suite_order.push_back(suite);
    }

    auto mean = [](const std::vector<double>& v) {
        double total = 0.0;
        for (double x : v)
            total += x;
        return v.empty() ? 0.0 : total / static_cast<double>(v.size());
    };

    // best (lowest mean) per suite column, rendered as a marker column in CSV
    std::map<std::string, double> column_best;
    for (const std::string& suite : suite_order) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& [key, row] : rows) {
            auto it = row.objectives.find(suite);
            if (it != row.objectives.end())
                lo = std::min(lo, mean(it->second));
        }
        column_best[suite] = lo;
    }

    std::ostringstream csv;
    csv << "method,problem";
    for (const std::string& suite : suite_order)
        csv << "," << suite;
    csv << ",tokens,best_in\n";
    std::ostringstream text;
    text << std::left << std::setw(14) << "method" << std::setw(9) << "problem";
    for (const std::string& suite : suite_order)
        text << std::setw(16) << suite;
    text << std::setw(12) << "tokens" << "\n";

    for (const auto& [key, row] : rows) {
        csv << row.method << "," << row.problem;
        text << std::left << std::setw(14) << row.method << std::setw(9) << row.problem;
        std::string best_in;
        for (const std::string& suite : suite_order) {
            auto it = row.objectives.find(suite);
            if (it == row.objectives.end()) {
                csv << ",";
                text << std::setw(16) << "-";
                continue;
            }
            const double value = mean(it->second);
            csv << "," << value;
            std::ostringstream cell;
            cell << std::setprecision(6) << value;
            if (value == column_best[suite]) {
                if (!best_in.empty())
                    best_in += ";";
                best_in += suite;
                cell << "*";
            }
            text << std::setw(16) << cell.str();
        }
        const double token_mean = mean(row.tokens);
        csv << "," << token_mean << "," << best_in << "\n";
        text << std::setw(12) << token_mean << "\n";
    }

    std::cout << text.str();
    if (!out_base.empty()) {
        std::ofstream csv_file(out_base + ".csv", std::ios::binary);
        std::ofstream txt_file(out_base + ".txt", std::ios::binary);
        if (!csv_file || !txt_file) {
            std::cerr << "cannot write report files at " << out_base << "\n";
            return kExitIo;
        }
        csv_file << csv.str();
        txt_file << text.str();
    }
    return kExitOk;
}

} // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"AST-destruction + repair heuristic evolution engine"};
    app.require_subcommand(1);

    // gen-instances
    auto* gen = app.add_subcommand("gen-instances", "generate benchmark instance suites");
    std::string gen_problem = "tsp", gen_setting = "train", gen_out = "suite.json";
    int gen_count = 0;
    std::uint64_t gen_seed = 1;
    gen->add_option("--problem", gen_problem, "tsp or obp");
    gen->add_option("--setting", gen_setting,
                    "train | c50 c100 c200 | n1k_c200 n5k_c200 n10k_c200 n1k_c500 n5k_c500 "
                    "n10k_c500");
    gen->add_option("--count", gen_count, "instance count (train/test suites)");
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--out", gen_out, "output file");

    // evolve
    auto* evo = app.add_subcommand("evolve", "run a heuristic evolution experiment");
    const char* provider_env = std::getenv("PROVIDER");
    std::string evo_framework = "eoh-i", evo_problem = "tsp";
    std::string evo_provider = provider_env ? provider_env : "mock";
    std::string evo_suite, evo_out = "runs", evo_name, evo_cassette, evo_cassette_mode = "record";
    int evo_pop = -1, evo_iters = -1, evo_ii = -1, evo_budget = -1, evo_set = -1;
    std::uint64_t evo_seed = 1;
    evo->add_option("--framework", evo_framework, "eoh-i | reevo-i | eohs-i | eoh-baseline");
    evo->add_option("--problem", evo_problem, "tsp or obp");
    evo->add_option("--pop", evo_pop, "population capacity");
    evo->add_option("--iters", evo_iters, "generations (eoh-i, eohs-i, eoh-baseline)");
    evo->add_option("--ii-reps", evo_ii, "II operator repetitions per offspring");
    evo->add_option("--budget", evo_budget, "heuristics budget (reevo-i)");
    evo->add_option("--set-size", evo_set, "output set size (eohs-i)");
    evo->add_option("--seed", evo_seed, "run seed");
    evo->add_option("--provider", evo_provider, "mock or remote");
    evo->add_option("--suite", evo_suite, "instance suite file (default: small desk suite)");
    evo->add_option("--out", evo_out, "output directory");
    evo->add_option("--run-name", evo_name, "file name stem for manifest and log");
    evo->add_option("--cassette", evo_cassette, "prompt/response cassette file");
    evo->add_option("--cassette-mode", evo_cassette_mode, "record or replay");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score a stored heuristic on a suite");
    std::string eval_heuristic, eval_suite, eval_out;
    ev->add_option("--heuristic", eval_heuristic, "heuristic source file")->required();
    ev->add_option("--suite", eval_suite, "instance suite file")->required();
    ev->add_option("--out", eval_out, "report file");

    // report
    auto* rep = app.add_subcommand("report", "aggregate run manifests into a results table");
    std::string rep_dir = "runs", rep_out;
    rep->add_option("--dir", rep_dir, "directory holding *.manifest.json files");
    rep->add_option("--out", rep_out, "output stem (.csv and .txt are appended)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            if (gen_count <= 0)
                gen_count = gen_setting == "train" ? 128 : 64;
            return cmd_gen_instances(gen_problem, gen_setting, gen_count, gen_seed, gen_out);
        }
        if (evo->parsed())
            return cmd_evolve(evo_framework, evo_problem, evo_pop, evo_iters, evo_ii, evo_budget,
                              evo_set, evo_seed, evo_provider, evo_suite, evo_out, evo_name,
                              evo_cassette, evo_cassette_mode);
        if (ev->parsed())
            return cmd_evaluate(eval_heuristic, eval_suite, eval_out);
        if (rep->parsed())
            return cmd_report(rep_dir, rep_out);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidHeuristicError& e) {
        std::cerr << "invalid heuristic: " << e.what() << "\n";
        return kExitInvalidHeuristic;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

} // namespace ahd::cli
