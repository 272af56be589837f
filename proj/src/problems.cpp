// SPDX-License-Identifier: Apache-2.0
#include "ahd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "ahd/dsl/validate.hpp"

namespace ahd::problems {

using nlohmann::json;

const char* problem_name(Problem p) { return p == Problem::Tsp ? "tsp" : "obp"; }

Problem problem_from_name(const std::string& name) {
    if (name == "tsp")
        return Problem::Tsp;
    if (name == "obp")
        return Problem::Obp;
    throw ConfigError("unknown problem '" + name + "'");
}

const FeatureSchema& tsp_schema() {
    static const FeatureSchema schema{
        interp::SchemaId::TspNext,
        {"d_cur", "d_start", "d_mean_unvis", "d_min_unvis", "d_max_unvis", "frac_remaining"},
        6};
    return schema;
}

const FeatureSchema& obp_schema() {
    static const FeatureSchema schema{
        interp::SchemaId::ObpBin,
        {"item_size", "remaining_cap", "residual_after", "bin_utilization"},
        4};
    return schema;
}

const FeatureSchema& schema_for(Problem p) {
    return p == Problem::Tsp ? tsp_schema() : obp_schema();
}

double euclidean(const std::pair<double, double>& a, const std::pair<double, double>& b) {
    const double dx = a.first - b.first;
    const double dy = a.second - b.second;
    return std::sqrt(dx * dx + dy * dy);
}

// --- generators ---

TspInstance make_tsp_instance(int n_cities, RngSeed inst_seed) {
    TspInstance inst;
    inst.seed = inst_seed;
    inst.n_cities = n_cities;
    Rng rng(inst_seed);
    inst.coords.reserve(static_cast<std::size_t>(n_cities));
    for (int i = 0; i < n_cities; ++i) {
        const double x = rng.next_double();
        const double y = rng.next_double();
        inst.coords.emplace_back(x, y);
    }
    return inst;
}

namespace {
constexpr double kWeibullShape = 3.0;
constexpr double kWeibullScale = 45.0;
} // namespace

ObpInstance make_obp_instance(int n_items, int capacity, RngSeed inst_seed) {
    ObpInstance inst;
    inst.seed = inst_seed;
    inst.capacity = capacity;
    Rng rng(inst_seed);
    inst.item_sizes.reserve(static_cast<std::size_t>(n_items));
    for (int i = 0; i < n_items; ++i) {
        const double draw = rng.next_weibull(kWeibullShape, kWeibullScale);
        int size = static_cast<int>(std::ceil(draw));
        size = std::clamp(size, 1, capacity);
        inst.item_sizes.push_back(size);
    }
    return inst;
}

std::vector<TspInstance> gen_tsp_training(int count, RngSeed seed) {
    std::vector<TspInstance> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const RngSeed inst_seed = derive_seed(seed, "tsp-train", static_cast<std::uint64_t>(i));
        Rng pick(inst_seed);
        const int n = 10 + static_cast<int>(pick.next_below(191)); // {10..200}
        out.push_back(make_tsp_instance(n, RngSeed{pick.next_u64()}));
    }
    return out;
}

std::vector<TspInstance> gen_tsp_test(TspTestSetting setting, int count, RngSeed seed) {
    int n = 50;
    const char* label = "tsp-test-c50";
    switch (setting) {
    case TspTestSetting::C50: n = 50; label = "tsp-test-c50"; break;
    case TspTestSetting::C100: n = 100; label = "tsp-test-c100"; break;
    case TspTestSetting::C200: n = 200; label = "tsp-test-c200"; break;
    }
    std::vector<TspInstance> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(make_tsp_instance(n, derive_seed(seed, label, static_cast<std::uint64_t>(i))));
    return out;
}

std::vector<ObpInstance> gen_obp_training(int count, RngSeed seed) {
    std::vector<ObpInstance> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const RngSeed inst_seed = derive_seed(seed, "obp-train", static_cast<std::uint64_t>(i));
        Rng pick(inst_seed);
        const int n = 200 + static_cast<int>(pick.next_below(1801)); // {200..2000}
        out.push_back(make_obp_instance(n, 100, RngSeed{pick.next_u64()}));
    }
    return out;
}

ObpInstance gen_obp_test(ObpTestSetting setting, RngSeed seed) {
    int n = 1000;
    int capacity = 200;
    const char* label = "obp-test-n1k_c200";
    switch (setting) {
    case ObpTestSetting::N1kC200: n = 1000; capacity = 200; label = "obp-test-n1k_c200"; break;
    case ObpTestSetting::N5kC200: n = 5000; capacity = 200; label = "obp-test-n5k_c200"; break;
    case ObpTestSetting::N10kC200: n = 10000; capacity = 200; label = "obp-test-n10k_c200"; break;
    case ObpTestSetting::N1kC500: n = 1000; capacity = 500; label = "obp-test-n1k_c500"; break;
    case ObpTestSetting::N5kC500: n = 5000; capacity = 500; label = "obp-test-n5k_c500"; break;
    case ObpTestSetting::N10kC500: n = 10000; capacity = 500; label = "obp-test-n10k_c500"; break;
    }
    return make_obp_instance(n, capacity, derive_seed(seed, label, 0));
}

// --- objective evaluation ---

double tsp_penalty(const TspInstance& inst) {
    return static_cast<double>(inst.n_cities) * std::sqrt(2.0);
}

double obp_penalty(const ObpInstance& inst) {
    const long lb = lower_bound_obp(inst);
    const long n = static_cast<long>(inst.item_sizes.size());
    return static_cast<double>(n - lb) / static_cast<double>(lb);
}

RunStats run_tsp_detail(const dsl::Ast& heuristic, const TspInstance& inst,
                        const interp::ExecLimits& limits) {
    const int n = inst.n_cities;
    RunStats stats;
    stats.tour.push_back(0);
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    visited[0] = true;
    int current = 0;
    int remaining = n - 1;
    double length = 0.0;
    interp::FeatureVector features;
    features.schema_id = interp::SchemaId::TspNext;
    features.values.resize(6);

    while (remaining > 0) {
        double best_score = std::numeric_limits<double>::infinity();
        int best_city = -1;
        for (int j = 0; j < n; ++j) {
            if (visited[static_cast<std::size_t>(j)])
                continue;
            // distances from candidate j to the still-unvisited rest
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = 0.0;
            int rest = 0;
            for (int u = 0; u < n; ++u) {
                if (u == j || visited[static_cast<std::size_t>(u)])
                    continue;
                const double d = euclidean(inst.coords[static_cast<std::size_t>(j)],
                                           inst.coords[static_cast<std::size_t>(u)]);
                sum += d;
                lo = std::min(lo, d);
                hi = std::max(hi, d);
                ++rest;
            }
            features.values[0] = euclidean(inst.coords[static_cast<std::size_t>(current)],
                                           inst.coords[static_cast<std::size_t>(j)]);
            features.values[1] = euclidean(inst.coords[static_cast<std::size_t>(j)], inst.coords[0]);
            features.values[2] = rest > 0 ? sum / rest : 0.0;
            features.values[3] = rest > 0 ? lo : 0.0;
            features.values[4] = rest > 0 ? hi : 0.0;
            features.values[5] = static_cast<double>(rest) / static_cast<double>(n);

            const interp::ExecOutcome outcome = interp::eval_heuristic(heuristic, features, limits);
            if (!outcome.ok) {
                ++stats.runtime_errors;
                continue; // candidate scores +inf
            }
            if (outcome.score < best_score) {
                best_score = outcome.score;
                best_city = j;
            }
        }
        if (best_city < 0) {
            stats.objective = tsp_penalty(inst);
            return stats;
        }
        length += euclidean(inst.coords[static_cast<std::size_t>(current)],
                            inst.coords[static_cast<std::size_t>(best_city)]);
        visited[static_cast<std::size_t>(best_city)] = true;
        stats.tour.push_back(best_city);
        current = best_city;
        --remaining;
    }
    length += euclidean(inst.coords[static_cast<std::size_t>(current)], inst.coords[0]);
    stats.objective = length;
    return stats;
}

double run_tsp(const dsl::Ast& heuristic, const TspInstance& inst,
               const interp::ExecLimits& limits) {
    return run_tsp_detail(heuristic, inst, limits).objective;
}

RunStats run_obp_detail(const dsl::Ast& heuristic, const ObpInstance& inst,
                        const interp::ExecLimits& limits) {
    RunStats stats;
    const double capacity = static_cast<double>(inst.capacity);
    std::vector<int> loads;
    interp::FeatureVector features;
    features.schema_id = interp::SchemaId::ObpBin;
    features.values.resize(4);

    for (int size : inst.item_sizes) {
        double best_score = -std::numeric_limits<double>::infinity();
        int best_bin = -1;
        for (std::size_t b = 0; b < loads.size(); ++b) {
            const int room = inst.capacity - loads[b];
            if (room < size)
                continue;
            features.values[0] = static_cast<double>(size);
            features.values[1] = static_cast<double>(room);
            features.values[2] = static_cast<double>(room - size);
            features.values[3] = static_cast<double>(loads[b]) / capacity;
            const interp::ExecOutcome outcome = interp::eval_heuristic(heuristic, features, limits);
            if (!outcome.ok) {
                ++stats.runtime_errors;
                continue; // bin scores -inf
            }
            if (outcome.score > best_score) {
                best_score = outcome.score;
                best_bin = static_cast<int>(b);
            }
        }
        if (best_bin < 0)
            loads.push_back(size);
        else
            loads[static_cast<std::size_t>(best_bin)] += size;
    }
    const long lb = lower_bound_obp(inst);
    stats.objective =
        (static_cast<double>(loads.size()) - static_cast<double>(lb)) / static_cast<double>(lb);
    stats.bin_loads = std::move(loads);
    return stats;
}

double run_obp(const dsl::Ast& heuristic, const ObpInstance& inst,
               const interp::ExecLimits& limits) {
    return run_obp_detail(heuristic, inst, limits).objective;
}

long lower_bound_obp(const ObpInstance& inst) {
    long total = std::accumulate(inst.item_sizes.begin(), inst.item_sizes.end(), 0L);
    return (total + inst.capacity - 1) / inst.capacity;
}

double brute_force_tsp(const TspInstance& inst) {
    const int n = inst.n_cities;
    if (n > 10)
        throw TooLargeError("brute_force_tsp handles at most 10 cities");
    std::vector<int> order;
    for (int i = 1; i < n; ++i)
        order.push_back(i);
    double best = std::numeric_limits<double>::infinity();
    do {
        double length = euclidean(inst.coords[0], inst.coords[static_cast<std::size_t>(order[0])]);
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            length += euclidean(inst.coords[static_cast<std::size_t>(order[i])],
                                inst.coords[static_cast<std::size_t>(order[i + 1])]);
        length += euclidean(inst.coords[static_cast<std::size_t>(order.back())], inst.coords[0]);
        best = std::min(best, length);
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

namespace {

void pack_search(const std::vector<int>& items, std::size_t idx, std::vector<int>& loads,
                 int capacity, int& best) {
    if (static_cast<int>(loads.size()) >= best)
        return; // cannot improve
    if (idx == items.size()) {
        best = static_cast<int>(loads.size());
        return;
    }
    const int size = items[idx];
    // skip bins with identical load (symmetric placements)
    std::vector<int> tried;
    for (std::size_t b = 0; b < loads.size(); ++b) {
        if (capacity - loads[b] < size)
            continue;
        if (std::find(tried.begin(), tried.end(), loads[b]) != tried.end())
            continue;
        tried.push_back(loads[b]);
        loads[b] += size;
        pack_search(items, idx + 1, loads, capacity, best);
        loads[b] -= size;
    }
    loads.push_back(size);
    pack_search(items, idx + 1, loads, capacity, best);
    loads.pop_back();
}

} // namespace

int brute_force_obp(const ObpInstance& inst) {
    if (inst.item_sizes.size() > 10)
        throw TooLargeError("brute_force_obp handles at most 10 items");
    int best = static_cast<int>(inst.item_sizes.size());
    if (best == 0)
        return 0;
    std::vector<int> loads;
    pack_search(inst.item_sizes, 0, loads, inst.capacity, best);
    return best;
}

// --- suites ---

EvalReport ProblemSuite::evaluate(const dsl::Ast& heuristic, const interp::ExecLimits& limits) const {
    const dsl::ValidityReport report = dsl::validate(heuristic);
    if (!report.is_valid)
        throw InvalidHeuristicError("suite evaluation requires valid code: " + summarize(report));
    EvalReport out;
    double total = 0.0;
    int id = 0;
    if (problem == Problem::Tsp) {
        for (const TspInstance& inst : tsp) {
            const RunStats stats = run_tsp_detail(heuristic, inst, limits);
            out.per_instance.push_back({id++, stats.objective, stats.runtime_errors});
            total += stats.objective;
        }
    } else {
        for (const ObpInstance& inst : obp) {
            const RunStats stats = run_obp_detail(heuristic, inst, limits);
            out.per_instance.push_back({id++, stats.objective, stats.runtime_errors});
            total += stats.objective;
        }
    }
    out.mean_objective = out.per_instance.empty() ? 0.0 : total / out.per_instance.size();
    return out;
}

double ProblemSuite::penalty_mean() const {
    double total = 0.0;
    if (problem == Problem::Tsp) {
        for (const TspInstance& inst : tsp)
            total += tsp_penalty(inst);
        return tsp.empty() ? 0.0 : total / tsp.size();
    }
    for (const ObpInstance& inst : obp)
        total += obp_penalty(inst);
    return obp.empty() ? 0.0 : total / obp.size();
}

ProblemSuite make_tsp_suite(std::string name, std::vector<TspInstance> instances, RngSeed seed) {
    ProblemSuite suite;
    suite.name = std::move(name);
    suite.problem = Problem::Tsp;
    suite.seed = seed;
    suite.tsp = std::move(instances);
    return suite;
}

ProblemSuite make_obp_suite(std::string name, std::vector<ObpInstance> instances, RngSeed seed) {
    ProblemSuite suite;
    suite.name = std::move(name);
    suite.problem = Problem::Obp;
    suite.seed = seed;
    suite.obp = std::move(instances);
    return suite;
}

std::string suite_to_json(const ProblemSuite& suite) {
    json doc;
    doc["suite_name"] = suite.name;
    doc["problem"] = problem_name(suite.problem);
    doc["seed"] = suite.seed.value;
    json instances = json::array();
    int id = 0;
    if (suite.problem == Problem::Tsp) {
        for (const TspInstance& inst : suite.tsp) {
            json j;
            j["id"] = id++;
            j["n_cities"] = inst.n_cities;
            j["seed"] = inst.seed.value;
            json coords = json::array();
            for (const auto& [x, y] : inst.coords)
                coords.push_back(json::array({x, y}));
            j["coords"] = std::move(coords);
            instances.push_back(std::move(j));
        }
    } else {
        for (const ObpInstance& inst : suite.obp) {
            json j;
            j["id"] = id++;
            j["capacity"] = inst.capacity;
            j["seed"] = inst.seed.value;
            j["item_sizes"] = inst.item_sizes;
            instances.push_back(std::move(j));
        }
    }
    doc["instances"] = std::move(instances);
    return doc.dump(2) + "\n";
}

ProblemSuite suite_from_json(const std::string& text) {
    json doc = json::parse(text);
    ProblemSuite suite;
    suite.name = doc.at("suite_name").get<std::string>();
    suite.problem = problem_from_name(doc.at("problem").get<std::string>());
    suite.seed = RngSeed{doc.at("seed").get<std::uint64_t>()};
    for (const json& j : doc.at("instances")) {
        if (suite.problem == Problem::Tsp) {
            TspInstance inst;
            inst.n_cities = j.at("n_cities").get<int>();
            inst.seed = RngSeed{j.at("seed").get<std::uint64_t>()};
            for (const json& c : j.at("coords"))
                inst.coords.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
            suite.tsp.push_back(std::move(inst));
        } else {
            ObpInstance inst;
            inst.capacity = j.at("capacity").get<int>();
            inst.seed = RngSeed{j.at("seed").get<std::uint64_t>()};
            inst.item_sizes = j.at("item_sizes").get<std::vector<int>>();
            suite.obp.push_back(std::move(inst));
        }
    }
    return suite;
}

void write_suite(const ProblemSuite& suite, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << suite_to_json(suite);
}

ProblemSuite read_suite(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open suite file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return suite_from_json(text);
}

} // namespace ahd::problems
