// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <unistd.h>

using std::string;

namespace {

struct CliResult {
    int exit_code = -1;
    string output;
};

string slurp(const string& path) {
    std::ifstream in(path, std::ios::binary);
    return string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

string work_dir() {
    static string dir = [] {
        string d = "/tmp/ahd_cli_test_" + std::to_string(::getpid());
        ::mkdir(d.c_str(), 0755);
        return d;
    }();
    return dir;
}

CliResult run_cli(const string& args) {
    const string out_file = work_dir() + "/last_output.txt";
    const string command = string(AHD_CLI_BIN) + " " + args + " > " + out_file + " 2>&1";
    const int raw = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.output = slurp(out_file);
    return result;
}

} // namespace

TEST_CASE("cli gen-instances: content and byte determinism") {
    const string file1 = work_dir() + "/obp_a.json";
    const string file2 = work_dir() + "/obp_b.json";
    CliResult first = run_cli("gen-instances --problem obp --setting n1k_c200 --seed 7 --out " +
                              file1);
    REQUIRE_MESSAGE(first.exit_code == 0, first.output);
    CliResult second = run_cli("gen-instances --problem obp --setting n1k_c200 --seed 7 --out " +
                               file2);
    REQUIRE(second.exit_code == 0);
    const string bytes1 = slurp(file1);
    CHECK(bytes1 == slurp(file2));
    CHECK(bytes1.find("\"capacity\": 200") != string::npos);
    CHECK(first.output.find("fingerprint") != string::npos);
    // 1000 items
    std::size_t count = 0, pos = 0;
    const string key = "\"item_sizes\"";
    pos = bytes1.find(key);
    REQUIRE(pos != string::npos);
    std::size_t open = bytes1.find('[', pos);
    std::size_t close = bytes1.find(']', open);
    for (std::size_t i = open; i < close; ++i)
        if (bytes1[i] == ',')
            ++count;
    CHECK(count == 999);
}

TEST_CASE("cli gen-instances: unknown setting is a usage error") {
    CliResult r = run_cli("gen-instances --problem obp --setting n9k_c999 --out /dev/null");
    CHECK(r.exit_code == 1);
}

TEST_CASE("cli evolve: desk run writes manifest and log, exit 0") {
    const string dir = work_dir() + "/run1";
    CliResult r = run_cli("evolve --framework eoh-i --problem tsp --pop 5 --iters 2 "
                          "--provider mock --seed 1 --out " +
                          dir + " --run-name smoke");
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    CHECK(slurp(dir + "/smoke.manifest.json").find("\"framework\": \"eoh-i\"") != string::npos);
    CHECK(!slurp(dir + "/smoke.run.jsonl").empty());
}

TEST_CASE("cli evolve: pop 0 is a config error") {
    CliResult r = run_cli("evolve --framework eoh-i --problem tsp --pop 0 --provider mock");
    CHECK(r.exit_code == 1);
}

TEST_CASE("cli evolve: eohs-i emits a set of the requested size") {
    const string dir = work_dir() + "/run_sets";
    CliResult r = run_cli("evolve --framework eohs-i --problem tsp --pop 6 --iters 1 "
                          "--set-size 3 --provider mock --seed 2 --out " +
                          dir + " --run-name sets");
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const string manifest = slurp(dir + "/sets.manifest.json");
    CHECK(manifest.find("\"set\"") != string::npos);
    CHECK(manifest.find("\"set_objective\"") != string::npos);
}

TEST_CASE("cli evaluate: best-fit seed packs the forced micro-suite perfectly") {
    // build a one-instance suite by hand
    const string suite_path = work_dir() + "/micro.json";
    std::ofstream suite(suite_path);
    suite << R"({"instances":[{"capacity":100,"id":0,"item_sizes":[50,50,50],"seed":0}],)"
          << R"("problem":"obp","seed":0,"suite_name":"micro"})";
    suite.close();
    const string heuristic_path = work_dir() + "/best_fit.dsl";
    std::ofstream h(heuristic_path);
    h << "fn score(item_size, remaining_cap, residual_after, bin_utilization) "
         "{ return -residual_after }\n";
    h.close();
    const string report_path = work_dir() + "/eval.json";
    CliResult r = run_cli("evaluate --heuristic " + heuristic_path + " --suite " + suite_path +
                          " --out " + report_path);
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    CHECK(slurp(report_path).find("\"mean_objective\": 0.0") != string::npos);
}

TEST_CASE("cli evaluate: invalid heuristic exits 3 with violations printed") {
    const string heuristic_path = work_dir() + "/broken.dsl";
    std::ofstream h(heuristic_path);
    h << "fn score(a) { return b }\n";
    h.close();
    const string suite_path = work_dir() + "/micro.json";
    CliResult r = run_cli("evaluate --heuristic " + heuristic_path + " --suite " + suite_path);
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("UnboundIdentifier") != string::npos);
}

TEST_CASE("cli report: aggregates repetitions into per-method means") {
    const string dir = work_dir() + "/report_runs";
    for (int seed = 1; seed <= 3; ++seed) {
        CliResult r = run_cli("evolve --framework eoh-i --problem tsp --pop 4 --iters 1 "
                              "--provider mock --seed " +
                              std::to_string(seed) + " --out " + dir + " --run-name eoh_seed" +
                              std::to_string(seed));
        REQUIRE(r.exit_code == 0);
        CliResult b = run_cli("evolve --framework eoh-baseline --problem tsp --pop 4 --iters 1 "
                              "--provider mock --seed " +
                              std::to_string(seed) + " --out " + dir + " --run-name base_seed" +
                              std::to_string(seed));
        REQUIRE(b.exit_code == 0);
    }
    const string out_base = work_dir() + "/table";
    CliResult rep = run_cli("report --dir " + dir + " --out " + out_base);
    REQUIRE_MESSAGE(rep.exit_code == 0, rep.output);
    const string csv = slurp(out_base + ".csv");
    // header + two method rows
    int lines = 0;
    for (char c : csv)
        if (c == '\n')
            ++lines;
    CHECK(lines == 3);
    CHECK(csv.find("eoh-i,tsp") != string::npos);
    CHECK(csv.find("eoh-baseline,tsp") != string::npos);
    CHECK(csv.rfind("method,problem", 0) == 0);

    // single-run means equal the raw manifest value
    const string single_dir = work_dir() + "/single";
    run_cli("evolve --framework eoh-i --problem tsp --pop 4 --iters 1 --provider mock --seed 9 "
            "--out " +
            single_dir + " --run-name only");
    const string manifest = slurp(single_dir + "/only.manifest.json");
    const string best_key = "\"fitness\": ";
    const std::size_t pos = manifest.find(best_key, manifest.find("\"best\""));
    REQUIRE(pos != string::npos);
    const std::size_t end = manifest.find_first_of(",\n", pos + best_key.size());
    const string value = manifest.substr(pos + best_key.size(), end - pos - best_key.size());
    CliResult single = run_cli("report --dir " + single_dir);
    CHECK(single.exit_code == 0);
    CHECK(single.output.find(value.substr(0, 6)) != string::npos);
}

TEST_CASE("cli report: empty directory is an error") {
    const string dir = work_dir() + "/empty_dir";
    ::mkdir(dir.c_str(), 0755);
    CliResult r = run_cli("report --dir " + dir);
    CHECK(r.exit_code != 0);
}

TEST_CASE("cli report: means over synthetic manifests match hand computation") {
    const string dir = work_dir() + "/synthetic";
    ::mkdir(dir.c_str(), 0755);
    const double values[3] = {10.0, 11.0, 13.5}; // mean 11.5
    for (int i = 0; i < 3; ++i) {
        std::ofstream m(dir + "/synth" + std::to_string(i) + ".manifest.json");
        m << "{\n"
          << "  \"framework\": \"eoh-i\",\n  \"problem\": \"tsp\",\n"
          << "  \"suite_name\": \"synthetic-suite\",\n"
          << "  \"best\": {\"fingerprint\": \"f\", \"fitness\": " << values[i]
          << ", \"valid\": true, \"source\": \"s\"},\n"
          << "  \"tokens\": {\"total\": " << (100 * (i + 1)) << "}\n"
          << "}\n";
    }
    const string out_base = work_dir() + "/synth_table";
    CliResult r = run_cli("report --dir " + dir + " --out " + out_base);
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const string csv = slurp(out_base + ".csv");
    CHECK(csv.find("eoh-i,tsp,11.5,200") != string::npos);
}
