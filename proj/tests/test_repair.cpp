// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ahd/astops.hpp"
#include "ahd/dsl/parser.hpp"
#include "ahd/dsl/unparse.hpp"
#include "ahd/evolve.hpp"
#include "ahd/repair.hpp"

using namespace ahd;
namespace rp = ahd::repair;

namespace {

const problems::FeatureSchema& tsp_schema() { return problems::tsp_schema(); }

HeuristicCode icode_from(const std::string& text) {
    return make_heuristic_code(text, dsl::Origin::Unparser);
}

rp::RepairRequest request_for(HeuristicCode icode) {
    rp::RepairRequest req;
    req.violations_summary = icode.violations_summary();
    req.icode = std::move(icode);
    req.feature_schema = tsp_schema();
    return req;
}

std::string temp_path(const char* stem) {
    return std::string("/tmp/ahd_test_") + stem + "_" + std::to_string(::getpid());
}

} // namespace

TEST_CASE("repair_needed: policy branches") {
    HeuristicCode icode = icode_from("fn score(a) { }");
    rp::RepairPolicy always{rp::RepairMode::Always, 1.0, Rng(RngSeed{1})};
    rp::RepairPolicy never{rp::RepairMode::Never, 0.0, Rng(RngSeed{1})};
    CHECK(rp::repair_needed(icode, always));
    CHECK(!rp::repair_needed(icode, never));

    rp::RepairPolicy coin{rp::RepairMode::Probabilistic, 0.5, Rng(RngSeed{99})};
    int yes = 0;
    for (int i = 0; i < 10000; ++i)
        yes += rp::repair_needed(icode, coin) ? 1 : 0;
    CHECK(yes > 4700);
    CHECK(yes < 5300);
}

TEST_CASE("build_repair_prompt: contents and determinism") {
    HeuristicCode icode = icode_from("fn score(a) { return \xE2\x9F\xA8?\xE2\x9F\xA9 }");
    rp::RepairRequest req = request_for(icode);
    const std::string prompt = rp::build_repair_prompt(req);
    CHECK(prompt.find("\xE2\x9F\xA8?\xE2\x9F\xA9") != std::string::npos);
    CHECK(prompt.find("repair") != std::string::npos);
    CHECK(prompt.find(icode.source.text) != std::string::npos);
    CHECK(prompt.find("d_cur") != std::string::npos); // schema present
    CHECK(rp::build_repair_prompt(req) == prompt);        // byte identical

    req.context = rp::RepairContext::ShortTermReflection;
    req.reflection = "THE-REFLECTION-TEXT";
    CHECK(rp::build_repair_prompt(req).find("THE-REFLECTION-TEXT") != std::string::npos);
}

TEST_CASE("mock rules: hole in expression position becomes 0.0") {
    HeuristicCode icode = icode_from("fn score(a) { return \xE2\x9F\xA8?\xE2\x9F\xA9 }");
    const dsl::SourceText fixed = rp::mock_repair_rules(icode, {interp::SchemaId::TspNext, {"a"}, 1});
    HeuristicCode repaired = make_heuristic_code(fixed);
    REQUIRE(repaired.is_valid());
    // the returned expression is the literal zero
    const dsl::AstNode& fn = repaired.ast->root().children[0];
    const dsl::AstNode& ret = fn.children[1].children[0];
    REQUIRE(ret.kind == dsl::Kind::Return);
    CHECK(ret.children[0].kind == dsl::Kind::NumberLit);
    CHECK(ret.children[0].number() == 0.0);
}

TEST_CASE("mock rules: unbound identifiers rebind by edit distance") {
    HeuristicCode icode = icode_from("fn score(alpha, beta) { return alphq }");
    const dsl::SourceText fixed =
        rp::mock_repair_rules(icode, {interp::SchemaId::TspNext, {"alpha", "beta"}, 2});
    CHECK(fixed.text.find("alphq") == std::string::npos);
    CHECK(fixed.text.find("return alpha") != std::string::npos);

    // distance tie resolves toward the first parameter
    HeuristicCode tie = icode_from("fn score(aa, ab) { return ac }");
    const dsl::SourceText tie_fixed =
        rp::mock_repair_rules(tie, {interp::SchemaId::TspNext, {"aa", "ab"}, 2});
    CHECK(tie_fixed.text.find("return aa") != std::string::npos);
}

TEST_CASE("mock rules: missing return is appended, unparseable falls back") {
    HeuristicCode missing = icode_from("fn score(a, b) { let t = a + b }");
    HeuristicCode repaired =
        make_heuristic_code(rp::mock_repair_rules(missing, {interp::SchemaId::TspNext, {"a", "b"}, 2}));
    CHECK(repaired.is_valid());

    HeuristicCode garbage = make_heuristic_code("@@@ total nonsense", dsl::Origin::Llm);
    const dsl::SourceText fallback = rp::mock_repair_rules(garbage, tsp_schema());
    CHECK(fallback.text == "fn score(d_cur, d_start, d_mean_unvis, d_min_unvis, d_max_unvis, "
                           "frac_remaining) { return d_cur }");
    CHECK(make_heuristic_code(fallback).is_valid());
}

TEST_CASE("mock rules: trailing garbage drops back to the parseable prefix") {
    HeuristicCode icode =
        make_heuristic_code("fn score(a) { return a } and then some prose", dsl::Origin::Llm);
    REQUIRE(icode.unparseable);
    const dsl::SourceText fixed = rp::mock_repair_rules(icode, {interp::SchemaId::TspNext, {"a"}, 1});
    HeuristicCode repaired = make_heuristic_code(fixed);
    CHECK(repaired.is_valid());
    CHECK(fixed.text.find("return a") != std::string::npos);
}

TEST_CASE("mock rules: valid input passes through unchanged") {
    HeuristicCode valid = make_heuristic_code("fn score(a) { return a }", dsl::Origin::Seed);
    const dsl::SourceText out = rp::mock_repair_rules(valid, {interp::SchemaId::TspNext, {"a"}, 1});
    CHECK(out.text == valid.source.text);
}

TEST_CASE("mock repair totality over destruction products") {
    auto provider = rp::make_mock_provider();
    std::vector<HeuristicCode> seeds;
    for (const std::string& s : evolve::seed_sources(problems::Problem::Tsp))
        seeds.push_back(make_heuristic_code(s, dsl::Origin::Seed));
    Rng rng(RngSeed{512});
    int repaired_valid = 0;
    const int trials = 150;
    for (int i = 0; i < trials; ++i) {
        const HeuristicCode& base = seeds[rng.next_below(seeds.size())];
        HeuristicCode product = rng.next_coin()
                                    ? astops::apply_vi(base, seeds[rng.next_below(seeds.size())], rng)
                                    : astops::apply_vi(base, rng);
        rp::RepairRequest req = request_for(product);
        rp::RepairResponse resp = rp::repair(req, *provider);
        REQUIRE(!resp.candidates.empty());
        if (make_heuristic_code(resp.candidates.front()).is_valid())
            ++repaired_valid;
    }
    CHECK(repaired_valid == trials);
}

TEST_CASE("token accounting: ceil(len/4) and monotone in length") {
    CHECK(rp::approx_tokens("") == 0);
    CHECK(rp::approx_tokens("abc") == 1);
    CHECK(rp::approx_tokens("abcd") == 1);
    CHECK(rp::approx_tokens("abcde") == 2);
    const std::string a(100, 'x'), b(200, 'x');
    CHECK(rp::approx_tokens(a) < rp::approx_tokens(b));
}

TEST_CASE("extract_candidate: fences, language tags, bare text") {
    CHECK(rp::extract_candidate("```\nfn f() { }\n```") == "fn f() { }");
    CHECK(rp::extract_candidate("prose\n```rust\ncode here\n```\nmore prose") == "code here");
    CHECK(rp::extract_candidate("no fence at all") == "no fence at all");
    CHECK(rp::extract_candidate("```\nunterminated fence\n") == "unterminated fence");
}

TEST_CASE("repair(): hole-bearing provider output is dropped, not trusted") {
    struct EchoHole final : rp::Provider {
        rp::Completion complete(const rp::PromptJob&) override {
            return {{"```\nfn score(a) { return \xE2\x9F\xA8?\xE2\x9F\xA9 }\n```"}, 5, 5};
        }
        rp::ProviderKind kind() const override { return rp::ProviderKind::Remote; }
        const char* name() const override { return "echo-hole"; }
    } provider;
    rp::RepairRequest req = request_for(icode_from("fn score(a) { }"));
    rp::RepairResponse resp = rp::repair(req, provider);
    CHECK(resp.candidates.empty());
    CHECK(resp.tokens_in == 5);
}

TEST_CASE("remote provider: exactly 1 + max_retries attempts, then ProviderFailure") {
    struct CountingTransport final : rp::HttpTransport {
        int calls = 0;
        std::optional<rp::HttpReply> post(const std::string&, const std::string&, const std::string&,
                                      const std::string&, int) override {
            ++calls;
            return std::nullopt; // unreachable endpoint
        }
    };
    auto transport = std::make_unique<CountingTransport>();
    CountingTransport* seen = transport.get();
    rp::RemoteConfig config;
    config.base_url = "http://127.0.0.1:9";
    config.model = "test";
    config.max_retries = 2;
    auto provider = rp::make_remote_provider(config, std::move(transport));
    rp::PromptJob job;
    job.prompt = "hello";
    CHECK_THROWS_AS(provider->complete(job), ProviderFailureError);
    CHECK(seen->calls == 3);
}

TEST_CASE("remote provider: parses an OpenAI-style reply") {
    struct CannedTransport final : rp::HttpTransport {
        std::optional<rp::HttpReply> post(const std::string&, const std::string& path,
                                      const std::string&, const std::string&, int) override {
            CHECK(path == "/chat/completions");
            return rp::HttpReply{200, R"({
                "choices": [{"message": {"content": "```\nfn score(a) { return a }\n```"}}],
                "usage": {"prompt_tokens": 41, "completion_tokens": 12}
            })"};
        }
    };
    rp::RemoteConfig config;
    config.base_url = "http://127.0.0.1:9/v1";
    config.model = "test";
    auto provider = rp::make_remote_provider(config, std::make_unique<CannedTransport>());
    rp::PromptJob job;
    job.prompt = "fix it";
    rp::Completion out = provider->complete(job);
    REQUIRE(out.texts.size() == 1);
    CHECK(out.tokens_in == 41);
    CHECK(out.tokens_out == 12);
}

TEST_CASE("cassette: record with the mock, replay byte-identically, miss fails") {
    const std::string path = temp_path("cassette");
    std::remove(path.c_str());
    HeuristicCode icode = icode_from("fn score(a) { }");
    rp::RepairRequest req = request_for(icode);
    req.feature_schema = {interp::SchemaId::TspNext, {"a"}, 1};

    rp::RepairResponse recorded;
    {
        auto provider = rp::make_cassette_provider(rp::make_mock_provider(), path, rp::CassetteMode::Record);
        recorded = rp::repair(req, *provider);
        REQUIRE(!recorded.candidates.empty());
    }
    {
        auto provider = rp::make_cassette_provider(nullptr, path, rp::CassetteMode::Replay);
        rp::RepairResponse replayed = rp::repair(req, *provider);
        REQUIRE(!replayed.candidates.empty());
        CHECK(replayed.candidates.front().text == recorded.candidates.front().text);
        CHECK(replayed.tokens_in == recorded.tokens_in);
        CHECK(replayed.tokens_out == recorded.tokens_out);

        // the single recorded entry is consumed; a second identical prompt misses
        CHECK_THROWS_AS(rp::repair(req, *provider), ProviderFailureError);
    }
    std::remove(path.c_str());
}

TEST_CASE("baseline prompt embeds both parents and outweighs the repair prompt") {
    const auto seeds = evolve::seed_sources(problems::Problem::Tsp);
    HeuristicCode a = make_heuristic_code(seeds[0], dsl::Origin::Seed);
    HeuristicCode b = make_heuristic_code(seeds[1], dsl::Origin::Seed);
    rp::BaselineRequest breq{a, b, tsp_schema(), 1};
    const std::string baseline = rp::build_baseline_prompt(breq);
    CHECK(baseline.find(a.source.text) != std::string::npos);
    CHECK(baseline.find(b.source.text) != std::string::npos);

    Rng rng(RngSeed{6});
    HeuristicCode icode = astops::apply_vi(a, b, rng);
    const std::string repair_prompt = rp::build_repair_prompt(request_for(icode));
    CHECK(rp::approx_tokens(repair_prompt) < rp::approx_tokens(baseline));
}

TEST_CASE("prompt templates are versioned byte-exactly under prompts/") {
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        REQUIRE_MESSAGE(in.good(), "missing file: ", path);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    const std::string root = AHD_SOURCE_DIR;
    CHECK(slurp(root + "/prompts/repair.txt") == std::string(rp::repair_prompt_template()));
    CHECK(slurp(root + "/prompts/baseline.txt") == std::string(rp::baseline_prompt_template()));
    CHECK(slurp(root + "/prompts/reflect_short.txt") ==
          std::string(rp::short_reflection_prompt_template()));
    CHECK(slurp(root + "/prompts/reflect_long.txt") ==
          std::string(rp::long_reflection_prompt_template()));
}

TEST_CASE("seed corpus files match the embedded sources") {
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        REQUIRE_MESSAGE(in.good(), "missing file: ", path);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    const std::string root = AHD_SOURCE_DIR;
    const std::vector<std::string> tsp_files = {"tsp_nearest_neighbor.dsl",
                                                "tsp_weighted_lookahead.dsl",
                                                "tsp_mean_blend.dsl"};
    const std::vector<std::string> obp_files = {"obp_best_fit.dsl", "obp_first_fit.dsl",
                                                "obp_worst_fit.dsl",
                                                "obp_near_full_hybrid.dsl"};
    const auto tsp = evolve::seed_sources(problems::Problem::Tsp);
    REQUIRE(tsp.size() == tsp_files.size());
    for (std::size_t i = 0; i < tsp.size(); ++i)
        CHECK(slurp(root + "/data/seeds/" + tsp_files[i]) == tsp[i] + "\n");
    const auto obp = evolve::seed_sources(problems::Problem::Obp);
    REQUIRE(obp.size() == obp_files.size());
    for (std::size_t i = 0; i < obp.size(); ++i)
        CHECK(slurp(root + "/data/seeds/" + obp_files[i]) == obp[i] + "\n");
}

TEST_CASE("default transport: real loopback round trip through httplib") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
        CHECK(req.get_header_value("Authorization") == "Bearer sk-test");
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("model") == "unit-model");
        nlohmann::json reply;
        reply["choices"] = nlohmann::json::array(
            {{{"message", {{"content", "```\nfn score(a) { return a }\n```"}}}}});
        reply["usage"] = {{"prompt_tokens", 7}, {"completion_tokens", 9}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    rp::RemoteConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.api_key = "sk-test";
    config.model = "unit-model";
    config.timeout_s = 5;
    auto provider = rp::make_remote_provider(config);
    rp::PromptJob job;
    job.prompt = "loopback";
    const rp::Completion out = provider->complete(job);
    server.stop();
    serving.join();
    REQUIRE(out.texts.size() == 1);
    CHECK(out.tokens_in == 7);
    CHECK(out.tokens_out == 9);
    CHECK(rp::extract_candidate(out.texts.front()) == "fn score(a) { return a }");
}
