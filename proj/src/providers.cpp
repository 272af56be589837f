// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>

#include <httplib.h>
#include <json.hpp>

#include "ahd/dsl/unparse.hpp"
#include "ahd/fingerprint.hpp"
#include "ahd/repair.hpp"

namespace ahd::repair {

using nlohmann::json;

namespace {

long sum_out_tokens(const std::vector<std::string>& texts) {
    long total = 0;
    for (const std::string& t : texts)
        total += approx_tokens(t);
    return total;
}

// Deterministic stand-in for the language model of the repair stage.
class MockProvider final : public Provider {
  public:
    Completion complete(const PromptJob& job) override {
        Completion out;
        out.tokens_in = approx_tokens(job.prompt);
        switch (job.kind) {
        case PromptJob::Kind::Repair: {
            const dsl::SourceText fixed = mock_repair_rules(*job.icode, *job.schema);
            out.texts.push_back("```\n" + fixed.text + "\n```");
            break;
        }
        case PromptJob::Kind::Baseline:
            out.texts.push_back("```\n" + recombine(*job.parent_a, *job.parent_b, *job.schema) +
                                "\n```");
            break;
        case PromptJob::Kind::ReflectShort: {
            const ReflectionInputs& r = job.reflection;
            const bool a_fitter = r.fitness_a <= r.fitness_b;
            out.texts.push_back(
                "comparison of parents " + r.parent_a_fingerprint + " (fitness " +
                dsl::format_number(r.fitness_a) + ") and " + r.parent_b_fingerprint +
                " (fitness " + dsl::format_number(r.fitness_b) + "): keep the structure of " +
                (a_fitter ? r.parent_a_fingerprint : r.parent_b_fingerprint) +
                ", it scored lower; reuse its dominant distance term in the child.");
            break;
        }
        case PromptJob::Kind::ReflectLong:
            out.texts.push_back(
                "favor repairs that keep the fitter parent's dominant term and reintroduce "
                "removed bindings with small weights.");
            break;
        }
        out.tokens_out = sum_out_tokens(out.texts);
        return out;
    }

    ProviderKind kind() const override { return ProviderKind::Mock; }
    const char* name() const override { return "mock"; }

  private:
    // Rule-based recombination: graft parent B's first returned expression
    // into parent A as an averaged blend, then run the repair cascade so the
    // product is always executable.
    static std::string recombine(const HeuristicCode& a, const HeuristicCode& b,
                                 const problems::FeatureSchema& schema) {
        if (!a.ast || !b.ast)
            return mock_repair_rules(a, schema).text;
        const dsl::AstNode* ret_a = first_return(a.ast->root());
        const dsl::AstNode* ret_b = first_return(b.ast->root());
        if (!ret_a || !ret_b || ret_a->children.empty() || ret_b->children.empty())
            return a.source.text;
        dsl::Ast blended = *a.ast;
        dsl::AstNode* target = blended.find(ret_a->node_id);
        dsl::AstNode sum = dsl::make_node(dsl::Kind::BinaryOp, std::string("+"),
                                          {ret_a->children[0], ret_b->children[0]});
        dsl::AstNode half = dsl::make_node(dsl::Kind::NumberLit, 0.5);
        target->children[0] =
            dsl::make_node(dsl::Kind::BinaryOp, std::string("*"), {half, std::move(sum)});
        blended.renumber();
        HeuristicCode child =
            make_heuristic_code(dsl::SourceText{dsl::unparse_text(blended), dsl::Origin::Llm});
        if (child.is_valid())
            return child.source.text;
        return mock_repair_rules(child, schema).text;
    }

    static const dsl::AstNode* first_return(const dsl::AstNode& node) {
        if (node.kind == dsl::Kind::Return)
            return &node;
        for (const dsl::AstNode& child : node.children)
            if (const dsl::AstNode* hit = first_return(child))
                return hit;
        return nullptr;
    }
};

struct ParsedUrl {
    std::string host_port; // scheme://host[:port]
    std::string prefix;    // path prefix, e.g. /v1
};

ParsedUrl split_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    const std::size_t path_start =
        scheme == std::string::npos ? base_url.find('/') : base_url.find('/', scheme + 3);
    if (path_start == std::string::npos)
        return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/')
        prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

class DefaultTransport final : public HttpTransport {
  public:
    std::optional<HttpReply> post(const std::string& base_url, const std::string& path,
                                  const std::string& api_key, const std::string& body,
                                  int timeout_s) override {
        const ParsedUrl url = split_url(base_url);
        httplib::Client client(url.host_port);
        client.set_connection_timeout(timeout_s, 0);
        client.set_read_timeout(timeout_s, 0);
        httplib::Headers headers;
        if (!api_key.empty())
            headers.emplace("Authorization", "Bearer " + api_key);
        auto result = client.Post(url.prefix + path, headers, body, "application/json");
        if (!result)
            return std::nullopt;
        return HttpReply{result->status, result->body};
    }
};

// OpenAI-compatible chat-completions client with bounded retries on
// transport failures and retryable statuses.
class RemoteProvider final : public Provider {
  public:
    RemoteProvider(RemoteConfig config, std::unique_ptr<HttpTransport> transport)
        : config_(std::move(config)),
          transport_(transport ? std::move(transport) : std::make_unique<DefaultTransport>()) {}

    Completion complete(const PromptJob& job) override {
        json body;
        body["model"] = config_.model;
        body["messages"] = json::array({json{{"role", "user"}, {"content", job.prompt}}});
        if (job.want_variants > 1)
            body["n"] = job.want_variants;
        const std::string payload = body.dump();

        const int attempts = 1 + std::max(0, config_.max_retries);
        std::string last_error = "no attempt made";
        for (int attempt = 0; attempt < attempts; ++attempt) {
            std::optional<HttpReply> reply = transport_->post(
                config_.base_url, "/chat/completions", config_.api_key, payload, config_.timeout_s);
            if (!reply) {
                last_error = "transport failure";
                continue;
            }
            if (reply->status == 429 || reply->status >= 500) {
                last_error = "status " + std::to_string(reply->status);
                continue;
            }
            if (reply->status != 200)
                throw ProviderFailureError("remote provider rejected the request: status " +
                                           std::to_string(reply->status));
            return parse_reply(job, reply->body);
        }
        throw ProviderFailureError("remote provider unreachable after " +
                                   std::to_string(attempts) + " attempts (" + last_error + ")");
    }

    ProviderKind kind() const override { return ProviderKind::Remote; }
    const char* name() const override { return "remote"; }

  private:
    Completion parse_reply(const PromptJob& job, const std::string& body) const {
        Completion out;
        json doc = json::parse(body, nullptr, false);
        if (doc.is_discarded())
            throw ProviderFailureError("remote provider returned unparseable JSON");
        if (doc.contains("choices"))
            for (const json& choice : doc["choices"])
                if (choice.contains("message") && choice["message"].contains("content"))
                    out.texts.push_back(choice["message"]["content"].get<std::string>());
        if (doc.contains("usage")) {
            out.tokens_in = doc["usage"].value("prompt_tokens", 0L);
            out.tokens_out = doc["usage"].value("completion_tokens", 0L);
        } else {
            out.tokens_in = approx_tokens(job.prompt);
            out.tokens_out = sum_out_tokens(out.texts);
        }
        return out;
    }

    RemoteConfig config_;
    std::unique_ptr<HttpTransport> transport_;
};

// Record/replay wrapper keyed by prompt hash; repeated identical prompts
// replay in recording order.
class CassetteProvider final : public Provider {
  public:
    CassetteProvider(std::unique_ptr<Provider> inner, std::string path, CassetteMode mode)
        : inner_(std::move(inner)), path_(std::move(path)), mode_(mode) {
        if (mode_ == CassetteMode::Replay)
            load();
        else if (!inner_)
            throw ConfigError("cassette record mode needs an inner provider");
    }

    Completion complete(const PromptJob& job) override {
        const std::string key = fingerprint_of(job.prompt);
        if (mode_ == CassetteMode::Replay) {
            auto it = entries_.find(key);
            if (it == entries_.end() || it->second.empty())
                throw ProviderFailureError("cassette miss for prompt hash " + key);
            Entry entry = it->second.front();
            it->second.pop_front();
            Completion out;
            out.texts.push_back(entry.text);
            out.tokens_in = entry.tokens_in;
            out.tokens_out = entry.tokens_out;
            return out;
        }
        Completion out = inner_->complete(job);
        std::ofstream file(path_, std::ios::app | std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot append to cassette: " + path_);
        json line;
        line["prompt_hash"] = key;
        line["response_text"] = out.texts.empty() ? "" : out.texts.front();
        line["tokens_in"] = out.tokens_in;
        line["tokens_out"] = out.tokens_out;
        file << line.dump() << "\n";
        return out;
    }

    ProviderKind kind() const override { return inner_ ? inner_->kind() : ProviderKind::Remote; }
    const char* name() const override { return "cassette"; }

  private:
    struct Entry {
        std::string text;
        long tokens_in = 0;
        long tokens_out = 0;
    };

    void load() {
        std::ifstream file(path_, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot open cassette: " + path_);
        std::string line;
        while (std::getline(file, line)) {
            if (line.empty())
                continue;
            json doc = json::parse(line);
            entries_[doc.at("prompt_hash").get<std::string>()].push_back(
                {doc.at("response_text").get<std::string>(), doc.at("tokens_in").get<long>(),
                 doc.at("tokens_out").get<long>()});
        }
    }

    std::unique_ptr<Provider> inner_;
    std::string path_;
    CassetteMode mode_;
    std::map<std::string, std::deque<Entry>> entries_;
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

} // namespace

RemoteConfig remote_config_from_env() {
    RemoteConfig config;
    config.base_url = env_or("LLM_BASE_URL", "http://127.0.0.1:8000/v1");
    config.api_key = env_or("LLM_API_KEY", "");
    config.model = env_or("LLM_MODEL", "local-model");
    config.timeout_s = std::stoi(env_or("LLM_TIMEOUT_S", "60"));
    config.max_retries = std::stoi(env_or("LLM_MAX_RETRIES", "2"));
    return config;
}

std::unique_ptr<Provider> make_mock_provider() { return std::make_unique<MockProvider>(); }

std::unique_ptr<HttpTransport> make_default_transport() {
    return std::make_unique<DefaultTransport>();
}

std::unique_ptr<Provider> make_remote_provider(RemoteConfig config,
                                               std::unique_ptr<HttpTransport> transport) {
    return std::make_unique<RemoteProvider>(std::move(config), std::move(transport));
}

std::unique_ptr<Provider> make_cassette_provider(std::unique_ptr<Provider> inner,
                                                 const std::string& path, CassetteMode mode) {
    return std::make_unique<CassetteProvider>(std::move(inner), path, mode);
}

} // namespace ahd::repair
