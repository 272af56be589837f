// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ahd/heuristic_code.hpp"
#include "ahd/problems.hpp"
#include "ahd/rng.hpp"

namespace ahd::repair {

enum class RepairContext { Plain, ShortTermReflection, LongTermReflection };

struct RepairRequest {
    HeuristicCode icode;
    std::string violations_summary;
    RepairContext context = RepairContext::Plain;
    std::string reflection; // verbatim text for the reflection contexts
    problems::FeatureSchema feature_schema;
    int want_variants = 1;
};

enum class ProviderKind { Mock, Remote };

struct RepairResponse {
    std::vector<dsl::SourceText> candidates; // may be empty (provider failure)
    long tokens_in = 0;
    long tokens_out = 0;
    ProviderKind provider = ProviderKind::Mock;
};

enum class RepairMode { Always, Probabilistic, Never };

struct RepairPolicy {
    RepairMode mode = RepairMode::Always;
    double probability = 1.0;
    Rng rng{RngSeed{0}};
};

// Algorithm-2 branch: does this I-Code go to the LLM or straight into the
// population? Probabilistic mode draws from the policy's own seeded stream.
bool repair_needed(const HeuristicCode& icode, RepairPolicy& policy);

// Deterministic prompt: task framing, the feature schema with the score
// direction convention, the I-Code verbatim, the violations summary and the
// output-format instruction. Reflection contexts embed the supplied text.
std::string build_repair_prompt(const RepairRequest& request);

// Baseline semantic-operator prompt: embeds both parents' full code. Exists
// so prompt-size comparisons against the structural path are measurable.
struct BaselineRequest {
    HeuristicCode parent_a;
    HeuristicCode parent_b;
    problems::FeatureSchema feature_schema;
    int want_variants = 1;
};
std::string build_baseline_prompt(const BaselineRequest& request);

// The prompt templates, exactly as versioned under prompts/. Placeholders in
// {BRACES} are substituted by the builders below.
std::string_view repair_prompt_template();
std::string_view baseline_prompt_template();
std::string_view short_reflection_prompt_template();
std::string_view long_reflection_prompt_template();

struct ReflectionInputs {
    std::string parent_a_fingerprint;
    std::string parent_b_fingerprint;
    double fitness_a = 0.0;
    double fitness_b = 0.0;
};
std::string build_short_reflection_prompt(const ReflectionInputs& inputs,
                                          const std::string& parent_a_code,
                                          const std::string& parent_b_code);
std::string build_long_reflection_prompt(const std::string& accumulated,
                                         const std::string& latest_note);

// One wire-level interaction with whatever answers prompts.
struct PromptJob {
    enum class Kind { Repair, Baseline, ReflectShort, ReflectLong };
    Kind kind = Kind::Repair;
    std::string prompt;
    int want_variants = 1;
    // structured payloads so the offline mock can act without a language model
    const HeuristicCode* icode = nullptr;
    const problems::FeatureSchema* schema = nullptr;
    const HeuristicCode* parent_a = nullptr;
    const HeuristicCode* parent_b = nullptr;
    ReflectionInputs reflection;
    std::string accumulated;
};

struct Completion {
    std::vector<std::string> texts;
    long tokens_in = 0;
    long tokens_out = 0;
};

class Provider {
  public:
    virtual ~Provider() = default;
    virtual Completion complete(const PromptJob& job) = 0;
    virtual ProviderKind kind() const = 0;
    virtual const char* name() const = 0;
};

// Builds the prompt, queries the provider, extracts fenced candidates.
// Candidates containing the hole token are dropped; callers re-validate
// everything that survives. Throws ProviderFailureError on exhaustion.
RepairResponse repair(const RepairRequest& request, Provider& provider);

// The offline repair oracle: a deterministic rule cascade that always ends in
// a valid candidate. Rules, in order: fill/drop holes, rebind unbound
// identifiers to the closest in-scope name, append a final return, retry on
// the longest parseable prefix, and as a last resort emit the canonical
// fallback built from the schema's parameter names.
dsl::SourceText mock_repair_rules(const HeuristicCode& icode,
                                  const problems::FeatureSchema& schema);

// ceil(len/4): the mock provider's token measure; monotone in text length.
long approx_tokens(std::string_view text);

// First fenced code block, or the whole text when no fence is present.
std::string extract_candidate(const std::string& response_text);

// --- providers ---

std::unique_ptr<Provider> make_mock_provider();

struct RemoteConfig {
    std::string base_url;  // e.g. https://host:port — /v1/chat/completions is appended
    std::string api_key;
    std::string model;
    int timeout_s = 60;
    int max_retries = 2;
};
RemoteConfig remote_config_from_env();

struct HttpReply {
    int status = 0;
    std::string body;
};

class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    virtual std::optional<HttpReply> post(const std::string& base_url, const std::string& path,
                                          const std::string& api_key, const std::string& body,
                                          int timeout_s) = 0;
};

std::unique_ptr<HttpTransport> make_default_transport();
std::unique_ptr<Provider> make_remote_provider(RemoteConfig config,
                                               std::unique_ptr<HttpTransport> transport = nullptr);

// Record/replay wrapper. Record mode forwards to the inner provider and
// appends JSONL entries {prompt_hash, response_text, tokens_in, tokens_out};
// replay mode answers from the file and fails on a miss.
enum class CassetteMode { Record, Replay };
std::unique_ptr<Provider> make_cassette_provider(std::unique_ptr<Provider> inner,
                                                 const std::string& path, CassetteMode mode);

} // namespace ahd::repair
