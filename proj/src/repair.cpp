// SPDX-License-Identifier: Apache-2.0
#include "ahd/repair.hpp"

#include <algorithm>

#include "ahd/dsl/builtins.hpp"
#include "ahd/dsl/unparse.hpp"

namespace ahd::repair {

bool repair_needed(const HeuristicCode& icode, RepairPolicy& policy) {
    (void)icode;
    switch (policy.mode) {
    case RepairMode::Always: return true;
    case RepairMode::Never: return false;
    case RepairMode::Probabilistic: return policy.rng.next_double() < policy.probability;
    }
    return true;
}

long approx_tokens(std::string_view text) {
    return static_cast<long>((text.size() + 3) / 4);
}

namespace {

std::string schema_lines(const problems::FeatureSchema& schema) {
    std::string out;
    for (const std::string& name : schema.feature_names)
        out += "  - " + name + "\n";
    return out;
}

std::string signature_of(const problems::FeatureSchema& schema) {
    std::string out = "fn score(";
    for (std::size_t i = 0; i < schema.feature_names.size(); ++i) {
        if (i)
            out += ", ";
        out += schema.feature_names[i];
    }
    out += ")";
    return out;
}

std::string direction_line(const problems::FeatureSchema& schema) {
    if (schema.schema_id == interp::SchemaId::TspNext)
        return "Lower is better: at each construction step the city with the smallest score "
               "is visited next (ties go to the lowest city index).";
    return "Higher is better: the feasible bin with the largest score receives the item "
           "(ties go to the lowest bin index).";
}

std::string task_title(const problems::FeatureSchema& schema) {
    if (schema.schema_id == interp::SchemaId::TspNext)
        return "step-by-step tour construction for the traveling salesman problem "
               "(pick the next city to visit)";
    return "online bin packing (pick a bin for each arriving item)";
}

std::string framing(const problems::FeatureSchema& schema) {
    std::string out;
    out += "Task: design a scoring heuristic for " + task_title(schema) + ".\n";
    out += "The heuristic is a single function in a small expression language:\n";
    out += "  " + signature_of(schema) + " { ... }\n";
    out += "Features:\n" + schema_lines(schema);
    out += "Score convention: " + direction_line(schema);
    return out;
}

constexpr std::string_view kRepairTemplate = R"TPL({FRAMING}

{REFLECTION_BLOCK}The candidate below came out of structural code perturbation and is not executable.{HOLE_NOTE}

```
{CODE}
```

Detected problems: {VIOLATIONS}

Either repair this code, or write a novel heuristic distinct from it. Keep the exact signature {SIGNATURE}. Reply with a single fenced code block containing one complete function and nothing else.
)TPL";

constexpr std::string_view kBaselineTemplate = R"TPL({FRAMING}

Below are two existing parent heuristics taken from the current population. Parent A:

```
{PARENT_A}
```

Parent B:

```
{PARENT_B}
```

First, identify the idea each parent expresses and how the two differ. Then design one new heuristic that combines the strengths of both parents while avoiding their weaknesses. You may reuse sub-expressions of either parent, rescale terms, introduce intermediate let-bindings, or add conditional branches where that sharpens the decision. The new heuristic should be different from both parents, not a copy of either.

Keep the exact signature {SIGNATURE}. Reply with a single fenced code block containing one complete function and nothing else.
)TPL";

constexpr std::string_view kShortReflectionTemplate =
    R"TPL(Two parent heuristics were compared on the training suite.
Parent {FP_A} scored {FITNESS_A}:

```
{PARENT_A}
```

Parent {FP_B} scored {FITNESS_B} (lower is better):

```
{PARENT_B}
```

In at most three sentences, state what the fitter parent does better and what a child of the two should keep or avoid.
)TPL";

constexpr std::string_view kLongReflectionTemplate = R"TPL(Accumulated design guidance so far:
{ACCUMULATED}

Latest observation:
{LATEST}

Update the guidance in at most three sentences, keeping only what will help future repairs of perturbed heuristics.
)TPL";

std::string substitute(std::string_view tpl, const std::string& key, const std::string& value) {
    std::string out(tpl);
    const std::string marker = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = out.find(marker, pos)) != std::string::npos) {
        out.replace(pos, marker.size(), value);
        pos += value.size();
    }
    return out;
}

} // namespace

std::string_view repair_prompt_template() { return kRepairTemplate; }
std::string_view baseline_prompt_template() { return kBaselineTemplate; }
std::string_view short_reflection_prompt_template() { return kShortReflectionTemplate; }
std::string_view long_reflection_prompt_template() { return kLongReflectionTemplate; }

std::string build_repair_prompt(const RepairRequest& request) {
    std::string reflection_block;
    if (request.context == RepairContext::ShortTermReflection && !request.reflection.empty())
        reflection_block =
            "Short-term reflection on the parents of this candidate:\n" + request.reflection +
            "\n\n";
    if (request.context == RepairContext::LongTermReflection && !request.reflection.empty())
        reflection_block =
            "Long-term reflection accumulated over the search:\n" + request.reflection + "\n\n";
    std::string hole_note;
    if (dsl::contains_hole_token(request.icode.source.text))
        hole_note = " The marker " + std::string(dsl::kHoleToken) +
                    " stands for structurally missing code.";
    std::string prompt = substitute(kRepairTemplate, "FRAMING", framing(request.feature_schema));
    prompt = substitute(prompt, "REFLECTION_BLOCK", reflection_block);
    prompt = substitute(prompt, "HOLE_NOTE", hole_note);
    prompt = substitute(prompt, "CODE", request.icode.source.text);
    prompt = substitute(prompt, "VIOLATIONS", request.violations_summary);
    prompt = substitute(prompt, "SIGNATURE", signature_of(request.feature_schema));
    return prompt;
}

std::string build_baseline_prompt(const BaselineRequest& request) {
    std::string prompt = substitute(kBaselineTemplate, "FRAMING", framing(request.feature_schema));
    prompt = substitute(prompt, "PARENT_A", request.parent_a.source.text);
    prompt = substitute(prompt, "PARENT_B", request.parent_b.source.text);
    prompt = substitute(prompt, "SIGNATURE", signature_of(request.feature_schema));
    return prompt;
}

std::string build_short_reflection_prompt(const ReflectionInputs& inputs,
                                          const std::string& parent_a_code,
                                          const std::string& parent_b_code) {
    std::string prompt = substitute(kShortReflectionTemplate, "FP_A", inputs.parent_a_fingerprint);
    prompt = substitute(prompt, "FITNESS_A", dsl::format_number(inputs.fitness_a));
    prompt = substitute(prompt, "PARENT_A", parent_a_code);
    prompt = substitute(prompt, "FP_B", inputs.parent_b_fingerprint);
    prompt = substitute(prompt, "FITNESS_B", dsl::format_number(inputs.fitness_b));
    prompt = substitute(prompt, "PARENT_B", parent_b_code);
    return prompt;
}

std::string build_long_reflection_prompt(const std::string& accumulated,
                                         const std::string& latest_note) {
    std::string prompt =
        substitute(kLongReflectionTemplate, "ACCUMULATED",
                   accumulated.empty() ? std::string("(none)") : accumulated);
    prompt = substitute(prompt, "LATEST", latest_note);
    return prompt;
}

std::string extract_candidate(const std::string& response_text) {
    const std::string fence = "```";
    const std::size_t open = response_text.find(fence);
    if (open == std::string::npos) {
        // no fence: the whole reply is the candidate
        std::string out = response_text;
        while (!out.empty() && (out.back() == '\n' || out.back() == ' '))
            out.pop_back();
        std::size_t start = 0;
        while (start < out.size() && (out[start] == '\n' || out[start] == ' '))
            ++start;
        return out.substr(start);
    }
    std::size_t body = response_text.find('\n', open);
    if (body == std::string::npos)
        return "";
    ++body;
    std::size_t close = response_text.find(fence, body);
    if (close == std::string::npos)
        close = response_text.size();
    std::string out = response_text.substr(body, close - body);
    while (!out.empty() && (out.back() == '\n' || out.back() == ' '))
        out.pop_back();
    return out;
}

RepairResponse repair(const RepairRequest& request, Provider& provider) {
    PromptJob job;
    job.kind = PromptJob::Kind::Repair;
    job.prompt = build_repair_prompt(request);
    job.want_variants = request.want_variants;
    job.icode = &request.icode;
    job.schema = &request.feature_schema;
    const Completion completion = provider.complete(job);

    RepairResponse response;
    response.provider = provider.kind();
    response.tokens_in = completion.tokens_in;
    response.tokens_out = completion.tokens_out;
    for (const std::string& text : completion.texts) {
        std::string candidate = extract_candidate(text);
        if (candidate.empty())
            continue;
        if (dsl::contains_hole_token(candidate))
            continue; // providers may echo the hole marker; such text is not code
        response.candidates.push_back(dsl::SourceText{std::move(candidate), dsl::Origin::Llm});
    }
    return response;
}

// --- mock repair rule cascade ---

namespace {

using dsl::AstNode;
using dsl::Kind;

// rule 1: fill holes in expression slots with 0.0, drop holes from slots
// where the grammar allows absence (statements, parameters, call arguments)
void fill_or_drop_holes(AstNode& node) {
    const bool optional_slot =
        node.kind == Kind::Block || node.kind == Kind::ParamList || node.kind == Kind::Call;
    for (std::size_t i = 0; i < node.children.size();) {
        AstNode& child = node.children[i];
        if (child.kind == Kind::Hole) {
            if (optional_slot) {
                node.children.erase(node.children.begin() + static_cast<std::ptrdiff_t>(i));
                continue;
            }
            child = dsl::make_node(Kind::NumberLit, 0.0);
        } else {
            fill_or_drop_holes(child);
        }
        ++i;
    }
}

int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// rule 2: rebind unbound identifiers to the closest in-scope name,
// ties resolved toward the first parameter
void rebind_expr(AstNode& node, const std::vector<std::string>& scope,
                 const std::string& first_param) {
    if (node.kind == Kind::Identifier) {
        const std::string& name = node.name();
        if (dsl::is_builtin(name) ||
            std::find(scope.begin(), scope.end(), name) != scope.end())
            return;
        if (scope.empty())
            return;
        int best = edit_distance(name, scope[0]);
        std::vector<std::string> minimal{scope[0]};
        for (std::size_t i = 1; i < scope.size(); ++i) {
            const int d = edit_distance(name, scope[i]);
            if (d < best) {
                best = d;
                minimal = {scope[i]};
            } else if (d == best) {
                minimal.push_back(scope[i]);
            }
        }
        std::string chosen = minimal[0];
        if (minimal.size() > 1 &&
            std::find(minimal.begin(), minimal.end(), first_param) != minimal.end())
            chosen = first_param;
        node.payload = chosen;
        return;
    }
    if (node.kind == Kind::ParamList)
        return; // binder positions, not uses
    for (AstNode& child : node.children)
        rebind_expr(child, scope, first_param);
}

void rebind_block(AstNode& block, std::vector<std::string> scope, const std::string& first_param) {
    for (AstNode& item : block.children) {
        switch (item.kind) {
        case Kind::Let:
            if (!item.children.empty())
                rebind_expr(item.children[0], scope, first_param);
            if (item.has_name())
                scope.push_back(item.name());
            break;
        case Kind::If:
            if (!item.children.empty())
                rebind_expr(item.children[0], scope, first_param);
            for (std::size_t i = 1; i < item.children.size(); ++i) {
                if (item.children[i].kind == Kind::Block)
                    rebind_block(item.children[i], scope, first_param);
                else
                    rebind_expr(item.children[i], scope, first_param);
            }
            break;
        default:
            rebind_expr(item, scope, first_param);
            break;
        }
    }
}

std::string fallback_source(const problems::FeatureSchema& schema) {
    std::string out = "fn score(";
    for (std::size_t i = 0; i < schema.feature_names.size(); ++i) {
        if (i)
            out += ", ";
        out += schema.feature_names[i];
    }
    out += ") { return " + schema.feature_names.front() + " }";
    return out;
}

// rule 4: drop unparseable trailing text back to the last parseable prefix
std::optional<dsl::Ast> longest_parseable_prefix(const std::string& text) {
    std::string working = text;
    while (!working.empty()) {
        dsl::ParseResult result = dsl::parse(working);
        if (result.ok())
            return std::move(result.ast);
        std::size_t cut = std::min(result.failure.offset, working.size());
        if (cut >= working.size())
            cut = working.size() - 1;
        if (cut == 0)
            return std::nullopt;
        working = working.substr(0, cut);
        while (!working.empty() &&
               (working.back() == ' ' || working.back() == '\n' || working.back() == '\t' ||
                working.back() == '\r'))
            working.pop_back();
    }
    return std::nullopt;
}

} // namespace

dsl::SourceText mock_repair_rules(const HeuristicCode& icode,
                                  const problems::FeatureSchema& schema) {
    // already executable: nothing to do
    if (icode.is_valid())
        return icode.source;

    std::optional<dsl::Ast> tree;
    if (icode.is_parseable())
        tree = *icode.ast;
    else
        tree = longest_parseable_prefix(icode.source.text);

    if (tree) {
        dsl::AstNode& program = tree->mutable_root();
        fill_or_drop_holes(program);
        if (program.children.size() == 1 && program.children[0].kind == Kind::FnDef &&
            program.children[0].children.size() == 2 &&
            program.children[0].children[0].kind == Kind::ParamList &&
            program.children[0].children[1].kind == Kind::Block) {
            dsl::AstNode& fn = program.children[0];
            std::vector<std::string> params;
            bool clean_params = true;
            for (const AstNode& p : fn.children[0].children) {
                if (p.kind == Kind::Identifier)
                    params.push_back(p.name());
                else
                    clean_params = false;
            }
            if (clean_params && !params.empty()) {
                rebind_block(fn.children[1], params, params.front());
                if (!dsl::block_returns_on_all_paths(fn.children[1])) {
                    AstNode ret = dsl::make_node(Kind::Return);
                    ret.children.push_back(dsl::make_node(Kind::NumberLit, 0.0));
                    fn.children[1].children.push_back(std::move(ret));
                }
            }
        }
        tree->renumber();
        if (dsl::validate(*tree).is_valid)
            return dsl::SourceText{dsl::unparse_text(*tree), dsl::Origin::Llm};
    }

    // rule 5: canonical fallback, valid by construction
    return dsl::SourceText{fallback_source(schema), dsl::Origin::Llm};
}

} // namespace ahd::repair
