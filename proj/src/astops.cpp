// SPDX-License-Identifier: Apache-2.0
#include "ahd/astops.hpp"

#include "ahd/dsl/unparse.hpp"
#include "ahd/fingerprint.hpp"

namespace ahd::astops {

namespace {

// Locates the parent of node_id and the child slot holding it.
struct Slot {
    dsl::AstNode* parent = nullptr;
    std::size_t index = 0;
};

bool find_slot(dsl::AstNode& node, int node_id, Slot& out) {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (node.children[i].node_id == node_id) {
            out = {&node, i};
            return true;
        }
        if (find_slot(node.children[i], node_id, out))
            return true;
    }
    return false;
}

int pick_non_root(const dsl::Ast& tree, Rng& rng) {
    // Pre-order ids are dense, so non-root ids are exactly 1..count-1.
    return 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(tree.node_count() - 1)));
}

void require_destructible(const dsl::Ast& tree, const char* who) {
    if (tree.node_count() < 2)
        throw DegenerateTreeError(std::string(who) + ": tree has only a root, nothing to select");
}

std::string tree_fingerprint(const dsl::Ast& tree) {
    return fingerprint_of(dsl::unparse_text(tree));
}

HeuristicCode finish_product(const dsl::Ast& result, std::string op,
                             std::vector<std::string> parents,
                             const std::vector<LineageEvent>& inherited) {
    HeuristicCode out = make_heuristic_code(dsl::unparse(result));
    out.lineage = inherited;
    out.lineage.push_back({std::move(op), std::move(parents)});
    return out;
}

const dsl::Ast& tree_of(const HeuristicCode& code, const char* who) {
    if (!code.ast)
        throw UnparseableInputError(std::string(who) + ": source text does not parse");
    return *code.ast;
}

} // namespace

dsl::Ast delete_node(const dsl::Ast& tree, int node_id) {
    if (node_id == tree.root().node_id)
        throw DegenerateTreeError("delete_node: the root is not deletable");
    dsl::Ast result = tree;
    Slot slot;
    if (!find_slot(result.mutable_root(), node_id, slot))
        throw DegenerateTreeError("delete_node: no such node id");
    slot.parent->children.erase(slot.parent->children.begin() +
                                static_cast<std::ptrdiff_t>(slot.index));
    result.renumber();
    return result;
}

dsl::Ast replace_subtree(const dsl::Ast& tree, int node_id, const dsl::AstNode& donor) {
    if (node_id == tree.root().node_id)
        throw DegenerateTreeError("replace_subtree: the root is not replaceable");
    dsl::Ast result = tree;
    Slot slot;
    if (!find_slot(result.mutable_root(), node_id, slot))
        throw DegenerateTreeError("replace_subtree: no such node id");
    slot.parent->children[slot.index] = donor;
    result.renumber();
    return result;
}

DestructionOutcome random_delete_node(const dsl::Ast& tree, Rng& rng) {
    require_destructible(tree, "random_delete_node");
    const int target = pick_non_root(tree, rng);
    DestructionOutcome out;
    out.result = delete_node(tree, target);
    out.op_kind = OpKind::Deletion;
    out.removed_node_id = target;
    out.parent_fingerprints = {tree_fingerprint(tree)};
    return out;
}

DestructionOutcome random_crossover(const dsl::Ast& first, const dsl::Ast& second, Rng& rng) {
    require_destructible(first, "random_crossover");
    require_destructible(second, "random_crossover");
    const int target = pick_non_root(first, rng);
    const int donor = pick_non_root(second, rng);
    DestructionOutcome out;
    out.result = replace_subtree(first, target, *second.find(donor));
    out.op_kind = OpKind::Crossover;
    out.donor_node_id = donor;
    out.removed_node_id = target;
    out.parent_fingerprints = {tree_fingerprint(first), tree_fingerprint(second)};
    return out;
}

std::pair<DestructionOutcome, DestructionOutcome>
random_crossover_pair(const dsl::Ast& first, const dsl::Ast& second, Rng& rng) {
    require_destructible(first, "random_crossover");
    require_destructible(second, "random_crossover");
    const int target = pick_non_root(first, rng);
    const int donor = pick_non_root(second, rng);

    DestructionOutcome a;
    a.result = replace_subtree(first, target, *second.find(donor));
    a.op_kind = OpKind::Crossover;
    a.donor_node_id = donor;
    a.removed_node_id = target;
    a.parent_fingerprints = {tree_fingerprint(first), tree_fingerprint(second)};

    DestructionOutcome b;
    b.result = replace_subtree(second, donor, *first.find(target));
    b.op_kind = OpKind::Crossover;
    b.donor_node_id = target;
    b.removed_node_id = donor;
    b.parent_fingerprints = {tree_fingerprint(second), tree_fingerprint(first)};
    return {std::move(a), std::move(b)};
}

HeuristicCode apply_vi(const HeuristicCode& code, Rng& rng) {
    const dsl::Ast& tree = tree_of(code, "apply_vi");
    DestructionOutcome out = random_delete_node(tree, rng);
    return finish_product(out.result, "vi-delete", {code.fingerprint}, code.lineage);
}

HeuristicCode apply_vi(const HeuristicCode& code, const HeuristicCode& partner, Rng& rng) {
    const dsl::Ast& tree = tree_of(code, "apply_vi");
    const dsl::Ast& donor = tree_of(partner, "apply_vi");
    DestructionOutcome out = random_crossover(tree, donor, rng);
    return finish_product(out.result, "vi-crossover", {code.fingerprint, partner.fingerprint},
                          code.lineage);
}

HeuristicCode apply_ii(const HeuristicCode& code, Rng& rng, IiStrategy strategy,
                       const RepairFn& repair) {
    if (strategy == IiStrategy::StructuralOnly) {
        if (!code.is_parseable())
            throw UnparseableInputError(
                "apply_ii: unlexable I-Code, route it through RepairThenDestroy");
        DestructionOutcome out = random_delete_node(*code.ast, rng);
        return finish_product(out.result, "ii-structural", {code.fingerprint}, code.lineage);
    }
    if (!repair)
        throw ProviderFailureError("apply_ii: RepairThenDestroy needs a repair function");
    HeuristicCode repaired = repair(code);
    if (!repaired.is_valid()) {
        // Repair did not produce executable code; the product is still an
        // I-Code, which is all II promises.
        return repaired;
    }
    HeuristicCode destroyed = apply_vi(repaired, rng);
    destroyed.lineage.push_back({"ii-repair-destroy", {code.fingerprint}});
    return destroyed;
}

} // namespace ahd::astops
