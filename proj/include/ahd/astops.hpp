// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ahd/dsl/ast.hpp"
#include "ahd/errors.hpp"
#include "ahd/heuristic_code.hpp"
#include "ahd/rng.hpp"

namespace ahd::astops {

enum class OpKind { Crossover, Deletion };

struct DestructionOutcome {
    dsl::Ast result;
    OpKind op_kind = OpKind::Deletion;
    std::optional<int> donor_node_id;   // crossover: selected node in the donor tree
    std::optional<int> removed_node_id; // node removed (deletion) or replaced (crossover)
    std::vector<std::string> parent_fingerprints;
};

// Deterministic primitives. node_id refers to pre-order ids as assigned by
// Ast::renumber(); the root (id 0) is never a legal target.
dsl::Ast delete_node(const dsl::Ast& tree, int node_id);
dsl::Ast replace_subtree(const dsl::Ast& tree, int node_id, const dsl::AstNode& donor);

// Removes a uniformly chosen non-root node together with its subtree. The
// parent simply loses that child; the unparser renders any now-missing
// required child as the hole token.
DestructionOutcome random_delete_node(const dsl::Ast& tree, Rng& rng);

// Swaps uniformly chosen non-root subtrees, no kind-compatibility filtering.
// Returns the product rooted in the first parent; random_crossover_pair gives
// the mirror product from the same two selections.
DestructionOutcome random_crossover(const dsl::Ast& first, const dsl::Ast& second, Rng& rng);
std::pair<DestructionOutcome, DestructionOutcome> random_crossover_pair(const dsl::Ast& first,
                                                                        const dsl::Ast& second,
                                                                        Rng& rng);

// VI: valid code in, destruction product out, labeled and revalidated. The
// result is routed as an invalid code by the caller even when it happens to
// stay valid. One-argument form deletes; two-argument form crosses over.
HeuristicCode apply_vi(const HeuristicCode& code, Rng& rng);
HeuristicCode apply_vi(const HeuristicCode& code, const HeuristicCode& partner, Rng& rng);

enum class IiStrategy { StructuralOnly, RepairThenDestroy };

using RepairFn = std::function<HeuristicCode(const HeuristicCode&)>;

// II: invalid code to invalid code. StructuralOnly destroys the I-Code's own
// tree (requires it to parse); RepairThenDestroy composes the caller-supplied
// repair with apply_vi.
HeuristicCode apply_ii(const HeuristicCode& code, Rng& rng, IiStrategy strategy,
                       const RepairFn& repair = {});

} // namespace ahd::astops
