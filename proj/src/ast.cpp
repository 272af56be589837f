// SPDX-License-Identifier: Apache-2.0
#include "ahd/dsl/ast.hpp"

namespace ahd::dsl {

const char* kind_name(Kind k) {
    switch (k) {
    case Kind::Program: return "Program";
    case Kind::FnDef: return "FnDef";
    case Kind::ParamList: return "ParamList";
    case Kind::Block: return "Block";
    case Kind::Let: return "Let";
    case Kind::If: return "If";
    case Kind::Return: return "Return";
    case Kind::BinaryOp: return "BinaryOp";
    case Kind::UnaryOp: return "UnaryOp";
    case Kind::Call: return "Call";
    case Kind::Identifier: return "Identifier";
    case Kind::NumberLit: return "NumberLit";
    case Kind::Hole: return "Hole";
    }
    return "?";
}

namespace {

int assign_ids(AstNode& node, int next) {
    node.node_id = next++;
    for (AstNode& child : node.children)
        next = assign_ids(child, next);
    return next;
}

const AstNode* find_in(const AstNode& node, int node_id) {
    if (node.node_id == node_id)
        return &node;
    for (const AstNode& child : node.children)
        if (const AstNode* hit = find_in(child, node_id))
            return hit;
    return nullptr;
}

void enumerate_in(const AstNode& node, int depth, std::vector<NodeInfo>& out) {
    const std::size_t slot = out.size();
    out.push_back({node.node_id, node.kind, depth, 0});
    int size = 1;
    for (const AstNode& child : node.children) {
        const std::size_t child_slot = out.size();
        enumerate_in(child, depth + 1, out);
        size += out[child_slot].subtree_size;
    }
    out[slot].subtree_size = size;
}

} // namespace

Ast::Ast(AstNode root) : root_(std::move(root)) { renumber(); }

void Ast::renumber() { node_count_ = assign_ids(root_, 0); }

const AstNode* Ast::find(int node_id) const { return find_in(root_, node_id); }

AstNode* Ast::find(int node_id) {
    return const_cast<AstNode*>(find_in(root_, node_id));
}

std::vector<NodeInfo> enumerate_nodes(const Ast& ast) {
    std::vector<NodeInfo> out;
    out.reserve(static_cast<std::size_t>(ast.node_count()));
    enumerate_in(ast.root(), 0, out);
    return out;
}

bool structurally_equal(const AstNode& a, const AstNode& b) {
    if (a.kind != b.kind || a.payload != b.payload || a.children.size() != b.children.size())
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(a.children[i], b.children[i]))
            return false;
    return true;
}

bool structurally_equal(const Ast& a, const Ast& b) {
    return structurally_equal(a.root(), b.root());
}

AstNode make_node(Kind kind, Payload payload, std::vector<AstNode> children) {
    AstNode n;
    n.kind = kind;
    n.payload = std::move(payload);
    n.children = std::move(children);
    return n;
}

} // namespace ahd::dsl
