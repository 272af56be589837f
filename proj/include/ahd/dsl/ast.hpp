// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ahd::dsl {

enum class Kind {
    Program,
    FnDef,
    ParamList,
    Block,
    Let,
    If,
    Return,
    BinaryOp,
    UnaryOp,
    Call,
    Identifier,
    NumberLit,
    Hole,
};

const char* kind_name(Kind k);

// Payload holds the operator symbol / name for FnDef, Let, BinaryOp, UnaryOp,
// Call and Identifier, the literal value for NumberLit, and nothing otherwise.
using Payload = std::variant<std::monostate, std::string, double>;

struct AstNode {
    Kind kind = Kind::Hole;
    Payload payload;
    std::vector<AstNode> children;
    int node_id = 0;

    const std::string& name() const { return std::get<std::string>(payload); }
    double number() const { return std::get<double>(payload); }
    bool has_name() const { return std::holds_alternative<std::string>(payload); }
};

// A heuristic's syntax tree. node_ids are assigned in pre-order and stay
// stable until the tree is structurally edited, at which point renumber()
// restores uniqueness.
class Ast {
  public:
    Ast() = default;
    explicit Ast(AstNode root);

    const AstNode& root() const { return root_; }
    AstNode& mutable_root() { return root_; }
    int node_count() const { return node_count_; }

    // Reassigns pre-order ids and recounts nodes. Call after any edit.
    void renumber();

    const AstNode* find(int node_id) const;
    AstNode* find(int node_id);

  private:
    AstNode root_{Kind::Program, {}, {}, 0};
    int node_count_ = 1;
};

struct NodeInfo {
    int node_id = 0;
    Kind kind = Kind::Hole;
    int depth = 0;
    int subtree_size = 0;
};

// Pre-order listing of every node; length equals node_count.
std::vector<NodeInfo> enumerate_nodes(const Ast& ast);

// Kind/payload/child-order equality; node_ids are ignored.
bool structurally_equal(const AstNode& a, const AstNode& b);
bool structurally_equal(const Ast& a, const Ast& b);

AstNode make_node(Kind kind, Payload payload = {}, std::vector<AstNode> children = {});

} // namespace ahd::dsl
