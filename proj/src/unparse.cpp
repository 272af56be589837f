// SPDX-License-Identifier: Apache-2.0
#include "ahd/dsl/unparse.hpp"

#include <charconv>

namespace ahd::dsl {

namespace {

// Precedence levels, matching the parser's climb:
// or=1, and=2, not=3, comparison=4 (non-assoc), additive=5,
// multiplicative=6, unary minus=7, primary=8.
int binary_level(const std::string& op) {
    if (op == "or") return 1;
    if (op == "and") return 2;
    if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=") return 4;
    if (op == "+" || op == "-") return 5;
    return 6; // * / %
}

std::string element_text(const AstNode& node);
std::string expr_text(const AstNode& node, int min_level);

std::string child_or_hole(const AstNode& node, std::size_t index, int min_level) {
    if (index < node.children.size())
        return expr_text(node.children[index], min_level);
    return std::string(kHoleToken);
}

std::string join_elements(const std::vector<AstNode>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += sep;
        out += element_text(items[i]);
    }
    return out;
}

std::string element_text(const AstNode& node) {
    switch (node.kind) {
    case Kind::Program: {
        if (node.children.empty())
            return std::string(kHoleToken);
        return join_elements(node.children, " ");
    }
    case Kind::FnDef: {
        std::string out = "fn ";
        out += node.has_name() ? node.name() : std::string("score");
        if (node.children.empty()) {
            out += "(";
            out += kHoleToken;
            out += ") ";
            out += kHoleToken;
            return out;
        }
        const AstNode& params = node.children[0];
        if (params.kind == Kind::ParamList) {
            out += "(" + join_elements(params.children, ", ") + ")";
        } else {
            out += "(" + element_text(params) + ")";
        }
        out += " " + child_or_hole(node, 1, 1);
        for (std::size_t i = 2; i < node.children.size(); ++i)
            out += " " + element_text(node.children[i]);
        return out;
    }
    case Kind::Let: {
        std::string out = "let ";
        out += node.has_name() ? node.name() : std::string("v");
        out += " = " + child_or_hole(node, 0, 1);
        return out;
    }
    case Kind::Return:
        return "return " + child_or_hole(node, 0, 1);
    case Kind::If: {
        std::string out = "if (";
        out += node.children.empty() ? std::string(kHoleToken) : element_text(node.children[0]);
        out += ") " + child_or_hole(node, 1, 1);
        if (node.children.size() >= 3)
            out += " else " + expr_text(node.children[2], 1);
        return out;
    }
    case Kind::Block:
        if (node.children.empty())
            return "{ }";
        return "{ " + join_elements(node.children, " ") + " }";
    case Kind::ParamList:
        return "params(" + join_elements(node.children, ", ") + ")";
    default:
        return expr_text(node, 1);
    }
}

std::string expr_text(const AstNode& node, int min_level) {
    switch (node.kind) {
    case Kind::Identifier:
        return node.has_name() ? node.name() : std::string(kHoleToken);
    case Kind::NumberLit:
        return format_number(node.number());
    case Kind::Hole:
        return std::string(kHoleToken);
    case Kind::Call: {
        std::string out = node.has_name() ? node.name() : std::string("call");
        out += "(" + join_elements(node.children, ", ") + ")";
        return out;
    }
    case Kind::Block:
    case Kind::ParamList:
        return element_text(node); // self-delimiting in any position
    case Kind::UnaryOp: {
        const bool is_not = node.has_name() && node.name() == "not";
        const int level = is_not ? 3 : 7;
        std::string text = is_not ? "not " : "-";
        text += child_or_hole(node, 0, level);
        if (level < min_level)
            return "(" + text + ")";
        return text;
    }
    case Kind::BinaryOp: {
        const std::string op = node.has_name() ? node.name() : std::string("+");
        const int level = binary_level(op);
        const bool non_assoc = (level == 4);
        std::string text = child_or_hole(node, 0, non_assoc ? level + 1 : level);
        text += " " + op + " ";
        text += child_or_hole(node, 1, level + 1);
        for (std::size_t i = 2; i < node.children.size(); ++i)
            text += " " + op + " " + expr_text(node.children[i], level + 1);
        if (level < min_level)
            return "(" + text + ")";
        return text;
    }
    default:
        // Statements and function definitions in expression slots are
        // parenthesized; the parser reads any element back inside parens.
        return "(" + element_text(node) + ")";
    }
}

} // namespace

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{})
        return "0";
    return std::string(buf, end);
}

std::string unparse_text(const Ast& ast) { return element_text(ast.root()); }

SourceText unparse(const Ast& ast) { return SourceText{unparse_text(ast), Origin::Unparser}; }

} // namespace ahd::dsl
