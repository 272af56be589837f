// SPDX-License-Identifier: Apache-2.0
#include "ahd/dsl/validate.hpp"

#include <algorithm>

#include "ahd/dsl/builtins.hpp"

namespace ahd::dsl {

const char* violation_name(ViolationKind k) {
    switch (k) {
    case ViolationKind::UnboundIdentifier: return "UnboundIdentifier";
    case ViolationKind::MissingReturn: return "MissingReturn";
    case ViolationKind::BadArity: return "BadArity";
    case ViolationKind::HolePresent: return "HolePresent";
    case ViolationKind::UnknownCall: return "UnknownCall";
    case ViolationKind::EmptyBlock: return "EmptyBlock";
    }
    return "?";
}

namespace {

bool always_returns(const AstNode& node);

bool block_always_returns(const AstNode& block) {
    for (const AstNode& item : block.children)
        if (always_returns(item))
            return true;
    return false;
}

bool always_returns(const AstNode& node) {
    if (node.kind == Kind::Return)
        return true;
    if (node.kind == Kind::Block)
        return block_always_returns(node);
    if (node.kind == Kind::If && node.children.size() == 3)
        return always_returns(node.children[1]) && always_returns(node.children[2]);
    return false;
}

class Checker {
  public:
    explicit Checker(std::vector<Violation>& out) : out_(out) {}

    void check_program(const AstNode& program) {
        if (program.children.size() != 1 || program.children[0].kind != Kind::FnDef) {
            if (!(program.children.size() == 1 && program.children[0].kind == Kind::Hole))
                add(program.node_id, ViolationKind::BadArity,
                    "program must contain exactly one fn definition");
        }
        for (const AstNode& child : program.children) {
            if (child.kind == Kind::FnDef)
                check_fndef(child);
            else
                visit_generic(child);
        }
    }

  private:
    void add(int node_id, ViolationKind kind, std::string message) {
        out_.push_back({node_id, kind, std::move(message)});
    }

    void check_fndef(const AstNode& fn) {
        std::vector<std::string> scope;
        if (fn.children.size() != 2) {
            add(fn.node_id, ViolationKind::BadArity, "fn must have a parameter list and a body");
        }
        if (!fn.children.empty()) {
            const AstNode& params = fn.children[0];
            if (params.kind == Kind::ParamList) {
                for (const AstNode& p : params.children) {
                    if (p.kind == Kind::Identifier) {
                        scope.push_back(p.name());
                    } else if (p.kind == Kind::Hole) {
                        add(p.node_id, ViolationKind::HolePresent, "hole in parameter list");
                    } else {
                        add(p.node_id, ViolationKind::BadArity, "parameter is not an identifier");
                        visit_generic(p);
                    }
                }
            } else if (params.kind == Kind::Hole) {
                add(params.node_id, ViolationKind::HolePresent, "hole in place of parameter list");
            } else {
                add(params.node_id, ViolationKind::BadArity,
                    "fn parameter slot does not hold a parameter list");
                visit_expr(params, scope);
            }
        }
        if (fn.children.size() >= 2) {
            const AstNode& body = fn.children[1];
            if (body.kind == Kind::Block) {
                if (body.children.empty())
                    add(body.node_id, ViolationKind::EmptyBlock, "fn body is empty");
                if (!block_always_returns(body))
                    add(body.node_id, ViolationKind::MissingReturn,
                        "a control path through the body does not return");
                visit_block(body, scope);
            } else if (body.kind == Kind::Hole) {
                add(body.node_id, ViolationKind::HolePresent, "hole in place of fn body");
            } else {
                add(body.node_id, ViolationKind::BadArity, "fn body is not a block");
                visit_expr(body, scope);
            }
        }
    }

    void visit_block(const AstNode& block, std::vector<std::string> scope) {
        for (const AstNode& item : block.children) {
            switch (item.kind) {
            case Kind::Let:
                check_arity(item, 1, "let binds exactly one value");
                if (!item.children.empty())
                    visit_expr(item.children[0], scope);
                if (item.has_name())
                    scope.push_back(item.name());
                break;
            case Kind::Return:
                check_arity(item, 1, "return carries exactly one value");
                if (!item.children.empty())
                    visit_expr(item.children[0], scope);
                break;
            case Kind::If:
                check_if(item, scope);
                break;
            case Kind::Hole:
                add(item.node_id, ViolationKind::HolePresent, "hole in statement position");
                break;
            default:
                add(item.node_id, ViolationKind::BadArity,
                    std::string("statement of kind ") + kind_name(item.kind) + " is not allowed");
                visit_expr(item, scope);
                break;
            }
        }
    }

    void check_if(const AstNode& node, const std::vector<std::string>& scope) {
        if (node.children.size() < 2 || node.children.size() > 3)
            add(node.node_id, ViolationKind::BadArity, "if takes a condition and one or two branches");
        if (!node.children.empty())
            visit_expr(node.children[0], scope);
        for (std::size_t i = 1; i < node.children.size(); ++i) {
            const AstNode& branch = node.children[i];
            if (branch.kind == Kind::Block) {
                visit_block(branch, scope);
            } else if (branch.kind == Kind::Hole) {
                add(branch.node_id, ViolationKind::HolePresent, "hole in place of a branch");
            } else {
                add(branch.node_id, ViolationKind::BadArity, "if branch is not a block");
                visit_expr(branch, scope);
            }
        }
    }

    // Expression slots: anything that is not an expression kind is a
    // structural leftover of destruction. Holes are reported once, as holes.
    void visit_expr(const AstNode& node, const std::vector<std::string>& scope) {
        switch (node.kind) {
        case Kind::Identifier: {
            const std::string& name = node.name();
            const bool bound = is_builtin(name) ||
                               std::find(scope.begin(), scope.end(), name) != scope.end();
            if (!bound)
                add(node.node_id, ViolationKind::UnboundIdentifier,
                    "identifier '" + name + "' is not bound");
            return;
        }
        case Kind::NumberLit:
            return;
        case Kind::Hole:
            add(node.node_id, ViolationKind::HolePresent, "hole in expression position");
            return;
        case Kind::Call: {
            const std::string& callee = node.name();
            const auto arity = builtin_arity(callee);
            if (!arity) {
                add(node.node_id, ViolationKind::UnknownCall,
                    "call to unknown function '" + callee + "'");
            } else if (static_cast<int>(node.children.size()) != *arity) {
                add(node.node_id, ViolationKind::BadArity,
                    "'" + callee + "' takes " + std::to_string(*arity) + " argument(s)");
            }
            for (const AstNode& arg : node.children)
                visit_expr(arg, scope);
            return;
        }
        case Kind::BinaryOp:
            check_arity(node, 2, "binary operator takes two operands");
            for (const AstNode& c : node.children)
                visit_expr(c, scope);
            return;
        case Kind::UnaryOp:
            check_arity(node, 1, "unary operator takes one operand");
            for (const AstNode& c : node.children)
                visit_expr(c, scope);
            return;
        default:
            add(node.node_id, ViolationKind::BadArity,
                std::string(kind_name(node.kind)) + " cannot appear in expression position");
            visit_generic(node);
            return;
        }
    }

    void check_arity(const AstNode& node, std::size_t want, const char* msg) {
        // A hole standing in for a required child is reported as a hole only.
        if (node.children.size() != want)
            add(node.node_id, ViolationKind::BadArity, msg);
    }

    // Fallback descent for structurally misplaced subtrees: still surface
    // holes so repair prompts see everything.
    void visit_generic(const AstNode& node) {
        if (node.kind == Kind::Hole)
            add(node.node_id, ViolationKind::HolePresent, "hole present");
        for (const AstNode& child : node.children)
            visit_generic(child);
    }

    std::vector<Violation>& out_;
};

} // namespace

bool block_returns_on_all_paths(const AstNode& block) { return block_always_returns(block); }

ValidityReport validate(const Ast& ast) {
    ValidityReport report;
    Checker checker(report.violations);
    checker.check_program(ast.root());
    report.is_valid = report.violations.empty();
    return report;
}

std::string summarize(const ValidityReport& report) {
    if (report.is_valid)
        return "valid";
    std::string out;
    for (const Violation& v : report.violations) {
        if (!out.empty())
            out += "; ";
        out += std::string(violation_name(v.kind)) + " at node " + std::to_string(v.node_id) +
               ": " + v.message;
    }
    return out;
}

} // namespace ahd::dsl
