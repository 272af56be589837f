// SPDX-License-Identifier: Apache-2.0
#include "ahd/interp.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "ahd/dsl/builtins.hpp"

namespace ahd::interp {

const char* exec_error_name(ExecError e) {
    switch (e) {
    case ExecError::NonFiniteResult: return "NonFiniteResult";
    case ExecError::StepLimitExceeded: return "StepLimitExceeded";
    case ExecError::DomainError: return "DomainError";
    }
    return "?";
}

namespace {

using dsl::AstNode;
using dsl::Kind;

struct Abort {
    ExecError error;
};

class Evaluator {
  public:
    Evaluator(const ExecLimits& limits) : limits_(limits) {}

    ExecOutcome run(const AstNode& fn, const FeatureVector& features) {
        const AstNode& params = fn.children[0];
        if (params.children.size() != features.values.size())
            throw ArityMismatchError("heuristic takes " + std::to_string(params.children.size()) +
                                     " features, schema supplies " +
                                     std::to_string(features.values.size()));
        for (std::size_t i = 0; i < params.children.size(); ++i)
            env_.emplace_back(params.children[i].name(), features.values[i]);
        try {
            std::optional<double> result = exec_block(fn.children[1]);
            if (!result.has_value())
                return ExecOutcome::failure(ExecError::NonFiniteResult);
            return ExecOutcome::success(check(*result));
        } catch (const Abort& abort) {
            return ExecOutcome::failure(abort.error);
        }
    }

  private:
    double check(double value) {
        if (!std::isfinite(value))
            throw Abort{ExecError::NonFiniteResult};
        return value;
    }

    void step() {
        if (++steps_ > limits_.max_steps)
            throw Abort{ExecError::StepLimitExceeded};
    }

    std::optional<double> exec_block(const AstNode& block) {
        const std::size_t scope_mark = env_.size();
        step();
        for (const AstNode& item : block.children) {
            std::optional<double> returned = exec_stmt(item);
            if (returned.has_value()) {
                env_.resize(scope_mark);
                return returned;
            }
        }
        env_.resize(scope_mark);
        return std::nullopt;
    }

    std::optional<double> exec_stmt(const AstNode& stmt) {
        step();
        switch (stmt.kind) {
        case Kind::Let:
            env_.emplace_back(stmt.name(), eval(stmt.children[0]));
            return std::nullopt;
        case Kind::Return:
            return eval(stmt.children[0]);
        case Kind::If: {
            if (eval(stmt.children[0]) != 0.0)
                return exec_block(stmt.children[1]);
            if (stmt.children.size() == 3)
                return exec_block(stmt.children[2]);
            return std::nullopt;
        }
        default:
            // validate() rejects anything else before execution starts
            throw Abort{ExecError::NonFiniteResult};
        }
    }

    double eval(const AstNode& node) {
        step();
        switch (node.kind) {
        case Kind::NumberLit:
            return check(node.number());
        case Kind::Identifier: {
            const std::string& name = node.name();
            for (auto it = env_.rbegin(); it != env_.rend(); ++it)
                if (it->first == name)
                    return it->second;
            // a bare builtin name is bound but carries no numeric value
            throw Abort{ExecError::NonFiniteResult};
        }
        case Kind::UnaryOp: {
            if (node.name() == "not")
                return eval(node.children[0]) == 0.0 ? 1.0 : 0.0;
            return check(-eval(node.children[0]));
        }
        case Kind::BinaryOp:
            return eval_binary(node);
        case Kind::Call:
            return eval_call(node);
        default:
            throw Abort{ExecError::NonFiniteResult};
        }
    }

    double eval_binary(const AstNode& node) {
        const std::string& op = node.name();
        if (op == "and") {
            if (eval(node.children[0]) == 0.0)
                return 0.0;
            return eval(node.children[1]) != 0.0 ? 1.0 : 0.0;
        }
        if (op == "or") {
            if (eval(node.children[0]) != 0.0)
                return 1.0;
            return eval(node.children[1]) != 0.0 ? 1.0 : 0.0;
        }
        const double lhs = eval(node.children[0]);
        const double rhs = eval(node.children[1]);
        if (op == "+") return check(lhs + rhs);
        if (op == "-") return check(lhs - rhs);
        if (op == "*") return check(lhs * rhs);
        if (op == "/") return check(lhs / rhs);
        if (op == "%") return check(std::fmod(lhs, rhs));
        if (op == "<") return lhs < rhs ? 1.0 : 0.0;
        if (op == "<=") return lhs <= rhs ? 1.0 : 0.0;
        if (op == ">") return lhs > rhs ? 1.0 : 0.0;
        if (op == ">=") return lhs >= rhs ? 1.0 : 0.0;
        if (op == "==") return lhs == rhs ? 1.0 : 0.0;
        if (op == "!=") return lhs != rhs ? 1.0 : 0.0;
        throw Abort{ExecError::NonFiniteResult};
    }

    double eval_call(const AstNode& node) {
        const std::string& callee = node.name();
        if (node.children.size() == 1) {
            const double a = eval(node.children[0]);
            if (callee == "abs") return check(std::fabs(a));
            if (callee == "sqrt") return check(std::sqrt(a));
            if (callee == "exp") return check(std::exp(a));
            if (callee == "log") return check(std::log(a));
            if (callee == "floor") return check(std::floor(a));
        } else if (node.children.size() == 2) {
            const double a = eval(node.children[0]);
            const double b = eval(node.children[1]);
            if (callee == "min") return a < b ? a : b;
            if (callee == "max") return a > b ? a : b;
            if (callee == "pow") return check(std::pow(a, b));
        }
        throw Abort{ExecError::NonFiniteResult};
    }

    const ExecLimits& limits_;
    std::vector<std::pair<std::string, double>> env_;
    long steps_ = 0;
};

} // namespace

ExecOutcome eval_heuristic(const dsl::Ast& ast, const FeatureVector& features,
                           const ExecLimits& limits) {
    const AstNode& program = ast.root();
    if (program.children.size() != 1 || program.children[0].kind != Kind::FnDef ||
        program.children[0].children.size() != 2 ||
        program.children[0].children[0].kind != Kind::ParamList)
        throw InvalidHeuristicError("eval_heuristic: tree did not pass validation");
    Evaluator evaluator(limits);
    return evaluator.run(program.children[0], features);
}

int fn_param_count(const dsl::Ast& ast) {
    const AstNode& program = ast.root();
    if (program.children.size() != 1 || program.children[0].kind != Kind::FnDef)
        return -1;
    const AstNode& fn = program.children[0];
    if (fn.children.empty() || fn.children[0].kind != Kind::ParamList)
        return -1;
    for (const AstNode& p : fn.children[0].children)
        if (p.kind != Kind::Identifier)
            return -1;
    return static_cast<int>(fn.children[0].children.size());
}

} // namespace ahd::interp
