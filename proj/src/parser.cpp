// SPDX-License-Identifier: Apache-2.0
#include "ahd/dsl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace ahd::dsl {

namespace {

enum class Tok {
    End,
    Ident,
    Number,
    Hole,
    KwFn,
    KwLet,
    KwIf,
    KwElse,
    KwReturn,
    KwAnd,
    KwOr,
    KwNot,
    KwParams,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Assign, // =
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
};

struct Token {
    Tok type = Tok::End;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0;
};

struct LexError {
    std::size_t offset = 0;
    std::string message;
};

bool lex(std::string_view src, std::vector<Token>& out, LexError& err) {
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
            continue;
        }
        if (c == '#') { // comment to end of line, stripped
            while (i < n && src[i] != '\n')
                ++i;
            continue;
        }
        if (src.compare(i, kHoleToken.size(), kHoleToken) == 0) {
            out.push_back({Tok::Hole, std::string(kHoleToken), 0.0, i});
            i += kHoleToken.size();
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i + 1;
            while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            std::string word(src.substr(i, j - i));
            Tok t = Tok::Ident;
            if (word == "fn") t = Tok::KwFn;
            else if (word == "let") t = Tok::KwLet;
            else if (word == "if") t = Tok::KwIf;
            else if (word == "else") t = Tok::KwElse;
            else if (word == "return") t = Tok::KwReturn;
            else if (word == "and") t = Tok::KwAnd;
            else if (word == "or") t = Tok::KwOr;
            else if (word == "not") t = Tok::KwNot;
            else if (word == "params") t = Tok::KwParams;
            out.push_back({t, std::move(word), 0.0, i});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < n && std::isdigit(static_cast<unsigned char>(src[j])))
                ++j;
            if (j < n && src[j] == '.') {
                if (j + 1 >= n || !std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                    err = {j, "digit expected after decimal point"};
                    return false;
                }
                ++j;
                while (j < n && std::isdigit(static_cast<unsigned char>(src[j])))
                    ++j;
            }
            if (j < n && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < n && (src[k] == '+' || src[k] == '-'))
                    ++k;
                if (k >= n || !std::isdigit(static_cast<unsigned char>(src[k]))) {
                    err = {j, "malformed exponent"};
                    return false;
                }
                j = k;
                while (j < n && std::isdigit(static_cast<unsigned char>(src[j])))
                    ++j;
            }
            std::string word(src.substr(i, j - i));
            double value = 0.0;
            auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
            if (ec != std::errc{} || p != word.data() + word.size()) {
                err = {i, "unreadable numeric literal"};
                return false;
            }
            out.push_back({Tok::Number, std::move(word), value, i});
            i = j;
            continue;
        }
        auto two = [&](char a, char b) { return c == a && i + 1 < n && src[i + 1] == b; };
        if (two('<', '=')) { out.push_back({Tok::Le, "<=", 0.0, i}); i += 2; continue; }
        if (two('>', '=')) { out.push_back({Tok::Ge, ">=", 0.0, i}); i += 2; continue; }
        if (two('=', '=')) { out.push_back({Tok::Eq, "==", 0.0, i}); i += 2; continue; }
        if (two('!', '=')) { out.push_back({Tok::Ne, "!=", 0.0, i}); i += 2; continue; }
        Tok t;
        switch (c) {
        case '(': t = Tok::LParen; break;
        case ')': t = Tok::RParen; break;
        case '{': t = Tok::LBrace; break;
        case '}': t = Tok::RBrace; break;
        case ',': t = Tok::Comma; break;
        case '=': t = Tok::Assign; break;
        case '+': t = Tok::Plus; break;
        case '-': t = Tok::Minus; break;
        case '*': t = Tok::Star; break;
        case '/': t = Tok::Slash; break;
        case '%': t = Tok::Percent; break;
        case '<': t = Tok::Lt; break;
        case '>': t = Tok::Gt; break;
        default:
            err = {i, "unexpected character"};
            return false;
        }
        out.push_back({t, std::string(1, c), 0.0, i});
        ++i;
    }
    out.push_back({Tok::End, "", 0.0, n});
    return true;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ParseResult run() {
        AstNode program = make_node(Kind::Program);
        AstNode top;
        if (!parse_element(top))
            return fail();
        program.children.push_back(std::move(top));
        if (peek().type != Tok::End) {
            error(peek().offset, "end of input", "trailing text after the heuristic");
            return fail();
        }
        ParseResult result;
        result.ast = Ast(std::move(program));
        return result;
    }

  private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok t) {
        if (peek().type == t) {
            advance();
            return true;
        }
        return false;
    }
    bool expect(Tok t, const char* what) {
        if (accept(t))
            return true;
        error(peek().offset, what, std::string("expected ") + what);
        return false;
    }

    void error(std::size_t offset, std::string expected, std::string message) {
        if (!failed_ || offset > failure_.offset) {
            failure_ = {offset, {std::move(expected)}, std::move(message)};
        } else if (offset == failure_.offset) {
            failure_.expected.push_back(std::move(expected));
        }
        failed_ = true;
    }
    ParseResult fail() {
        ParseResult r;
        r.failure = failure_;
        return r;
    }

    // element: dispatch on the leading token. Statement forms parse bare;
    // anything else is an expression.
    bool parse_element(AstNode& out) {
        switch (peek().type) {
        case Tok::KwFn: return parse_fndef(out);
        case Tok::KwLet: return parse_let(out);
        case Tok::KwIf: return parse_if(out);
        case Tok::KwReturn: return parse_return(out);
        default: return parse_expr(out);
        }
    }

    bool parse_fndef(AstNode& out) {
        advance(); // fn
        if (peek().type != Tok::Ident) {
            error(peek().offset, "function name", "expected function name after 'fn'");
            return false;
        }
        std::string name = advance().text;
        if (!expect(Tok::LParen, "'('"))
            return false;
        AstNode params = make_node(Kind::ParamList);
        if (peek().type != Tok::RParen) {
            do {
                AstNode item;
                if (!parse_element(item))
                    return false;
                params.children.push_back(std::move(item));
            } while (accept(Tok::Comma));
        }
        if (!expect(Tok::RParen, "')'"))
            return false;
        AstNode body;
        if (!parse_expr(body))
            return false;
        out = make_node(Kind::FnDef, std::move(name));
        out.children.push_back(std::move(params));
        out.children.push_back(std::move(body));
        return true;
    }

    bool parse_let(AstNode& out) {
        advance(); // let
        if (peek().type != Tok::Ident) {
            error(peek().offset, "variable name", "expected variable name after 'let'");
            return false;
        }
        std::string name = advance().text;
        if (!expect(Tok::Assign, "'='"))
            return false;
        AstNode value;
        if (!parse_expr(value))
            return false;
        out = make_node(Kind::Let, std::move(name));
        out.children.push_back(std::move(value));
        return true;
    }

    bool parse_if(AstNode& out) {
        advance(); // if
        if (!expect(Tok::LParen, "'('"))
            return false;
        AstNode cond;
        if (!parse_element(cond))
            return false;
        if (!expect(Tok::RParen, "')'"))
            return false;
        AstNode then_branch;
        if (!parse_expr(then_branch))
            return false;
        out = make_node(Kind::If);
        out.children.push_back(std::move(cond));
        out.children.push_back(std::move(then_branch));
        if (accept(Tok::KwElse)) {
            AstNode else_branch;
            if (!parse_expr(else_branch))
                return false;
            out.children.push_back(std::move(else_branch));
        }
        return true;
    }

    bool parse_return(AstNode& out) {
        advance(); // return
        AstNode value;
        if (!parse_expr(value))
            return false;
        out = make_node(Kind::Return);
        out.children.push_back(std::move(value));
        return true;
    }

    bool parse_block(AstNode& out) {
        advance(); // {
        out = make_node(Kind::Block);
        while (peek().type != Tok::RBrace && peek().type != Tok::End) {
            AstNode item;
            if (!parse_element(item))
                return false;
            out.children.push_back(std::move(item));
        }
        return expect(Tok::RBrace, "'}'");
    }

    bool parse_expr(AstNode& out) { return parse_or(out); }

    bool parse_or(AstNode& out) {
        if (!parse_and(out))
            return false;
        while (peek().type == Tok::KwOr) {
            advance();
            AstNode rhs;
            if (!parse_and(rhs))
                return false;
            out = binary("or", std::move(out), std::move(rhs));
        }
        return true;
    }

    bool parse_and(AstNode& out) {
        if (!parse_not(out))
            return false;
        while (peek().type == Tok::KwAnd) {
            advance();
            AstNode rhs;
            if (!parse_not(rhs))
                return false;
            out = binary("and", std::move(out), std::move(rhs));
        }
        return true;
    }

    bool parse_not(AstNode& out) {
        if (peek().type == Tok::KwNot) {
            advance();
            AstNode operand;
            if (!parse_not(operand))
                return false;
            out = make_node(Kind::UnaryOp, std::string("not"));
            out.children.push_back(std::move(operand));
            return true;
        }
        return parse_cmp(out);
    }

    // Comparisons do not chain; nested comparisons must be parenthesized.
    bool parse_cmp(AstNode& out) {
        if (!parse_add(out))
            return false;
        const Tok t = peek().type;
        if (t == Tok::Lt || t == Tok::Le || t == Tok::Gt || t == Tok::Ge || t == Tok::Eq ||
            t == Tok::Ne) {
            std::string op = advance().text;
            AstNode rhs;
            if (!parse_add(rhs))
                return false;
            out = binary(std::move(op), std::move(out), std::move(rhs));
        }
        return true;
    }

    bool parse_add(AstNode& out) {
        if (!parse_mul(out))
            return false;
        for (;;) {
            const Tok t = peek().type;
            if (t != Tok::Plus && t != Tok::Minus)
                return true;
            std::string op = advance().text;
            AstNode rhs;
            if (!parse_mul(rhs))
                return false;
            out = binary(std::move(op), std::move(out), std::move(rhs));
        }
    }

    bool parse_mul(AstNode& out) {
        if (!parse_unary(out))
            return false;
        for (;;) {
            const Tok t = peek().type;
            if (t != Tok::Star && t != Tok::Slash && t != Tok::Percent)
                return true;
            std::string op = advance().text;
            AstNode rhs;
            if (!parse_unary(rhs))
                return false;
            out = binary(std::move(op), std::move(out), std::move(rhs));
        }
    }

    bool parse_unary(AstNode& out) {
        if (peek().type == Tok::Minus) {
            advance();
            AstNode operand;
            if (!parse_unary(operand))
                return false;
            out = make_node(Kind::UnaryOp, std::string("-"));
            out.children.push_back(std::move(operand));
            return true;
        }
        return parse_primary(out);
    }

    bool parse_primary(AstNode& out) {
        const Token& tok = peek();
        switch (tok.type) {
        case Tok::Number: {
            const double v = advance().number;
            out = make_node(Kind::NumberLit, v);
            return true;
        }
        case Tok::Hole:
            advance();
            out = make_node(Kind::Hole);
            return true;
        case Tok::Ident: {
            std::string name = advance().text;
            if (peek().type == Tok::LParen)
                return parse_call_args(std::move(name), out);
            out = make_node(Kind::Identifier, std::move(name));
            return true;
        }
        case Tok::KwParams: {
            advance();
            if (!expect(Tok::LParen, "'('"))
                return false;
            out = make_node(Kind::ParamList);
            if (peek().type != Tok::RParen) {
                do {
                    AstNode item;
                    if (!parse_element(item))
                        return false;
                    out.children.push_back(std::move(item));
                } while (accept(Tok::Comma));
            }
            return expect(Tok::RParen, "')'");
        }
        case Tok::LParen: {
            advance();
            if (!parse_element(out))
                return false;
            return expect(Tok::RParen, "')'");
        }
        case Tok::LBrace:
            return parse_block(out);
        case Tok::KwFn:
            // a fn definition directly in expression position reads fine
            return parse_fndef(out);
        default:
            error(tok.offset, "expression", "expected an expression");
            return false;
        }
    }

    bool parse_call_args(std::string name, AstNode& out) {
        advance(); // (
        out = make_node(Kind::Call, std::move(name));
        if (peek().type != Tok::RParen) {
            do {
                AstNode arg;
                if (!parse_element(arg))
                    return false;
                out.children.push_back(std::move(arg));
            } while (accept(Tok::Comma));
        }
        return expect(Tok::RParen, "')'");
    }

    static AstNode binary(std::string op, AstNode lhs, AstNode rhs) {
        AstNode n = make_node(Kind::BinaryOp, std::move(op));
        n.children.push_back(std::move(lhs));
        n.children.push_back(std::move(rhs));
        return n;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ParseFailure failure_;
    bool failed_ = false;
};

} // namespace

ParseResult parse(std::string_view text) {
    std::vector<Token> tokens;
    LexError lex_err;
    if (!lex(text, tokens, lex_err)) {
        ParseResult r;
        r.failure = {lex_err.offset, {"token"}, lex_err.message};
        return r;
    }
    Parser p(std::move(tokens));
    return p.run();
}

ParseResult parse(const SourceText& source) { return parse(std::string_view(source.text)); }

} // namespace ahd::dsl
