#include "cgnn/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace cgnn::expr {

struct Expr::Node {
    enum class Kind { constant, variable, unary, binary };

    Kind kind = Kind::constant;
    double value = 0.0;
    std::size_t index = 0;
    std::string symbol;  // printed name for pi/e
    UnaryOp uop = UnaryOp::neg;
    BinaryOp bop = BinaryOp::add;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Node = Expr::Node;

const char* unary_name(UnaryOp op) {
    switch (op) {
    case UnaryOp::neg: return "-";
    case UnaryOp::sin: return "sin";
    case UnaryOp::cos: return "cos";
    case UnaryOp::tan: return "tan";
    case UnaryOp::tanh: return "tanh";
    case UnaryOp::exp: return "exp";
    case UnaryOp::abs: return "abs";
    }
    return "?";
}

char binary_symbol(BinaryOp op) {
    switch (op) {
    case BinaryOp::add: return '+';
    case BinaryOp::sub: return '-';
    case BinaryOp::mul: return '*';
    case BinaryOp::div: return '/';
    case BinaryOp::pow: return '^';
    }
    return '?';
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (v < 0) return "(" + s + ")";
    return s;
}

void print(const Node& n, const std::vector<std::string>& params, std::string& out) {
    switch (n.kind) {
    case Node::Kind::constant:
        out += n.symbol.empty() ? format_number(n.value) : n.symbol;
        return;
    case Node::Kind::variable:
        out += params[n.index];
        return;
    case Node::Kind::unary:
        if (n.uop == UnaryOp::neg) {
            out += "(-";
            print(*n.lhs, params, out);
            out += ")";
        } else {
            out += unary_name(n.uop);
            out += "(";
            print(*n.lhs, params, out);
            out += ")";
        }
        return;
    case Node::Kind::binary:
        out += "(";
        print(*n.lhs, params, out);
        out += binary_symbol(n.bop);
        print(*n.rhs, params, out);
        out += ")";
        return;
    }
}

double eval_node(const Node& n, std::span<const double> args, const std::vector<std::string>& params) {
    double r = 0.0;
    switch (n.kind) {
    case Node::Kind::constant:
        return n.value;
    case Node::Kind::variable:
        r = args[n.index];
        break;
    case Node::Kind::unary: {
        const double a = eval_node(*n.lhs, args, params);
        switch (n.uop) {
        case UnaryOp::neg: r = -a; break;
        case UnaryOp::sin: r = std::sin(a); break;
        case UnaryOp::cos: r = std::cos(a); break;
        case UnaryOp::tan: r = std::tan(a); break;
        case UnaryOp::tanh: r = std::tanh(a); break;
        case UnaryOp::exp: r = std::exp(a); break;
        case UnaryOp::abs: r = std::fabs(a); break;
        }
        break;
    }
    case Node::Kind::binary: {
        const double a = eval_node(*n.lhs, args, params);
        const double b = eval_node(*n.rhs, args, params);
        switch (n.bop) {
        case BinaryOp::add: r = a + b; break;
        case BinaryOp::sub: r = a - b; break;
        case BinaryOp::mul: r = a * b; break;
        case BinaryOp::div: r = a / b; break;
        case BinaryOp::pow: r = (b == 2.0) ? a * a : std::pow(a, b); break;
        }
        break;
    }
    }
    if (!std::isfinite(r)) {
        std::string s;
        print(n, params, s);
        throw EvalError("non-finite result", s);
    }
    return r;
}

bool uses_variable(const Node& n, std::size_t index) {
    switch (n.kind) {
    case Node::Kind::constant: return false;
    case Node::Kind::variable: return n.index == index;
    case Node::Kind::unary: return uses_variable(*n.lhs, index);
    case Node::Kind::binary: return uses_variable(*n.lhs, index) || uses_variable(*n.rhs, index);
    }
    return false;
}

bool has_variables(const Node& n) {
    switch (n.kind) {
    case Node::Kind::constant: return false;
    case Node::Kind::variable: return true;
    case Node::Kind::unary: return has_variables(*n.lhs);
    case Node::Kind::binary: return has_variables(*n.lhs) || has_variables(*n.rhs);
    }
    return false;
}

NodePtr make_constant(double v, std::string symbol = {}) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    n->symbol = std::move(symbol);
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::unary;
    n->uop = op;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->bop = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

// Recursive descent over
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := ('-'|'+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& params) : text_(text), params_(params) {}

    NodePtr parse() {
        NodePtr n = expression();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make_binary(BinaryOp::add, lhs, term());
            else if (accept('-'))
                lhs = make_binary(BinaryOp::sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make_binary(BinaryOp::mul, lhs, unary());
            else if (accept('/'))
                lhs = make_binary(BinaryOp::div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make_unary(UnaryOp::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make_binary(BinaryOp::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = expression();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        const std::string literal(text_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(literal.c_str(), &end);
        if (end != literal.c_str() + literal.size()) fail_at("syntax error: malformed number '" + literal + "'", start);
        return make_constant(v);
    }

    NodePtr name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        const std::string id(text_.substr(start, pos_ - start));

        skip_space();
        const bool call = pos_ < text_.size() && text_[pos_] == '(';
        if (call) {
            static const std::pair<const char*, UnaryOp> functions[] = {
                {"sin", UnaryOp::sin}, {"cos", UnaryOp::cos},   {"tan", UnaryOp::tan},
                {"tanh", UnaryOp::tanh}, {"exp", UnaryOp::exp}, {"abs", UnaryOp::abs},
            };
            const auto it = std::find_if(std::begin(functions), std::end(functions),
                                         [&](const auto& f) { return id == f.first; });
            if (it == std::end(functions)) fail_at("unknown identifier '" + id + "'", start);
            ++pos_;
            std::vector<NodePtr> args;
            if (!accept(')')) {
                args.push_back(expression());
                while (accept(',')) args.push_back(expression());
                if (!accept(')')) fail("expected ')'");
            }
            if (args.size() != 1)
                fail_at("arity mismatch: '" + id + "' takes 1 argument, got " + std::to_string(args.size()), start);
            return make_unary(it->second, args.front());
        }

        const auto p = std::find(params_.begin(), params_.end(), id);
        if (p != params_.end()) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::variable;
            n->index = static_cast<std::size_t>(p - params_.begin());
            return n;
        }
        if (id == "pi") return make_constant(std::numbers::pi, "pi");
        if (id == "e") return make_constant(std::numbers::e, "e");
        if (id == "sin" || id == "cos" || id == "tan" || id == "tanh" || id == "exp" || id == "abs")
            fail_at("arity mismatch: '" + id + "' takes 1 argument, got 0", start);
        fail_at("unknown identifier '" + id + "'", start);
    }

    std::string_view text_;
    const std::vector<std::string>& params_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : Expr(make_constant(0.0), {}, "0") {}

Expr::Expr(std::shared_ptr<const Node> root, std::vector<std::string> params, std::string source)
    : root_(std::move(root)), params_(std::move(params)), source_(std::move(source)) {}

Expr Expr::constant(double value, std::vector<std::string> params) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return Expr(make_constant(value), std::move(params), buf);
}

std::string Expr::to_string() const {
    std::string out;
    print(*root_, params_, out);
    return out;
}

double Expr::operator()(std::span<const double> args) const {
    if (args.size() < params_.size())
        throw std::invalid_argument("expression '" + source_ + "' needs " + std::to_string(params_.size()) +
                                    " arguments");
    return eval_node(*root_, args, params_);
}

bool Expr::depends_on(std::string_view name) const {
    const auto p = std::find(params_.begin(), params_.end(), name);
    if (p == params_.end()) return false;
    return uses_variable(*root_, static_cast<std::size_t>(p - params_.begin()));
}

bool Expr::is_constant() const { return !has_variables(*root_); }

Expr parse_expr(std::string_view text, std::vector<std::string> params) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError("empty expression", 0);
    for (std::size_t k = 0; k < text.size(); ++k)
        if (static_cast<unsigned char>(text[k]) >= 0x80) throw ParseError("non-ASCII character", k);
    Parser parser(text, params);
    NodePtr root = parser.parse();
    return Expr(std::move(root), std::move(params), std::string(text));
}

double eval_expr(const Expr& e, const std::map<std::string, double>& bindings) {
    std::vector<double> args;
    args.reserve(e.params().size());
    for (const auto& name : e.params()) {
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw std::invalid_argument("unbound variable '" + name + "'");
        args.push_back(it->second);
    }
    return e(args);
}

}  // namespace cgnn::expr
