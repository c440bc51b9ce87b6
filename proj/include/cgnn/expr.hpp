#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgnn::expr {

/// Raised by parse_expr. offset() is the byte offset into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised when evaluation produces a non-finite value. subtree() names the
/// smallest subexpression whose value was not finite.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& what, std::string subtree)
        : std::runtime_error(what + ": " + subtree), subtree_(std::move(subtree)) {}

    const std::string& subtree() const noexcept { return subtree_; }

private:
    std::string subtree_;
};

enum class UnaryOp { neg, sin, cos, tan, tanh, exp, abs };
enum class BinaryOp { add, sub, mul, div, pow };

/// Immutable scalar expression over a fixed, ordered parameter list.
///
/// Copies share the node tree. Evaluation is reentrant and may run
/// concurrently from several threads.
class Expr {
public:
    struct Node;

    /// The constant 0 with no parameters.
    Expr();

    static Expr constant(double value, std::vector<std::string> params = {});

    const std::vector<std::string>& params() const noexcept { return params_; }

    /// Original source text (or the canonical print for synthesized expressions).
    const std::string& source() const noexcept { return source_; }

    /// Fully parenthesized canonical form; parses back to an equivalent tree.
    std::string to_string() const;

    /// Positional evaluation: args[k] binds params()[k].
    double operator()(std::span<const double> args) const;
    double operator()(double a) const { return (*this)(std::span<const double>(&a, 1)); }
    double operator()(double a, double b) const {
        const double v[2] = {a, b};
        return (*this)(std::span<const double>(v, 2));
    }

    bool depends_on(std::string_view name) const;
    bool is_constant() const;

    /// Structural identity (same parameter list and canonical form).
    friend bool operator==(const Expr& a, const Expr& b) {
        return a.params_ == b.params_ && a.to_string() == b.to_string();
    }

private:
    friend Expr parse_expr(std::string_view, std::vector<std::string>);
    Expr(std::shared_ptr<const Node> root, std::vector<std::string> params, std::string source);

    std::shared_ptr<const Node> root_;
    std::vector<std::string> params_;
    std::string source_;
};

/// Parses `text` with the given parameter names. `pi` and `e` are predefined
/// constants; functions are sin, cos, tan, tanh, exp, abs.
Expr parse_expr(std::string_view text, std::vector<std::string> params);

/// Evaluates with named bindings; every parameter must be bound.
double eval_expr(const Expr& e, const std::map<std::string, double>& bindings);

}  // namespace cgnn::expr
