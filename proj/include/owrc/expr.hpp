#pragma once

// A small arithmetic expression language for per-scenario objectives.
//
//   expr    := term   { ('+' | '-') term }
//   term    := unary  { ('*' | '/') unary }
//   unary   := '-' unary | power
//   power   := primary [ '^' unary ]            (right associative)
//   primary := number | 'x'<digits> | 'p'<digits> | func '(' args ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt | abs_smooth
//
// x1..xn are decision variables, p1..pk scenario parameters (both 1-based).
// abs_smooth(u, d) = sqrt(u^2 + d^2). Non-differentiable primitives such as abs
// are rejected. Gradients are computed in one forward pass with n-wide duals.

#include "owrc/problem.hpp"

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace owrc::expr {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& message, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t offset_;
};

class DomainError : public std::runtime_error {
public:
    DomainError(const std::string& message, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Value plus partial derivatives with respect to every decision variable.
struct Dual {
    double value = 0.0;
    Vector partials;

    static Dual constant(double v, std::size_t n) { return {v, Vector::Zero(static_cast<Eigen::Index>(n))}; }
    static Dual variable(double v, std::size_t n, std::size_t index);
};

Dual operator+(const Dual& a, const Dual& b);
Dual operator-(const Dual& a, const Dual& b);
Dual operator*(const Dual& a, const Dual& b);
Dual operator-(const Dual& a);

enum class NodeKind { Number, Variable, Parameter, Negate, Add, Subtract, Multiply, Divide, Power, Call };

enum class Function { Sin, Cos, Exp, Log, Sqrt, AbsSmooth };

struct Node {
    NodeKind kind;
    std::size_t offset = 0;   ///< byte offset in the source text
    double number = 0.0;      ///< Number
    std::size_t index = 0;    ///< Variable / Parameter, 0-based
    Function function = Function::Sin;
    std::vector<std::shared_ptr<const Node>> children;
};

/// Structural equality that ignores source offsets.
bool same_tree(const Node& a, const Node& b);

/// Parsed expression; immutable and cheap to copy.
class Program {
public:
    Program(std::shared_ptr<const Node> root, std::size_t n, std::size_t k, std::string source);

    const Node& root() const noexcept { return *root_; }
    std::size_t num_variables() const noexcept { return n_; }
    std::size_t num_parameters() const noexcept { return k_; }
    const std::string& source() const noexcept { return source_; }

    /// Value and exact gradient at (x, scenario). Throws DomainError.
    ValueGradient eval_grad(const Vector& x, const Vector& scenario) const;
    /// Value only.
    double eval(const Vector& x, const Vector& scenario) const;

    /// Canonical fully parenthesized text; parse(to_string()) reproduces the tree.
    std::string to_string() const;

    bool operator==(const Program& other) const { return same_tree(*root_, *other.root_); }

private:
    std::shared_ptr<const Node> root_;
    std::size_t n_;
    std::size_t k_;
    std::string source_;
};

/// Parses `text` against n decision variables and k scenario parameters.
Program parse(std::string_view text, std::size_t n, std::size_t k);

/// Problem whose objective j is programs[j] evaluated at each scenario.
ProblemInstance make_expression_problem(std::string name, std::size_t n,
                                        ScenarioSet scenarios, std::vector<Program> programs);

}  // namespace owrc::expr
