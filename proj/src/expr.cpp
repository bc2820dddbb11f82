#include "owrc/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>

namespace owrc::expr {

SyntaxError::SyntaxError(const std::string& message, std::size_t offset)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + message),
      message_(message), offset_(offset) {}

DomainError::DomainError(const std::string& message, std::size_t offset)
    : std::runtime_error("domain error at offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

Dual Dual::variable(double v, std::size_t n, std::size_t index) {
    Dual d = constant(v, n);
    d.partials(static_cast<Eigen::Index>(index)) = 1.0;
    return d;
}

Dual operator+(const Dual& a, const Dual& b) { return {a.value + b.value, a.partials + b.partials}; }
Dual operator-(const Dual& a, const Dual& b) { return {a.value - b.value, a.partials - b.partials}; }
Dual operator*(const Dual& a, const Dual& b) {
    return {a.value * b.value, b.value * a.partials + a.value * b.partials};
}
Dual operator-(const Dual& a) { return {-a.value, -a.partials}; }

namespace {

using NodePtr = std::shared_ptr<const Node>;

struct FunctionInfo {
    std::string_view name;
    Function function;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 6> kFunctions{{
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1},
    {"abs_smooth", Function::AbsSmooth, 2},
}};

std::string_view function_name(Function f) {
    for (const auto& info : kFunctions) {
        if (info.function == f) return info.name;
    }
    return "?";
}

NodePtr make_node(NodeKind kind, std::size_t offset, std::vector<NodePtr> children = {}) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->offset = offset;
    node->children = std::move(children);
    return node;
}

class Parser {
public:
    Parser(std::string_view text, std::size_t n, std::size_t k) : text_(text), n_(n), k_(k) {}

    NodePtr parse() {
        skip_space();
        if (pos_ >= text_.size()) {
            throw SyntaxError("empty expression", pos_);
        }
        NodePtr root = parse_expr();
        skip_space();
        if (pos_ < text_.size()) {
            if (text_[pos_] == ')') throw SyntaxError("unbalanced parentheses: unexpected ')'", pos_);
            throw SyntaxError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        }
        return root;
    }

private:
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

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            skip_space();
            const std::size_t at = pos_;
            if (accept('+')) {
                lhs = make_node(NodeKind::Add, at, {lhs, parse_term()});
            } else if (accept('-')) {
                lhs = make_node(NodeKind::Subtract, at, {lhs, parse_term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (true) {
            skip_space();
            const std::size_t at = pos_;
            if (accept('*')) {
                lhs = make_node(NodeKind::Multiply, at, {lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = make_node(NodeKind::Divide, at, {lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        skip_space();
        const std::size_t at = pos_;
        if (accept('-')) {
            return make_node(NodeKind::Negate, at, {parse_unary()});
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        skip_space();
        const std::size_t at = pos_;
        if (accept('^')) {
            return make_node(NodeKind::Power, at, {base, parse_unary()});
        }
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        const std::size_t at = pos_;
        if (pos_ >= text_.size()) {
            throw SyntaxError("unexpected end of expression", pos_);
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            if (!accept(')')) {
                throw SyntaxError("unbalanced parentheses: expected ')'", pos_);
            }
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
                ++end;
            }
            const std::string_view ident = text_.substr(pos_, end - pos_);
            pos_ = end;
            return parse_identifier(ident, at);
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", at);
    }

    NodePtr parse_number() {
        const std::size_t at = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            std::size_t count = 0;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) {
                ++end;
                ++count;
            }
            return count;
        };
        std::size_t mantissa = digits();
        if (end < text_.size() && text_[end] == '.') {
            ++end;
            mantissa += digits();
        }
        if (mantissa == 0) {
            throw SyntaxError("malformed numeral", at);
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            ++end;
            if (end < text_.size() && (text_[end] == '+' || text_[end] == '-')) ++end;
            if (digits() == 0) {
                throw SyntaxError("malformed numeral: missing exponent digits", at);
            }
        }
        if (end < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) {
            throw SyntaxError("malformed numeral", at);
        }
        const std::string literal(text_.substr(at, end - at));
        char* stop = nullptr;
        const double value = std::strtod(literal.c_str(), &stop);
        if (stop != literal.c_str() + literal.size() || !std::isfinite(value)) {
            throw SyntaxError("malformed numeral", at);
        }
        pos_ = end;
        auto node = std::make_shared<Node>();
        node->kind = NodeKind::Number;
        node->offset = at;
        node->number = value;
        return node;
    }

    NodePtr parse_identifier(std::string_view ident, std::size_t at) {
        if ((ident[0] == 'x' || ident[0] == 'p') && ident.size() > 1) {
            std::size_t index = 0;
            const auto* first = ident.data() + 1;
            const auto* last = ident.data() + ident.size();
            auto [ptr, ec] = std::from_chars(first, last, index);
            if (ec == std::errc() && ptr == last) {
                const bool is_var = ident[0] == 'x';
                const std::size_t limit = is_var ? n_ : k_;
                if (index == 0 || index > limit) {
                    throw SyntaxError(std::string(is_var ? "variable" : "parameter") + " index out of range: " +
                                          std::string(ident),
                                      at);
                }
                auto node = std::make_shared<Node>();
                node->kind = is_var ? NodeKind::Variable : NodeKind::Parameter;
                node->offset = at;
                node->index = index - 1;
                return node;
            }
        }
        for (const auto& info : kFunctions) {
            if (info.name == ident) {
                return parse_call(info, at);
            }
        }
        if (ident == "abs") {
            throw SyntaxError("abs is not differentiable; use abs_smooth(u, delta)", at);
        }
        throw SyntaxError("unknown identifier '" + std::string(ident) + "'", at);
    }

    NodePtr parse_call(const FunctionInfo& info, std::size_t at) {
        if (!accept('(')) {
            throw SyntaxError("expected '(' after " + std::string(info.name), pos_);
        }
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        while (accept(',')) {
            args.push_back(parse_expr());
        }
        if (!accept(')')) {
            throw SyntaxError("unbalanced parentheses: expected ')'", pos_);
        }
        if (args.size() != info.arity) {
            throw SyntaxError(std::string(info.name) + " expects " + std::to_string(info.arity) + " argument(s)", at);
        }
        auto node = std::make_shared<Node>();
        node->kind = NodeKind::Call;
        node->offset = at;
        node->function = info.function;
        node->children = std::move(args);
        return node;
    }

    std::string_view text_;
    std::size_t n_;
    std::size_t k_;
    std::size_t pos_ = 0;
};

bool is_integer(double v) { return std::isfinite(v) && std::trunc(v) == v; }

class Evaluator {
public:
    Evaluator(const Vector& x, const Vector& scenario) : x_(x), s_(scenario), n_(static_cast<std::size_t>(x.size())) {}

    Dual eval(const Node& node) const {
        switch (node.kind) {
            case NodeKind::Number:
                return Dual::constant(node.number, n_);
            case NodeKind::Variable:
                return Dual::variable(x_(static_cast<Eigen::Index>(node.index)), n_, node.index);
            case NodeKind::Parameter:
                return Dual::constant(s_(static_cast<Eigen::Index>(node.index)), n_);
            case NodeKind::Negate:
                return -eval(*node.children[0]);
            case NodeKind::Add:
                return eval(*node.children[0]) + eval(*node.children[1]);
            case NodeKind::Subtract:
                return eval(*node.children[0]) - eval(*node.children[1]);
            case NodeKind::Multiply:
                return eval(*node.children[0]) * eval(*node.children[1]);
            case NodeKind::Divide: {
                Dual u = eval(*node.children[0]);
                Dual v = eval(*node.children[1]);
                if (v.value == 0.0) {
                    throw DomainError("division by zero", node.offset);
                }
                const double q = u.value / v.value;
                return {q, (u.partials - q * v.partials) / v.value};
            }
            case NodeKind::Power:
                return power(node);
            case NodeKind::Call:
                return call(node);
        }
        throw DomainError("corrupt expression tree", node.offset);
    }

private:
    Dual power(const Node& node) const {
        Dual u = eval(*node.children[0]);
        Dual v = eval(*node.children[1]);
        const bool constant_exponent = v.partials.isZero(0.0);
        if (constant_exponent && is_integer(v.value)) {
            const double e = v.value;
            if (u.value == 0.0 && e < 0.0) {
                throw DomainError("division by zero: zero raised to a negative power", node.offset);
            }
            if (e == 0.0) {
                return Dual::constant(1.0, n_);
            }
            const double val = std::pow(u.value, e);
            const double slope = e * std::pow(u.value, e - 1.0);
            return {val, slope * u.partials};
        }
        if (!(u.value > 0.0)) {
            throw DomainError("power needs a positive base unless the exponent is a constant integer",
                              node.offset);
        }
        const double val = std::pow(u.value, v.value);
        const double lg = std::log(u.value);
        return {val, val * (lg * v.partials + (v.value / u.value) * u.partials)};
    }

    Dual call(const Node& node) const {
        Dual u = eval(*node.children[0]);
        switch (node.function) {
            case Function::Sin:
                return {std::sin(u.value), std::cos(u.value) * u.partials};
            case Function::Cos:
                return {std::cos(u.value), -std::sin(u.value) * u.partials};
            case Function::Exp: {
                const double e = std::exp(u.value);
                return {e, e * u.partials};
            }
            case Function::Log:
                if (!(u.value > 0.0)) {
                    throw DomainError("log of non-positive argument", node.offset);
                }
                return {std::log(u.value), u.partials / u.value};
            case Function::Sqrt: {
                if (u.value < 0.0) {
                    throw DomainError("sqrt of negative argument", node.offset);
                }
                const double r = std::sqrt(u.value);
                if (r == 0.0) {
                    if (!u.partials.isZero(0.0)) {
                        throw DomainError("sqrt is not differentiable at zero", node.offset);
                    }
                    return Dual::constant(0.0, n_);
                }
                return {r, u.partials / (2.0 * r)};
            }
            case Function::AbsSmooth: {
                Dual d = eval(*node.children[1]);
                const double r = std::hypot(u.value, d.value);
                if (r == 0.0) {
                    if (!u.partials.isZero(0.0) || !d.partials.isZero(0.0)) {
                        throw DomainError("abs_smooth with zero smoothing is not differentiable at zero",
                                          node.offset);
                    }
                    return Dual::constant(0.0, n_);
                }
                return {r, (u.value * u.partials + d.value * d.partials) / r};
            }
        }
        throw DomainError("unknown function", node.offset);
    }

    const Vector& x_;
    const Vector& s_;
    std::size_t n_;
};

std::string format_number(double v) {
    char buf[32];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void print(const Node& node, std::string& out) {
    auto binary = [&](char op) {
        out += '(';
        print(*node.children[0], out);
        out += ' ';
        out += op;
        out += ' ';
        print(*node.children[1], out);
        out += ')';
    };
    switch (node.kind) {
        case NodeKind::Number:
            out += format_number(node.number);
            return;
        case NodeKind::Variable:
            out += 'x' + std::to_string(node.index + 1);
            return;
        case NodeKind::Parameter:
            out += 'p' + std::to_string(node.index + 1);
            return;
        case NodeKind::Negate:
            out += "(-";
            print(*node.children[0], out);
            out += ')';
            return;
        case NodeKind::Add: binary('+'); return;
        case NodeKind::Subtract: binary('-'); return;
        case NodeKind::Multiply: binary('*'); return;
        case NodeKind::Divide: binary('/'); return;
        case NodeKind::Power: binary('^'); return;
        case NodeKind::Call:
            out += function_name(node.function);
            out += '(';
            for (std::size_t a = 0; a < node.children.size(); ++a) {
                if (a > 0) out += ", ";
                print(*node.children[a], out);
            }
            out += ')';
            return;
    }
}

}  // namespace

bool same_tree(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case NodeKind::Number:
            if (a.number != b.number) return false;
            break;
        case NodeKind::Variable:
        case NodeKind::Parameter:
            if (a.index != b.index) return false;
            break;
        case NodeKind::Call:
            if (a.function != b.function) return false;
            break;
        default:
            break;
    }
    for (std::size_t c = 0; c < a.children.size(); ++c) {
        if (!same_tree(*a.children[c], *b.children[c])) return false;
    }
    return true;
}

Program::Program(std::shared_ptr<const Node> root, std::size_t n, std::size_t k, std::string source)
    : root_(std::move(root)), n_(n), k_(k), source_(std::move(source)) {}

ValueGradient Program::eval_grad(const Vector& x, const Vector& scenario) const {
    if (static_cast<std::size_t>(x.size()) != n_ || static_cast<std::size_t>(scenario.size()) != k_) {
        throw std::invalid_argument("expression evaluated with mismatched dimensions");
    }
    Dual d = Evaluator(x, scenario).eval(*root_);
    return {d.value, std::move(d.partials)};
}

double Program::eval(const Vector& x, const Vector& scenario) const { return eval_grad(x, scenario).value; }

std::string Program::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

Program parse(std::string_view text, std::size_t n, std::size_t k) {
    Parser parser(text, n, k);
    return Program(parser.parse(), n, k, std::string(text));
}

ProblemInstance make_expression_problem(std::string name, std::size_t n, ScenarioSet scenarios,
                                        std::vector<Program> programs) {
    std::vector<ObjectiveEvaluator> objectives;
    objectives.reserve(programs.size());
    for (std::size_t j = 0; j < programs.size(); ++j) {
        if (programs[j].num_variables() != n || programs[j].num_parameters() != scenarios.dimension()) {
            throw std::invalid_argument("objective " + std::to_string(j + 1) +
                                        " was parsed against different dimensions");
        }
        objectives.emplace_back(
            [program = std::move(programs[j])](const Vector& x, const Vector& s) { return program.eval_grad(x, s); });
    }
    return ProblemInstance(std::move(name), n, std::move(scenarios), std::move(objectives));
}

}  // namespace owrc::expr
