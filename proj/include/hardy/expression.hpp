#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hardy {

/// Thrown on any lexical or grammatical problem; carries the byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

/// Variable bindings for evaluation, keyed by name.
using VarEnv = std::map<std::string, double, std::less<>>;

namespace detail {

enum class NodeKind { Constant, Variable, Unary, Binary };

enum class UnOp { Neg, Sin, Cos, Tan, Asin, Acos, Atan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs };
enum class BinOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    double value = 0.0;        // Constant
    std::string name;          // Variable
    UnOp un{};                 // Unary
    BinOp bin{};               // Binary
    NodePtr a, b;

    static NodePtr constant(double v) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Constant;
        n->value = v;
        return n;
    }
    static NodePtr variable(std::string nm) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Variable;
        n->name = std::move(nm);
        return n;
    }
    static NodePtr unary(UnOp op, NodePtr x) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Unary;
        n->un = op;
        n->a = std::move(x);
        return n;
    }
    static NodePtr binary(BinOp op, NodePtr x, NodePtr y);
};

inline bool is_const(const NodePtr& n, double v) {
    return n->kind == NodeKind::Constant && n->value == v;
}

inline NodePtr Node::binary(BinOp op, NodePtr x, NodePtr y) {
    // light constant folding keeps derivative trees from blowing up
    if (x->kind == NodeKind::Constant && y->kind == NodeKind::Constant) {
        switch (op) {
            case BinOp::Add: return constant(x->value + y->value);
            case BinOp::Sub: return constant(x->value - y->value);
            case BinOp::Mul: return constant(x->value * y->value);
            case BinOp::Div: return constant(x->value / y->value);
            case BinOp::Pow: return constant(std::pow(x->value, y->value));
        }
    }
    switch (op) {
        case BinOp::Add:
            if (is_const(x, 0)) return y;
            if (is_const(y, 0)) return x;
            break;
        case BinOp::Sub:
            if (is_const(y, 0)) return x;
            break;
        case BinOp::Mul:
            if (is_const(x, 0) || is_const(y, 0)) return constant(0);
            if (is_const(x, 1)) return y;
            if (is_const(y, 1)) return x;
            break;
        case BinOp::Div:
            if (is_const(x, 0)) return constant(0);
            if (is_const(y, 1)) return x;
            break;
        case BinOp::Pow:
            if (is_const(y, 1)) return x;
            if (is_const(y, 0)) return constant(1);
            break;
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Binary;
    n->bin = op;
    n->a = std::move(x);
    n->b = std::move(y);
    return n;
}

double eval_node(const Node& n, const VarEnv& env);

inline double eval_unary(UnOp op, double x) {
    switch (op) {
        case UnOp::Neg:  return -x;
        case UnOp::Sin:  return std::sin(x);
        case UnOp::Cos:  return std::cos(x);
        case UnOp::Tan:  return std::tan(x);
        case UnOp::Asin: return std::asin(x);
        case UnOp::Acos: return std::acos(x);
        case UnOp::Atan: return std::atan(x);
        case UnOp::Sinh: return std::sinh(x);
        case UnOp::Cosh: return std::cosh(x);
        case UnOp::Tanh: return std::tanh(x);
        case UnOp::Exp:  return std::exp(x);
        case UnOp::Log:  return std::log(x);
        case UnOp::Sqrt: return std::sqrt(x);
        case UnOp::Abs:  return std::abs(x);
    }
    return 0.0;
}

inline double eval_node(const Node& n, const VarEnv& env) {
    switch (n.kind) {
        case NodeKind::Constant: return n.value;
        case NodeKind::Variable: {
            auto it = env.find(n.name);
            if (it == env.end())
                throw std::domain_error("expression: unbound variable '" + n.name + "'");
            return it->second;
        }
        case NodeKind::Unary: return eval_unary(n.un, eval_node(*n.a, env));
        case NodeKind::Binary: {
            const double x = eval_node(*n.a, env), y = eval_node(*n.b, env);
            switch (n.bin) {
                case BinOp::Add: return x + y;
                case BinOp::Sub: return x - y;
                case BinOp::Mul: return x * y;
                case BinOp::Div: return x / y;
                case BinOp::Pow: return std::pow(x, y);
            }
        }
    }
    return 0.0;
}

NodePtr diff_node(const NodePtr& n, const std::string& var);

inline NodePtr diff_unary(const NodePtr& n, const std::string& var) {
    const NodePtr& u = n->a;
    NodePtr du = diff_node(u, var);
    using N = Node;
    switch (n->un) {
        case UnOp::Neg:  return N::unary(UnOp::Neg, du);
        case UnOp::Sin:  return N::binary(BinOp::Mul, N::unary(UnOp::Cos, u), du);
        case UnOp::Cos:  return N::unary(UnOp::Neg, N::binary(BinOp::Mul, N::unary(UnOp::Sin, u), du));
        case UnOp::Tan: {
            auto sec2 = N::binary(BinOp::Div, N::constant(1),
                                  N::binary(BinOp::Pow, N::unary(UnOp::Cos, u), N::constant(2)));
            return N::binary(BinOp::Mul, sec2, du);
        }
        case UnOp::Asin: {
            auto den = N::unary(UnOp::Sqrt,
                                N::binary(BinOp::Sub, N::constant(1),
                                          N::binary(BinOp::Pow, u, N::constant(2))));
            return N::binary(BinOp::Div, du, den);
        }
        case UnOp::Acos: {
            auto den = N::unary(UnOp::Sqrt,
                                N::binary(BinOp::Sub, N::constant(1),
                                          N::binary(BinOp::Pow, u, N::constant(2))));
            return N::unary(UnOp::Neg, N::binary(BinOp::Div, du, den));
        }
        case UnOp::Atan: {
            auto den = N::binary(BinOp::Add, N::constant(1),
                                 N::binary(BinOp::Pow, u, N::constant(2)));
            return N::binary(BinOp::Div, du, den);
        }
        case UnOp::Sinh: return N::binary(BinOp::Mul, N::unary(UnOp::Cosh, u), du);
        case UnOp::Cosh: return N::binary(BinOp::Mul, N::unary(UnOp::Sinh, u), du);
        case UnOp::Tanh: {
            auto sech2 = N::binary(BinOp::Div, N::constant(1),
                                   N::binary(BinOp::Pow, N::unary(UnOp::Cosh, u), N::constant(2)));
            return N::binary(BinOp::Mul, sech2, du);
        }
        case UnOp::Exp:  return N::binary(BinOp::Mul, n, du);
        case UnOp::Log:  return N::binary(BinOp::Div, du, u);
        case UnOp::Sqrt: return N::binary(BinOp::Div, du, N::binary(BinOp::Mul, N::constant(2), n));
        case UnOp::Abs:
            // d|u| = sign(u) du ; encoded as u/|u| * du
            return N::binary(BinOp::Mul, N::binary(BinOp::Div, u, n), du);
    }
    return N::constant(0);
}

inline NodePtr diff_node(const NodePtr& n, const std::string& var) {
    using N = Node;
    switch (n->kind) {
        case NodeKind::Constant: return N::constant(0);
        case NodeKind::Variable: return N::constant(n->name == var ? 1 : 0);
        case NodeKind::Unary: return diff_unary(n, var);
        case NodeKind::Binary: {
            NodePtr da = diff_node(n->a, var), db = diff_node(n->b, var);
            switch (n->bin) {
                case BinOp::Add: return N::binary(BinOp::Add, da, db);
                case BinOp::Sub: return N::binary(BinOp::Sub, da, db);
                case BinOp::Mul:
                    return N::binary(BinOp::Add, N::binary(BinOp::Mul, da, n->b),
                                     N::binary(BinOp::Mul, n->a, db));
                case BinOp::Div: {
                    auto num = N::binary(BinOp::Sub, N::binary(BinOp::Mul, da, n->b),
                                         N::binary(BinOp::Mul, n->a, db));
                    return N::binary(BinOp::Div, num,
                                     N::binary(BinOp::Pow, n->b, N::constant(2)));
                }
                case BinOp::Pow: {
                    if (n->b->kind == NodeKind::Constant) {
                        // d(u^c) = c u^(c-1) du
                        auto c = n->b->value;
                        auto pw = N::binary(BinOp::Pow, n->a, N::constant(c - 1));
                        return N::binary(BinOp::Mul, N::constant(c), N::binary(BinOp::Mul, pw, da));
                    }
                    // general u^v = exp(v log u)
                    auto lg = N::unary(UnOp::Log, n->a);
                    auto term = N::binary(BinOp::Add, N::binary(BinOp::Mul, db, lg),
                                          N::binary(BinOp::Mul, n->b,
                                                    N::binary(BinOp::Div, da, n->a)));
                    return N::binary(BinOp::Mul, n, term);
                }
            }
        }
    }
    return N::constant(0);
}

inline void collect_vars(const Node& n, std::vector<std::string>& out) {
    switch (n.kind) {
        case NodeKind::Constant: return;
        case NodeKind::Variable: {
            for (const auto& s : out)
                if (s == n.name) return;
            out.push_back(n.name);
            return;
        }
        case NodeKind::Unary: collect_vars(*n.a, out); return;
        case NodeKind::Binary:
            collect_vars(*n.a, out);
            collect_vars(*n.b, out);
            return;
    }
}

/// Recursive-descent parser: expr -> term (+|- term)*, term -> factor
/// (*|/ factor)*, factor -> unary (^ factor)?, with ^ right-associative.
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        auto e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("trailing characters", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr e;
        if (eat('-'))
            e = Node::unary(UnOp::Neg, term());
        else {
            eat('+');
            e = term();
        }
        for (;;) {
            if (eat('+'))
                e = Node::binary(BinOp::Add, e, term());
            else if (eat('-'))
                e = Node::binary(BinOp::Sub, e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*'))
                e = Node::binary(BinOp::Mul, e, factor());
            else if (eat('/'))
                e = Node::binary(BinOp::Div, e, factor());
            else
                return e;
        }
    }

    NodePtr factor() {
        NodePtr base = unary_atom();
        if (eat('^')) return Node::binary(BinOp::Pow, base, factor());
        return base;
    }

    NodePtr unary_atom() {
        if (eat('-')) return Node::unary(UnOp::Neg, unary_atom());
        return atom();
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        try {
            return Node::constant(std::stod(std::string(src_.substr(start, pos_ - start))));
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (name == "pi") return Node::constant(M_PI);
        if (name == "e") return Node::constant(M_E);
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            ++pos_;
            auto fn = lookup_function(name, start);
            if (name == "pow" || name == "min" || name == "max") {
                auto x = expr();
                if (!eat(',')) throw ParseError("expected ',' in " + name, pos_);
                auto y = expr();
                if (!eat(')')) throw ParseError("expected ')'", pos_);
                if (name == "pow") return Node::binary(BinOp::Pow, x, y);
                // min/max lowered to |.| arithmetic so derivatives stay symbolic
                auto sum = Node::binary(BinOp::Add, x, y);
                auto dif = Node::unary(UnOp::Abs, Node::binary(BinOp::Sub, x, y));
                auto half = Node::constant(0.5);
                return Node::binary(BinOp::Mul, half,
                                    name == "max" ? Node::binary(BinOp::Add, sum, dif)
                                                  : Node::binary(BinOp::Sub, sum, dif));
            }
            auto arg = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return Node::unary(fn, arg);
        }
        return Node::variable(std::move(name));
    }

    UnOp lookup_function(const std::string& name, std::size_t at) {
        if (name == "sin") return UnOp::Sin;
        if (name == "cos") return UnOp::Cos;
        if (name == "tan") return UnOp::Tan;
        if (name == "asin") return UnOp::Asin;
        if (name == "acos") return UnOp::Acos;
        if (name == "atan") return UnOp::Atan;
        if (name == "sinh") return UnOp::Sinh;
        if (name == "cosh") return UnOp::Cosh;
        if (name == "tanh") return UnOp::Tanh;
        if (name == "exp") return UnOp::Exp;
        if (name == "log") return UnOp::Log;
        if (name == "sqrt") return UnOp::Sqrt;
        if (name == "abs") return UnOp::Abs;
        if (name == "pow" || name == "min" || name == "max") return UnOp::Neg;  // handled by caller
        throw ParseError("unknown function '" + name + "'", at);
    }
};

}  // namespace detail

/// Immutable symbolic expression over named scalar variables.
/// Supports evaluation against a VarEnv and exact symbolic derivatives,
/// which is what keeps the p-normalization potential free of FD noise.
class Expression {
public:
    Expression() : node_(detail::Node::constant(0)) {}

    static Expression parse(std::string_view src) { return Expression(detail::Parser(src).parse()); }
    static Expression constant(double v) { return Expression(detail::Node::constant(v)); }
    static Expression variable(std::string name) {
        return Expression(detail::Node::variable(std::move(name)));
    }

    double eval(const VarEnv& env) const { return detail::eval_node(*node_, env); }

    Expression derivative(const std::string& var) const {
        return Expression(detail::diff_node(node_, var));
    }

    /// Names of all variables appearing in the tree (first-occurrence order).
    std::vector<std::string> variables() const {
        std::vector<std::string> out;
        detail::collect_vars(*node_, out);
        return out;
    }

    bool is_constant() const { return node_->kind == detail::NodeKind::Constant; }
    double constant_value() const {
        if (!is_constant()) throw std::logic_error("expression is not constant");
        return node_->value;
    }

    friend Expression operator+(const Expression& a, const Expression& b) {
        return Expression(detail::Node::binary(detail::BinOp::Add, a.node_, b.node_));
    }
    friend Expression operator-(const Expression& a, const Expression& b) {
        return Expression(detail::Node::binary(detail::BinOp::Sub, a.node_, b.node_));
    }
    friend Expression operator*(const Expression& a, const Expression& b) {
        return Expression(detail::Node::binary(detail::BinOp::Mul, a.node_, b.node_));
    }
    friend Expression operator/(const Expression& a, const Expression& b) {
        return Expression(detail::Node::binary(detail::BinOp::Div, a.node_, b.node_));
    }

private:
    explicit Expression(detail::NodePtr n) : node_(std::move(n)) {}
    detail::NodePtr node_;
    friend class CompiledExpression;
};

/// Expression lowered onto an indexed slot array for allocation-free
/// evaluation in assembly and sweep inner loops. Slot names are fixed at
/// compile time; evaluation reads values from a span in that order.
class CompiledExpression {
public:
    CompiledExpression() = default;
    CompiledExpression(const Expression& e, std::span<const std::string> slot_names) {
        root_ = lower(e.node_, slot_names);
    }

    double eval(std::span<const double> slots) const {
        if (!root_) return 0.0;
        return eval_node(*root_, slots);
    }

    /// Bitmask of slots the expression actually reads.
    const std::vector<bool>& used_slots() const { return used_; }

private:
    struct CNode {
        detail::NodeKind kind;
        double value = 0;
        int slot = -1;
        detail::UnOp un{};
        detail::BinOp bin{};
        std::unique_ptr<CNode> a, b;
    };

    std::unique_ptr<CNode> lower(const detail::NodePtr& n,
                                 std::span<const std::string> slot_names) {
        auto c = std::make_unique<CNode>();
        c->kind = n->kind;
        switch (n->kind) {
            case detail::NodeKind::Constant:
                c->value = n->value;
                break;
            case detail::NodeKind::Variable: {
                for (std::size_t i = 0; i < slot_names.size(); ++i)
                    if (slot_names[i] == n->name) c->slot = int(i);
                if (c->slot < 0)
                    throw std::domain_error("compile: variable '" + n->name +
                                            "' has no slot");
                if (used_.size() < slot_names.size()) used_.resize(slot_names.size(), false);
                used_[std::size_t(c->slot)] = true;
                break;
            }
            case detail::NodeKind::Unary:
                c->un = n->un;
                c->a = lower(n->a, slot_names);
                break;
            case detail::NodeKind::Binary:
                c->bin = n->bin;
                c->a = lower(n->a, slot_names);
                c->b = lower(n->b, slot_names);
                break;
        }
        return c;
    }

    static double eval_node(const CNode& n, std::span<const double> slots) {
        switch (n.kind) {
            case detail::NodeKind::Constant: return n.value;
            case detail::NodeKind::Variable: return slots[std::size_t(n.slot)];
            case detail::NodeKind::Unary: return detail::eval_unary(n.un, eval_node(*n.a, slots));
            case detail::NodeKind::Binary: {
                const double x = eval_node(*n.a, slots), y = eval_node(*n.b, slots);
                switch (n.bin) {
                    case detail::BinOp::Add: return x + y;
                    case detail::BinOp::Sub: return x - y;
                    case detail::BinOp::Mul: return x * y;
                    case detail::BinOp::Div: return x / y;
                    case detail::BinOp::Pow: return std::pow(x, y);
                }
            }
        }
        return 0.0;
    }

    std::unique_ptr<CNode> root_;
    std::vector<bool> used_;
};

}  // namespace hardy
