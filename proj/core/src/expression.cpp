#include "cusparity/expression.hpp"

#include "cusparity/errors.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace cusparity {

struct Expression::Node {
    enum class Op { constant, variable, neg, add, sub, mul, div, pow };
    Op op = Op::constant;
    double value = 0.0;
    int slot = -1;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make_constant(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::constant;
    n->value = v;
    return n;
}

NodePtr make_variable(int slot) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::variable;
    n->slot = slot;
    return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

// Light constant folding keeps derivative trees from exploding.
NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
    if (a->op == Op::constant && b->op == Op::constant) {
        const double x = a->value, y = b->value;
        switch (op) {
        case Op::add: return make_constant(x + y);
        case Op::sub: return make_constant(x - y);
        case Op::mul: return make_constant(x * y);
        case Op::div:
            if (y != 0.0) return make_constant(x / y);
            break;
        case Op::pow: return make_constant(std::pow(x, y));
        default: break;
        }
    }
    switch (op) {
    case Op::add:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
    case Op::sub:
        if (is_const(b, 0.0)) return a;
        break;
    case Op::mul:
        if (is_const(a, 0.0) || is_const(b, 0.0)) return make_constant(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        break;
    case Op::div:
        if (is_const(a, 0.0)) return make_constant(0.0);
        if (is_const(b, 1.0)) return a;
        break;
    case Op::pow:
        if (is_const(b, 1.0)) return a;
        if (is_const(b, 0.0)) return make_constant(1.0);
        break;
    default: break;
    }
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_neg(NodePtr a) {
    if (a->op == Op::constant) return make_constant(-a->value);
    if (a->op == Op::neg) return a->lhs;
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::neg;
    n->lhs = std::move(a);
    return n;
}

double eval(const Expression::Node& n, std::span<const double> s) {
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return s[static_cast<std::size_t>(n.slot)];
    case Op::neg: return -eval(*n.lhs, s);
    case Op::add: return eval(*n.lhs, s) + eval(*n.rhs, s);
    case Op::sub: return eval(*n.lhs, s) - eval(*n.rhs, s);
    case Op::mul: return eval(*n.lhs, s) * eval(*n.rhs, s);
    case Op::div: return eval(*n.lhs, s) / eval(*n.rhs, s);
    case Op::pow: {
        const double base = eval(*n.lhs, s);
        if (n.rhs->op == Op::constant) {
            const double e = n.rhs->value;
            if (e == std::floor(e) && std::abs(e) <= 64) {
                // Integer powers by repeated multiplication: exact for negative bases.
                double r = 1.0;
                for (int i = 0; i < static_cast<int>(std::abs(e)); ++i) r *= base;
                return e < 0 ? 1.0 / r : r;
            }
        }
        return std::pow(base, eval(*n.rhs, s));
    }
    }
    return 0.0;
}

bool depends(const Expression::Node& n, int slot) {
    switch (n.op) {
    case Op::constant: return false;
    case Op::variable: return n.slot == slot;
    case Op::neg: return depends(*n.lhs, slot);
    default: return depends(*n.lhs, slot) || depends(*n.rhs, slot);
    }
}

NodePtr diff(const NodePtr& n, int slot) {
    switch (n->op) {
    case Op::constant: return make_constant(0.0);
    case Op::variable: return make_constant(n->slot == slot ? 1.0 : 0.0);
    case Op::neg: return make_neg(diff(n->lhs, slot));
    case Op::add: return make_binary(Op::add, diff(n->lhs, slot), diff(n->rhs, slot));
    case Op::sub: return make_binary(Op::sub, diff(n->lhs, slot), diff(n->rhs, slot));
    case Op::mul:
        return make_binary(Op::add, make_binary(Op::mul, diff(n->lhs, slot), n->rhs),
                           make_binary(Op::mul, n->lhs, diff(n->rhs, slot)));
    case Op::div: {
        // (u/v)' = (u' v - u v') / v^2
        auto num = make_binary(Op::sub, make_binary(Op::mul, diff(n->lhs, slot), n->rhs),
                               make_binary(Op::mul, n->lhs, diff(n->rhs, slot)));
        return make_binary(Op::div, num, make_binary(Op::pow, n->rhs, make_constant(2.0)));
    }
    case Op::pow: {
        if (!depends(*n->rhs, slot)) {
            // (u^c)' = c u^(c-1) u'
            auto e = n->rhs;
            auto reduced = make_binary(Op::sub, e, make_constant(1.0));
            return make_binary(Op::mul, make_binary(Op::mul, e, make_binary(Op::pow, n->lhs, reduced)),
                               diff(n->lhs, slot));
        }
        throw ParseError("derivative of a variable exponent is outside the supported grammar");
    }
    }
    return make_constant(0.0);
}

NodePtr subst(const NodePtr& n, int slot, double value) {
    switch (n->op) {
    case Op::constant: return n;
    case Op::variable: return n->slot == slot ? make_constant(value) : n;
    case Op::neg: return make_neg(subst(n->lhs, slot, value));
    default: return make_binary(n->op, subst(n->lhs, slot, value), subst(n->rhs, slot, value));
    }
}

void print(const Expression::Node& n, int dim, std::ostream& os) {
    switch (n.op) {
    case Op::constant: {
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << n.value;
        os << tmp.str();
        return;
    }
    case Op::variable:
        if (n.slot < dim)
            os << 'x' << (n.slot + 1);
        else
            os << 't' << (n.slot - dim + 1);
        return;
    case Op::neg:
        os << "(-";
        print(*n.lhs, dim, os);
        os << ')';
        return;
    default: break;
    }
    const char sym = n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : n.op == Op::div ? '/' : '^';
    os << '(';
    print(*n.lhs, dim, os);
    os << sym;
    print(*n.rhs, dim, os);
    os << ')';
}

class Parser {
public:
    Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

    NodePtr parse() {
        auto n = parse_sum();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("column " + std::to_string(pos_ + 1) + ": " + what);
    }

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

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            if (accept('+'))
                lhs = make_binary(Op::add, lhs, parse_product());
            else if (accept('-'))
                lhs = make_binary(Op::sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = make_binary(Op::mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = make_binary(Op::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_neg(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        if (accept('^')) return make_binary(Op::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        const std::string literal(text_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            const double v = std::stod(literal, &used);
            if (used != literal.size()) throw std::invalid_argument(literal);
            return make_constant(v);
        } catch (const std::exception&) {
            pos_ = start;
            fail("malformed number '" + literal + "'");
        }
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name.size() >= 2 && (name[0] == 'x' || name[0] == 't')) {
            const std::string digits = name.substr(1);
            bool numeric = !digits.empty();
            for (char d : digits) numeric = numeric && std::isdigit(static_cast<unsigned char>(d));
            if (numeric) {
                const int k = std::stoi(digits);
                if (name[0] == 'x' && k >= 1 && k <= dim_) return make_variable(k - 1);
                if (name[0] == 't' && (k == 1 || k == 2)) return make_variable(dim_ + k - 1);
            }
        }
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    std::string_view text_;
    int dim_;
    std::size_t pos_ = 0;
};

} // namespace

Expression::Expression() : root_(make_constant(0.0)) {}

Expression::Expression(double constant) : root_(make_constant(constant)) {}

Expression::Expression(std::shared_ptr<const Node> root, int dim) : root_(std::move(root)), dim_(dim) {}

Expression Expression::parse(std::string_view text, int dim) {
    Parser p(text, dim);
    return Expression(p.parse(), dim);
}

double Expression::evaluate(std::span<const double> slots) const { return eval(*root_, slots); }

Expression Expression::derivative(int slot) const { return Expression(diff(root_, slot), dim_); }

Expression Expression::negated() const { return Expression(make_neg(root_), dim_); }

Expression Expression::substitute(int slot, double value) const {
    return Expression(subst(root_, slot, value), dim_);
}

bool Expression::depends_on(int slot) const { return depends(*root_, slot); }

bool Expression::is_constant() const { return root_->op == Op::constant; }

std::string Expression::to_string() const {
    std::ostringstream os;
    print(*root_, dim_, os);
    return os.str();
}

} // namespace cusparity
