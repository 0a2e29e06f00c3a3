#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cusparity {

/// Immutable arithmetic expression over the variables x1..xn, t1, t2.
///
/// Grammar: sums and products of numeric literals, variables and
/// parenthesised subexpressions with the binary operators + - * / ^ and
/// unary minus. `^` binds tighter than unary minus and is right
/// associative, so `-x1^2^2` parses as `-(x1^(2^2))`.
///
/// Variables are addressed by slot: x1..xn occupy slots 0..n-1, t1 and
/// t2 occupy slots n and n+1.
class Expression {
public:
    struct Node;

    Expression();
    explicit Expression(double constant);

    /// Parses `text` for a state of dimension `dim`. Throws ParseError
    /// with a column offset on malformed input or unknown identifiers.
    static Expression parse(std::string_view text, int dim);

    double evaluate(std::span<const double> slots) const;

    /// Symbolic partial derivative with respect to a slot.
    Expression derivative(int slot) const;

    Expression negated() const;

    /// Replaces a slot by a constant.
    Expression substitute(int slot, double value) const;

    bool depends_on(int slot) const;
    bool is_constant() const;
    std::string to_string() const;

    int dim() const { return dim_; }

private:
    Expression(std::shared_ptr<const Node> root, int dim);

    std::shared_ptr<const Node> root_;
    int dim_ = 0;
};

} // namespace cusparity
