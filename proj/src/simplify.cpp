// Partial algebraic simplification. Every rewrite here is exact under the
// protected, clamped semantics of apply_op for finite inputs: x / x is 1 even
// at protected points, because protected division itself returns 1.

#include "gggp/expr.hpp"

namespace gggp {

namespace {

auto is_value(Expr const& e, double v) -> bool
{
    return e.is_constant() && e.value == v;
}

auto rewrite(Expr e) -> Expr
{
    if (e.kind != Expr::Kind::Binary) { return e; }
    auto lhs = rewrite(std::move(e.operands[0]));
    auto rhs = rewrite(std::move(e.operands[1]));

    if (lhs.is_constant() && rhs.is_constant()) { return Expr::constant(apply_op(e.op, lhs.value, rhs.value)); }

    switch (e.op) {
    case BinaryOp::Add:
        if (is_value(rhs, 0.0)) { return lhs; }
        if (is_value(lhs, 0.0)) { return rhs; }
        break;
    case BinaryOp::Sub:
        if (is_value(rhs, 0.0)) { return lhs; }
        if (lhs == rhs) { return Expr::constant(0.0); }
        break;
    case BinaryOp::Mul:
        if (is_value(lhs, 0.0) || is_value(rhs, 0.0)) { return Expr::constant(0.0); }
        if (is_value(rhs, 1.0)) { return lhs; }
        if (is_value(lhs, 1.0)) { return rhs; }
        break;
    case BinaryOp::Div:
        if (is_value(rhs, 1.0)) { return lhs; }
        if (lhs == rhs) { return Expr::constant(1.0); }
        break;
    }
    return Expr::binary(e.op, std::move(lhs), std::move(rhs));
}

} // namespace

auto simplify(Expr const& e) -> Expr
{
    Expr current = e;
    for (;;) {
        auto next = rewrite(current);
        if (next == current) { return next; }
        current = std::move(next);
    }
}

} // namespace gggp
