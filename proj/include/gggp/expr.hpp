#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gggp/derivation.hpp"

namespace gggp {

enum class BinaryOp : char { Add = '+', Sub = '-', Mul = '*', Div = '/' };

/// Denominators with smaller magnitude make division return 1.
inline constexpr double protected_division_threshold = 1e-9;
/// Every intermediate result is clamped to [-limit, limit].
inline constexpr double overflow_limit = 1e30;

/// Protected, clamped arithmetic shared by every evaluation path.
auto apply_op(BinaryOp op, double lhs, double rhs) -> double;

/// Arithmetic phenotype. Binary nodes hold exactly two operands.
struct Expr {
    enum class Kind { Binary, Variable, Constant };

    Kind kind{Kind::Constant};
    BinaryOp op{BinaryOp::Add};
    std::string name;
    double value{0.0};
    std::vector<Expr> operands;

    static auto binary(BinaryOp op, Expr lhs, Expr rhs) -> Expr;
    static auto variable(std::string name) -> Expr;
    static auto constant(double value) -> Expr;

    [[nodiscard]] auto is_constant() const -> bool { return kind == Kind::Constant; }
    [[nodiscard]] auto lhs() const -> Expr const& { return operands[0]; }
    [[nodiscard]] auto rhs() const -> Expr const& { return operands[1]; }

    friend auto operator==(Expr const&, Expr const&) -> bool = default;
};

/// Builds the AST following the derivation structure; parentheses are
/// ignored. Throws GrammarError on tokens outside the arithmetic vocabulary
/// (operators, numeric literals, identifiers, parentheses).
auto ast_from_tree(DerivationNode const& tree) -> Expr;

using Row = std::map<std::string, double, std::less<>>;

/// Throws DataError when a variable is missing from the row.
auto eval(Expr const& e, Row const& row) -> double;

auto expr_size(Expr const& e) -> std::size_t;
auto expr_depth(Expr const& e) -> std::size_t;

/// Distinct variable names in first-occurrence order.
auto variables(Expr const& e) -> std::vector<std::string>;

/// Constant folding plus the neutral/absorbing-element identities, to a fixed point.
auto simplify(Expr const& e) -> Expr;

/// Fully parenthesized infix, e.g. `((x1 - x0) * 10.0)`.
auto to_text(Expr const& e) -> std::string;

/// Inverse of to_text; also tolerates redundant parentheses and whitespace.
/// Throws ParseError carrying the byte offset of the problem.
auto parse_text(std::string_view text) -> Expr;

/// Reads a model file: one expression, `#` comments allowed.
auto load_model(std::string const& path) -> Expr;

/// Postfix form bound to column positions, for evaluation over whole columns.
class CompiledExpr {
public:
    /// Throws DataError when a variable is not among `columns`.
    CompiledExpr(Expr const& e, std::span<std::string const> columns);

    /// out[i] = e(row i); columns[j] is the data for the j-th bound column.
    void evaluate(std::span<std::vector<double> const> columns, std::span<double> out) const;

private:
    enum class Code : unsigned char { Load, Push, Apply };
    struct Instr {
        Code code;
        BinaryOp op;
        std::size_t column;
        double value;
    };
    std::vector<Instr> program_;
    std::size_t stack_depth_{0};
};

} // namespace gggp
