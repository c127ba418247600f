#include "gggp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "gggp/errors.hpp"

namespace gggp {

namespace {

template <BinaryOp Op>
inline auto apply_fixed(double lhs, double rhs) -> double
{
    double v = 0.0;
    if constexpr (Op == BinaryOp::Add) {
        v = lhs + rhs;
    } else if constexpr (Op == BinaryOp::Sub) {
        v = lhs - rhs;
    } else if constexpr (Op == BinaryOp::Mul) {
        v = lhs * rhs;
    } else {
        v = std::fabs(rhs) < protected_division_threshold ? 1.0 : lhs / rhs;
    }
    return std::clamp(v, -overflow_limit, overflow_limit);
}

auto op_from_token(std::string_view t) -> std::optional<BinaryOp>
{
    if (t == "+") { return BinaryOp::Add; }
    if (t == "-") { return BinaryOp::Sub; }
    if (t == "*") { return BinaryOp::Mul; }
    if (t == "/") { return BinaryOp::Div; }
    return std::nullopt;
}

auto parse_number(std::string_view t) -> std::optional<double>
{
    if (t.empty()) { return std::nullopt; }
    auto const* first = t.data();
    if (*first == '+') { ++first; }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) { return std::nullopt; }
    return value;
}

auto is_identifier(std::string_view t) -> bool
{
    if (t.empty()) { return false; }
    auto const head = static_cast<unsigned char>(t.front());
    if (!std::isalpha(head) && t.front() != '_') { return false; }
    return std::all_of(t.begin(), t.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
    });
}

// A derivation subtree reduces to an expression, a bare operator (from an
// <op>-like rule), or nothing (parentheses).
struct Fragment {
    enum class Kind { Empty, Expression, Operator };
    Kind kind{Kind::Empty};
    Expr expr;
    BinaryOp op{BinaryOp::Add};
};

auto fragment(DerivationNode const& node) -> Fragment
{
    if (node.is_terminal()) {
        auto const& t = node.token;
        if (t == "(" || t == ")") { return {}; }
        if (auto op = op_from_token(t)) { return {Fragment::Kind::Operator, {}, *op}; }
        if (auto v = parse_number(t)) { return {Fragment::Kind::Expression, Expr::constant(*v), {}}; }
        if (is_identifier(t)) { return {Fragment::Kind::Expression, Expr::variable(t), {}}; }
        throw GrammarError("token '" + t + "' is not part of the arithmetic vocabulary");
    }

    std::vector<Fragment> parts;
    for (auto const& c : node.children) {
        auto f = fragment(c);
        if (f.kind != Fragment::Kind::Empty) { parts.push_back(std::move(f)); }
    }
    if (parts.empty()) { return {}; }
    if (parts.size() == 1) { return std::move(parts.front()); }

    // expr (op expr)*, folded left.
    if (parts.size() % 2 == 0) { throw GrammarError("derivation does not form an arithmetic expression"); }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto const want = i % 2 == 0 ? Fragment::Kind::Expression : Fragment::Kind::Operator;
        if (parts[i].kind != want) { throw GrammarError("derivation does not form an arithmetic expression"); }
    }
    Expr acc = std::move(parts[0].expr);
    for (std::size_t i = 1; i < parts.size(); i += 2) {
        acc = Expr::binary(parts[i].op, std::move(acc), std::move(parts[i + 1].expr));
    }
    return {Fragment::Kind::Expression, std::move(acc), {}};
}

void collect_variables(Expr const& e, std::vector<std::string>& out)
{
    if (e.kind == Expr::Kind::Variable) {
        if (std::find(out.begin(), out.end(), e.name) == out.end()) { out.push_back(e.name); }
        return;
    }
    for (auto const& c : e.operands) { collect_variables(c, out); }
}

auto format_number(double v) -> std::string
{
    char buf[400];
    auto const mag = std::fabs(v);
    auto const fmt = mag == 0.0 || (mag >= 1e-4 && mag < 1e16) ? std::chars_format::fixed : std::chars_format::scientific;
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, fmt);
    std::string s(buf, ptr);
    if (s.find_first_of(".eEni") == std::string::npos) { s += ".0"; }
    return s;
}

void write_text(Expr const& e, std::string& out)
{
    switch (e.kind) {
    case Expr::Kind::Variable:
        out += e.name;
        break;
    case Expr::Kind::Constant:
        out += format_number(e.value);
        break;
    case Expr::Kind::Binary:
        out.push_back('(');
        write_text(e.lhs(), out);
        out.push_back(' ');
        out.push_back(static_cast<char>(e.op));
        out.push_back(' ');
        write_text(e.rhs(), out);
        out.push_back(')');
        break;
    }
}

class TextParser {
public:
    explicit TextParser(std::string_view text) : text_(text) { }

    auto run() -> Expr
    {
        auto e = inner();
        skip_space();
        if (pos_ < text_.size()) { fail("unexpected '" + std::string(1, text_[pos_]) + "'", pos_); }
        return e;
    }

private:
    [[noreturn]] void fail(std::string const& message, std::size_t at) const
    {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("expression parse error at offset " + std::to_string(at) + ": " + message, line, column, at);
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) { ++pos_; }
    }

    [[nodiscard]] auto peek(std::size_t ahead = 0) const -> char
    {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    auto inner() -> Expr
    {
        auto lhs = term();
        skip_space();
        auto op = pos_ < text_.size() ? op_from_token(text_.substr(pos_, 1)) : std::nullopt;
        if (!op) { return lhs; }
        ++pos_;
        auto rhs = term();
        return Expr::binary(*op, std::move(lhs), std::move(rhs));
    }

    auto term() -> Expr
    {
        skip_space();
        if (pos_ >= text_.size()) { fail("unexpected end of input", pos_); }
        char const c = peek();
        if (c == '(') {
            auto const open = pos_++;
            auto e = inner();
            skip_space();
            if (pos_ >= text_.size()) { fail("unmatched '('", open); }
            if (peek() != ')') { fail("expected ')'", pos_); }
            ++pos_;
            return e;
        }
        auto const digit_or_dot = [](char d) { return std::isdigit(static_cast<unsigned char>(d)) != 0 || d == '.'; };
        if (digit_or_dot(c) || ((c == '-' || c == '+') && digit_or_dot(peek(1)))) { return number(); }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
            auto const begin = pos_;
            while (pos_ < text_.size()
                   && (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '_')) {
                ++pos_;
            }
            return Expr::variable(std::string(text_.substr(begin, pos_ - begin)));
        }
        fail("unexpected '" + std::string(1, c) + "'", pos_);
    }

    auto number() -> Expr
    {
        auto const begin = pos_;
        if (peek() == '-' || peek() == '+') { ++pos_; }
        while (pos_ < text_.size()) {
            char const d = text_[pos_];
            bool const exp_sign = (d == '-' || d == '+') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
            if (std::isdigit(static_cast<unsigned char>(d)) == 0 && d != '.' && d != 'e' && d != 'E' && !exp_sign) {
                break;
            }
            ++pos_;
        }
        auto v = parse_number(text_.substr(begin, pos_ - begin));
        if (!v) { fail("malformed number", begin); }
        return Expr::constant(*v);
    }

    std::string_view text_;
    std::size_t pos_{0};
};

} // namespace

auto apply_op(BinaryOp op, double lhs, double rhs) -> double
{
    switch (op) {
    case BinaryOp::Add: return apply_fixed<BinaryOp::Add>(lhs, rhs);
    case BinaryOp::Sub: return apply_fixed<BinaryOp::Sub>(lhs, rhs);
    case BinaryOp::Mul: return apply_fixed<BinaryOp::Mul>(lhs, rhs);
    case BinaryOp::Div: return apply_fixed<BinaryOp::Div>(lhs, rhs);
    }
    return 0.0;
}

auto Expr::binary(BinaryOp op, Expr lhs, Expr rhs) -> Expr
{
    Expr e;
    e.kind = Kind::Binary;
    e.op = op;
    e.operands.reserve(2);
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
}

auto Expr::variable(std::string name) -> Expr
{
    Expr e;
    e.kind = Kind::Variable;
    e.name = std::move(name);
    return e;
}

auto Expr::constant(double value) -> Expr
{
    Expr e;
    e.kind = Kind::Constant;
    e.value = value;
    return e;
}

auto ast_from_tree(DerivationNode const& tree) -> Expr
{
    auto f = fragment(tree);
    if (f.kind != Fragment::Kind::Expression) { throw GrammarError("derivation does not yield an expression"); }
    return std::move(f.expr);
}

auto eval(Expr const& e, Row const& row) -> double
{
    switch (e.kind) {
    case Expr::Kind::Constant:
        return e.value;
    case Expr::Kind::Variable: {
        auto it = row.find(e.name);
        if (it == row.end()) { throw DataError("row has no column '" + e.name + "'"); }
        return it->second;
    }
    case Expr::Kind::Binary:
        return apply_op(e.op, eval(e.lhs(), row), eval(e.rhs(), row));
    }
    return 0.0;
}

auto expr_size(Expr const& e) -> std::size_t
{
    std::size_t n = 1;
    for (auto const& c : e.operands) { n += expr_size(c); }
    return n;
}

auto expr_depth(Expr const& e) -> std::size_t
{
    std::size_t d = 0;
    for (auto const& c : e.operands) { d = std::max(d, expr_depth(c)); }
    return d + 1;
}

auto variables(Expr const& e) -> std::vector<std::string>
{
    std::vector<std::string> out;
    collect_variables(e, out);
    return out;
}

auto to_text(Expr const& e) -> std::string
{
    std::string out;
    write_text(e, out);
    return out;
}

auto parse_text(std::string_view text) -> Expr
{
    return TextParser(text).run();
}

auto load_model(std::string const& path) -> Expr
{
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw DataError("cannot open model file '" + path + "'"); }
    std::string body;
    for (std::string line; std::getline(in, line);) {
        if (auto hash = line.find('#'); hash != std::string::npos) { line.erase(hash); }
        body += line;
        body.push_back('\n');
    }
    return parse_text(body);
}

CompiledExpr::CompiledExpr(Expr const& e, std::span<std::string const> columns)
{
    std::size_t depth = 0;
    auto emit = [&](auto&& self, Expr const& node) -> void {
        switch (node.kind) {
        case Expr::Kind::Constant:
            program_.push_back({Code::Push, BinaryOp::Add, 0, node.value});
            ++depth;
            break;
        case Expr::Kind::Variable: {
            auto it = std::find(columns.begin(), columns.end(), node.name);
            if (it == columns.end()) { throw DataError("dataset has no column '" + node.name + "'"); }
            program_.push_back({Code::Load, BinaryOp::Add, static_cast<std::size_t>(it - columns.begin()), 0.0});
            ++depth;
            break;
        }
        case Expr::Kind::Binary:
            self(self, node.lhs());
            self(self, node.rhs());
            program_.push_back({Code::Apply, node.op, 0, 0.0});
            --depth;
            break;
        }
        stack_depth_ = std::max(stack_depth_, depth);
    };
    emit(emit, e);
}

void CompiledExpr::evaluate(std::span<std::vector<double> const> columns, std::span<double> out) const
{
    auto const n = out.size();
    std::vector<double> stack(stack_depth_ * n);
    std::size_t top = 0;
    for (auto const& ins : program_) {
        switch (ins.code) {
        case Code::Load:
            std::copy_n(columns[ins.column].begin(), n, stack.begin() + static_cast<std::ptrdiff_t>(top * n));
            ++top;
            break;
        case Code::Push:
            std::fill_n(stack.begin() + static_cast<std::ptrdiff_t>(top * n), n, ins.value);
            ++top;
            break;
        case Code::Apply: {
            double* lhs = stack.data() + (top - 2) * n;
            double const* rhs = stack.data() + (top - 1) * n;
            auto loop = [&]<BinaryOp Op>() {
                for (std::size_t i = 0; i < n; ++i) { lhs[i] = apply_fixed<Op>(lhs[i], rhs[i]); }
            };
            switch (ins.op) {
            case BinaryOp::Add: loop.template operator()<BinaryOp::Add>(); break;
            case BinaryOp::Sub: loop.template operator()<BinaryOp::Sub>(); break;
            case BinaryOp::Mul: loop.template operator()<BinaryOp::Mul>(); break;
            case BinaryOp::Div: loop.template operator()<BinaryOp::Div>(); break;
            }
            --top;
            break;
        }
        }
    }
    std::copy_n(stack.begin(), n, out.begin());
}

} // namespace gggp
