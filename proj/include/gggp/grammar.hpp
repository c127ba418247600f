#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gggp {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct Symbol {
    enum class Kind { NonTerminal, Terminal };

    Kind kind{Kind::Terminal};
    std::string text;
    // Index of the referenced non-terminal; npos for terminals. Filled in by Grammar.
    std::size_t ref{npos};

    static auto nonterminal(std::string name) -> Symbol { return {Kind::NonTerminal, std::move(name), npos}; }
    static auto terminal(std::string token) -> Symbol { return {Kind::Terminal, std::move(token), npos}; }

    [[nodiscard]] auto is_nonterminal() const -> bool { return kind == Kind::NonTerminal; }

    friend auto operator==(Symbol const& a, Symbol const& b) -> bool
    {
        return a.kind == b.kind && a.text == b.text;
    }
};

struct Production {
    std::vector<Symbol> symbols;
    std::size_t index{0};
    // Smallest derivation depth reachable through this alternative (the
    // expanded node counts as one level; terminal leaves add none).
    int min_depth{1};
    // Contains at least one recursive non-terminal.
    bool recursive{false};

    friend auto operator==(Production const& a, Production const& b) -> bool
    {
        return a.index == b.index && a.symbols == b.symbols;
    }
};

/// Rule as written in source, before indexing.
struct RuleSource {
    std::string name;
    std::vector<std::vector<Symbol>> alternatives;
};

/// Indexed context-free grammar. Immutable once built; the first rule's head
/// is the start symbol.
class Grammar {
public:
    /// Validates references and computes minimum depths. Throws GrammarError.
    explicit Grammar(std::vector<RuleSource> rules);

    [[nodiscard]] auto nonterminals() const -> std::vector<std::string> const& { return names_; }
    [[nodiscard]] auto size() const -> std::size_t { return names_.size(); }
    [[nodiscard]] auto start() const -> std::size_t { return 0; }
    [[nodiscard]] auto name(std::size_t nt) const -> std::string const& { return names_.at(nt); }

    [[nodiscard]] auto find(std::string_view name) const -> std::optional<std::size_t>;
    /// Throws GrammarError for unknown names.
    [[nodiscard]] auto index_of(std::string_view name) const -> std::size_t;

    [[nodiscard]] auto alternatives(std::size_t nt) const -> std::vector<Production> const& { return productions_.at(nt); }
    [[nodiscard]] auto alternatives(std::string_view name) const -> std::vector<Production> const&
    {
        return productions_.at(index_of(name));
    }

    [[nodiscard]] auto min_depth(std::size_t nt) const -> int { return min_depth_.at(nt); }
    [[nodiscard]] auto recursive(std::size_t nt) const -> bool { return recursive_.at(nt) != 0; }

    /// Alternatives of nt that can complete within `budget` levels, counting nt itself.
    [[nodiscard]] auto feasible(std::size_t nt, int budget) const -> std::vector<std::size_t>;

    [[nodiscard]] auto rules() const -> std::vector<RuleSource>;

    friend auto operator==(Grammar const& a, Grammar const& b) -> bool
    {
        return a.names_ == b.names_ && a.productions_ == b.productions_;
    }

private:
    std::vector<std::string> names_;
    std::vector<std::vector<Production>> productions_;
    std::vector<int> min_depth_;
    std::vector<char> recursive_;
};

/// Parses BNF text: `<head> ::= alt | alt ...`, `#` comments to end of line.
/// Throws ParseError for syntax problems and GrammarError for structural ones.
auto parse_grammar(std::string_view text) -> Grammar;
auto load_grammar(std::string const& path) -> Grammar;

/// Serializes back to the accepted BNF format, one alternative per line.
auto to_bnf(Grammar const& g) -> std::string;

/// Minimum derivation depth per non-terminal, by name.
auto min_depths(Grammar const& g) -> std::map<std::string, int>;

/// Fixed-point minimum depths over raw rules. Throws GrammarError naming the
/// first non-terminal without any finite derivation.
auto compute_min_depths(std::vector<RuleSource> const& rules) -> std::vector<int>;

/// Replaces the alternatives of `nonterminal` with one terminal per name, in order.
auto with_variables(Grammar const& g, std::span<std::string const> names, std::string_view nonterminal = "var") -> Grammar;

/// Chart-parse membership test: is `tokens` derivable from the start symbol?
auto validate_phenotype(Grammar const& g, std::span<std::string const> tokens) -> bool;

/// Splits on whitespace and calls the span overload.
auto validate_phenotype(Grammar const& g, std::string_view text) -> bool;

} // namespace gggp
