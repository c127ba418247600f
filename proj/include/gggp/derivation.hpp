#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gggp/grammar.hpp"

namespace gggp {

/// Node of a derivation tree. Non-terminal nodes carry the grammar index of
/// the non-terminal and the chosen alternative; terminal nodes carry the token.
struct DerivationNode {
    std::size_t nonterminal{npos};
    std::size_t alternative{0};
    std::string token;
    std::vector<DerivationNode> children;

    [[nodiscard]] auto is_terminal() const -> bool { return nonterminal == npos; }

    static auto leaf(std::string token) -> DerivationNode { return {npos, 0, std::move(token), {}}; }

    friend auto operator==(DerivationNode const&, DerivationNode const&) -> bool = default;
};

/// Depth counted in non-terminal levels: the root is level 1 and terminal leaves add nothing.
auto tree_depth(DerivationNode const& node) -> int;

auto node_count(DerivationNode const& node) -> std::size_t;

/// Terminal yield, left to right.
auto yield(DerivationNode const& node) -> std::vector<std::string>;

/// Yield joined by single spaces, e.g. `x2 - 1.0`.
auto phenotype_text(DerivationNode const& node) -> std::string;

/// Checks the structural invariants against g: children match the chosen
/// alternative symbol for symbol and every leaf is a terminal.
auto is_well_formed(Grammar const& g, DerivationNode const& node) -> bool;

/// Sentential form of a partially expanded tree: unexpanded non-terminals render as `<name>`.
auto sentential_form(Grammar const& g, DerivationNode const& node) -> std::string;

/// Choices in preorder grouped by non-terminal (the DSGE gene layout of a tree).
auto record_choices(Grammar const& g, DerivationNode const& node) -> std::vector<std::vector<int>>;

/// Non-terminal node reached in preorder, with its level.
struct NodeRef {
    DerivationNode* node;
    int level;
};

/// Preorder list of non-terminal nodes. Pointers stay valid until the tree's shape changes.
auto nonterminal_nodes(DerivationNode& root) -> std::vector<NodeRef>;

} // namespace gggp
