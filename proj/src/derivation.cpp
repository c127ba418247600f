#include "gggp/derivation.hpp"

#include <algorithm>

namespace gggp {

auto tree_depth(DerivationNode const& node) -> int
{
    if (node.is_terminal()) { return 0; }
    int deepest = 0;
    for (auto const& c : node.children) { deepest = std::max(deepest, tree_depth(c)); }
    return deepest + 1;
}

auto node_count(DerivationNode const& node) -> std::size_t
{
    std::size_t n = 1;
    for (auto const& c : node.children) { n += node_count(c); }
    return n;
}

namespace {

void collect_yield(DerivationNode const& node, std::vector<std::string>& out)
{
    if (node.is_terminal()) {
        out.push_back(node.token);
        return;
    }
    for (auto const& c : node.children) { collect_yield(c, out); }
}

void collect_form(Grammar const& g, DerivationNode const& node, std::vector<std::string>& out)
{
    if (node.is_terminal()) {
        out.push_back(node.token);
    } else if (node.children.empty()) {
        out.push_back("<" + g.name(node.nonterminal) + ">");
    } else {
        for (auto const& c : node.children) { collect_form(g, c, out); }
    }
}

auto join(std::vector<std::string> const& parts) -> std::string
{
    std::string out;
    for (auto const& p : parts) {
        if (!out.empty()) { out.push_back(' '); }
        out += p;
    }
    return out;
}

void collect_choices(DerivationNode const& node, std::vector<std::vector<int>>& genes)
{
    if (node.is_terminal()) { return; }
    genes[node.nonterminal].push_back(static_cast<int>(node.alternative));
    for (auto const& c : node.children) { collect_choices(c, genes); }
}

void collect_nodes(DerivationNode& node, int level, std::vector<NodeRef>& out)
{
    if (node.is_terminal()) { return; }
    out.push_back({&node, level});
    for (auto& c : node.children) { collect_nodes(c, level + 1, out); }
}

} // namespace

auto yield(DerivationNode const& node) -> std::vector<std::string>
{
    std::vector<std::string> out;
    collect_yield(node, out);
    return out;
}

auto phenotype_text(DerivationNode const& node) -> std::string
{
    return join(yield(node));
}

auto sentential_form(Grammar const& g, DerivationNode const& node) -> std::string
{
    std::vector<std::string> parts;
    collect_form(g, node, parts);
    return join(parts);
}

auto is_well_formed(Grammar const& g, DerivationNode const& node) -> bool
{
    if (node.is_terminal()) { return !node.token.empty() && node.children.empty(); }
    if (node.nonterminal >= g.size()) { return false; }
    auto const& alts = g.alternatives(node.nonterminal);
    if (node.alternative >= alts.size()) { return false; }
    auto const& symbols = alts[node.alternative].symbols;
    if (symbols.size() != node.children.size()) { return false; }
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        auto const& child = node.children[i];
        if (symbols[i].is_nonterminal()) {
            if (child.nonterminal != symbols[i].ref) { return false; }
        } else if (!child.is_terminal() || child.token != symbols[i].text) {
            return false;
        }
        if (!is_well_formed(g, child)) { return false; }
    }
    return true;
}

auto record_choices(Grammar const& g, DerivationNode const& node) -> std::vector<std::vector<int>>
{
    std::vector<std::vector<int>> genes(g.size());
    collect_choices(node, genes);
    return genes;
}

auto nonterminal_nodes(DerivationNode& root) -> std::vector<NodeRef>
{
    std::vector<NodeRef> out;
    collect_nodes(root, 1, out);
    return out;
}

} // namespace gggp
