#include <algorithm>

#include "gggp/errors.hpp"
#include "gggp/genotypes.hpp"

namespace gggp {

auto cfg_random_subtree(Grammar const& g, std::size_t nt, int budget, InitMethod method, Rng& rng) -> DerivationNode
{
    auto const& alts = g.alternatives(nt);
    auto candidates = g.feasible(nt, budget);
    if (candidates.empty()) {
        throw GrammarError("no alternative of <" + g.name(nt) + "> fits in " + std::to_string(budget) + " levels");
    }
    if (method == InitMethod::Full) {
        std::vector<std::size_t> growing;
        std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(growing),
                     [&](std::size_t a) { return alts[a].recursive; });
        if (!growing.empty()) { candidates = std::move(growing); }
    }
    auto const choice = candidates.size() == 1 ? candidates.front() : candidates[rng.index(candidates.size())];

    DerivationNode node{nt, choice, {}, {}};
    auto const& symbols = alts[choice].symbols;
    node.children.reserve(symbols.size());
    for (auto const& s : symbols) {
        if (s.is_nonterminal()) {
            node.children.push_back(cfg_random_subtree(g, s.ref, budget - 1, method, rng));
        } else {
            node.children.push_back(DerivationNode::leaf(s.text));
        }
    }
    return node;
}

auto cfg_random_tree(Grammar const& g, int max_depth, InitMethod method, Rng& rng) -> DerivationNode
{
    if (max_depth < g.min_depth(g.start())) {
        throw GrammarError("max depth " + std::to_string(max_depth) + " is below the minimum derivation depth "
                           + std::to_string(g.min_depth(g.start())) + " of <" + g.name(g.start()) + ">");
    }
    return cfg_random_subtree(g, g.start(), max_depth, method, rng);
}

auto cfg_crossover(DerivationNode const& a, DerivationNode const& b, int max_depth, Rng& rng)
    -> std::pair<DerivationNode, DerivationNode>
{
    constexpr int attempts = 10;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        DerivationNode first = a;
        DerivationNode second = b;
        auto nodes_a = nonterminal_nodes(first);
        auto nodes_b = nonterminal_nodes(second);
        // The root is never a crossover point: swapping it only exchanges parents.
        if (nodes_a.size() < 2) { break; }
        auto const& pick_a = nodes_a[1 + rng.index(nodes_a.size() - 1)];

        std::vector<NodeRef> matches;
        for (std::size_t i = 1; i < nodes_b.size(); ++i) {
            if (nodes_b[i].node->nonterminal == pick_a.node->nonterminal) { matches.push_back(nodes_b[i]); }
        }
        if (matches.empty()) { break; }
        auto const& pick_b = matches[rng.index(matches.size())];

        std::swap(*pick_a.node, *pick_b.node);
        if (tree_depth(first) <= max_depth && tree_depth(second) <= max_depth) {
            return {std::move(first), std::move(second)};
        }
    }
    return {a, b};
}

auto cfg_mutate(Grammar const& g, DerivationNode& tree, double pm, int max_depth, Rng& rng) -> bool
{
    if (!rng.bernoulli(pm)) { return false; }
    auto nodes = nonterminal_nodes(tree);
    auto const& pick = nodes[rng.index(nodes.size())];
    auto replacement = cfg_random_subtree(g, pick.node->nonterminal, max_depth - pick.level + 1, InitMethod::Grow, rng);
    if (replacement == *pick.node) { return false; }
    *pick.node = std::move(replacement);
    return true;
}

} // namespace gggp
