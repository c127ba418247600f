#include <algorithm>
#include <sstream>

#include "gggp/errors.hpp"
#include "gggp/genotypes.hpp"

namespace gggp {

namespace {

class DsgeMapper {
public:
    DsgeMapper(Grammar const& g, DsgeGenotype const& geno, int max_depth, Rng& rng, std::vector<DsgeTraceStep>* trace)
        : g_(g), genes_(geno.genes), cursor_(g.size(), 0), max_depth_(max_depth), rng_(rng), trace_(trace)
    {
        genes_.resize(g.size());
    }

    auto run() -> DsgeDecodeResult
    {
        root_ = DerivationNode{g_.start(), 0, {}, {}};
        record();
        expand(root_, 1);
        for (std::size_t nt = 0; nt < genes_.size(); ++nt) { genes_[nt].resize(cursor_[nt]); }
        return {std::move(root_), DsgeGenotype{std::move(genes_)}};
    }

private:
    auto choose(std::size_t nt, int budget) -> std::size_t
    {
        auto const& alts = g_.alternatives(nt);
        auto& gene = genes_[nt];
        auto& cursor = cursor_[nt];

        auto const feasible = g_.feasible(nt, budget);
        std::size_t choice = 0;
        if (cursor < gene.size()) {
            auto const v = gene[cursor];
            auto const in_range = v >= 0 && static_cast<std::size_t>(v) < alts.size();
            if (in_range && alts[static_cast<std::size_t>(v)].min_depth <= budget) {
                choice = static_cast<std::size_t>(v);
            } else {
                auto const m = static_cast<long long>(feasible.size());
                choice = feasible[static_cast<std::size_t>(((v % m) + m) % m)];
            }
            gene[cursor] = static_cast<int>(choice);
        } else {
            choice = feasible[rng_.index(feasible.size())];
            gene.push_back(static_cast<int>(choice));
        }
        ++cursor;
        return choice;
    }

    void expand(DerivationNode& node, int level)
    {
        auto const choice = choose(node.nonterminal, max_depth_ - level + 1);
        node.alternative = choice;
        auto const& symbols = g_.alternatives(node.nonterminal)[choice].symbols;
        node.children.reserve(symbols.size());
        for (auto const& s : symbols) {
            if (s.is_nonterminal()) {
                node.children.push_back({s.ref, 0, {}, {}});
            } else {
                node.children.push_back(DerivationNode::leaf(s.text));
            }
        }
        record();
        for (auto& child : node.children) {
            if (!child.is_terminal()) { expand(child, level + 1); }
        }
    }

    void record()
    {
        if (trace_ == nullptr) { return; }
        std::vector<std::vector<int>> remaining(genes_.size());
        for (std::size_t nt = 0; nt < genes_.size(); ++nt) {
            remaining[nt].assign(genes_[nt].begin() + static_cast<std::ptrdiff_t>(cursor_[nt]), genes_[nt].end());
        }
        trace_->push_back({sentential_form(g_, root_), format_genes(remaining)});
    }

    Grammar const& g_;
    std::vector<std::vector<int>> genes_;
    std::vector<std::size_t> cursor_;
    int max_depth_;
    Rng& rng_;
    std::vector<DsgeTraceStep>* trace_;
    DerivationNode root_;
};

} // namespace

auto format_genes(std::vector<std::vector<int>> const& genes) -> std::string
{
    std::ostringstream os;
    os << '{';
    for (std::size_t nt = 0; nt < genes.size(); ++nt) {
        if (nt > 0) { os << ", "; }
        os << '[';
        for (std::size_t i = 0; i < genes[nt].size(); ++i) {
            if (i > 0) { os << ", "; }
            os << genes[nt][i];
        }
        os << ']';
    }
    os << '}';
    return os.str();
}

auto dsge_decode(Grammar const& g, DsgeGenotype const& geno, int max_depth, Rng& rng,
                 std::vector<DsgeTraceStep>* trace) -> DsgeDecodeResult
{
    if (max_depth < g.min_depth(g.start())) {
        throw GrammarError("max depth " + std::to_string(max_depth) + " is below the minimum derivation depth "
                           + std::to_string(g.min_depth(g.start())) + " of <" + g.name(g.start()) + ">");
    }
    return DsgeMapper(g, geno, max_depth, rng, trace).run();
}

auto dsge_init(Grammar const& g, int max_depth, Rng& rng) -> DsgeGenotype
{
    auto tree = cfg_random_tree(g, max_depth, InitMethod::Grow, rng);
    return DsgeGenotype{record_choices(g, tree)};
}

auto dsge_crossover_masked(DsgeGenotype const& a, DsgeGenotype const& b, std::vector<bool> const& mask)
    -> std::pair<DsgeGenotype, DsgeGenotype>
{
    DsgeGenotype first = a;
    DsgeGenotype second = b;
    for (std::size_t nt = 0; nt < mask.size() && nt < first.genes.size() && nt < second.genes.size(); ++nt) {
        if (mask[nt]) { std::swap(first.genes[nt], second.genes[nt]); }
    }
    return {std::move(first), std::move(second)};
}

auto dsge_crossover(DsgeGenotype const& a, DsgeGenotype const& b, Rng& rng) -> std::pair<DsgeGenotype, DsgeGenotype>
{
    std::vector<bool> mask(std::max(a.genes.size(), b.genes.size()));
    for (std::size_t i = 0; i < mask.size(); ++i) { mask[i] = rng.bernoulli(0.5); }
    return dsge_crossover_masked(a, b, mask);
}

auto dsge_mutate(Grammar const& g, DsgeGenotype& geno, double pm, Rng& rng) -> bool
{
    bool changed = false;
    for (std::size_t nt = 0; nt < geno.genes.size() && nt < g.size(); ++nt) {
        auto const k = g.alternatives(nt).size();
        for (auto& v : geno.genes[nt]) {
            if (rng.bernoulli(pm)) {
                auto const w = static_cast<int>(rng.index(k));
                changed = changed || w != v;
                v = w;
            }
        }
    }
    return changed;
}

} // namespace gggp
