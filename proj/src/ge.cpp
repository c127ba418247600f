#include "gggp/genotypes.hpp"

#include <algorithm>

namespace gggp {

namespace {

class GeMapper {
public:
    GeMapper(Grammar const& g, GeGenotype const& geno, int max_wraps, int max_depth)
        : g_(g), codons_(geno.codons), max_wraps_(max_wraps), max_depth_(max_depth)
    { }

    auto run() -> GeDecodeResult
    {
        GeDecodeResult result;
        DerivationNode root{g_.start(), 0, {}, {}};
        if (expand(root, 1)) { result.tree = std::move(root); }
        result.codons_read = read_;
        result.wraps = wraps_;
        return result;
    }

private:
    auto next_codon() -> std::optional<int>
    {
        if (pos_ >= codons_.size()) {
            if (wraps_ >= max_wraps_ || codons_.empty()) { return std::nullopt; }
            ++wraps_;
            pos_ = 0;
        }
        ++read_;
        return codons_[pos_++];
    }

    auto expand(DerivationNode& node, int level) -> bool
    {
        if (level > max_depth_) { return false; }
        auto const& alts = g_.alternatives(node.nonterminal);
        std::size_t choice = 0;
        if (alts.size() > 1) {
            auto codon = next_codon();
            if (!codon) { return false; }
            choice = static_cast<std::size_t>(*codon) % alts.size();
        }
        node.alternative = choice;
        auto const& symbols = alts[choice].symbols;
        node.children.reserve(symbols.size());
        for (auto const& s : symbols) {
            if (s.is_nonterminal()) {
                node.children.push_back({s.ref, 0, {}, {}});
            } else {
                node.children.push_back(DerivationNode::leaf(s.text));
            }
        }
        for (auto& child : node.children) {
            if (!child.is_terminal() && !expand(child, level + 1)) { return false; }
        }
        return true;
    }

    Grammar const& g_;
    std::vector<int> const& codons_;
    int max_wraps_;
    int max_depth_;
    std::size_t pos_{0};
    std::size_t read_{0};
    int wraps_{0};
};

} // namespace

auto ge_decode(Grammar const& g, GeGenotype const& geno, int max_wraps, int max_depth) -> GeDecodeResult
{
    return GeMapper(g, geno, max_wraps, max_depth).run();
}

auto ge_init(GeParams const& params, Rng& rng) -> GeGenotype
{
    GeGenotype geno;
    geno.codons.resize(std::max<std::size_t>(params.initial_length, 1));
    for (auto& c : geno.codons) { c = static_cast<int>(rng.index(static_cast<std::size_t>(params.codon_max))); }
    return geno;
}

auto ge_crossover_at(GeGenotype const& a, GeGenotype const& b, std::size_t cut_a, std::size_t cut_b)
    -> std::pair<GeGenotype, GeGenotype>
{
    cut_a = std::min(cut_a, a.codons.size());
    cut_b = std::min(cut_b, b.codons.size());
    auto const ca = static_cast<std::ptrdiff_t>(cut_a);
    auto const cb = static_cast<std::ptrdiff_t>(cut_b);

    GeGenotype first;
    first.codons.assign(a.codons.begin(), a.codons.begin() + ca);
    first.codons.insert(first.codons.end(), b.codons.begin() + cb, b.codons.end());
    GeGenotype second;
    second.codons.assign(b.codons.begin(), b.codons.begin() + cb);
    second.codons.insert(second.codons.end(), a.codons.begin() + ca, a.codons.end());
    return {std::move(first), std::move(second)};
}

auto ge_crossover(GeGenotype const& a, GeGenotype const& b, Rng& rng) -> std::pair<GeGenotype, GeGenotype>
{
    for (;;) {
        auto const cut_a = rng.index(a.codons.size() + 1);
        auto const cut_b = rng.index(b.codons.size() + 1);
        // Both offspring must keep at least one codon.
        auto const len_first = cut_a + (b.codons.size() - cut_b);
        auto const len_second = cut_b + (a.codons.size() - cut_a);
        if (len_first > 0 && len_second > 0) { return ge_crossover_at(a, b, cut_a, cut_b); }
    }
}

auto ge_mutate(GeGenotype& geno, double pm, int codon_max, Rng& rng) -> bool
{
    bool changed = false;
    for (auto& c : geno.codons) {
        if (rng.bernoulli(pm)) {
            auto const v = static_cast<int>(rng.index(static_cast<std::size_t>(codon_max)));
            changed = changed || v != c;
            c = v;
        }
    }
    return changed;
}

} // namespace gggp
