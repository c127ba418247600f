// Earley recognizer backing validate_phenotype. Productions are never empty,
// so no nullable handling is required.

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "gggp/grammar.hpp"

namespace gggp {

namespace {

struct Item {
    std::size_t nt;
    std::size_t alt;
    std::size_t dot;
    std::size_t origin;
};

struct ItemHash {
    auto operator()(Item const& it) const noexcept -> std::size_t
    {
        std::uint64_t h = it.nt;
        h = h * 0x9E3779B97F4A7C15ULL + it.alt;
        h = h * 0x9E3779B97F4A7C15ULL + it.dot;
        h = h * 0x9E3779B97F4A7C15ULL + it.origin;
        return static_cast<std::size_t>(h ^ (h >> 29U));
    }
};

struct ItemEq {
    auto operator()(Item const& a, Item const& b) const noexcept -> bool
    {
        return a.nt == b.nt && a.alt == b.alt && a.dot == b.dot && a.origin == b.origin;
    }
};

struct ChartSet {
    std::vector<Item> items;
    std::unordered_set<Item, ItemHash, ItemEq> seen;
    // waiting[nt] lists items whose next symbol is nt.
    std::vector<std::vector<std::size_t>> waiting;
    std::vector<char> predicted;

    auto add(Item const& it) -> bool
    {
        if (!seen.insert(it).second) { return false; }
        items.push_back(it);
        return true;
    }
};

} // namespace

auto validate_phenotype(Grammar const& g, std::span<std::string const> tokens) -> bool
{
    auto const n = tokens.size();
    if (n == 0) { return false; }

    std::vector<ChartSet> chart(n + 1);
    for (auto& set : chart) {
        set.waiting.resize(g.size());
        set.predicted.assign(g.size(), 0);
    }

    auto const start = g.start();
    for (auto const& p : g.alternatives(start)) { chart[0].add({start, p.index, 0, 0}); }
    chart[0].predicted[start] = 1;

    for (std::size_t i = 0; i <= n; ++i) {
        auto& set = chart[i];
        for (std::size_t k = 0; k < set.items.size(); ++k) {
            Item const item = set.items[k];
            auto const& symbols = g.alternatives(item.nt)[item.alt].symbols;

            if (item.dot == symbols.size()) {
                // origin < i here, so the origin set is never the one being grown.
                auto const& origin = chart[item.origin];
                for (auto idx : origin.waiting[item.nt]) {
                    auto parent = origin.items[idx];
                    ++parent.dot;
                    set.add(parent);
                }
                continue;
            }

            auto const& next = symbols[item.dot];
            if (next.is_nonterminal()) {
                set.waiting[next.ref].push_back(k);
                if (set.predicted[next.ref] == 0) {
                    set.predicted[next.ref] = 1;
                    for (auto const& p : g.alternatives(next.ref)) { set.add({next.ref, p.index, 0, i}); }
                }
            } else if (i < n && tokens[i] == next.text) {
                chart[i + 1].add({item.nt, item.alt, item.dot + 1, item.origin});
            }
        }
    }

    for (auto const& item : chart[n].items) {
        if (item.nt == start && item.origin == 0 && item.dot == g.alternatives(start)[item.alt].symbols.size()) {
            return true;
        }
    }
    return false;
}

} // namespace gggp
