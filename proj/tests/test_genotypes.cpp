#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "gggp/derivation.hpp"
#include "gggp/errors.hpp"
#include "gggp/genotypes.hpp"
#include "gggp/rng.hpp"
#include "support.hpp"

using namespace gggp;
using test_support::base_grammar;

namespace {

auto ge_text(Grammar const& g, std::vector<int> codons, int wraps, int depth = 17) -> std::string
{
    auto const r = ge_decode(g, GeGenotype{std::move(codons)}, wraps, depth);
    return r.tree ? phenotype_text(*r.tree) : std::string("<invalid>");
}

auto within_bounds(Grammar const& g, DsgeGenotype const& geno) -> bool
{
    if (geno.genes.size() != g.size()) { return false; }
    for (std::size_t nt = 0; nt < g.size(); ++nt) {
        for (int v : geno.genes[nt]) {
            if (v < 0 || static_cast<std::size_t>(v) >= g.alternatives(nt).size()) { return false; }
        }
    }
    return true;
}

auto valid_tree(Grammar const& g, DerivationNode const& t, int max_depth) -> bool
{
    return is_well_formed(g, t) && tree_depth(t) <= max_depth && validate_phenotype(g, yield(t));
}

auto table_two_genotype() -> DsgeGenotype { return DsgeGenotype{{{0}, {0, 2, 3}, {1}, {2}, {0}}}; }

} // namespace

TEST_CASE("GE decoding by hand")
{
    auto const g = base_grammar();
    CHECK(ge_text(g, {0, 2, 1, 1, 2, 0}, 0) == "x1 - x0");

    auto const r = ge_decode(g, GeGenotype{{0, 2, 1, 1, 2, 0}}, 0, 17);
    CHECK(r.codons_read == 6);
    CHECK(r.wraps == 0);

    CHECK(ge_text(g, {2}, 0) == "<invalid>");
    CHECK(ge_text(g, {2}, 1) == "x2");
    for (int depth : {3, 4, 17, 100}) { CHECK(ge_text(g, {0, 0, 0}, 0, depth) == "<invalid>"); }
    CHECK(ge_text(g, {}, 3) == "<invalid>");
}

TEST_CASE("GE depth limit makes an individual invalid")
{
    auto const g = base_grammar();
    // expr -> expr op expr at level 2 needs depth 4 for the var leaves.
    CHECK(ge_text(g, {0, 2, 1, 1, 2, 0}, 0, 4) == "x1 - x0");
    CHECK(ge_text(g, {0, 2, 1, 1, 2, 0}, 0, 3) == "<invalid>");
}

TEST_CASE("GE codons are redundant modulo the alternative count")
{
    auto const g = base_grammar();
    Rng rng(7);
    int valid = 0;
    for (int trial = 0; trial < 500; ++trial) {
        auto geno = ge_init(GeParams{200, 32}, rng);
        auto shifted = geno;
        for (auto& c : shifted.codons) { c += 12; } // lcm of the alternative counts
        auto const a = ge_decode(g, geno, 2, 17);
        auto const b = ge_decode(g, shifted, 2, 17);
        REQUIRE(a.tree.has_value() == b.tree.has_value());
        if (a.tree) {
            ++valid;
            CHECK(*a.tree == *b.tree);
        }
    }
    CHECK(valid > 0);
}

TEST_CASE("GE initialization and variation")
{
    Rng rng(1);
    auto const geno = ge_init(GeParams{256, 64}, rng);
    CHECK(geno.codons.size() == 64);
    CHECK(std::all_of(geno.codons.begin(), geno.codons.end(), [](int c) { return c >= 0 && c < 256; }));

    GeGenotype const a{{1, 2, 3, 4}};
    GeGenotype const b{{5, 6, 7, 8}};
    auto const [c, d] = ge_crossover_at(a, b, 2, 2);
    CHECK(c.codons == std::vector<int>{1, 2, 7, 8});
    CHECK(d.codons == std::vector<int>{5, 6, 3, 4});

    auto const [e, f] = ge_crossover_at(a, b, 0, 0);
    CHECK(e == b);
    CHECK(f == a);

    for (int i = 0; i < 200; ++i) {
        auto [x, y] = ge_crossover(a, a, rng);
        CHECK_FALSE(x.codons.empty());
        CHECK_FALSE(y.codons.empty());
        auto all = x.codons;
        all.insert(all.end(), y.codons.begin(), y.codons.end());
        std::multiset<int> got(all.begin(), all.end());
        CHECK(got == std::multiset<int>{1, 1, 2, 2, 3, 3, 4, 4});
    }

    auto m = geno;
    CHECK_FALSE(ge_mutate(m, 0.0, 256, rng));
    CHECK(m == geno);
    ge_mutate(m, 1.0, 256, rng);
    CHECK(m.codons.size() == geno.codons.size());
    CHECK(std::all_of(m.codons.begin(), m.codons.end(), [](int v) { return v >= 0 && v < 256; }));
}

TEST_CASE("DSGE golden decode with trace")
{
    auto const g = base_grammar();
    Rng rng(0);
    std::vector<DsgeTraceStep> trace;
    auto const r = dsge_decode(g, table_two_genotype(), 17, rng, &trace);
    CHECK(phenotype_text(r.tree) == "x2 - 1.0");
    CHECK(r.genotype == table_two_genotype());

    std::vector<std::pair<std::string, std::string>> const expected{
        {"<start>", "{[0], [0, 2, 3], [1], [2], [0]}"},
        {"<expr>", "{[], [0, 2, 3], [1], [2], [0]}"},
        {"<expr> <op> <expr>", "{[], [2, 3], [1], [2], [0]}"},
        {"<var> <op> <expr>", "{[], [3], [1], [2], [0]}"},
        {"x2 <op> <expr>", "{[], [3], [1], [], [0]}"},
        {"x2 - <expr>", "{[], [3], [], [], [0]}"},
        {"x2 - <const>", "{[], [], [], [], [0]}"},
        {"x2 - 1.0", "{[], [], [], [], []}"},
    };
    REQUIRE(trace.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CAPTURE(i);
        CHECK(trace[i].form == expected[i].first);
        CHECK(trace[i].remaining == expected[i].second);
    }
}

TEST_CASE("DSGE decoding leaves empty genes untouched")
{
    auto const g = base_grammar();
    Rng rng(0);
    DsgeGenotype const geno{{{0}, {2}, {}, {0}, {}}};
    auto const r = dsge_decode(g, geno, 17, rng);
    CHECK(phenotype_text(r.tree) == "x0");
    CHECK(r.genotype == geno);
}

TEST_CASE("DSGE repairs, extends and truncates")
{
    auto const g = base_grammar();
    Rng rng(3);
    // Out-of-range value repaired modulo the feasible set, trailing values dropped.
    auto const r = dsge_decode(g, DsgeGenotype{{{0}, {6, 1, 1}, {}, {1, 2}, {}}}, 17, rng);
    CHECK(phenotype_text(r.tree) == "x1");
    CHECK(r.genotype.genes[1] == std::vector<int>{2});
    CHECK(r.genotype.genes[3] == std::vector<int>{1});

    // Missing values are drawn and written back.
    auto const u = dsge_decode(g, DsgeGenotype{{{}, {}, {}, {}, {}}}, 17, rng);
    CHECK(within_bounds(g, u.genotype));
    Rng again(0);
    CHECK(dsge_decode(g, u.genotype, 17, again).tree == u.tree);

    CHECK_THROWS_AS((void)dsge_decode(g, DsgeGenotype{{{0}, {}, {}, {}, {}}}, 2, rng), GrammarError);
}

TEST_CASE("DSGE respects the depth frontier")
{
    auto const g = base_grammar();
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> expr(1 + rng.index(6), 0);
        DsgeGenotype const geno{{{0}, expr, {}, {}, {}}};
        auto const r = dsge_decode(g, geno, 4, rng);
        REQUIRE(tree_depth(r.tree) <= 4);
        CHECK(valid_tree(g, r.tree, 4));
        CHECK(within_bounds(g, r.genotype));
    }
}

TEST_CASE("DSGE initialization round-trips through decoding")
{
    auto const g = base_grammar();
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        int const depth = trial % 2 == 0 ? 4 : 10;
        auto const geno = dsge_init(g, depth, rng);
        Rng unused(0);
        auto const r = dsge_decode(g, geno, depth, unused);
        REQUIRE(tree_depth(r.tree) <= depth);
        CHECK(r.genotype == geno);
        CHECK(valid_tree(g, r.tree, depth));
    }
}

TEST_CASE("DSGE crossover")
{
    auto const g = base_grammar();
    Rng rng(2);
    auto const a = dsge_init(g, 8, rng);
    auto const b = dsge_init(g, 8, rng);

    auto const [c0, c1] = dsge_crossover_masked(a, b, std::vector<bool>(g.size(), false));
    CHECK(c0 == a);
    CHECK(c1 == b);

    std::vector<bool> op_only(g.size(), false);
    op_only[g.index_of("op")] = true;
    auto const [d0, d1] = dsge_crossover_masked(a, b, op_only);
    for (std::size_t nt = 0; nt < g.size(); ++nt) {
        bool const swapped = nt == g.index_of("op");
        CHECK(d0.genes[nt] == (swapped ? b : a).genes[nt]);
        CHECK(d1.genes[nt] == (swapped ? a : b).genes[nt]);
    }

    for (int i = 0; i < 1000; ++i) {
        auto const x = dsge_init(g, 6, rng);
        auto const y = dsge_init(g, 6, rng);
        auto const [p, q] = dsge_crossover(x, y, rng);
        CHECK(within_bounds(g, p));
        CHECK(within_bounds(g, q));
        Rng dec(static_cast<std::uint64_t>(i));
        CHECK(tree_depth(dsge_decode(g, p, 6, dec).tree) <= 6);
    }
}

TEST_CASE("DSGE locality: one changed value changes one expansion")
{
    auto const g = base_grammar();
    Rng rng(0);
    DsgeGenotype const geno{{{0}, {0, 2, 3}, {1}, {2}, {0}}};
    auto op_changed = geno;
    op_changed.genes[g.index_of("op")][0] = 2;
    CHECK(phenotype_text(dsge_decode(g, op_changed, 17, rng).tree) == "x2 * 1.0");
    auto var_changed = geno;
    var_changed.genes[g.index_of("var")][0] = 0;
    CHECK(phenotype_text(dsge_decode(g, var_changed, 17, rng).tree) == "x0 - 1.0");
}

TEST_CASE("DSGE mutation")
{
    auto const g = base_grammar();
    Rng rng(9);
    for (int i = 0; i < 500; ++i) {
        auto geno = dsge_init(g, 8, rng);
        auto const before = geno;
        CHECK_FALSE(dsge_mutate(g, geno, 0.0, rng));
        CHECK(geno == before);
        dsge_mutate(g, geno, 1.0, rng);
        CHECK(within_bounds(g, geno));
        for (std::size_t nt = 0; nt < g.size(); ++nt) { CHECK(geno.genes[nt].size() == before.genes[nt].size()); }
    }
}

TEST_CASE("CFG-GP initialization at the minimum depth")
{
    auto const g = base_grammar();
    std::set<std::string> const leaves{"x0", "x1", "x2", "1.0", "0.1", "10"};
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng a(seed);
        Rng b(seed);
        auto const grow = cfg_random_tree(g, 3, InitMethod::Grow, a);
        auto const full = cfg_random_tree(g, 3, InitMethod::Full, b);
        CHECK(grow == full);
        auto const tokens = yield(grow);
        REQUIRE(tokens.size() == 1);
        CHECK(leaves.count(tokens[0]) == 1);
        CHECK(tree_depth(grow) == 3);
    }
    Rng rng(0);
    CHECK_THROWS_AS((void)cfg_random_tree(g, 2, InitMethod::Grow, rng), GrammarError);
}

TEST_CASE("CFG-GP full trees reach the depth limit")
{
    auto const g = base_grammar();
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        auto const t = cfg_random_tree(g, 6, InitMethod::Full, rng);
        CHECK(tree_depth(t) == 6);
        CHECK(valid_tree(g, t, 6));
    }
}

TEST_CASE("CFG-GP grow trees are valid")
{
    auto const g = base_grammar();
    Rng rng(17);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
        auto const t = cfg_random_tree(g, 17, InitMethod::Grow, rng);
        if (!valid_tree(g, t, 17)) { ++bad; }
    }
    CHECK(bad == 0);
}

TEST_CASE("CFG-GP crossover")
{
    auto const g = base_grammar();
    Rng rng(6);

    SUBCASE("var for var swap")
    {
        DsgeGenotype const a{{{0}, {0, 2, 2}, {0}, {0, 1}, {}}};
        DsgeGenotype const b{{{0}, {2}, {}, {2}, {}}};
        Rng dec(0);
        auto const ta = dsge_decode(g, a, 17, dec).tree;
        auto const tb = dsge_decode(g, b, 17, dec).tree;
        for (int i = 0; i < 50; ++i) {
            auto const [c, d] = cfg_crossover(ta, tb, 17, rng);
            CHECK(valid_tree(g, c, 17));
            CHECK(valid_tree(g, d, 17));
            CHECK(yield(c).size() + yield(d).size() == yield(ta).size() + yield(tb).size());
        }
    }

    SUBCASE("no shared non-terminal below the root gives clones")
    {
        auto const h = parse_grammar("<s> ::= <a> | <b>\n<a> ::= x\n<b> ::= y\n");
        DerivationNode const a{0, 0, "", {DerivationNode{1, 0, "", {DerivationNode::leaf("x")}}}};
        DerivationNode const b{0, 1, "", {DerivationNode{2, 0, "", {DerivationNode::leaf("y")}}}};
        REQUIRE(is_well_formed(h, a));
        REQUIRE(is_well_formed(h, b));
        auto const [c, d] = cfg_crossover(a, b, 5, rng);
        CHECK(c == a);
        CHECK(d == b);
    }

    SUBCASE("depth bound holds")
    {
        for (int i = 0; i < 1000; ++i) {
            auto const a = cfg_random_tree(g, 8, InitMethod::Grow, rng);
            auto const b = cfg_random_tree(g, 8, InitMethod::Full, rng);
            auto const [c, d] = cfg_crossover(a, b, 8, rng);
            CHECK(valid_tree(g, c, 8));
            CHECK(valid_tree(g, d, 8));
        }
    }
}

TEST_CASE("CFG-GP mutation")
{
    auto const g = base_grammar();
    Rng rng(8);

    for (int i = 0; i < 500; ++i) {
        auto t = cfg_random_tree(g, 8, InitMethod::Grow, rng);
        auto const before = t;
        CHECK_FALSE(cfg_mutate(g, t, 0.0, 8, rng));
        CHECK(t == before);
        cfg_mutate(g, t, 1.0, 8, rng);
        CHECK(valid_tree(g, t, 8));
    }

    // Regrowing the <const> node of `x2 - 1.0` changes only the literal.
    Rng dec(0);
    auto const parent = dsge_decode(g, table_two_genotype(), 17, dec).tree;
    std::set<std::string> const consts{"1.0", "0.1", "10"};
    for (int i = 0; i < 100; ++i) {
        auto child = parent;
        for (auto const& ref : nonterminal_nodes(child)) {
            if (ref.node->nonterminal == g.index_of("const")) {
                *ref.node = cfg_random_subtree(g, g.index_of("const"), 17 - ref.level + 1, InitMethod::Grow, rng);
            }
        }
        auto const a = yield(parent);
        auto const b = yield(child);
        REQUIRE(b.size() == a.size());
        CHECK(b[0] == a[0]);
        CHECK(b[1] == a[1]);
        CHECK(consts.count(b[2]) == 1);
    }
}

TEST_CASE("genotype operators are deterministic under a seed")
{
    auto const g = base_grammar();
    auto draw = [&](std::uint64_t seed) {
        Rng rng(seed);
        auto a = dsge_init(g, 10, rng);
        auto b = dsge_init(g, 10, rng);
        auto [c, d] = dsge_crossover(a, b, rng);
        dsge_mutate(g, c, 0.3, rng);
        auto t = cfg_random_tree(g, 10, InitMethod::Grow, rng);
        cfg_mutate(g, t, 1.0, 10, rng);
        auto ge = ge_init(GeParams{}, rng);
        ge_mutate(ge, 0.1, 256, rng);
        return std::tuple(c, d, t, ge);
    };
    CHECK(draw(42) == draw(42));
    CHECK_FALSE(draw(42) == draw(43));
}
