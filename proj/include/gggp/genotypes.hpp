#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gggp/derivation.hpp"
#include "gggp/grammar.hpp"
#include "gggp/rng.hpp"

namespace gggp {

// ---------------------------------------------------------------------------
// Grammatical Evolution: a flat codon string read left to right.

struct GeGenotype {
    std::vector<int> codons;

    friend auto operator==(GeGenotype const&, GeGenotype const&) -> bool = default;
};

struct GeParams {
    int codon_max{256};
    std::size_t initial_length{64};
};

struct GeDecodeResult {
    std::optional<DerivationNode> tree; // nullopt: Invalid
    std::size_t codons_read{0};
    int wraps{0};
};

/// Leftmost derivation. Only non-terminals with more than one alternative
/// consume a codon (codon mod alternative count). Running out of codons after
/// `max_wraps` restarts, or exceeding `max_depth`, yields an Invalid result.
auto ge_decode(Grammar const& g, GeGenotype const& geno, int max_wraps, int max_depth) -> GeDecodeResult;

auto ge_init(GeParams const& params, Rng& rng) -> GeGenotype;

/// One-point crossover with an independent cut in each parent.
auto ge_crossover(GeGenotype const& a, GeGenotype const& b, Rng& rng) -> std::pair<GeGenotype, GeGenotype>;

/// Deterministic core of ge_crossover: a[:cut_a] + b[cut_b:], b[:cut_b] + a[cut_a:].
auto ge_crossover_at(GeGenotype const& a, GeGenotype const& b, std::size_t cut_a, std::size_t cut_b)
    -> std::pair<GeGenotype, GeGenotype>;

/// Each codon is redrawn uniformly with probability pm. Returns true if anything changed.
auto ge_mutate(GeGenotype& geno, double pm, int codon_max, Rng& rng) -> bool;

// ---------------------------------------------------------------------------
// Dynamic Structured Grammatical Evolution: one integer list per non-terminal.

struct DsgeGenotype {
    std::vector<std::vector<int>> genes; // indexed like Grammar::nonterminals()

    friend auto operator==(DsgeGenotype const&, DsgeGenotype const&) -> bool = default;
};

/// One row of a decoding trace: the sentential form after a step, and the
/// integers not yet consumed, rendered as `{[0], [2, 3], [], ...}`.
struct DsgeTraceStep {
    std::string form;
    std::string remaining;
};

struct DsgeDecodeResult {
    DerivationNode tree;
    // Genotype as actually used: out-of-range or depth-infeasible entries
    // replaced by the chosen index, underflows extended, unread tails dropped.
    DsgeGenotype genotype;
};

/// Always yields a valid tree of depth <= max_depth. Throws GrammarError when
/// max_depth < min_depth(start). The generator is drawn from only when a gene
/// has to be extended.
auto dsge_decode(Grammar const& g, DsgeGenotype const& geno, int max_depth, Rng& rng,
                 std::vector<DsgeTraceStep>* trace = nullptr) -> DsgeDecodeResult;

auto format_genes(std::vector<std::vector<int>> const& genes) -> std::string;

/// Records the choices of a grow-initialized random tree.
auto dsge_init(Grammar const& g, int max_depth, Rng& rng) -> DsgeGenotype;

/// Gene-wise uniform crossover: mask[n] selects which parent offspring one takes gene n from.
auto dsge_crossover(DsgeGenotype const& a, DsgeGenotype const& b, Rng& rng) -> std::pair<DsgeGenotype, DsgeGenotype>;
auto dsge_crossover_masked(DsgeGenotype const& a, DsgeGenotype const& b, std::vector<bool> const& mask)
    -> std::pair<DsgeGenotype, DsgeGenotype>;

/// Each integer is redrawn with probability pm, uniformly over its non-terminal's alternatives.
auto dsge_mutate(Grammar const& g, DsgeGenotype& geno, double pm, Rng& rng) -> bool;

// ---------------------------------------------------------------------------
// CFG-GP: derivation trees manipulated directly.

enum class InitMethod { Grow, Full };

/// Random tree rooted at the start symbol. Throws GrammarError when max_depth < min_depth(start).
auto cfg_random_tree(Grammar const& g, int max_depth, InitMethod method, Rng& rng) -> DerivationNode;

/// Random subtree rooted at `nt` that fits in `budget` levels (nt included).
auto cfg_random_subtree(Grammar const& g, std::size_t nt, int budget, InitMethod method, Rng& rng) -> DerivationNode;

/// Same-non-terminal subtree exchange, retried up to 10 times when an
/// offspring would exceed max_depth; falls back to clones.
auto cfg_crossover(DerivationNode const& a, DerivationNode const& b, int max_depth, Rng& rng)
    -> std::pair<DerivationNode, DerivationNode>;

/// With probability pm, regrows one uniformly chosen non-terminal node's
/// subtree within the remaining depth budget.
auto cfg_mutate(Grammar const& g, DerivationNode& tree, double pm, int max_depth, Rng& rng) -> bool;

} // namespace gggp
