#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gggp/data.hpp"
#include "gggp/derivation.hpp"
#include "gggp/expr.hpp"
#include "gggp/genotypes.hpp"
#include "gggp/grammar.hpp"
#include "gggp/metrics.hpp"

namespace gggp {

enum class Variant { GE, CfgGp, DSGE };

auto to_string(Variant v) -> std::string;
/// Accepts GE, CFG-GP (or CFG) and DSGE, case-insensitively.
auto parse_variant(std::string_view text) -> Variant;

struct EvolutionConfig {
    std::string name{"run"};
    Variant variant{Variant::DSGE};
    std::string grammar_path;
    std::size_t population_size{1000};
    std::size_t generations{1000};
    double p_crossover{0.9};
    double p_mutation{0.05};
    int max_tree_depth{17};
    int max_wraps{3};
    std::size_t tournament_size{3};
    std::size_t elitism_count{1};
    std::uint64_t seed{0};
    std::size_t log_points{10};
    int codon_max{256};
    std::size_t ge_initial_length{64};
    // Rewrite this rule to one alternative per feature column before running.
    std::string variable_rule{"var"};
    bool inject_variables{true};
    // Fitness-evaluation threads. Never affects results.
    std::size_t workers{1};

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// Training RMSE, or the Worst sentinel that orders after every finite value.
class Fitness {
public:
    Fitness() = default;
    static auto worst() -> Fitness { return {}; }
    static auto of(double rmse) -> Fitness
    {
        Fitness f;
        f.value_ = rmse;
        return f;
    }

    [[nodiscard]] auto is_worst() const -> bool { return !value_.has_value(); }
    [[nodiscard]] auto value() const -> double { return *value_; }

    friend auto operator<(Fitness const& a, Fitness const& b) -> bool
    {
        if (a.is_worst()) { return false; }
        if (b.is_worst()) { return true; }
        return *a.value_ < *b.value_;
    }
    friend auto operator==(Fitness const&, Fitness const&) -> bool = default;

private:
    std::optional<double> value_;
};

using Genotype = std::variant<GeGenotype, DsgeGenotype, DerivationNode>;

struct Individual {
    Genotype genotype;
    std::optional<Expr> phenotype; // nullopt: Invalid
    Fitness fitness;
    std::size_t size{0};           // phenotype node count; ties prefer smaller
    std::uint64_t birth{0};        // creation order; ties prefer earlier
};

/// Strict ordering used by tournaments and best-ever tracking.
auto better(Individual const& a, Individual const& b) -> bool;

/// `variant | genotype integers | canonical phenotype | fitness`
auto individual_line(Individual const& ind) -> std::string;

struct Snapshot {
    std::size_t generation{0};
    Fitness best;             // best-ever at this generation
    double mean_rmse{0.0};    // over finite-fitness individuals; NaN when none
    double std_rmse{0.0};
};

struct RunLog {
    std::vector<Snapshot> snapshots;

    /// `generation,best_rmse,mean_rmse,std_rmse`
    [[nodiscard]] auto to_csv() const -> std::string;
};

/// Generation 0, every ceil(generations / log_points) generations, and the last generation.
auto log_schedule(std::size_t generations, std::size_t log_points) -> std::vector<std::size_t>;

struct RunResult {
    EvolutionConfig config;
    Individual best;
    bool valid_model{false};
    std::string best_expression;
    std::string simplified_expression;
    std::optional<MetricReport> train;
    std::optional<MetricReport> test;
    RunLog log;
    double wall_seconds{0.0}; // not serialized
};

/// Key-value text document; see README for the schema. `extra` pairs are appended verbatim.
auto serialize(RunResult const& r, std::vector<std::pair<std::string, std::string>> const& extra = {}) -> std::string;

/// Shortest round-trip decimal, `inf` and `nan` spelled out.
auto format_double(double v) -> std::string;

struct RunHooks {
    std::function<void(std::size_t generation)> on_generation;
    std::function<void()> on_test_access;
};

/// Training-set fitness evaluation, reusable outside the loop.
class FitnessEvaluator {
public:
    explicit FitnessEvaluator(Dataset const& train) : data_(train) { }

    [[nodiscard]] auto predict(Expr const& e) const -> std::vector<double>;
    [[nodiscard]] auto operator()(Expr const& e) const -> Fitness;

private:
    Dataset const& data_;
};

auto predict(Expr const& e, Dataset const& d) -> std::vector<double>;

/// Grammar as used for a run: loaded from cfg.grammar_path with the feature
/// columns injected when configured.
auto run_grammar(EvolutionConfig const& cfg, Dataset const& train) -> Grammar;

auto run(EvolutionConfig const& cfg, Dataset const& train, Dataset const& test, RunHooks const& hooks = {}) -> RunResult;
auto run(EvolutionConfig const& cfg, Grammar const& grammar, Dataset const& train, Dataset const& test,
         RunHooks const& hooks = {}) -> RunResult;

struct BatchEntry {
    std::size_t config_index{0};
    std::size_t replicate{0};
    std::uint64_t seed{0};
    std::optional<RunResult> result;
    std::string error;
};

auto replicate_seed(std::uint64_t base_seed, std::string_view config_name, std::size_t replicate) -> std::uint64_t;

/// Runs every config `replicates` times, up to `workers` runs at once.
/// Results are ordered by (config, replicate) and do not depend on `workers`.
/// `on_done` is called from the calling thread, in order.
auto run_batch(std::vector<EvolutionConfig> const& cfgs, std::size_t replicates, std::uint64_t base_seed,
               Dataset const& train, Dataset const& test, std::size_t workers = 1,
               std::function<void(BatchEntry const&)> const& on_done = {}) -> std::vector<BatchEntry>;

} // namespace gggp
