#include "gggp/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "gggp/errors.hpp"
#include "gggp/rng.hpp"

namespace gggp {

auto to_string(Variant v) -> std::string
{
    switch (v) {
    case Variant::GE: return "GE";
    case Variant::CfgGp: return "CFG-GP";
    case Variant::DSGE: return "DSGE";
    }
    return "?";
}

auto parse_variant(std::string_view text) -> Variant
{
    std::string up(text);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "GE") { return Variant::GE; }
    if (up == "CFG-GP" || up == "CFG" || up == "CFGGP") { return Variant::CfgGp; }
    if (up == "DSGE") { return Variant::DSGE; }
    throw ConfigError("unknown variant '" + std::string(text) + "' (expected GE, CFG-GP or DSGE)");
}

void EvolutionConfig::validate() const
{
    auto fail = [this](std::string const& what) { throw ConfigError("config '" + name + "': " + what); };
    if (population_size < 2) { fail("population_size must be at least 2"); }
    if (elitism_count >= population_size) { fail("elitism_count must be below population_size"); }
    if (tournament_size < 1) { fail("tournament_size must be at least 1"); }
    if (!(p_crossover >= 0.0 && p_crossover <= 1.0)) { fail("p_crossover must lie in [0, 1]"); }
    if (!(p_mutation >= 0.0 && p_mutation <= 1.0)) { fail("p_mutation must lie in [0, 1]"); }
    if (max_tree_depth < 1) { fail("max_tree_depth must be positive"); }
    if (max_wraps < 0) { fail("max_wraps must be non-negative"); }
    if (log_points < 1) { fail("log_points must be at least 1"); }
    if (codon_max < 1) { fail("codon_max must be positive"); }
    if (ge_initial_length < 1) { fail("ge_initial_length must be positive"); }
    if (grammar_path.empty()) { fail("grammar is not set"); }
}

auto better(Individual const& a, Individual const& b) -> bool
{
    if (a.fitness < b.fitness) { return true; }
    if (b.fitness < a.fitness) { return false; }
    if (a.size != b.size) { return a.size < b.size; }
    return a.birth < b.birth;
}

auto format_double(double v) -> std::string
{
    if (std::isnan(v)) { return "nan"; }
    if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

namespace {

auto join_ints(std::vector<int> const& v) -> std::string
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) { out.push_back(','); }
        out += std::to_string(v[i]);
    }
    return out;
}

void preorder_choices(DerivationNode const& n, std::vector<int>& out)
{
    if (n.is_terminal()) { return; }
    out.push_back(static_cast<int>(n.alternative));
    for (auto const& c : n.children) { preorder_choices(c, out); }
}

auto variant_of(Genotype const& g) -> Variant
{
    switch (g.index()) {
    case 0: return Variant::GE;
    case 1: return Variant::DSGE;
    default: return Variant::CfgGp;
    }
}

auto fitness_text(Fitness const& f) -> std::string
{
    return f.is_worst() ? "inf" : format_double(f.value());
}

} // namespace

auto individual_line(Individual const& ind) -> std::string
{
    std::string geno;
    if (auto const* ge = std::get_if<GeGenotype>(&ind.genotype)) {
        geno = join_ints(ge->codons);
    } else if (auto const* ds = std::get_if<DsgeGenotype>(&ind.genotype)) {
        for (std::size_t nt = 0; nt < ds->genes.size(); ++nt) {
            if (nt > 0) { geno.push_back(';'); }
            geno += "[" + join_ints(ds->genes[nt]) + "]";
        }
    } else {
        std::vector<int> choices;
        preorder_choices(std::get<DerivationNode>(ind.genotype), choices);
        geno = join_ints(choices);
    }
    auto const pheno = ind.phenotype ? to_text(*ind.phenotype) : std::string("INVALID");
    return to_string(variant_of(ind.genotype)) + " | " + geno + " | " + pheno + " | " + fitness_text(ind.fitness);
}

auto RunLog::to_csv() const -> std::string
{
    std::string out = "generation,best_rmse,mean_rmse,std_rmse\n";
    for (auto const& s : snapshots) {
        out += std::to_string(s.generation) + "," + fitness_text(s.best) + "," + format_double(s.mean_rmse) + ","
            + format_double(s.std_rmse) + "\n";
    }
    return out;
}

auto log_schedule(std::size_t generations, std::size_t log_points) -> std::vector<std::size_t>
{
    std::vector<std::size_t> out{0};
    if (generations == 0) { return out; }
    auto const step = std::max<std::size_t>(1, (generations + log_points - 1) / log_points);
    for (std::size_t g = step; g <= generations; g += step) { out.push_back(g); }
    if (out.back() != generations) { out.push_back(generations); }
    return out;
}

auto predict(Expr const& e, Dataset const& d) -> std::vector<double>
{
    CompiledExpr program(e, d.feature_columns);
    std::vector<double> out(d.rows());
    program.evaluate(d.features(), out);
    return out;
}

auto FitnessEvaluator::predict(Expr const& e) const -> std::vector<double>
{
    return gggp::predict(e, data_);
}

auto FitnessEvaluator::operator()(Expr const& e) const -> Fitness
{
    auto pred = predict(e);
    return Fitness::of(rmse(pred, data_.target()));
}

auto serialize(RunResult const& r, std::vector<std::pair<std::string, std::string>> const& extra) -> std::string
{
    std::ostringstream os;
    auto kv = [&os](std::string_view k, std::string const& v) { os << k << " = " << v << '\n'; };
    auto const& c = r.config;
    os << "# gggp run result v1\n";
    kv("config", c.name);
    kv("variant", to_string(c.variant));
    kv("grammar", c.grammar_path);
    kv("population_size", std::to_string(c.population_size));
    kv("generations", std::to_string(c.generations));
    kv("p_crossover", format_double(c.p_crossover));
    kv("p_mutation", format_double(c.p_mutation));
    kv("max_tree_depth", std::to_string(c.max_tree_depth));
    kv("max_wraps", std::to_string(c.max_wraps));
    kv("tournament_size", std::to_string(c.tournament_size));
    kv("elitism_count", std::to_string(c.elitism_count));
    kv("seed", std::to_string(c.seed));
    kv("log_points", std::to_string(c.log_points));
    kv("codon_max", std::to_string(c.codon_max));
    kv("ge_initial_length", std::to_string(c.ge_initial_length));
    for (auto const& [k, v] : extra) { kv(k, v); }
    kv("valid_model", r.valid_model ? "true" : "false");
    kv("best_individual", individual_line(r.best));
    kv("best_expression", r.valid_model ? r.best_expression : "INVALID");
    kv("simplified_expression", r.valid_model ? r.simplified_expression : "INVALID");
    kv("best_size", std::to_string(r.best.size));
    auto metrics = [&](std::string const& side, std::optional<MetricReport> const& m) {
        kv(side + "_rmse", m ? format_double(m->rmse) : "nan");
        kv(side + "_r2", m && m->r2 ? format_double(*m->r2) : "nan");
        kv(side + "_avg_error", m ? format_double(m->avg_error) : "nan");
        kv(side + "_n", m ? std::to_string(m->n) : "0");
    };
    metrics("train", r.train);
    metrics("test", r.test);
    kv("snapshots", std::to_string(r.log.snapshots.size()));
    return os.str();
}

auto run_grammar(EvolutionConfig const& cfg, Dataset const& train) -> Grammar
{
    auto g = load_grammar(cfg.grammar_path);
    if (cfg.inject_variables) { g = with_variables(g, train.feature_columns, cfg.variable_rule); }
    return g;
}

auto run(EvolutionConfig const& cfg, Dataset const& train, Dataset const& test, RunHooks const& hooks) -> RunResult
{
    cfg.validate();
    return run(cfg, run_grammar(cfg, train), train, test, hooks);
}

namespace {

class Evolution {
public:
    Evolution(EvolutionConfig const& cfg, Grammar const& g, Dataset const& train)
        : cfg_(cfg), g_(g), evaluator_(train), rng_(cfg.seed)
    { }

    auto run(RunHooks const& hooks) -> std::pair<Individual, RunLog>
    {
        RunLog log;
        auto const schedule = log_schedule(cfg_.generations, cfg_.log_points);
        auto scheduled = [&](std::size_t gen) { return std::binary_search(schedule.begin(), schedule.end(), gen); };

        std::vector<Individual> pop;
        pop.reserve(cfg_.population_size);
        for (std::size_t i = 0; i < cfg_.population_size; ++i) { pop.push_back(spawn()); }
        std::vector<std::size_t> pending(pop.size());
        for (std::size_t i = 0; i < pending.size(); ++i) { pending[i] = i; }
        evaluate(pop, pending);

        Individual best = *std::min_element(pop.begin(), pop.end(), better);
        log.snapshots.push_back(snapshot(0, best, pop));
        if (hooks.on_generation) { hooks.on_generation(0); }

        std::vector<std::size_t> order(pop.size());
        for (std::size_t gen = 1; gen <= cfg_.generations; ++gen) {
            for (std::size_t i = 0; i < order.size(); ++i) { order[i] = i; }
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg_.elitism_count),
                              order.end(), [&](auto a, auto b) { return better(pop[a], pop[b]); });

            std::vector<Individual> next;
            next.reserve(pop.size());
            for (std::size_t e = 0; e < cfg_.elitism_count; ++e) { next.push_back(pop[order[e]]); }

            pending.clear();
            while (next.size() < pop.size()) {
                Individual a = pop[tournament(pop)];
                Individual b = pop[tournament(pop)];
                bool dirty_a = false;
                bool dirty_b = false;
                if (rng_.bernoulli(cfg_.p_crossover)) {
                    crossover(a, b);
                    dirty_a = dirty_b = true;
                }
                dirty_a = mutate(a) || dirty_a;
                dirty_b = mutate(b) || dirty_b;
                for (auto* child : {&a, &b}) {
                    if (next.size() >= pop.size()) { break; }
                    if (child == &a ? dirty_a : dirty_b) {
                        child->birth = births_++;
                        pending.push_back(next.size());
                    }
                    next.push_back(std::move(*child));
                }
            }
            evaluate(next, pending);
            pop = std::move(next);

            auto const& gen_best = *std::min_element(pop.begin(), pop.end(), better);
            if (better(gen_best, best)) { best = gen_best; }
            if (hooks.on_generation) { hooks.on_generation(gen); }
            if (scheduled(gen)) { log.snapshots.push_back(snapshot(gen, best, pop)); }
        }
        return {std::move(best), std::move(log)};
    }

private:
    auto spawn() -> Individual
    {
        Individual ind;
        switch (cfg_.variant) {
        case Variant::GE:
            ind.genotype = ge_init(GeParams{cfg_.codon_max, cfg_.ge_initial_length}, rng_);
            break;
        case Variant::DSGE:
            ind.genotype = dsge_init(g_, cfg_.max_tree_depth, rng_);
            break;
        case Variant::CfgGp:
            ind.genotype = cfg_random_tree(g_, cfg_.max_tree_depth, InitMethod::Grow, rng_);
            break;
        }
        ind.birth = births_++;
        return ind;
    }

    auto tournament(std::vector<Individual> const& pop) -> std::size_t
    {
        std::size_t winner = rng_.index(pop.size());
        for (std::size_t k = 1; k < cfg_.tournament_size; ++k) {
            auto const challenger = rng_.index(pop.size());
            if (better(pop[challenger], pop[winner])) { winner = challenger; }
        }
        return winner;
    }

    void crossover(Individual& a, Individual& b)
    {
        switch (cfg_.variant) {
        case Variant::GE: {
            auto [x, y] = ge_crossover(std::get<GeGenotype>(a.genotype), std::get<GeGenotype>(b.genotype), rng_);
            a.genotype = std::move(x);
            b.genotype = std::move(y);
            break;
        }
        case Variant::DSGE: {
            auto [x, y] = dsge_crossover(std::get<DsgeGenotype>(a.genotype), std::get<DsgeGenotype>(b.genotype), rng_);
            a.genotype = std::move(x);
            b.genotype = std::move(y);
            break;
        }
        case Variant::CfgGp: {
            auto [x, y] = cfg_crossover(std::get<DerivationNode>(a.genotype), std::get<DerivationNode>(b.genotype),
                                        cfg_.max_tree_depth, rng_);
            a.genotype = std::move(x);
            b.genotype = std::move(y);
            break;
        }
        }
    }

    auto mutate(Individual& ind) -> bool
    {
        switch (cfg_.variant) {
        case Variant::GE:
            return ge_mutate(std::get<GeGenotype>(ind.genotype), cfg_.p_mutation, cfg_.codon_max, rng_);
        case Variant::DSGE:
            return dsge_mutate(g_, std::get<DsgeGenotype>(ind.genotype), cfg_.p_mutation, rng_);
        case Variant::CfgGp:
            return cfg_mutate(g_, std::get<DerivationNode>(ind.genotype), cfg_.p_mutation, cfg_.max_tree_depth, rng_);
        }
        return false;
    }

    // Decoding may draw from the generator (DSGE repair), so it stays on the
    // coordinator; only the pure fitness computation is spread over workers.
    void decode(Individual& ind)
    {
        std::optional<DerivationNode> tree;
        switch (cfg_.variant) {
        case Variant::GE: {
            auto r = ge_decode(g_, std::get<GeGenotype>(ind.genotype), cfg_.max_wraps, cfg_.max_tree_depth);
            tree = std::move(r.tree);
            break;
        }
        case Variant::DSGE: {
            auto r = dsge_decode(g_, std::get<DsgeGenotype>(ind.genotype), cfg_.max_tree_depth, rng_);
            ind.genotype = std::move(r.genotype);
            tree = std::move(r.tree);
            break;
        }
        case Variant::CfgGp:
            tree = std::get<DerivationNode>(ind.genotype);
            break;
        }
        if (tree) {
            ind.phenotype = ast_from_tree(*tree);
            ind.size = expr_size(*ind.phenotype);
        } else {
            ind.phenotype.reset();
            ind.size = std::numeric_limits<std::size_t>::max();
        }
        ind.fitness = Fitness::worst();
    }

    void evaluate(std::vector<Individual>& pop, std::vector<std::size_t> const& which)
    {
        for (auto i : which) { decode(pop[i]); }
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                auto& ind = pop[which[k]];
                if (ind.phenotype) { ind.fitness = evaluator_(*ind.phenotype); }
            }
        };
        auto const workers = std::min(std::max<std::size_t>(cfg_.workers, 1), std::max<std::size_t>(which.size(), 1));
        if (workers == 1) {
            work(0, which.size());
            return;
        }
        std::vector<std::jthread> threads;
        auto const chunk = (which.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            auto const begin = w * chunk;
            auto const end = std::min(which.size(), begin + chunk);
            if (begin < end) { threads.emplace_back(work, begin, end); }
        }
    }

    static auto snapshot(std::size_t gen, Individual const& best, std::vector<Individual> const& pop) -> Snapshot
    {
        Snapshot s;
        s.generation = gen;
        s.best = best.fitness;
        double sum = 0.0;
        std::size_t n = 0;
        for (auto const& ind : pop) {
            if (!ind.fitness.is_worst()) {
                sum += ind.fitness.value();
                ++n;
            }
        }
        if (n == 0) {
            s.mean_rmse = s.std_rmse = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        s.mean_rmse = sum / static_cast<double>(n);
        double var = 0.0;
        for (auto const& ind : pop) {
            if (!ind.fitness.is_worst()) {
                double const d = ind.fitness.value() - s.mean_rmse;
                var += d * d;
            }
        }
        s.std_rmse = std::sqrt(var / static_cast<double>(n));
        return s;
    }

    EvolutionConfig const& cfg_;
    Grammar const& g_;
    FitnessEvaluator evaluator_;
    Rng rng_;
    std::uint64_t births_{0};
};

} // namespace

auto run(EvolutionConfig const& cfg, Grammar const& grammar, Dataset const& train, Dataset const& test,
         RunHooks const& hooks) -> RunResult
{
    cfg.validate();
    if (cfg.max_tree_depth < grammar.min_depth(grammar.start())) {
        throw GrammarError("max_tree_depth " + std::to_string(cfg.max_tree_depth)
                           + " is below the minimum derivation depth of the grammar ("
                           + std::to_string(grammar.min_depth(grammar.start())) + ")");
    }
    if (train.feature_columns != test.feature_columns || train.target_column != test.target_column) {
        throw DataError("train and test datasets do not share a schema");
    }
    auto const started = std::chrono::steady_clock::now();

    RunResult result;
    result.config = cfg;
    auto [best, log] = Evolution(cfg, grammar, train).run(hooks);
    result.best = std::move(best);
    result.log = std::move(log);
    result.valid_model = result.best.phenotype.has_value();

    if (result.valid_model) {
        auto const& model = *result.best.phenotype;
        result.best_expression = to_text(model);
        result.simplified_expression = to_text(simplify(model));
        result.train = metric_report(predict(model, train), train.target());
        if (hooks.on_test_access) { hooks.on_test_access(); }
        result.test = metric_report(predict(model, test), test.target());
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

auto replicate_seed(std::uint64_t base_seed, std::string_view config_name, std::size_t replicate) -> std::uint64_t
{
    return base_seed ^ splitmix64(stable_hash(config_name) ^ splitmix64(replicate));
}

auto run_batch(std::vector<EvolutionConfig> const& cfgs, std::size_t replicates, std::uint64_t base_seed,
               Dataset const& train, Dataset const& test, std::size_t workers,
               std::function<void(BatchEntry const&)> const& on_done) -> std::vector<BatchEntry>
{
    std::vector<BatchEntry> entries;
    for (std::size_t c = 0; c < cfgs.size(); ++c) {
        for (std::size_t r = 0; r < replicates; ++r) {
            entries.push_back({c, r, replicate_seed(base_seed, cfgs[c].name, r), std::nullopt, {}});
        }
    }

    auto execute = [&](BatchEntry& e) {
        try {
            auto cfg = cfgs[e.config_index];
            cfg.seed = e.seed;
            e.result = run(cfg, train, test);
        } catch (std::exception const& ex) {
            e.error = ex.what();
        }
    };

    workers = std::max<std::size_t>(workers, 1);
    if (workers == 1) {
        for (auto& e : entries) {
            execute(e);
            if (on_done) { on_done(e); }
        }
        return entries;
    }

    std::mutex mutex;
    std::condition_variable cv;
    std::vector<char> done(entries.size(), 0);
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, entries.size()); ++w) {
            pool.emplace_back([&] {
                for (auto i = next++; i < entries.size(); i = next++) {
                    execute(entries[i]);
                    {
                        std::lock_guard lock(mutex);
                        done[i] = 1;
                    }
                    cv.notify_all();
                }
            });
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            std::unique_lock lock(mutex);
            cv.wait(lock, [&] { return done[i] != 0; });
            lock.unlock();
            if (on_done) { on_done(entries[i]); }
        }
    }
    return entries;
}

} // namespace gggp
