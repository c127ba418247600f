#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gggp/engine.hpp"
#include "gggp/errors.hpp"
#include "gggp/rng.hpp"
#include "support.hpp"

using namespace gggp;
using test_support::source_path;

namespace {

auto make_dataset(std::vector<std::string> const& features, std::vector<std::vector<double>> const& cols,
                  std::vector<double> const& target) -> Dataset
{
    Dataset d;
    d.feature_columns = features;
    d.columns = features;
    d.columns.emplace_back("y");
    d.target_column = "y";
    d.values = cols;
    d.values.push_back(target);
    d.missing.assign(d.columns.size(), std::vector<std::uint8_t>(target.size(), 0));
    return d;
}

// Three body measurements from the synthetic fixture as x0..x2, with y = x0.
auto identity_data() -> std::pair<Dataset, Dataset>
{
    auto const raw = load_csv(source_path("data/synthetic_nhanes.csv"), "DXDTOPF", {"BMXWT", "BMXHT", "BMXWAIST"});
    std::vector<std::vector<double>> cols{raw.column("BMXWT"), raw.column("BMXHT"), raw.column("BMXWAIST")};
    auto const d = make_dataset({"x0", "x1", "x2"}, cols, raw.column("BMXWT"));
    return split(d, SplitSpec{0.8, 1});
}

auto toy_data(std::uint64_t seed) -> std::pair<Dataset, Dataset>
{
    Rng rng(seed);
    std::vector<std::vector<double>> cols(3, std::vector<double>(60));
    std::vector<double> y(60);
    for (std::size_t r = 0; r < 60; ++r) {
        for (auto& c : cols) { c[r] = rng.uniform() * 4 - 2; }
        y[r] = cols[0][r] * cols[1][r] + cols[2][r] / 2.0;
    }
    return split(make_dataset({"x0", "x1", "x2"}, cols, y), SplitSpec{0.8, seed});
}

auto small_config(Variant v, std::uint64_t seed) -> EvolutionConfig
{
    EvolutionConfig c;
    c.name = "small";
    c.variant = v;
    c.grammar_path = source_path("grammars/base.bnf");
    c.population_size = 40;
    c.generations = 15;
    c.max_tree_depth = 8;
    c.seed = seed;
    c.log_points = 5;
    return c;
}

std::vector<Variant> const all_variants{Variant::GE, Variant::CfgGp, Variant::DSGE};

} // namespace

TEST_CASE("variant names")
{
    for (auto v : all_variants) { CHECK(parse_variant(to_string(v)) == v); }
    CHECK(parse_variant("cfg-gp") == Variant::CfgGp);
    CHECK(parse_variant("dsge") == Variant::DSGE);
    CHECK_THROWS_AS((void)parse_variant("SGE"), ConfigError);
}

TEST_CASE("config validation")
{
    auto c = small_config(Variant::DSGE, 0);
    CHECK_NOTHROW(c.validate());
    c.population_size = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config(Variant::DSGE, 0);
    c.p_crossover = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config(Variant::DSGE, 0);
    c.grammar_path.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("fitness ordering and tie-breaks")
{
    CHECK(Fitness::of(1.0) < Fitness::worst());
    CHECK_FALSE(Fitness::worst() < Fitness::of(1e300));
    CHECK_FALSE(Fitness::worst() < Fitness::worst());
    CHECK(Fitness::of(0.5) < Fitness::of(0.6));

    Individual a;
    Individual b;
    a.fitness = b.fitness = Fitness::of(2.0);
    a.size = 3;
    b.size = 5;
    CHECK(better(a, b));
    b.size = 3;
    a.birth = 7;
    b.birth = 4;
    CHECK(better(b, a));
    CHECK_FALSE(better(a, a));
}

TEST_CASE("log schedule")
{
    CHECK(log_schedule(100, 10) == std::vector<std::size_t>{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
    CHECK(log_schedule(7, 3) == std::vector<std::size_t>{0, 3, 6, 7});
    CHECK(log_schedule(5, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    CHECK(log_schedule(5000, 10).size() == 11);
    CHECK(log_schedule(0, 10) == std::vector<std::size_t>{0});
}

TEST_CASE("all-invalid population completes")
{
    auto const [train, test] = toy_data(1);
    auto c = small_config(Variant::GE, 3);
    c.max_wraps = 0;
    c.ge_initial_length = 1;
    c.p_crossover = 0.0;
    c.p_mutation = 0.0;
    auto const r = run(c, train, test);
    CHECK_FALSE(r.valid_model);
    CHECK(r.best.fitness.is_worst());
    CHECK_FALSE(r.best.phenotype.has_value());
    CHECK_FALSE(r.train.has_value());
    CHECK(individual_line(r.best).find("INVALID") != std::string::npos);
    auto const text = serialize(r);
    CHECK(text.find("valid_model = false") != std::string::npos);
    REQUIRE_FALSE(r.log.snapshots.empty());
    CHECK(std::isnan(r.log.snapshots.front().mean_rmse));
}

TEST_CASE("runs are deterministic and independent of worker count")
{
    auto const [train, test] = toy_data(2);
    for (auto v : all_variants) {
        CAPTURE(to_string(v));
        auto c = small_config(v, 99);
        auto const a = serialize(run(c, train, test));
        auto const b = serialize(run(c, train, test));
        c.workers = 3;
        auto const d = serialize(run(c, train, test));
        CHECK(a == b);
        CHECK(a == d);
        c.seed = 100;
        CHECK(serialize(run(c, train, test)) != a);
    }
}

TEST_CASE("best-so-far never gets worse")
{
    auto const [train, test] = toy_data(3);
    for (auto v : all_variants) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto c = small_config(v, seed);
            c.log_points = c.generations;
            auto const r = run(c, train, test);
            REQUIRE(r.log.snapshots.size() == c.generations + 1);
            for (std::size_t i = 1; i < r.log.snapshots.size(); ++i) {
                CHECK_FALSE(r.log.snapshots[i - 1].best < r.log.snapshots[i].best);
            }
            CHECK(r.log.snapshots.back().best == r.best.fitness);
        }
    }
}

TEST_CASE("test data is touched only after evolution")
{
    auto const [train, test] = toy_data(4);
    std::vector<std::string> events;
    RunHooks hooks;
    hooks.on_generation = [&](std::size_t g) { events.push_back("gen" + std::to_string(g)); };
    hooks.on_test_access = [&] { events.push_back("test"); };
    auto const c = small_config(Variant::CfgGp, 5);
    auto const r = run(c, train, test, hooks);
    REQUIRE(events.size() == c.generations + 2);
    CHECK(events.back() == "test");
    CHECK(std::count(events.begin(), events.end(), "test") == 1);
    CHECK(events[events.size() - 2] == "gen" + std::to_string(c.generations));
    CHECK(r.test.has_value());
}

TEST_CASE("reported fitness matches a fresh evaluation")
{
    auto const [train, test] = toy_data(5);
    for (auto v : all_variants) {
        auto const r = run(small_config(v, 8), train, test);
        REQUIRE(r.valid_model);
        auto const fresh = FitnessEvaluator(train)(*r.best.phenotype);
        CHECK(fresh == r.best.fitness);
        CHECK(r.train->rmse == r.best.fitness.value());
        CHECK(r.best_expression == to_text(*r.best.phenotype));
        CHECK(r.best.size == expr_size(*r.best.phenotype));
        auto const pred = predict(*r.best.phenotype, test);
        CHECK(r.test->rmse == rmse(pred, test.target()));
    }
}

TEST_CASE("DSGE finds y = x0")
{
    auto const [train, test] = identity_data();
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        EvolutionConfig c;
        c.variant = Variant::DSGE;
        c.grammar_path = source_path("grammars/base.bnf");
        c.population_size = 200;
        c.generations = 100;
        c.seed = seed;
        auto const r = run(c, train, test);
        if (r.valid_model && r.train->rmse < 1e-6) { ++hits; }
    }
    CHECK(hits >= 28);
}

TEST_CASE("serialized result fields")
{
    auto const [train, test] = toy_data(6);
    auto const r = run(small_config(Variant::DSGE, 1), train, test);
    auto const text = serialize(r, {{"replicate", "0"}});
    CHECK(text.rfind("# gggp run result v1\n", 0) == 0);
    for (auto const* key : {"config = small", "variant = DSGE", "seed = 1", "replicate = 0", "train_rmse = ",
                            "test_r2 = ", "best_individual = DSGE | ", "snapshots = "}) {
        CHECK(text.find(key) != std::string::npos);
    }
    CHECK(text.find("wall") == std::string::npos);
    CHECK(r.log.to_csv().rfind("generation,best_rmse,mean_rmse,std_rmse\n", 0) == 0);
}

TEST_CASE("batch runs")
{
    auto const [train, test] = toy_data(7);
    auto a = small_config(Variant::DSGE, 0);
    a.name = "a";
    auto b = small_config(Variant::CfgGp, 0);
    b.name = "b";
    std::vector<EvolutionConfig> const cfgs{a, b};

    std::vector<std::pair<std::size_t, std::size_t>> order;
    auto const one = run_batch(cfgs, 3, 11, train, test, 1,
                               [&](BatchEntry const& e) { order.emplace_back(e.config_index, e.replicate); });
    REQUIRE(one.size() == 6);
    CHECK(order == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}});
    std::set<std::uint64_t> seeds;
    for (auto const& e : one) {
        REQUIRE(e.result.has_value());
        seeds.insert(e.seed);
        CHECK(e.seed == replicate_seed(11, cfgs[e.config_index].name, e.replicate));
        CHECK(e.result->config.seed == e.seed);
    }
    CHECK(seeds.size() == 6);

    auto const many = run_batch(cfgs, 3, 11, train, test, 4);
    for (std::size_t i = 0; i < one.size(); ++i) { CHECK(serialize(*one[i].result) == serialize(*many[i].result)); }

    CHECK(replicate_seed(11, "a", 0) == replicate_seed(11, "a", 0));
    CHECK(replicate_seed(11, "a", 0) != replicate_seed(12, "a", 0));
}

TEST_CASE("batch reports failing configs without stopping")
{
    auto const [train, test] = toy_data(8);
    auto good = small_config(Variant::DSGE, 0);
    good.name = "good";
    auto bad = good;
    bad.name = "bad";
    bad.grammar_path = source_path("grammars/missing.bnf");
    auto const out = run_batch({bad, good}, 1, 0, train, test);
    REQUIRE(out.size() == 2);
    CHECK_FALSE(out[0].result.has_value());
    CHECK_FALSE(out[0].error.empty());
    CHECK(out[1].result.has_value());
}
