#include "gggp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "gggp/errors.hpp"
#include "gggp/expr.hpp"
#include "gggp/grammar.hpp"

namespace fs = std::filesystem;

namespace gggp {

namespace {

auto trim(std::string_view s) -> std::string
{
    auto const ws = " \t\r\n";
    auto const b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) { return {}; }
    return std::string(s.substr(b, s.find_last_not_of(ws) - b + 1));
}

auto split_list(std::string const& value) -> std::vector<std::string>
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) { out.push_back(std::move(t)); }
    }
    return out;
}

auto read_file(fs::path const& p) -> std::string
{
    std::ifstream in(p, std::ios::binary);
    if (!in) { throw DataError("cannot open '" + p.string() + "'"); }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename T>
auto parse_number(std::string const& key, std::string const& v) -> T
{
    T out{};
    auto const* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) { throw ConfigError("invalid value '" + v + "' for key '" + key + "'"); }
    return out;
}

auto parse_bool(std::string const& key, std::string const& v) -> bool
{
    if (v == "true" || v == "yes" || v == "1") { return true; }
    if (v == "false" || v == "no" || v == "0") { return false; }
    throw ConfigError("invalid boolean '" + v + "' for key '" + key + "'");
}

using Setter = std::function<void(EvolutionConfig&, std::string const&, ExperimentSpec const&)>;

auto config_setters() -> std::map<std::string, Setter> const&
{
    static std::map<std::string, Setter> const setters = [] {
        std::map<std::string, Setter> m;
        m["variant"] = [](auto& c, auto const& v, auto const&) { c.variant = parse_variant(v); };
        m["grammar"] = [](auto& c, auto const& v, auto const& spec) { c.grammar_path = spec.resolve(v).string(); };
        m["population_size"] = [](auto& c, auto const& v, auto const&) { c.population_size = parse_number<std::size_t>("population_size", v); };
        m["generations"] = [](auto& c, auto const& v, auto const&) { c.generations = parse_number<std::size_t>("generations", v); };
        m["p_crossover"] = [](auto& c, auto const& v, auto const&) { c.p_crossover = parse_number<double>("p_crossover", v); };
        m["p_mutation"] = [](auto& c, auto const& v, auto const&) { c.p_mutation = parse_number<double>("p_mutation", v); };
        m["max_tree_depth"] = [](auto& c, auto const& v, auto const&) { c.max_tree_depth = parse_number<int>("max_tree_depth", v); };
        m["max_wraps"] = [](auto& c, auto const& v, auto const&) { c.max_wraps = parse_number<int>("max_wraps", v); };
        m["tournament_size"] = [](auto& c, auto const& v, auto const&) { c.tournament_size = parse_number<std::size_t>("tournament_size", v); };
        m["elitism_count"] = [](auto& c, auto const& v, auto const&) { c.elitism_count = parse_number<std::size_t>("elitism_count", v); };
        m["log_points"] = [](auto& c, auto const& v, auto const&) { c.log_points = parse_number<std::size_t>("log_points", v); };
        m["codon_max"] = [](auto& c, auto const& v, auto const&) { c.codon_max = parse_number<int>("codon_max", v); };
        m["ge_initial_length"] = [](auto& c, auto const& v, auto const&) { c.ge_initial_length = parse_number<std::size_t>("ge_initial_length", v); };
        m["variable_rule"] = [](auto& c, auto const& v, auto const&) { c.variable_rule = v; };
        m["inject_variables"] = [](auto& c, auto const& v, auto const&) { c.inject_variables = parse_bool("inject_variables", v); };
        m["eval_workers"] = [](auto& c, auto const& v, auto const&) { c.workers = parse_number<std::size_t>("eval_workers", v); };
        return m;
    }();
    return setters;
}

auto sweep_label(std::string const& key, std::string const& value) -> std::string
{
    if (key == "variant") { return to_string(parse_variant(value)); }
    if (key == "grammar") { return fs::path(value).stem().string(); }
    if (key == "max_tree_depth") { return "d" + value; }
    return key + value;
}

struct Section {
    std::string name;
    std::size_t line{0};
    std::vector<std::pair<std::string, std::vector<std::string>>> entries;
};

void expand_section(Section const& section, std::vector<std::pair<std::string, std::vector<std::string>>> const& defaults,
                    ExperimentSpec& spec)
{
    auto entries = defaults;
    for (auto const& e : section.entries) {
        auto it = std::find_if(entries.begin(), entries.end(), [&](auto const& d) { return d.first == e.first; });
        if (it != entries.end()) {
            it->second = e.second;
        } else {
            entries.push_back(e);
        }
    }

    auto const& setters = config_setters();
    std::vector<std::size_t> pick(entries.size(), 0);
    for (;;) {
        EvolutionConfig cfg;
        cfg.name = section.name;
        for (std::size_t k = 0; k < entries.size(); ++k) {
            auto const& [key, values] = entries[k];
            setters.at(key)(cfg, values[pick[k]], spec);
            if (values.size() > 1) { cfg.name += "-" + sweep_label(key, values[pick[k]]); }
        }
        spec.configs.push_back(std::move(cfg));

        // Odometer: last key varies fastest.
        std::size_t k = entries.size();
        while (k > 0) {
            --k;
            if (++pick[k] < entries[k].second.size()) { break; }
            pick[k] = 0;
            if (k == 0) { return; }
        }
        if (entries.empty()) { return; }
    }
}

auto sanitize(std::string name) -> std::string
{
    for (auto& c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '-' && c != '_' && c != '.') { c = '_'; }
    }
    return name;
}

} // namespace

auto ExperimentSpec::resolve(std::string const& p) const -> fs::path
{
    fs::path path(p);
    if (path.is_absolute() || base_dir.empty()) { return path.lexically_normal(); }
    return (base_dir / path).lexically_normal();
}

auto parse_experiment(std::string const& text, fs::path const& base_dir) -> ExperimentSpec
{
    ExperimentSpec spec;
    spec.base_dir = base_dir;

    std::vector<std::pair<std::string, std::vector<std::string>>> defaults;
    std::vector<Section> sections;
    auto const& setters = config_setters();

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    auto fail = [&](std::string const& what) {
        throw ConfigError("spec line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') { continue; }
        if (line.front() == '[') {
            if (line.back() != ']') { fail("unterminated section header"); }
            auto name = trim(std::string_view(line).substr(1, line.size() - 2));
            if (name.empty()) { fail("empty section name"); }
            sections.push_back({sanitize(name), line_no, {}});
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string::npos) { fail("expected 'key = value'"); }
        auto const key = trim(std::string_view(line).substr(0, eq));
        auto const value = trim(std::string_view(line).substr(eq + 1));

        if (setters.count(key) != 0) {
            auto values = split_list(value);
            if (values.empty()) { fail("key '" + key + "' has no value"); }
            EvolutionConfig scratch;
            for (auto const& v : values) {
                try {
                    setters.at(key)(scratch, v, spec);
                } catch (ConfigError const& e) {
                    fail(e.what());
                }
            }
            auto& target = sections.empty() ? defaults : sections.back().entries;
            auto it = std::find_if(target.begin(), target.end(), [&](auto const& e) { return e.first == key; });
            if (it != target.end()) { fail("duplicate key '" + key + "'"); }
            target.emplace_back(key, std::move(values));
            continue;
        }
        if (!sections.empty()) { fail("key '" + key + "' is not a config key"); }

        try {
            if (key == "dataset") {
                spec.dataset = value;
            } else if (key == "target") {
                spec.target = value;
            } else if (key == "features") {
                spec.features = split_list(value);
            } else if (key == "pregnancy_column") {
                spec.pregnancy_column = value.empty() || value == "none" ? std::nullopt : std::optional(value);
            } else if (key == "min_age") {
                spec.min_age = value == "none" ? std::nullopt : std::optional(parse_number<double>(key, value));
            } else if (key == "train_fraction") {
                spec.split.train_fraction = parse_number<double>(key, value);
            } else if (key == "seed") {
                spec.split.seed = parse_number<std::uint64_t>(key, value);
            } else if (key == "gender_filter") {
                spec.split.gender = parse_gender_filter(value);
            } else if (key == "gender_column") {
                spec.split.gender_column = value;
            } else if (key == "replicates") {
                spec.replicates = parse_number<std::size_t>(key, value);
            } else if (key == "workers") {
                spec.workers = parse_number<std::size_t>(key, value);
            } else if (key == "output_dir") {
                spec.output_dir = value;
            } else {
                fail("unknown key '" + key + "'");
            }
        } catch (ConfigError const& e) {
            if (std::string_view(e.what()).starts_with("spec line")) { throw; }
            fail(e.what());
        }
    }

    if (spec.dataset.empty()) { throw ConfigError("spec does not name a dataset"); }
    if (spec.features.empty()) { throw ConfigError("spec does not list any features"); }
    if (spec.replicates < 1) { throw ConfigError("replicates must be at least 1"); }
    if (sections.empty()) { sections.push_back({"default", 0, {}}); }
    for (auto const& s : sections) { expand_section(s, defaults, spec); }

    std::vector<std::string> names;
    for (auto const& c : spec.configs) {
        if (std::find(names.begin(), names.end(), c.name) != names.end()) {
            throw ConfigError("duplicate config name '" + c.name + "'");
        }
        names.push_back(c.name);
        c.validate();
    }
    return spec;
}

auto load_experiment(fs::path const& path) -> ExperimentSpec
{
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw ConfigError("cannot open spec file '" + path.string() + "'"); }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment(ss.str(), path.parent_path());
}

auto prepare_data(ExperimentSpec const& spec) -> std::pair<Dataset, Dataset>
{
    std::vector<std::string> extra;
    if (spec.min_age) { extra.emplace_back("RIDAGEYR"); }
    if (spec.pregnancy_column) { extra.push_back(*spec.pregnancy_column); }
    if (spec.split.gender != GenderFilter::All) { extra.push_back(spec.split.gender_column); }

    auto raw = load_csv(spec.resolve(spec.dataset).string(), spec.target, spec.features, extra);
    auto filtered = nhanes_filter(raw, NhanesFilter{spec.min_age, "RIDAGEYR", spec.pregnancy_column});
    return split(filtered, spec.split);
}

auto parse_key_values(std::string const& text) -> std::map<std::string, std::string>
{
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') { continue; }
        auto const eq = t.find('=');
        if (eq == std::string::npos) { continue; }
        out[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
    }
    return out;
}

void write_atomic(fs::path const& path, std::string const& content)
{
    static std::atomic<unsigned> counter{0};
    auto tmp = path;
    tmp += ".tmp" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) { throw DataError("cannot write '" + tmp.string() + "'"); }
        out << content;
        if (!out.flush()) { throw DataError("failed writing '" + tmp.string() + "'"); }
    }
    fs::rename(tmp, path);
}

auto cmd_run(fs::path const& spec_path, std::ostream& out, std::ostream& err) -> int
{
    ExperimentSpec spec;
    Dataset train;
    Dataset test;
    try {
        spec = load_experiment(spec_path);
        // Resolve every reference before anything runs or is written.
        for (auto const& c : spec.configs) {
            auto g = load_grammar(c.grammar_path);
            if (c.inject_variables) { g = with_variables(g, spec.features, c.variable_rule); }
            if (c.max_tree_depth < g.min_depth(g.start())) {
                throw ConfigError("config '" + c.name + "': max_tree_depth is below the grammar's minimum depth "
                                  + std::to_string(g.min_depth(g.start())));
            }
        }
        std::tie(train, test) = prepare_data(spec);
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    auto const out_dir = spec.resolve(spec.output_dir);
    try {
        fs::create_directories(out_dir);
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }

    bool failed = false;
    auto on_done = [&](BatchEntry const& e) {
        auto const& cfg = spec.configs[e.config_index];
        std::ostringstream stem;
        stem << cfg.name << "_r" << std::setw(3) << std::setfill('0') << e.replicate;
        if (!e.result) {
            failed = true;
            err << "run " << stem.str() << " failed: " << e.error << '\n';
            return;
        }
        auto const& r = *e.result;
        std::vector<std::pair<std::string, std::string>> extra{
            {"replicate", std::to_string(e.replicate)},
            {"dataset", spec.dataset},
            {"target", spec.target},
            {"gender_filter", to_string(spec.split.gender)},
            {"train_fraction", format_double(spec.split.train_fraction)},
            {"split_seed", std::to_string(spec.split.seed)},
        };
        try {
            write_atomic(out_dir / (stem.str() + ".result"), serialize(r, extra));
            write_atomic(out_dir / (stem.str() + ".log.csv"), r.log.to_csv());
        } catch (std::exception const& ex) {
            failed = true;
            err << "run " << stem.str() << ": " << ex.what() << '\n';
            return;
        }
        out << std::left << std::setw(28) << stem.str() << ' ' << std::setw(6) << to_string(cfg.variant)
            << " depth=" << std::setw(3) << cfg.max_tree_depth << " seed=" << r.config.seed << " train_rmse="
            << (r.train ? format_double(r.train->rmse) : "inf") << " test_r2="
            << (r.test && r.test->r2 ? format_double(*r.test->r2) : "nan")
            << (r.valid_model ? "" : " (no valid model)") << '\n';
    };
    run_batch(spec.configs, spec.replicates, spec.split.seed, train, test, spec.workers, on_done);
    return failed ? exit_runtime : exit_ok;
}

namespace {

void print_report(std::ostream& out, std::string const& side, MetricReport const& m)
{
    out << std::left << std::setw(6) << side << ' ' << std::right << std::setw(6) << m.n << ' ' << std::setw(24)
        << format_double(m.rmse) << ' ' << std::setw(24) << (m.r2 ? format_double(*m.r2) : "nan") << ' '
        << std::setw(24) << format_double(m.avg_error) << '\n';
}

} // namespace

auto cmd_evaluate(fs::path const& model_path, fs::path const& csv, EvaluateOptions const& opts, std::ostream& out,
                  std::ostream& err) -> int
{
    try {
        auto const model = load_model(model_path.string());
        auto const vars = variables(model);

        std::vector<std::string> extra;
        if (opts.gender != GenderFilter::All) { extra.emplace_back("RIAGENDR"); }
        if (opts.min_age) { extra.emplace_back("RIDAGEYR"); }
        if (opts.pregnancy_column) { extra.push_back(*opts.pregnancy_column); }

        auto data = nhanes_filter(load_csv(csv.string(), opts.target, vars, extra),
                                  NhanesFilter{opts.min_age, "RIDAGEYR", opts.pregnancy_column});
        if (data.rows() == 0) { throw DataError("no rows left after filtering"); }

        out << "model: " << to_text(model) << '\n';
        out << std::left << std::setw(6) << "side" << ' ' << std::right << std::setw(6) << "n" << ' ' << std::setw(24)
            << "rmse" << ' ' << std::setw(24) << "r2" << ' ' << std::setw(24) << "avg_error" << '\n';
        if (opts.train_fraction) {
            auto [train, test] = split(data, SplitSpec{*opts.train_fraction, opts.seed, opts.gender, "RIAGENDR"});
            print_report(out, "train", metric_report(predict(model, train), train.target()));
            print_report(out, "test", metric_report(predict(model, test), test.target()));
        } else {
            if (opts.gender != GenderFilter::All) {
                auto const& g = data.column("RIAGENDR");
                double const want = opts.gender == GenderFilter::Male ? 1.0 : 0.0;
                std::vector<std::size_t> keep;
                for (std::size_t r = 0; r < data.rows(); ++r) {
                    if (g[r] == want) { keep.push_back(r); }
                }
                data = select_rows(data, keep);
            }
            print_report(out, "all", metric_report(predict(model, data), data.target()));
        }
    } catch (ParseError const& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

namespace {

struct ResultFile {
    fs::path path;
    std::map<std::string, std::string> kv;

    [[nodiscard]] auto get(std::string const& k) const -> std::string
    {
        auto it = kv.find(k);
        return it == kv.end() ? std::string() : it->second;
    }
    [[nodiscard]] auto number(std::string const& k) const -> double
    {
        auto const v = get(k);
        if (v == "inf") { return std::numeric_limits<double>::infinity(); }
        double d = std::numeric_limits<double>::quiet_NaN();
        std::from_chars(v.data(), v.data() + v.size(), d);
        return d;
    }
};

auto read_results(fs::path const& dir) -> std::vector<ResultFile>
{
    if (!fs::is_directory(dir)) { throw DataError("'" + dir.string() + "' is not a directory"); }
    std::vector<fs::path> paths;
    for (auto const& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".result") { paths.push_back(entry.path()); }
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) { throw DataError("no .result files in '" + dir.string() + "'"); }
    std::vector<ResultFile> out;
    for (auto const& p : paths) { out.push_back({p, parse_key_values(read_file(p))}); }
    return out;
}

} // namespace

auto cmd_summarize(fs::path const& dir, bool csv, std::ostream& out, std::ostream& err) -> int
{
    std::vector<ResultFile> files;
    try {
        files = read_results(dir);
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }

    // Best replicate per configuration by training RMSE.
    std::map<std::string, ResultFile const*> best;
    for (auto const& f : files) {
        if (f.get("valid_model") != "true") { continue; }
        auto const rmse = f.number("train_rmse");
        if (!std::isfinite(rmse)) { continue; }
        auto& slot = best[f.get("config")];
        if (slot == nullptr || rmse < slot->number("train_rmse")) { slot = &f; }
    }
    if (best.empty()) {
        err << "error: no valid models in '" << dir.string() << "'\n";
        return exit_runtime;
    }

    std::vector<ResultFile const*> chosen;
    for (auto const& [name, f] : best) { chosen.push_back(f); }
    std::stable_sort(chosen.begin(), chosen.end(), [](auto const* a, auto const* b) {
        return a->number("train_rmse") < b->number("train_rmse");
    });

    if (csv) {
        out << "rmse,r2,avg_error,algorithm,max_tree_depth,dataset,config,seed\n";
        for (auto const* f : chosen) {
            for (std::string side : {"train", "test"}) {
                out << f->get(side + "_rmse") << ',' << f->get(side + "_r2") << ',' << f->get(side + "_avg_error")
                    << ',' << f->get("variant") << ',' << f->get("max_tree_depth") << ',' << side << ','
                    << f->get("config") << ',' << f->get("seed") << '\n';
            }
        }
        return exit_ok;
    }

    std::size_t name_width = 6;
    for (auto const* f : chosen) { name_width = std::max(name_width, f->get("config").size()); }
    auto cell = [](double v) {
        if (!std::isfinite(v)) { return std::string("nan"); }
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v;
        return s.str();
    };
    out << std::left << std::setw(10) << "RMSE" << std::setw(10) << "R2" << std::setw(11) << "Avg.Error"
        << std::setw(8) << "Algo" << std::setw(7) << "Depth" << std::setw(8) << "Dataset"
        << std::setw(static_cast<int>(name_width) + 2) << "Config" << "Seed\n";
    for (auto const* f : chosen) {
        for (std::string side : {"train", "test"}) {
            out << std::left << std::setw(10) << cell(f->number(side + "_rmse")) << std::setw(10)
                << cell(f->number(side + "_r2")) << std::setw(11) << cell(f->number(side + "_avg_error"))
                << std::setw(8) << f->get("variant") << std::setw(7) << f->get("max_tree_depth") << std::setw(8)
                << side << std::setw(static_cast<int>(name_width) + 2) << f->get("config") << f->get("seed") << '\n';
        }
    }
    return exit_ok;
}

auto cmd_convergence(fs::path const& dir, std::ostream& out, std::ostream& err) -> int
{
    try {
        auto const files = read_results(dir);
        // config -> per-run (generation, best) series
        std::map<std::string, std::vector<std::vector<std::pair<std::size_t, double>>>> series;
        for (auto const& f : files) {
            auto log_path = f.path;
            log_path.replace_extension(".log.csv");
            auto const text = read_file(log_path);
            std::istringstream in(text);
            std::string line;
            std::getline(in, line); // header
            std::vector<std::pair<std::size_t, double>> run;
            while (std::getline(in, line)) {
                if (trim(line).empty()) { continue; }
                std::istringstream fields(line);
                std::string gen;
                std::string best;
                std::getline(fields, gen, ',');
                std::getline(fields, best, ',');
                double v = best == "inf" ? std::numeric_limits<double>::infinity() : std::stod(best);
                run.emplace_back(static_cast<std::size_t>(std::stoull(gen)), v);
            }
            series[f.get("config")].push_back(std::move(run));
        }

        out << "config,generation,mean_best_rmse,std_best_rmse,n_runs\n";
        for (auto const& [config, runs] : series) {
            for (auto const& r : runs) {
                bool same = r.size() == runs.front().size();
                for (std::size_t i = 0; same && i < r.size(); ++i) { same = r[i].first == runs.front()[i].first; }
                if (!same) { throw DataError("runs of config '" + config + "' have different snapshot schedules"); }
            }
            for (std::size_t i = 0; i < runs.front().size(); ++i) {
                double sum = 0.0;
                for (auto const& r : runs) { sum += r[i].second; }
                double const mean = sum / static_cast<double>(runs.size());
                double var = 0.0;
                for (auto const& r : runs) { var += (r[i].second - mean) * (r[i].second - mean); }
                double const sd = std::isfinite(mean) ? std::sqrt(var / static_cast<double>(runs.size())) : 0.0;
                out << config << ',' << runs.front()[i].first << ',' << format_double(mean) << ','
                    << format_double(sd) << ',' << runs.size() << '\n';
            }
        }
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

} // namespace gggp
