#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gggp/data.hpp"
#include "gggp/errors.hpp"
#include "gggp/experiment.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Grammar-guided genetic programming for symbolic regression"};
    app.require_subcommand(1);

    std::string spec_path;
    auto* run = app.add_subcommand("run", "Run every configuration of an experiment spec");
    run->add_option("spec", spec_path, "Experiment spec file")->required();

    std::string model_path;
    std::string csv_path;
    gggp::EvaluateOptions eval_opts;
    std::optional<double> split_fraction;
    std::uint64_t split_seed = 0;
    std::string gender = "all";
    std::optional<double> min_age;
    std::optional<std::string> pregnancy;
    auto* evaluate = app.add_subcommand("evaluate", "Score a model file against a CSV dataset");
    evaluate->add_option("model", model_path, "Model expression file")->required();
    evaluate->add_option("csv", csv_path, "Dataset CSV")->required();
    evaluate->add_option("--target", eval_opts.target, "Target column")->capture_default_str();
    evaluate->add_option("--split", split_fraction, "Train fraction; reports train and test rows");
    evaluate->add_option("--seed", split_seed, "Split seed")->capture_default_str();
    evaluate->add_option("--gender", gender, "all, male or female")->capture_default_str();
    evaluate->add_option("--min-age", min_age, "Drop rows with RIDAGEYR below this");
    evaluate->add_option("--pregnancy-column", pregnancy, "Drop rows where this column equals 1");

    std::string results_dir;
    bool as_csv = false;
    auto* summarize = app.add_subcommand("summarize", "Best run per configuration");
    summarize->add_option("dir", results_dir, "Results directory")->required();
    summarize->add_flag("--csv", as_csv, "CSV output");

    auto* convergence = app.add_subcommand("convergence", "Mean best-so-far RMSE per generation");
    convergence->add_option("dir", results_dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        auto const code = app.exit(e);
        return code == 0 ? gggp::exit_ok : gggp::exit_usage;
    }

    if (*run) { return gggp::cmd_run(spec_path, std::cout, std::cerr); }
    if (*evaluate) {
        try {
            eval_opts.gender = gggp::parse_gender_filter(gender);
        } catch (std::exception const& e) {
            std::cerr << "error: " << e.what() << '\n';
            return gggp::exit_usage;
        }
        eval_opts.train_fraction = split_fraction;
        eval_opts.seed = split_seed;
        eval_opts.min_age = min_age;
        eval_opts.pregnancy_column = pregnancy;
        return gggp::cmd_evaluate(model_path, csv_path, eval_opts, std::cout, std::cerr);
    }
    if (*summarize) { return gggp::cmd_summarize(results_dir, as_csv, std::cout, std::cerr); }
    return gggp::cmd_convergence(results_dir, std::cout, std::cerr);
}
