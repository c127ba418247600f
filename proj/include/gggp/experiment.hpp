#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gggp/data.hpp"
#include "gggp/engine.hpp"

namespace gggp {

/// Parsed experiment spec file.
///
/// Flat `key = value` lines. Keys before the first `[section]` header set the
/// dataset, split and batch options, and may also give defaults for any
/// config key. Each `[name]` section defines configs; a comma-separated value
/// on a config key sweeps it, and the section expands to the cartesian product.
struct ExperimentSpec {
    std::filesystem::path base_dir; // relative paths resolve against this
    std::string dataset;            // as written
    std::string target{"DXDTOPF"};
    std::vector<std::string> features;
    std::optional<std::string> pregnancy_column;
    std::optional<double> min_age{18.0};
    SplitSpec split;
    std::size_t replicates{1};
    std::size_t workers{1};
    std::string output_dir{"results"};
    std::vector<EvolutionConfig> configs;

    [[nodiscard]] auto resolve(std::string const& p) const -> std::filesystem::path;
};

/// Throws ConfigError with the offending line number.
auto parse_experiment(std::string const& text, std::filesystem::path const& base_dir = {}) -> ExperimentSpec;
auto load_experiment(std::filesystem::path const& path) -> ExperimentSpec;

/// Loads, filters and splits the spec's dataset.
auto prepare_data(ExperimentSpec const& spec) -> std::pair<Dataset, Dataset>;

/// `key = value` lines; `#` starts a comment line.
auto parse_key_values(std::string const& text) -> std::map<std::string, std::string>;

/// Writes to a temporary sibling then renames over the target.
void write_atomic(std::filesystem::path const& path, std::string const& content);

// Exit codes shared by every command.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_runtime = 2;

auto cmd_run(std::filesystem::path const& spec_path, std::ostream& out, std::ostream& err) -> int;

struct EvaluateOptions {
    std::string target{"DXDTOPF"};
    std::optional<double> train_fraction;
    std::uint64_t seed{0};
    GenderFilter gender{GenderFilter::All};
    std::optional<double> min_age;
    std::optional<std::string> pregnancy_column;
};

auto cmd_evaluate(std::filesystem::path const& model, std::filesystem::path const& csv, EvaluateOptions const& opts,
                  std::ostream& out, std::ostream& err) -> int;

auto cmd_summarize(std::filesystem::path const& dir, bool csv, std::ostream& out, std::ostream& err) -> int;

auto cmd_convergence(std::filesystem::path const& dir, std::ostream& out, std::ostream& err) -> int;

} // namespace gggp
