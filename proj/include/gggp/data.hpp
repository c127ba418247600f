#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gggp {

/// Column-major numeric table. Missing cells are flagged in `missing`; their
/// stored value is meaningless.
struct Dataset {
    // Features first (in the requested order), then the target, then any extra columns.
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::uint8_t>> missing;
    std::string target_column;
    std::vector<std::string> feature_columns;

    [[nodiscard]] auto rows() const -> std::size_t { return values.empty() ? 0 : values.front().size(); }
    [[nodiscard]] auto find(std::string_view name) const -> std::optional<std::size_t>;
    /// Throws DataError naming the column when absent.
    [[nodiscard]] auto column(std::string_view name) const -> std::vector<double> const&;
    [[nodiscard]] auto target() const -> std::vector<double> const& { return column(target_column); }
    /// Feature columns, in feature_columns order.
    [[nodiscard]] auto features() const -> std::span<std::vector<double> const>
    {
        return {values.data(), feature_columns.size()};
    }
    [[nodiscard]] auto has_missing(std::size_t row) const -> bool;
};

/// Reads an RFC-4180 CSV with a header row. Only the named columns are kept;
/// empty or non-numeric cells are flagged missing. Throws DataError for a
/// missing file, a missing named column, or zero data rows.
auto load_csv(std::string const& path, std::string const& target_column,
              std::vector<std::string> const& feature_columns,
              std::vector<std::string> const& extra_columns = {}) -> Dataset;

/// Splits one CSV record set into fields. Exposed for tests.
auto parse_csv(std::string_view text) -> std::vector<std::vector<std::string>>;

auto select_rows(Dataset const& d, std::span<std::size_t const> rows) -> Dataset;

struct NhanesFilter {
    std::optional<double> min_age{18.0};
    std::string age_column{"RIDAGEYR"};
    // Rows with value 1 in this column are dropped.
    std::optional<std::string> pregnancy_column;
};

/// Drops rows with any missing cell (a blank pregnancy cell excepted), minors,
/// and flagged pregnancies.
/// Throws DataError when a referenced filter column was not loaded.
auto nhanes_filter(Dataset const& d, NhanesFilter const& filter = {}) -> Dataset;

enum class GenderFilter { All, Male, Female };

auto parse_gender_filter(std::string_view text) -> GenderFilter;
auto to_string(GenderFilter g) -> std::string;

struct SplitSpec {
    double train_fraction{0.8};
    std::uint64_t seed{0};
    GenderFilter gender{GenderFilter::All};
    std::string gender_column{"RIAGENDR"}; // 1 = male, 0 = female
};

/// Gender filter, seeded shuffle, then the first ceil(fraction * n) rows train.
/// Throws DataError when either side would be empty.
auto split(Dataset const& d, SplitSpec const& spec) -> std::pair<Dataset, Dataset>;

} // namespace gggp
