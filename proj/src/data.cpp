#include "gggp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gggp/errors.hpp"
#include "gggp/rng.hpp"

namespace gggp {

namespace {

auto trim(std::string_view s) -> std::string_view
{
    auto const ws = " \t\r\n";
    auto const b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) { return {}; }
    auto const e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

auto parse_cell(std::string_view cell) -> std::optional<double>
{
    cell = trim(cell);
    if (cell.empty()) { return std::nullopt; }
    if (cell.front() == '+') { cell.remove_prefix(1); }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) { return std::nullopt; }
    return v;
}

} // namespace

auto Dataset::find(std::string_view name) const -> std::optional<std::size_t>
{
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) { return std::nullopt; }
    return static_cast<std::size_t>(it - columns.begin());
}

auto Dataset::column(std::string_view name) const -> std::vector<double> const&
{
    auto i = find(name);
    if (!i) { throw DataError("dataset has no column '" + std::string(name) + "'"); }
    return values[*i];
}

auto Dataset::has_missing(std::size_t row) const -> bool
{
    return std::any_of(missing.begin(), missing.end(), [row](auto const& m) { return m[row] != 0; });
}

auto parse_csv(std::string_view text) -> std::vector<std::vector<std::string>>
{
    if (text.substr(0, 3) == "\xEF\xBB\xBF") { text.remove_prefix(3); }
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;

    for (std::size_t i = 0; i < text.size(); ++i) {
        char const c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            any = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            any = true;
            break;
        case '\r':
            break;
        case '\n':
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            field.clear();
            record.clear();
            any = false;
            break;
        default:
            field.push_back(c);
            any = true;
        }
    }
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

auto load_csv(std::string const& path, std::string const& target_column,
              std::vector<std::string> const& feature_columns,
              std::vector<std::string> const& extra_columns) -> Dataset
{
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw DataError("cannot open CSV file '" + path + "'"); }
    std::ostringstream ss;
    ss << in.rdbuf();
    auto records = parse_csv(ss.str());
    if (records.empty()) { throw DataError("CSV file '" + path + "' has no header row"); }

    if (std::find(feature_columns.begin(), feature_columns.end(), target_column) != feature_columns.end()) {
        throw DataError("target column '" + target_column + "' is also listed as a feature");
    }

    Dataset d;
    d.target_column = target_column;
    d.feature_columns = feature_columns;
    auto add = [&](std::string const& name) {
        if (std::find(d.columns.begin(), d.columns.end(), name) == d.columns.end()) { d.columns.push_back(name); }
    };
    for (auto const& f : feature_columns) { add(f); }
    add(target_column);
    for (auto const& x : extra_columns) { add(x); }

    auto const& header = records.front();
    std::vector<std::size_t> source;
    for (auto const& name : d.columns) {
        auto it = std::find_if(header.begin(), header.end(), [&](auto const& h) { return trim(h) == name; });
        if (it == header.end()) { throw DataError("CSV file '" + path + "' has no column '" + name + "'"); }
        source.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    d.values.assign(d.columns.size(), {});
    d.missing.assign(d.columns.size(), {});
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto const& rec = records[r];
        for (std::size_t c = 0; c < d.columns.size(); ++c) {
            auto v = source[c] < rec.size() ? parse_cell(rec[source[c]]) : std::nullopt;
            d.values[c].push_back(v.value_or(0.0));
            d.missing[c].push_back(v ? 0 : 1);
        }
    }
    if (d.rows() == 0) { throw DataError("CSV file '" + path + "' has no data rows"); }
    return d;
}

auto select_rows(Dataset const& d, std::span<std::size_t const> rows) -> Dataset
{
    Dataset out;
    out.columns = d.columns;
    out.target_column = d.target_column;
    out.feature_columns = d.feature_columns;
    out.values.assign(d.columns.size(), {});
    out.missing.assign(d.columns.size(), {});
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
        out.values[c].reserve(rows.size());
        out.missing[c].reserve(rows.size());
        for (auto r : rows) {
            out.values[c].push_back(d.values[c][r]);
            out.missing[c].push_back(d.missing[c][r]);
        }
    }
    return out;
}

auto nhanes_filter(Dataset const& d, NhanesFilter const& filter) -> Dataset
{
    std::vector<double> const* age = nullptr;
    if (filter.min_age) { age = &d.column(filter.age_column); }
    // A blank pregnancy cell means not pregnant (the survey leaves it empty
    // for men and for women outside the screened age range).
    std::optional<std::size_t> preg;
    if (filter.pregnancy_column) {
        (void)d.column(*filter.pregnancy_column);
        preg = d.find(*filter.pregnancy_column);
    }

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < d.rows(); ++r) {
        bool complete = true;
        for (std::size_t c = 0; c < d.columns.size() && complete; ++c) {
            complete = c == preg || d.missing[c][r] == 0;
        }
        if (!complete) { continue; }
        if (age != nullptr && (*age)[r] < *filter.min_age) { continue; }
        if (preg && d.missing[*preg][r] == 0 && d.values[*preg][r] == 1.0) { continue; }
        keep.push_back(r);
    }
    return select_rows(d, keep);
}

auto parse_gender_filter(std::string_view text) -> GenderFilter
{
    if (text == "all") { return GenderFilter::All; }
    if (text == "male") { return GenderFilter::Male; }
    if (text == "female") { return GenderFilter::Female; }
    throw ConfigError("unknown gender filter '" + std::string(text) + "' (expected all, male or female)");
}

auto to_string(GenderFilter g) -> std::string
{
    switch (g) {
    case GenderFilter::All: return "all";
    case GenderFilter::Male: return "male";
    case GenderFilter::Female: return "female";
    }
    return "all";
}

auto split(Dataset const& d, SplitSpec const& spec) -> std::pair<Dataset, Dataset>
{
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw DataError("train fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> rows;
    if (spec.gender == GenderFilter::All) {
        rows.resize(d.rows());
        for (std::size_t r = 0; r < rows.size(); ++r) { rows[r] = r; }
    } else {
        auto const& gender = d.column(spec.gender_column);
        double const wanted = spec.gender == GenderFilter::Male ? 1.0 : 0.0;
        for (std::size_t r = 0; r < d.rows(); ++r) {
            if (gender[r] == wanted) { rows.push_back(r); }
        }
    }

    Rng rng(spec.seed);
    for (std::size_t i = rows.size(); i > 1; --i) { std::swap(rows[i - 1], rows[rng.index(i)]); }

    auto const n = rows.size();
    auto const n_train = static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n) - 1e-9));
    if (n_train == 0 || n_train >= n) {
        throw DataError("split of " + std::to_string(n) + " rows leaves an empty train or test side");
    }
    std::span<std::size_t const> all(rows);
    return {select_rows(d, all.first(n_train)), select_rows(d, all.subspan(n_train))};
}

} // namespace gggp
