#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace gggp {

struct MetricReport {
    double rmse{0.0};
    std::optional<double> r2; // absent for n < 2 or a constant target
    double avg_error{0.0};    // mean absolute error
    std::size_t n{0};
};

/// Throws MetricError on length mismatch or empty input.
auto rmse(std::span<double const> pred, std::span<double const> target) -> double;
/// Residual-based 1 - SS_res / SS_tot. Throws MetricError for n < 2 or a constant target.
auto r2(std::span<double const> pred, std::span<double const> target) -> double;
auto mean_abs_error(std::span<double const> pred, std::span<double const> target) -> double;

auto metric_report(std::span<double const> pred, std::span<double const> target) -> MetricReport;

} // namespace gggp
