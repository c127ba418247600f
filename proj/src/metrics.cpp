#include "gggp/metrics.hpp"

#include <cmath>
#include <string>

#include "gggp/errors.hpp"

namespace gggp {

namespace {

void check_shapes(std::span<double const> pred, std::span<double const> target)
{
    if (pred.size() != target.size()) {
        throw MetricError("prediction/target length mismatch: " + std::to_string(pred.size()) + " vs "
                          + std::to_string(target.size()));
    }
    if (pred.empty()) { throw MetricError("metric of an empty sample"); }
}

} // namespace

auto rmse(std::span<double const> pred, std::span<double const> target) -> double
{
    check_shapes(pred, target);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double const d = pred[i] - target[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

auto mean_abs_error(std::span<double const> pred, std::span<double const> target) -> double
{
    check_shapes(pred, target);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) { sum += std::fabs(pred[i] - target[i]); }
    return sum / static_cast<double>(pred.size());
}

auto r2(std::span<double const> pred, std::span<double const> target) -> double
{
    check_shapes(pred, target);
    if (target.size() < 2) { throw MetricError("R^2 needs at least two samples"); }
    double mean = 0.0;
    for (double t : target) { mean += t; }
    mean /= static_cast<double>(target.size());

    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        ss_res += (pred[i] - target[i]) * (pred[i] - target[i]);
        ss_tot += (target[i] - mean) * (target[i] - mean);
    }
    if (ss_tot == 0.0) { throw MetricError("R^2 is undefined for a constant target"); }
    return 1.0 - ss_res / ss_tot;
}

auto metric_report(std::span<double const> pred, std::span<double const> target) -> MetricReport
{
    MetricReport m;
    m.rmse = rmse(pred, target);
    m.avg_error = mean_abs_error(pred, target);
    m.n = pred.size();
    try {
        m.r2 = r2(pred, target);
    } catch (MetricError const&) {
        m.r2.reset();
    }
    return m;
}

} // namespace gggp
