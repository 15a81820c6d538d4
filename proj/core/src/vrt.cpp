#include "desvar/vrt.hpp"

#include "desvar/error.hpp"
#include "desvar/stats.hpp"

#include <cmath>

namespace desvar {

namespace {

void check_pairs(const PairedSeries& pairs) {
    if (pairs.x.size() != pairs.x_prime.size()) throw ValidationError("paired series: incomplete pair");
    if (pairs.x.size() < 2) throw DegenerateStatistics("insufficient data: need at least 2 pairs");
}

}  // namespace

PairedSeries PairedSeries::from_pairs(std::span<const std::pair<double, double>> pairs) {
    PairedSeries out;
    for (const auto& [a, b] : pairs) {
        out.x.push_back(a);
        out.x_prime.push_back(b);
    }
    return out;
}

CrnResult crn_difference_variance(const PairedSeries& pairs) {
    check_pairs(pairs);
    CrnResult r;
    for (std::size_t i = 0; i < pairs.size(); ++i) r.d_series.push_back(pairs.x[i] - pairs.x_prime[i]);
    r.var_d = sample_variance(r.d_series);
    r.var_a = sample_variance(pairs.x);
    r.var_b = sample_variance(pairs.x_prime);
    r.cov_ab = sample_cov(pairs.x, pairs.x_prime);
    r.mean_d = sample_mean(r.d_series);
    return r;
}

AvResult av_pair_series(const PairedSeries& pairs) {
    check_pairs(pairs);
    AvResult r;
    for (std::size_t i = 0; i < pairs.size(); ++i) r.y_series.push_back(0.5 * (pairs.x[i] + pairs.x_prime[i]));
    r.var_y = sample_variance(r.y_series);
    r.var_x = sample_variance(pairs.x);
    r.var_xp = sample_variance(pairs.x_prime);
    r.cov = sample_cov(pairs.x, pairs.x_prime);
    r.mean_y = sample_mean(r.y_series);
    return r;
}

CvResult cv_adjust(const CvInput& input) {
    if (input.y.size() != input.x.size()) throw ValidationError("cv_adjust: y and x lengths differ");
    if (input.y.size() < 2) throw DegenerateStatistics("insufficient data: need at least 2 points");
    CvResult r;
    const double var_x = sample_variance(input.x);
    r.var_raw = sample_variance(input.y);
    const double cov = sample_cov(input.y, input.x);
    if (var_x > 0) {
        r.a_hat = cov / var_x;
        if (r.var_raw > 0) r.correlation = cov / std::sqrt(var_x * r.var_raw);
    } else {
        r.a_hat = 0;
        r.warnings.emplace_back("degenerate control");
    }
    r.expected_x = input.expected_x.value_or(sample_mean(input.x));
    r.adjusted_series.reserve(input.y.size());
    for (std::size_t i = 0; i < input.y.size(); ++i) {
        r.adjusted_series.push_back(input.y[i] - r.a_hat * (input.x[i] - r.expected_x));
    }
    r.var_adjusted = sample_variance(r.adjusted_series);
    return r;
}

}  // namespace desvar
