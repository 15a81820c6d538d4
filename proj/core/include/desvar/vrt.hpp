#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace desvar {

// Variance-reduction estimators over replication series. Sample moments use
// the n-1 divisor throughout, which makes the decomposition identities below
// hold for sample quantities, not just in expectation.

struct PairedSeries {
    std::vector<double> x;
    std::vector<double> x_prime;

    static PairedSeries from_pairs(std::span<const std::pair<double, double>> pairs);
    std::size_t size() const noexcept { return x.size(); }
};

// Common random numbers: D_i = x_i - x'_i with
//   Var(D) = Var(X_a) + Var(X_b) - 2 Cov(X_a, X_b).
struct CrnResult {
    std::vector<double> d_series;
    double var_d = 0;
    double var_a = 0;
    double var_b = 0;
    double cov_ab = 0;
    double mean_d = 0;
};

// Throws DegenerateStatistics("insufficient data") below 2 pairs.
CrnResult crn_difference_variance(const PairedSeries& pairs);

// Antithetic variates: Y_i = (x_i + x'_i) / 2 with
//   Var(Y) = [Var(X) + Var(X') + 2 Cov(X, X')] / 4.
struct AvResult {
    std::vector<double> y_series;
    double var_y = 0;
    double var_x = 0;
    double var_xp = 0;
    double cov = 0;
    double mean_y = 0;
};

AvResult av_pair_series(const PairedSeries& pairs);

// Control variates: adjusted_i = y_i - a (x_i - E[X]) with
//   a = Cov(Y, X) / Var(X).
// E[X] defaults to the sample mean of x.
struct CvInput {
    std::vector<double> y;
    std::vector<double> x;
    std::optional<double> expected_x;
};

struct CvResult {
    double a_hat = 0;
    double expected_x = 0;
    std::vector<double> adjusted_series;
    double var_raw = 0;
    double var_adjusted = 0;
    double correlation = 0;  // 0 when either series is constant
    std::vector<std::string> warnings;
};

// Length mismatch or fewer than 2 points throw. Var(x) == 0 forces a = 0 and
// records the warning "degenerate control".
CvResult cv_adjust(const CvInput& input);

}  // namespace desvar
