#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace desvar {

// All variances and covariances use the n-1 divisor.

struct Moments {
    std::size_t n = 0;
    double mean = 0;
    double variance = 0;
    double stdev = 0;
};

double sample_mean(std::span<const double> xs);
// Throws DegenerateStatistics when fewer than two observations.
Moments sample_moments(std::span<const double> xs);
double sample_variance(std::span<const double> xs);
double sample_cov(std::span<const double> a, std::span<const double> b);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
// Regularized incomplete beta I_x(a, b).
double regularized_beta(double a, double b, double x);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, int df);

double student_t_cdf(double t, double df);
// Inverse of student_t_cdf by bisection on the incomplete-beta CDF.
double student_t_quantile(double p, double df);

// Half-width of the two-sided (1 - alpha) Student-t interval for the mean.
double ci_halfwidth(std::span<const double> xs, double alpha);

struct Group {
    std::string label;
    std::vector<double> values;
};

enum class Decision { reject, fail_to_reject };

std::string_view to_string(Decision d);

struct BartlettResult {
    double statistic = 0;
    int df = 0;
    double p_value = 1;
    std::vector<std::string> warnings;  // e.g. small groups; normality is assumed, not tested

    // reject iff p_value < alpha
    Decision decision_at(double alpha) const noexcept {
        return p_value < alpha ? Decision::reject : Decision::fail_to_reject;
    }
};

// Bartlett's test for equal variances across k >= 2 groups (each n_i >= 2):
//   s_p^2 = sum (n_i - 1) s_i^2 / (N - k)
//   T     = [(N - k) ln s_p^2 - sum (n_i - 1) ln s_i^2] / C
//   C     = 1 + [sum 1/(n_i - 1) - 1/(N - k)] / (3 (k - 1))
// referred to chi-square with k - 1 degrees of freedom. Zero-variance groups
// throw DegenerateStatistics ("degenerate group").
BartlettResult bartlett_test(std::span<const Group> groups);

}  // namespace desvar
