#include "desvar/stats.hpp"

#include "desvar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace desvar {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

void need_two(std::span<const double> xs) {
    if (xs.size() < 2) throw DegenerateStatistics("insufficient data: need at least 2 observations");
}

// Series for P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double sample_mean(std::span<const double> xs) {
    if (xs.empty()) throw DegenerateStatistics("insufficient data: empty series");
    double sum = 0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

Moments sample_moments(std::span<const double> xs) {
    need_two(xs);
    Moments m;
    m.n = xs.size();
    m.mean = sample_mean(xs);
    m.variance = sample_cov(xs, xs);
    m.stdev = std::sqrt(m.variance);
    return m;
}

double sample_variance(std::span<const double> xs) {
    return sample_moments(xs).variance;
}

double sample_cov(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("sample_cov: series lengths differ");
    need_two(a);
    const double ma = sample_mean(a);
    const double mb = sample_mean(b);
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - ma) * (b[i] - mb);
    return sum / static_cast<double>(a.size() - 1);
}

double regularized_gamma_p(double a, double x) {
    if (!(a > 0) || x < 0 || std::isnan(x)) throw ValidationError("regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0) || x < 0 || std::isnan(x)) throw ValidationError("regularized_gamma_q: need a > 0, x >= 0");
    if (x == 0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double regularized_beta(double a, double b, double x) {
    if (!(a > 0 && b > 0) || !(x >= 0 && x <= 1)) throw ValidationError("regularized_beta: bad arguments");
    if (x == 0) return 0.0;
    if (x == 1) return 1.0;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double chi_square_sf(double x, int df) {
    if (df < 1) throw ValidationError("chi_square_sf: df must be positive");
    if (!(x >= 0)) throw ValidationError("chi_square_sf: x must be >= 0");
    return std::clamp(regularized_gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
    if (!(df > 0)) throw ValidationError("student_t_cdf: df must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_beta(0.5 * df, 0.5, x);
    return t > 0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
    if (!(p > 0 && p < 1)) throw ValidationError("student_t_quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, df);
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_cdf(hi, df) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ci_halfwidth(std::span<const double> xs, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("ci_halfwidth: alpha must lie in (0,1)");
    const auto m = sample_moments(xs);
    const double n = static_cast<double>(m.n);
    return student_t_quantile(1.0 - alpha / 2.0, n - 1.0) * m.stdev / std::sqrt(n);
}

std::string_view to_string(Decision d) {
    return d == Decision::reject ? "reject" : "fail to reject";
}

BartlettResult bartlett_test(std::span<const Group> groups) {
    if (groups.size() < 2) throw ValidationError("bartlett: need at least 2 groups");
    BartlettResult r;
    const double k = static_cast<double>(groups.size());
    double big_n = 0;
    double pooled_num = 0;
    double sum_log = 0;
    double sum_inv = 0;
    for (const auto& g : groups) {
        if (g.values.size() < 2) {
            throw DegenerateStatistics("bartlett: group '" + g.label + "' has fewer than 2 observations");
        }
        const double n = static_cast<double>(g.values.size());
        const double var = sample_variance(g.values);
        if (!(var > 0)) throw DegenerateStatistics("degenerate group '" + g.label + "': zero variance");
        if (g.values.size() < 5) {
            r.warnings.push_back("group '" + g.label + "' has n < 5; normality assumption is fragile");
        }
        big_n += n;
        pooled_num += (n - 1.0) * var;
        sum_log += (n - 1.0) * std::log(var);
        sum_inv += 1.0 / (n - 1.0);
    }
    const double dof = big_n - k;
    const double pooled = pooled_num / dof;
    const double raw = dof * std::log(pooled) - sum_log;
    const double correction = 1.0 + (sum_inv - 1.0 / dof) / (3.0 * (k - 1.0));
    r.statistic = std::max(0.0, raw / correction);
    r.df = static_cast<int>(groups.size()) - 1;
    r.p_value = chi_square_sf(r.statistic, r.df);
    return r;
}

}  // namespace desvar
