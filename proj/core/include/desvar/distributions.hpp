#pragma once

#include "desvar/rng.hpp"

#include <string>
#include <string_view>

namespace desvar {

// Inverse-transform sampler over one of the supported families. Every sample
// consumes exactly one uniform, and F^-1 is increasing in u, so antithetic and
// common streams act monotonically on sampled times.
//
// CONST(v) is a degenerate family used for hand-traced models; it still
// consumes its draw so swapping it for a random family keeps streams aligned.
class Distribution {
public:
    enum class Kind { expo, tria, unif, constant };

    static Distribution expo(double mean);
    static Distribution tria(double min, double mode, double max);
    static Distribution unif(double low, double high);
    static Distribution constant(double value);

    // Accepts `EXPO(13)`, `TRIA(1,3,6)`, `UNIF(0.1,0.6)`, `CONST(5)`.
    static Distribution parse(std::string_view literal);

    Kind kind() const noexcept { return kind_; }
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }

    double inverse_cdf(double u) const;
    double sample(RandomStream& stream) const { return inverse_cdf(stream.next_uniform()); }

    // Same family with every time parameter multiplied by `factor` (> 0).
    Distribution scaled(double factor) const;

    double mean() const noexcept;
    double variance() const noexcept;

    std::string to_string() const;

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    Distribution(Kind kind, double a, double b, double c) : kind_(kind), a_(a), b_(b), c_(c) {}

    Kind kind_;
    double a_;
    double b_;
    double c_;
};

}  // namespace desvar
