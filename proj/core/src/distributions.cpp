#include "desvar/distributions.hpp"

#include "desvar/error.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

namespace desvar {

namespace {

std::vector<double> parse_args(std::string_view body, std::string_view literal) {
    std::vector<double> args;
    std::string token;
    auto flush = [&] {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(token, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        while (pos < token.size() && token[pos] == ' ') ++pos;
        if (token.empty() || pos != token.size() || !std::isfinite(v)) {
            throw ValidationError("bad distribution literal '" + std::string(literal) + "'");
        }
        args.push_back(v);
        token.clear();
    };
    for (char ch : body) {
        if (ch == ',') flush();
        else if (ch != ' ' || !token.empty()) token.push_back(ch);
    }
    flush();
    return args;
}

}  // namespace

Distribution Distribution::expo(double mean) {
    if (!(mean > 0) || !std::isfinite(mean)) throw ValidationError("EXPO: mean must be > 0");
    return {Kind::expo, mean, 0, 0};
}

Distribution Distribution::tria(double min, double mode, double max) {
    if (!(min <= mode && mode <= max && min < max) || !std::isfinite(min) || !std::isfinite(max)) {
        throw ValidationError("TRIA: need min <= mode <= max and min < max");
    }
    return {Kind::tria, min, mode, max};
}

Distribution Distribution::unif(double low, double high) {
    if (!(low < high) || !std::isfinite(low) || !std::isfinite(high)) {
        throw ValidationError("UNIF: need low < high");
    }
    return {Kind::unif, low, high, 0};
}

Distribution Distribution::constant(double value) {
    if (!std::isfinite(value) || value < 0) throw ValidationError("CONST: value must be finite and >= 0");
    return {Kind::constant, value, 0, 0};
}

Distribution Distribution::parse(std::string_view literal) {
    std::string_view s = literal;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    const auto open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')') {
        throw ValidationError("bad distribution literal '" + std::string(literal) + "'");
    }
    const auto name = s.substr(0, open);
    const auto args = parse_args(s.substr(open + 1, s.size() - open - 2), literal);
    auto want = [&](std::size_t n) {
        if (args.size() != n) {
            throw ValidationError("wrong argument count in '" + std::string(literal) + "'");
        }
    };
    if (name == "EXPO") {
        want(1);
        return expo(args[0]);
    }
    if (name == "TRIA") {
        want(3);
        return tria(args[0], args[1], args[2]);
    }
    if (name == "UNIF") {
        want(2);
        return unif(args[0], args[1]);
    }
    if (name == "CONST") {
        want(1);
        return constant(args[0]);
    }
    throw ValidationError("unknown distribution family in '" + std::string(literal) + "'");
}

double Distribution::inverse_cdf(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw ValidationError("inverse_cdf: u must lie in (0,1)");
    switch (kind_) {
        case Kind::expo:
            return -a_ * std::log1p(-u);
        case Kind::tria: {
            const double width = c_ - a_;
            const double split = (b_ - a_) / width;
            if (u <= split) return a_ + std::sqrt(u * width * (b_ - a_));
            return c_ - std::sqrt((1.0 - u) * width * (c_ - b_));
        }
        case Kind::unif:
            return a_ + u * (b_ - a_);
        case Kind::constant:
            return a_;
    }
    return 0;
}

Distribution Distribution::scaled(double factor) const {
    if (!(factor > 0) || !std::isfinite(factor)) throw ValidationError("scale factor must be > 0");
    return {kind_, a_ * factor, b_ * factor, c_ * factor};
}

double Distribution::mean() const noexcept {
    switch (kind_) {
        case Kind::expo: return a_;
        case Kind::tria: return (a_ + b_ + c_) / 3.0;
        case Kind::unif: return 0.5 * (a_ + b_);
        case Kind::constant: return a_;
    }
    return 0;
}

double Distribution::variance() const noexcept {
    switch (kind_) {
        case Kind::expo: return a_ * a_;
        case Kind::tria: return (a_ * a_ + b_ * b_ + c_ * c_ - a_ * b_ - a_ * c_ - b_ * c_) / 18.0;
        case Kind::unif: return (b_ - a_) * (b_ - a_) / 12.0;
        case Kind::constant: return 0;
    }
    return 0;
}

std::string Distribution::to_string() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
        case Kind::expo: out << "EXPO(" << a_ << ')'; break;
        case Kind::tria: out << "TRIA(" << a_ << ',' << b_ << ',' << c_ << ')'; break;
        case Kind::unif: out << "UNIF(" << a_ << ',' << b_ << ')'; break;
        case Kind::constant: out << "CONST(" << a_ << ')'; break;
    }
    return out.str();
}

}  // namespace desvar
