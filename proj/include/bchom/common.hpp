#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bchom {

using NodeId = std::uint32_t;

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GraphError : Error {
    using Error::Error;
};
struct MetricError : Error {
    using Error::Error;
};
struct NullModelError : Error {
    using Error::Error;
};
struct StatsError : Error {
    using Error::Error;
};
struct ConvergenceError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

/// Neighborhood orientation: Follower = out-neighbors (whom ego engages),
/// Leader = in-neighbors (who engages ego).
enum class Perspective { Follower, Leader };

inline const char* to_string(Perspective p) {
    return p == Perspective::Follower ? "follower" : "leader";
}

inline Perspective parse_perspective(const std::string& s) {
    if (s == "follower") return Perspective::Follower;
    if (s == "leader") return Perspective::Leader;
    throw ConfigError("unknown perspective '" + s + "' (expected 'follower' or 'leader')");
}

namespace numeric {

/// Neumaier-compensated sum; result is stable against summand ordering at
/// the 1e-12 level required by the reduction contracts.
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw StatsError("mean of empty sample");
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

/// Unbiased sample variance (n-1 denominator).
inline double sample_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw StatsError("sample variance requires at least two values");
    const double m = mean(xs);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - m;
        sq[i] = d * d;
    }
    return compensated_sum(sq) / static_cast<double>(n - 1);
}

/// Linear-interpolation quantile on a sorted sample (the convention used by
/// the summary tables; q in [0,1]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw StatsError("quantile of empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double median_sorted(std::span<const double> sorted) { return quantile_sorted(sorted, 0.5); }

inline double iqr_sorted(std::span<const double> sorted) {
    return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

}  // namespace numeric

}  // namespace bchom
