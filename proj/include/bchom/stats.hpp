#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bchom/common.hpp"

namespace bchom {

namespace detail {

/// Regularized incomplete beta I_x(a,b) via the Lentz continued fraction.
inline double ibeta_cf(double a, double b, double x) {
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction failed to converge");
}

inline double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * ibeta_cf(a, b, x) / a;
    }
    return 1.0 - front * ibeta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    if (t == 0.0) return 1.0;
    return ibeta_reg(df / 2.0, 0.5, df / (df + t * t));
}

}  // namespace detail

/// Standardized mean difference with the pooled standard deviation. A zero
/// pooled sd yields 0 for equal means and a signed infinity otherwise; the
/// caller decides how to flag the latter.
inline double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw StatsError("cohens_d: each sample needs at least two values");
    }
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = numeric::mean(a);
    const double mb = numeric::mean(b);
    const double va = numeric::sample_variance(a);
    const double vb = numeric::sample_variance(b);
    const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
    if (pooled == 0.0) {
        if (ma == mb) return 0.0;
        return ma > mb ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    }
    return (ma - mb) / pooled;
}

struct TestResult {
    double t_statistic = 0.0;
    double p_value = 1.0;
    double cohens_d = 0.0;
    std::int64_t n_a = 0;
    std::int64_t n_b = 0;
    bool degenerate = false;  // zero-variance input made t/p/d formal only
};

/// Welch two-sample t-test (two-sided) with Welch-Satterthwaite degrees of
/// freedom, plus the pooled-sd Cohen's d.
inline TestResult two_sample_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw StatsError("two_sample_test: each sample needs at least two values");
    }
    TestResult res;
    res.n_a = static_cast<std::int64_t>(a.size());
    res.n_b = static_cast<std::int64_t>(b.size());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = numeric::mean(a);
    const double mb = numeric::mean(b);
    const double va = numeric::sample_variance(a);
    const double vb = numeric::sample_variance(b);
    res.cohens_d = cohens_d(a, b);
    if (va == 0.0 && vb == 0.0) {
        res.degenerate = true;
        if (ma == mb) {
            res.t_statistic = 0.0;
            res.p_value = 1.0;
            res.cohens_d = 0.0;
        } else {
            res.t_statistic = ma > mb ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
        }
        return res;
    }
    const double sea = va / na;
    const double seb = vb / nb;
    res.t_statistic = (ma - mb) / std::sqrt(sea + seb);
    const double df = (sea + seb) * (sea + seb) /
                      (sea * sea / (na - 1.0) + seb * seb / (nb - 1.0));
    res.p_value = detail::student_t_two_sided_p(res.t_statistic, df);
    return res;
}

/// Pearson correlation; absent when either input has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StatsError("pearson: size mismatch");
    if (x.size() < 2) return std::nullopt;
    const double mx = numeric::mean(x);
    const double my = numeric::mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

enum class DecayClass { DD, NDD, Undefined };

inline const char* to_string(DecayClass c) {
    switch (c) {
        case DecayClass::DD: return "DD";
        case DecayClass::NDD: return "NDD";
        default: return "Undefined";
    }
}

/// Per-ego diagnostic of how neighbor counts fall off with opinion distance.
struct DecayDiagnostic {
    NodeId ego = 0;
    double bin_width = 0.1;
    std::vector<std::int64_t> bin_counts;
    std::optional<double> pearson_r;  // over all bins, zeros included
    DecayClass classification = DecayClass::Undefined;
};

/// Classification from already-binned counts. DD requires the subsequence of
/// nonzero counts, ordered by distance, to be strictly decreasing with at
/// least two entries; Undefined is reserved for counts with no variance
/// (correlation not computable).
inline DecayDiagnostic decay_from_counts(std::vector<std::int64_t> counts, double bin_width,
                                         NodeId ego = 0) {
    if (!(bin_width > 0.0 && bin_width <= 1.0)) {
        throw StatsError("decay: bin_width must lie in (0,1]");
    }
    DecayDiagnostic diag;
    diag.ego = ego;
    diag.bin_width = bin_width;

    std::vector<double> midpoints(counts.size());
    std::vector<double> count_values(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        midpoints[k] = (static_cast<double>(k) + 0.5) * bin_width;
        count_values[k] = static_cast<double>(counts[k]);
    }
    diag.pearson_r = pearson(midpoints, count_values);

    if (!diag.pearson_r) {
        diag.classification = DecayClass::Undefined;
    } else {
        std::vector<std::int64_t> nonzero;
        for (std::int64_t c : counts) {
            if (c > 0) nonzero.push_back(c);
        }
        bool strictly_decreasing = nonzero.size() >= 2;
        for (std::size_t k = 1; k < nonzero.size(); ++k) {
            if (nonzero[k] >= nonzero[k - 1]) {
                strictly_decreasing = false;
                break;
            }
        }
        diag.classification = strictly_decreasing ? DecayClass::DD : DecayClass::NDD;
    }
    diag.bin_counts = std::move(counts);
    return diag;
}

/// Bins |x_ego - x_j| into ceil(1/bin_width) bins over [0,1] and classifies.
/// Requires at least two neighbors.
inline DecayDiagnostic distance_decay(double x_ego, std::span<const double> neighbor_opinions,
                                      double bin_width, NodeId ego = 0) {
    if (!(bin_width > 0.0 && bin_width <= 1.0)) {
        throw StatsError("distance_decay: bin_width must lie in (0,1]");
    }
    if (neighbor_opinions.size() < 2) {
        throw StatsError("distance_decay: ego needs at least two neighbors");
    }
    const auto nbins = static_cast<std::size_t>(std::ceil(1.0 / bin_width));
    std::vector<std::int64_t> counts(nbins, 0);
    for (double xj : neighbor_opinions) {
        const double d = std::abs(x_ego - xj);
        auto k = static_cast<std::size_t>(d / bin_width);
        if (k >= nbins) k = nbins - 1;
        ++counts[k];
    }
    return decay_from_counts(std::move(counts), bin_width, ego);
}

}  // namespace bchom
