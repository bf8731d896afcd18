#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bchom/common.hpp"
#include "bchom/graph.hpp"
#include "bchom/parallel.hpp"

namespace bchom {

/// Ego opinion minus the mean neighbor opinion.
inline double opinion_gap(double x_ego, std::span<const double> neighbor_opinions) {
    if (neighbor_opinions.empty()) throw MetricError("opinion_gap: empty neighborhood");
    return x_ego - numeric::mean(neighbor_opinions);
}

struct ConfidenceInterval {
    double alpha;  // min neighbor opinion
    double beta;   // max neighbor opinion
    double range;  // beta - alpha
};

inline ConfidenceInterval confidence_interval(std::span<const double> neighbor_opinions) {
    if (neighbor_opinions.empty()) throw MetricError("confidence_interval: empty neighborhood");
    const auto [lo, hi] = std::minmax_element(neighbor_opinions.begin(), neighbor_opinions.end());
    return {*lo, *hi, *hi - *lo};
}

inline double mean_deviation(double x_ego, std::span<const double> neighbor_opinions) {
    if (neighbor_opinions.empty()) throw MetricError("mean_deviation: empty neighborhood");
    std::vector<double> dist(neighbor_opinions.size());
    for (std::size_t j = 0; j < neighbor_opinions.size(); ++j) {
        dist[j] = std::abs(x_ego - neighbor_opinions[j]);
    }
    return numeric::mean(dist);
}

inline double max_deviation(double x_ego, std::span<const double> neighbor_opinions) {
    if (neighbor_opinions.empty()) throw MetricError("max_deviation: empty neighborhood");
    double best = 0.0;
    for (double xj : neighbor_opinions) best = std::max(best, std::abs(x_ego - xj));
    return best;
}

inline bool range_inclusion(double x_ego, double alpha, double beta) {
    return alpha <= x_ego && x_ego <= beta;
}

struct Offsets {
    double gamma;  // x_ego - alpha; negative when ego lies below the span
    double delta;  // beta - x_ego; negative when ego lies above the span
};

inline Offsets offsets(double x_ego, double alpha, double beta) {
    return {x_ego - alpha, beta - x_ego};
}

/// (delta - gamma) / (delta + gamma); absent for a zero-width span.
inline std::optional<double> asymmetry_index(double gamma, double delta) {
    const double c = gamma + delta;
    if (c == 0.0) return std::nullopt;
    return (delta - gamma) / c;
}

/// Every per-ego interval quantity under one perspective.
struct NeighborProfile {
    NodeId ego = 0;
    Perspective perspective = Perspective::Follower;
    double ego_opinion = 0.0;
    std::vector<double> neighbor_opinions;  // sorted ascending
    std::int64_t n = 0;
    double mean_neighbor_opinion = 0.0;
    double gap = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double range = 0.0;
    double mean_dev = 0.0;
    double max_dev = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    std::optional<double> asymmetry;
    bool inclusion = false;
};

inline NeighborProfile make_profile(NodeId ego, Perspective p, double x_ego,
                                    std::vector<double> neighbor_opinions) {
    if (neighbor_opinions.empty()) {
        throw MetricError("profile: ego " + std::to_string(ego) + " has no neighbors");
    }
    std::sort(neighbor_opinions.begin(), neighbor_opinions.end());
    NeighborProfile pr;
    pr.ego = ego;
    pr.perspective = p;
    pr.ego_opinion = x_ego;
    pr.n = static_cast<std::int64_t>(neighbor_opinions.size());
    pr.mean_neighbor_opinion = numeric::mean(neighbor_opinions);
    pr.gap = x_ego - pr.mean_neighbor_opinion;
    pr.alpha = neighbor_opinions.front();
    pr.beta = neighbor_opinions.back();
    pr.range = pr.beta - pr.alpha;
    pr.mean_dev = mean_deviation(x_ego, neighbor_opinions);
    pr.max_dev = max_deviation(x_ego, neighbor_opinions);
    const Offsets off = offsets(x_ego, pr.alpha, pr.beta);
    pr.gamma = off.gamma;
    pr.delta = off.delta;
    pr.asymmetry = asymmetry_index(off.gamma, off.delta);
    pr.inclusion = range_inclusion(x_ego, pr.alpha, pr.beta);
    pr.neighbor_opinions = std::move(neighbor_opinions);
    return pr;
}

inline NeighborProfile profile(const OpinionGraph& g, NodeId ego, Perspective p) {
    const auto nb = g.neighbors(ego, p);
    if (nb.empty()) {
        throw MetricError("profile: node '" + g.name_of(ego) + "' has no neighbors under the " +
                          std::string(to_string(p)) + " perspective");
    }
    std::vector<double> opinions(nb.size());
    for (std::size_t j = 0; j < nb.size(); ++j) opinions[j] = g.opinion(nb[j]);
    return make_profile(ego, p, g.opinion(ego), std::move(opinions));
}

/// Profiles for a list of egos, computed in parallel into index-aligned slots.
inline std::vector<NeighborProfile> profiles_for(const OpinionGraph& g,
                                                 std::span<const NodeId> egos, Perspective p) {
    std::vector<NeighborProfile> out(egos.size());
    parallel_for(egos.size(), [&](std::size_t i) { out[i] = profile(g, egos[i], p); });
    return out;
}

/// One trial's population rates with their eligibility denominators.
struct RateReport {
    double r1 = 0.0;       // share of egos with mean_dev strictly below the trial's
    double r2 = 0.0;       // share of egos with max_dev strictly below the trial's
    double r3 = 0.0;       // empirical range-inclusion share (>=2 neighbors)
    double r3_null = 0.0;  // same inclusion share on the trial's own intervals
    std::int64_t n_r1r2 = 0;
    std::int64_t n_r3 = 0;
    std::uint64_t trial_seed = 0;
};

/// Empirical-vs-null rates over pairwise aligned profile lists. Ties count as
/// non-satisfaction (strict inequality in the indicators).
inline RateReport population_rates(std::span<const NeighborProfile> empirical,
                                   std::span<const NeighborProfile> null_trial,
                                   std::uint64_t trial_seed = 0) {
    if (empirical.size() != null_trial.size()) {
        throw MetricError("population_rates: empirical and null ego sets differ in size (" +
                          std::to_string(empirical.size()) + " vs " +
                          std::to_string(null_trial.size()) + ")");
    }
    RateReport report;
    report.trial_seed = trial_seed;
    std::int64_t sat1 = 0, sat2 = 0, sat3 = 0, sat3_null = 0;
    for (std::size_t i = 0; i < empirical.size(); ++i) {
        const auto& emp = empirical[i];
        const auto& nul = null_trial[i];
        if (emp.ego != nul.ego || emp.n != nul.n) {
            throw MetricError("population_rates: mismatched ego sets at position " +
                              std::to_string(i));
        }
        ++report.n_r1r2;
        if (emp.mean_dev < nul.mean_dev) ++sat1;
        if (emp.max_dev < nul.max_dev) ++sat2;
        if (emp.n >= 2) {
            ++report.n_r3;
            if (emp.inclusion) ++sat3;
            if (nul.inclusion) ++sat3_null;
        }
    }
    if (report.n_r1r2 == 0) throw MetricError("population_rates: no eligible egos");
    report.r1 = static_cast<double>(sat1) / static_cast<double>(report.n_r1r2);
    report.r2 = static_cast<double>(sat2) / static_cast<double>(report.n_r1r2);
    if (report.n_r3 > 0) {
        report.r3 = static_cast<double>(sat3) / static_cast<double>(report.n_r3);
        report.r3_null = static_cast<double>(sat3_null) / static_cast<double>(report.n_r3);
    }
    return report;
}

}  // namespace bchom
