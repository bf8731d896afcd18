#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bchom/common.hpp"
#include "bchom/graph.hpp"
#include "bchom/rng.hpp"

namespace bchom {

/// State of the synchronous bounded-confidence dynamics. The per-agent
/// thresholds here are the nonnegative confidence bounds of the update rule;
/// they are distinct from the signed per-ego offsets of the metrics module
/// even though both describe a lower/upper reach around an opinion.
struct BCState {
    std::vector<double> opinions;      // in [0,1]
    std::vector<double> lower_bounds;  // >= 0, reach below own opinion
    std::vector<double> upper_bounds;  // >= 0, reach above own opinion
    std::int64_t step = 0;

    std::size_t size() const { return opinions.size(); }

    void validate() const {
        if (opinions.size() != lower_bounds.size() || opinions.size() != upper_bounds.size()) {
            throw Error("BCState: vector sizes differ");
        }
        for (std::size_t i = 0; i < opinions.size(); ++i) {
            if (!(opinions[i] >= 0.0 && opinions[i] <= 1.0)) {
                throw Error("BCState: opinion " + std::to_string(opinions[i]) + " outside [0,1]");
            }
            if (lower_bounds[i] < 0.0 || upper_bounds[i] < 0.0) {
                throw Error("BCState: confidence bounds must be nonnegative");
            }
        }
    }
};

inline BCState uniform_state(std::size_t agents, double lower, double upper, std::uint64_t seed) {
    BCState s;
    s.opinions.resize(agents);
    Rng rng(mix64(seed + 0x6C62272E07BB0142ULL));
    for (auto& x : s.opinions) x = rng.next_double();
    s.lower_bounds.assign(agents, lower);
    s.upper_bounds.assign(agents, upper);
    s.validate();
    return s;
}

/// Two camps of equal size drawn uniformly from [lo1,hi1] and [lo2,hi2].
inline BCState bimodal_state(std::size_t agents, double lo1, double hi1, double lo2, double hi2,
                             double lower, double upper, std::uint64_t seed) {
    BCState s;
    s.opinions.resize(agents);
    Rng rng(mix64(seed + 0x27220A95FE7D42AAULL));
    for (std::size_t i = 0; i < agents; ++i) {
        const bool first = i < agents / 2;
        const double lo = first ? lo1 : lo2;
        const double hi = first ? hi1 : hi2;
        s.opinions[i] = lo + (hi - lo) * rng.next_double();
    }
    s.lower_bounds.assign(agents, lower);
    s.upper_bounds.assign(agents, upper);
    s.validate();
    return s;
}

namespace detail {

/// Interaction sets are windows in sorted-opinion order; rank/prefix-sum
/// tables make one synchronous update O(n log n).
struct SortedView {
    std::vector<std::size_t> order;    // agent ids sorted by opinion
    std::vector<double> sorted;        // opinions in ascending order
    std::vector<double> prefix;        // prefix[k] = sum of sorted[0..k)

    explicit SortedView(const std::vector<double>& opinions) {
        order.resize(opinions.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return opinions[a] < opinions[b]; });
        sorted.resize(opinions.size());
        for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = opinions[order[k]];
        prefix.resize(opinions.size() + 1, 0.0);
        for (std::size_t k = 0; k < sorted.size(); ++k) prefix[k + 1] = prefix[k] + sorted[k];
    }

    /// [first, last) index window of opinions within [lo, hi].
    std::pair<std::size_t, std::size_t> window(double lo, double hi) const {
        const auto first = std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
        const auto last = std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin();
        return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
    }
};

}  // namespace detail

/// One synchronous update: every agent moves to the average opinion of the
/// agents within [x_i - lower_i, x_i + upper_i]. The window always contains
/// the agent itself, so the divisor is never zero and opinions stay in [0,1].
inline BCState bc_step(const BCState& state) {
    state.validate();
    const detail::SortedView view(state.opinions);
    BCState next = state;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double x = state.opinions[i];
        const auto [first, last] = view.window(x - state.lower_bounds[i], x + state.upper_bounds[i]);
        const double window_lo = view.sorted[first];
        const double window_hi = view.sorted[last - 1];
        if (window_lo == window_hi) {  // constant window: the mean is exact
            next.opinions[i] = window_lo;
            continue;
        }
        const double count = static_cast<double>(last - first);
        const double mean = (view.prefix[last] - view.prefix[first]) / count;
        // the true mean is inside the window; clamping removes prefix noise
        next.opinions[i] = std::clamp(mean, window_lo, window_hi);
    }
    next.step = state.step + 1;
    return next;
}

struct SimulationResult {
    std::vector<std::vector<double>> trajectory;  // trajectory[0] = initial opinions
    bool converged = false;
    std::int64_t steps = 0;
    std::vector<std::vector<std::uint32_t>> clusters;  // agent ids per terminal cluster
};

namespace detail {

/// Terminal clusters: after sorting the final opinions, a gap of at least the
/// smallest confidence bound starts a new cluster. A zero bound separates
/// groups of exactly equal opinions.
inline std::vector<std::vector<std::uint32_t>> terminal_clusters(const BCState& state) {
    std::vector<std::vector<std::uint32_t>> clusters;
    if (state.size() == 0) return clusters;
    double threshold = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.size(); ++i) {
        threshold = std::min(threshold, std::min(state.lower_bounds[i], state.upper_bounds[i]));
    }
    const SortedView view(state.opinions);
    clusters.emplace_back();
    clusters.back().push_back(static_cast<std::uint32_t>(view.order[0]));
    for (std::size_t k = 1; k < view.order.size(); ++k) {
        const double gap = view.sorted[k] - view.sorted[k - 1];
        const bool same = threshold > 0.0 ? gap < threshold : gap == 0.0;
        if (!same) clusters.emplace_back();
        clusters.back().push_back(static_cast<std::uint32_t>(view.order[k]));
    }
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    return clusters;
}

}  // namespace detail

/// Iterates bc_step until the max-norm opinion change drops below tol or the
/// step cap is hit. Returns the full trajectory, convergence flag, and the
/// terminal cluster decomposition.
inline SimulationResult simulate(const BCState& initial, std::int64_t max_steps, double tol) {
    if (max_steps < 1) throw Error("simulate: max_steps must be at least 1");
    if (!(tol > 0.0)) throw Error("simulate: tol must be positive");
    initial.validate();
    SimulationResult result;
    result.trajectory.push_back(initial.opinions);
    BCState current = initial;
    for (std::int64_t s = 0; s < max_steps; ++s) {
        BCState next = bc_step(current);
        double delta = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            delta = std::max(delta, std::abs(next.opinions[i] - current.opinions[i]));
        }
        result.trajectory.push_back(next.opinions);
        current = std::move(next);
        ++result.steps;
        if (delta < tol) {
            result.converged = true;
            break;
        }
    }
    result.clusters = detail::terminal_clusters(current);
    return result;
}

/// Directed graph whose follower neighborhoods equal the bounded-confidence
/// interaction sets minus self: edge i -> j iff x_j lies within i's window.
/// Node names are the zero-padded agent indices.
inline OpinionGraph snapshot_graph(const BCState& state) {
    state.validate();
    const detail::SortedView view(state.opinions);
    std::vector<std::pair<std::string, std::string>> edges;
    std::map<std::string, double> opinions;
    const auto name = [&](std::size_t i) {
        std::string s = std::to_string(i);
        const std::size_t width = std::to_string(state.size() == 0 ? 1 : state.size() - 1).size();
        return std::string(width - std::min(width, s.size()), '0') + s;
    };
    for (std::size_t i = 0; i < state.size(); ++i) opinions[name(i)] = state.opinions[i];
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double x = state.opinions[i];
        const auto [first, last] = view.window(x - state.lower_bounds[i], x + state.upper_bounds[i]);
        for (std::size_t k = first; k < last; ++k) {
            const std::size_t j = view.order[k];
            if (j == i) continue;
            edges.emplace_back(name(i), name(j));
        }
    }
    return OpinionGraph::build(edges, opinions);
}

}  // namespace bchom
