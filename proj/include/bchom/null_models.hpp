#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bchom/common.hpp"
#include "bchom/graph.hpp"
#include "bchom/metrics.hpp"
#include "bchom/parallel.hpp"
#include "bchom/rng.hpp"

namespace bchom {

enum class NullModel { Randomized, RangeBased };

inline const char* to_string(NullModel m) {
    return m == NullModel::Randomized ? "randomized" : "range_based";
}

inline NullModel parse_null_model(const std::string& s) {
    if (s == "randomized") return NullModel::Randomized;
    if (s == "range_based") return NullModel::RangeBased;
    throw ConfigError("unknown null model '" + s + "'");
}

/// Population opinion list held sorted for window queries. One entry per
/// interacting node; a repeated opinion value is proportionally more likely
/// as a sampling target, matching list-with-multiplicity semantics.
class OpinionPool {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    static OpinionPool from_graph(const OpinionGraph& g) {
        OpinionPool pool;
        pool.pos_of_.assign(g.node_count(), npos);
        std::vector<std::pair<double, NodeId>> entries;
        for (NodeId i = 0; i < g.node_count(); ++i) {
            if (g.interacting(i)) entries.emplace_back(g.opinion(i), i);
        }
        std::sort(entries.begin(), entries.end());
        pool.sorted_.reserve(entries.size());
        pool.node_at_.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            pool.sorted_.push_back(entries[k].first);
            pool.node_at_.push_back(entries[k].second);
            pool.pos_of_[entries[k].second] = k;
        }
        return pool;
    }

    /// Pool over raw values; entry k belongs to node k.
    static OpinionPool from_values(std::span<const double> values) {
        OpinionPool pool;
        pool.pos_of_.assign(values.size(), npos);
        std::vector<std::pair<double, NodeId>> entries;
        entries.reserve(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) {
            entries.emplace_back(values[k], static_cast<NodeId>(k));
        }
        std::sort(entries.begin(), entries.end());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            pool.sorted_.push_back(entries[k].first);
            pool.node_at_.push_back(entries[k].second);
            pool.pos_of_[entries[k].second] = k;
        }
        return pool;
    }

    std::size_t size() const { return sorted_.size(); }
    double value_at(std::size_t sorted_index) const { return sorted_[sorted_index]; }
    std::span<const double> sorted_values() const { return sorted_; }

    std::size_t sorted_pos_of(NodeId node) const {
        return node < pos_of_.size() ? pos_of_[node] : npos;
    }

    std::size_t lower_bound(double x) const {
        return static_cast<std::size_t>(
            std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
    }

    std::size_t upper_bound(double x) const {
        return static_cast<std::size_t>(
            std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
    }

private:
    std::vector<double> sorted_;
    std::vector<NodeId> node_at_;
    std::vector<std::size_t> pos_of_;
};

namespace detail {

/// Floyd's algorithm: count distinct integers uniform over [0, universe).
inline std::vector<std::uint64_t> sample_distinct(Rng& rng, std::uint64_t universe,
                                                  std::uint64_t count) {
    if (count > universe) {
        throw NullModelError("cannot sample " + std::to_string(count) +
                             " distinct items from a universe of " + std::to_string(universe));
    }
    std::vector<std::uint64_t> picked;
    picked.reserve(count);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(count * 2);
    for (std::uint64_t j = universe - count; j < universe; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        if (seen.insert(t).second) {
            picked.push_back(t);
        } else {
            seen.insert(j);
            picked.push_back(j);
        }
    }
    return picked;
}

}  // namespace detail

/// Uniform draw of n opinions without replacement from the pool, the ego's
/// own entry excluded.
inline std::vector<double> randomized_neighbors(const OpinionPool& pool, NodeId ego,
                                                std::size_t n, Rng& rng) {
    if (n == 0) throw NullModelError("randomized_neighbors: n must be at least 1");
    const std::size_t ego_pos = pool.sorted_pos_of(ego);
    const std::size_t available = pool.size() - (ego_pos != OpinionPool::npos ? 1 : 0);
    if (n > available) {
        throw NullModelError("randomized_neighbors: requested " + std::to_string(n) +
                             " draws but only " + std::to_string(available) +
                             " pool entries are available once the ego is excluded");
    }
    const auto picks = detail::sample_distinct(rng, available, n);
    std::vector<double> out;
    out.reserve(n);
    for (std::uint64_t raw : picks) {
        std::size_t idx = static_cast<std::size_t>(raw);
        if (ego_pos != OpinionPool::npos && idx >= ego_pos) ++idx;
        out.push_back(pool.value_at(idx));
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct RangeSample {
    std::vector<double> opinions;                      // sorted ascending
    std::optional<std::pair<double, double>> interval; // generating [a,b]; absent for n = 1
};

/// Range-preserving randomization for one ego: repeatedly draws a center
/// from the opinion list, builds a width-c window clamped into [0,1] by
/// shifting, and accepts once the window holds at least n pool opinions
/// (ego excluded). The accepted neighborhood always contains the candidate
/// set's minimum and maximum; the remaining n-2 values are drawn uniformly
/// without replacement from the interior of the sorted candidates.
///
/// Returns nullopt when no feasible center is found within retry_cap draws.
inline std::optional<RangeSample> range_based_neighbors(const OpinionPool& pool, NodeId ego,
                                                        std::size_t n, double c, Rng& rng,
                                                        std::size_t retry_cap = 10000) {
    if (n == 0) throw NullModelError("range_based_neighbors: n must be at least 1");
    if (!(c >= 0.0 && c <= 1.0)) {
        throw NullModelError("range_based_neighbors: confidence range must lie in [0,1]");
    }
    if (n == 1) {
        RangeSample sample;
        sample.opinions = randomized_neighbors(pool, ego, 1, rng);
        return sample;
    }
    const std::size_t ego_pos = pool.sorted_pos_of(ego);
    if (pool.size() < 2) {
        throw NullModelError("range_based_neighbors: pool too small");
    }
    for (std::size_t attempt = 0; attempt < retry_cap; ++attempt) {
        const double center = pool.value_at(static_cast<std::size_t>(rng.below(pool.size())));
        double a = center - c / 2.0;
        double b = center + c / 2.0;
        if (a < 0.0) {  // shift up against the lower boundary
            a = 0.0;
            b = c;
        } else if (b > 1.0) {  // shift down against the upper boundary
            a = 1.0 - c;
            b = 1.0;
        }

        const std::size_t lo = pool.lower_bound(a);
        const std::size_t hi = pool.upper_bound(b);
        const bool ego_in = ego_pos != OpinionPool::npos && ego_pos >= lo && ego_pos < hi;
        const std::size_t candidates = (hi - lo) - (ego_in ? 1 : 0);
        if (candidates < n) continue;

        // rank -> sorted index, skipping the ego's own entry
        const auto index_of_rank = [&](std::size_t rank) {
            std::size_t idx = lo + rank;
            if (ego_in && idx >= ego_pos) ++idx;
            return idx;
        };

        RangeSample sample;
        sample.interval = std::make_pair(a, b);
        sample.opinions.reserve(n);
        sample.opinions.push_back(pool.value_at(index_of_rank(0)));
        sample.opinions.push_back(pool.value_at(index_of_rank(candidates - 1)));
        if (n > 2) {
            const auto interior = detail::sample_distinct(rng, candidates - 2, n - 2);
            for (std::uint64_t r : interior) {
                sample.opinions.push_back(pool.value_at(index_of_rank(1 + static_cast<std::size_t>(r))));
            }
        }
        std::sort(sample.opinions.begin(), sample.opinions.end());
        return sample;
    }
    return std::nullopt;
}

/// One ego's synthetic neighborhood inside a trial.
struct EgoAssignment {
    std::vector<double> opinions;  // empty = ego not assigned in this trial
    std::optional<std::pair<double, double>> interval;

    bool assigned() const { return !opinions.empty(); }
};

/// One seeded randomization of every eligible ego's neighbor opinions.
struct NullTrial {
    std::uint64_t seed = 0;
    NullModel model = NullModel::Randomized;
    std::vector<EgoAssignment> assignments;  // indexed by node id
    std::vector<NodeId> skipped;             // egos whose generation hit the retry cap
};

/// Runs `trials` independent randomizations. Trial t draws every sample from
/// substreams derived from (master_seed, t, ego), so outputs are a pure
/// function of the inputs regardless of execution order or thread count.
inline std::vector<NullTrial> run_trials(const OpinionGraph& g, Perspective p, NullModel model,
                                         std::size_t trials, std::uint64_t master_seed,
                                         std::size_t retry_cap = 10000) {
    if (trials == 0) throw NullModelError("run_trials: need at least one trial");
    const OpinionPool pool = OpinionPool::from_graph(g);
    const std::vector<NodeId> egos = g.eligible_users(p, 1);

    std::vector<double> ranges(g.node_count(), 0.0);
    if (model == NullModel::RangeBased) {
        for (NodeId ego : egos) {
            const auto nb = g.neighbors(ego, p);
            double lo = 1.0, hi = 0.0;
            for (NodeId j : nb) {
                lo = std::min(lo, g.opinion(j));
                hi = std::max(hi, g.opinion(j));
            }
            ranges[ego] = hi - lo;
        }
    }

    std::vector<NullTrial> out(trials);
    parallel_for(trials, [&](std::size_t t) {
        NullTrial& trial = out[t];
        trial.seed = derive_seed(master_seed, t);
        trial.model = model;
        trial.assignments.resize(g.node_count());
        for (NodeId ego : egos) {
            Rng rng(derive_seed(master_seed, t, ego));
            const std::size_t n = g.degree(ego, p);
            if (model == NullModel::Randomized) {
                trial.assignments[ego].opinions = randomized_neighbors(pool, ego, n, rng);
            } else {
                auto sample = range_based_neighbors(pool, ego, n, ranges[ego], rng, retry_cap);
                if (!sample) {
                    trial.skipped.push_back(ego);
                    continue;
                }
                trial.assignments[ego].opinions = std::move(sample->opinions);
                trial.assignments[ego].interval = sample->interval;
            }
        }
    });
    return out;
}

/// Null-side profiles for the egos assigned in a trial, aligned with the
/// given ego order. Skipped egos are simply not emitted; the matching
/// empirical profile subset comes from aligned_ego_mask.
inline std::vector<NeighborProfile> null_profiles(const OpinionGraph& g, Perspective p,
                                                  const NullTrial& trial,
                                                  std::span<const NodeId> egos) {
    std::vector<NeighborProfile> out;
    out.reserve(egos.size());
    for (NodeId ego : egos) {
        const auto& slot = trial.assignments[ego];
        if (!slot.assigned()) continue;
        out.push_back(make_profile(ego, p, g.opinion(ego), slot.opinions));
    }
    return out;
}

inline nlohmann::json trial_to_json(const NullTrial& trial, const OpinionGraph& g) {
    nlohmann::json assignments = nlohmann::json::object();
    nlohmann::json intervals = nlohmann::json::object();
    for (NodeId i = 0; i < trial.assignments.size(); ++i) {
        const auto& slot = trial.assignments[i];
        if (!slot.assigned()) continue;
        assignments[g.name_of(i)] = slot.opinions;
        if (slot.interval) {
            intervals[g.name_of(i)] = {slot.interval->first, slot.interval->second};
        }
    }
    nlohmann::json skipped = nlohmann::json::array();
    for (NodeId i : trial.skipped) skipped.push_back(g.name_of(i));
    return nlohmann::json{{"seed", trial.seed},
                          {"model", to_string(trial.model)},
                          {"assignments", std::move(assignments)},
                          {"intervals", std::move(intervals)},
                          {"skipped", std::move(skipped)}};
}

inline NullTrial trial_from_json(const nlohmann::json& j, const OpinionGraph& g) {
    NullTrial trial;
    trial.seed = j.at("seed").get<std::uint64_t>();
    trial.model = parse_null_model(j.at("model").get<std::string>());
    trial.assignments.resize(g.node_count());
    for (const auto& [name, values] : j.at("assignments").items()) {
        trial.assignments[g.require_index(name)].opinions = values.get<std::vector<double>>();
    }
    if (j.contains("intervals")) {
        for (const auto& [name, bounds] : j.at("intervals").items()) {
            trial.assignments[g.require_index(name)].interval =
                std::make_pair(bounds.at(0).get<double>(), bounds.at(1).get<double>());
        }
    }
    for (const auto& name : j.at("skipped")) {
        trial.skipped.push_back(g.require_index(name.get<std::string>()));
    }
    std::sort(trial.skipped.begin(), trial.skipped.end());
    return trial;
}

}  // namespace bchom
