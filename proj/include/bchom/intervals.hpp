#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bchom/common.hpp"
#include "bchom/graph.hpp"
#include "bchom/metrics.hpp"
#include "bchom/null_models.hpp"

namespace bchom {

/// Uniform partition of [0,1] into k ordered intervals. The first interval is
/// closed, [0, 1/k]; every later one is half-open, (lo, hi].
struct IntervalPartition {
    int k = 5;
};

/// 1-based interval index of an opinion value.
inline int assign_interval(double x, const IntervalPartition& partition) {
    if (partition.k < 2) throw MetricError("assign_interval: partition needs k >= 2");
    if (!(x >= 0.0 && x <= 1.0)) {
        throw MetricError("assign_interval: value " + std::to_string(x) + " outside [0,1]");
    }
    const double k = static_cast<double>(partition.k);
    for (int j = 1; j < partition.k; ++j) {
        if (x <= static_cast<double>(j) / k) return j;
    }
    return partition.k;
}

/// k x k matrix of interaction percentages; row = source interval,
/// column = destination interval. Cells sum to 100 for the empirical and
/// null forms and to 0 for residuals.
struct InteractionMatrix {
    int k = 0;
    std::vector<double> cells;  // row-major

    InteractionMatrix() = default;
    explicit InteractionMatrix(int k_) : k(k_), cells(static_cast<std::size_t>(k_) * k_, 0.0) {}

    double& at(int row, int col) { return cells[static_cast<std::size_t>(row - 1) * k + (col - 1)]; }
    double at(int row, int col) const {
        return cells[static_cast<std::size_t>(row - 1) * k + (col - 1)];
    }
};

/// Raw directed edge counts between interval pairs.
inline std::vector<std::int64_t> interaction_counts(const OpinionGraph& g,
                                                    const IntervalPartition& partition) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(partition.k) * partition.k, 0);
    for (const auto& [src, dst] : g.edges()) {
        const int a = assign_interval(g.opinion(src), partition);
        const int b = assign_interval(g.opinion(dst), partition);
        ++counts[static_cast<std::size_t>(a - 1) * partition.k + (b - 1)];
    }
    return counts;
}

inline InteractionMatrix interaction_matrix(const OpinionGraph& g,
                                            const IntervalPartition& partition) {
    if (g.edge_count() == 0) throw MetricError("interaction_matrix: graph has no edges");
    const auto counts = interaction_counts(g, partition);
    InteractionMatrix m(partition.k);
    const double total = static_cast<double>(g.edge_count());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        m.cells[i] = 100.0 * static_cast<double>(counts[i]) / total;
    }
    return m;
}

/// Interaction matrix induced by a null trial: each assigned neighbor opinion
/// becomes one synthetic edge between the ego's interval and the neighbor
/// opinion's interval, oriented by the perspective.
inline InteractionMatrix null_interaction_matrix(const OpinionGraph& g, Perspective p,
                                                 const NullTrial& trial,
                                                 const IntervalPartition& partition) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(partition.k) * partition.k, 0);
    std::int64_t total = 0;
    for (NodeId ego = 0; ego < trial.assignments.size(); ++ego) {
        const auto& slot = trial.assignments[ego];
        if (!slot.assigned()) continue;
        const int ego_bin = assign_interval(g.opinion(ego), partition);
        for (double o : slot.opinions) {
            const int nb_bin = assign_interval(o, partition);
            const int row = p == Perspective::Follower ? ego_bin : nb_bin;
            const int col = p == Perspective::Follower ? nb_bin : ego_bin;
            ++counts[static_cast<std::size_t>(row - 1) * partition.k + (col - 1)];
            ++total;
        }
    }
    if (total == 0) throw MetricError("null_interaction_matrix: trial carries no assignments");
    InteractionMatrix m(partition.k);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        m.cells[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return m;
}

/// Empirical matrix minus the entrywise mean of the trial matrices.
inline InteractionMatrix residual_matrix(const InteractionMatrix& empirical,
                                         std::span<const InteractionMatrix> null_trials) {
    if (null_trials.empty()) throw MetricError("residual_matrix: need at least one trial");
    for (const auto& t : null_trials) {
        if (t.k != empirical.k) throw MetricError("residual_matrix: dimension mismatch");
    }
    InteractionMatrix res(empirical.k);
    const double n = static_cast<double>(null_trials.size());
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        double null_mean = 0.0;
        for (const auto& t : null_trials) null_mean += t.cells[i];
        res.cells[i] = empirical.cells[i] - null_mean / n;
    }
    return res;
}

/// Rates for egos whose own opinion falls in one interval. Rates go absent
/// (not zero) below five eligible egos; the satisfied/eligible counts stay so
/// interval rows always aggregate back to the global report.
struct IntervalRateRow {
    std::optional<double> r1, r2, r3, r3_null;
    std::int64_t n1 = 0, n3 = 0;
    std::int64_t sat1 = 0, sat2 = 0, sat3 = 0, sat3_null = 0;
};

constexpr std::int64_t kMinEgosPerIntervalRate = 5;

/// Single-trial decomposition of population_rates by the ego's own interval.
/// `empirical` and `null_trial` must be pairwise aligned as in population_rates.
inline std::vector<IntervalRateRow> per_interval_rates_trial(
    std::span<const NeighborProfile> empirical, std::span<const NeighborProfile> null_trial,
    const IntervalPartition& partition) {
    if (empirical.size() != null_trial.size()) {
        throw MetricError("per_interval_rates: empirical and null ego sets differ in size");
    }
    std::vector<IntervalRateRow> rows(partition.k);
    for (std::size_t i = 0; i < empirical.size(); ++i) {
        const auto& emp = empirical[i];
        const auto& nul = null_trial[i];
        if (emp.ego != nul.ego || emp.n != nul.n) {
            throw MetricError("per_interval_rates: mismatched ego sets");
        }
        auto& row = rows[assign_interval(emp.ego_opinion, partition) - 1];
        ++row.n1;
        if (emp.mean_dev < nul.mean_dev) ++row.sat1;
        if (emp.max_dev < nul.max_dev) ++row.sat2;
        if (emp.n >= 2) {
            ++row.n3;
            if (emp.inclusion) ++row.sat3;
            if (nul.inclusion) ++row.sat3_null;
        }
    }
    for (auto& row : rows) {
        if (row.n1 >= kMinEgosPerIntervalRate) {
            row.r1 = static_cast<double>(row.sat1) / static_cast<double>(row.n1);
            row.r2 = static_cast<double>(row.sat2) / static_cast<double>(row.n1);
        }
        if (row.n3 >= kMinEgosPerIntervalRate) {
            row.r3 = static_cast<double>(row.sat3) / static_cast<double>(row.n3);
            row.r3_null = static_cast<double>(row.sat3_null) / static_cast<double>(row.n3);
        }
    }
    return rows;
}

/// Mean of per-trial interval rates plus accumulated indicator counts.
inline std::vector<IntervalRateRow> aggregate_interval_rates(
    std::span<const std::vector<IntervalRateRow>> per_trial, const IntervalPartition& partition) {
    if (per_trial.empty()) throw MetricError("aggregate_interval_rates: need at least one trial");
    std::vector<IntervalRateRow> acc(partition.k);
    for (int b = 0; b < partition.k; ++b) {
        auto& row = acc[b];
        double r1 = 0, r2 = 0, r3 = 0, r3n = 0;
        std::int64_t c12 = 0, c3 = 0;
        for (const auto& rows : per_trial) {
            row.n1 = std::max(row.n1, rows[b].n1);
            row.n3 = std::max(row.n3, rows[b].n3);
            row.sat1 += rows[b].sat1;
            row.sat2 += rows[b].sat2;
            row.sat3 += rows[b].sat3;
            row.sat3_null += rows[b].sat3_null;
            if (rows[b].r1) {
                r1 += *rows[b].r1;
                r2 += *rows[b].r2;
                ++c12;
            }
            if (rows[b].r3) {
                r3 += *rows[b].r3;
                r3n += *rows[b].r3_null;
                ++c3;
            }
        }
        if (c12 > 0) {
            row.r1 = r1 / static_cast<double>(c12);
            row.r2 = r2 / static_cast<double>(c12);
        }
        if (c3 > 0) {
            row.r3 = r3 / static_cast<double>(c3);
            row.r3_null = r3n / static_cast<double>(c3);
        }
    }
    return acc;
}

/// Aligned (empirical, null) per-trial pair.
struct TrialPair {
    std::span<const NeighborProfile> empirical;
    std::span<const NeighborProfile> null_trial;
};

inline std::vector<IntervalRateRow> per_interval_rates(std::span<const TrialPair> trials,
                                                       const IntervalPartition& partition) {
    std::vector<std::vector<IntervalRateRow>> per_trial;
    per_trial.reserve(trials.size());
    for (const auto& t : trials) {
        per_trial.push_back(per_interval_rates_trial(t.empirical, t.null_trial, partition));
    }
    return aggregate_interval_rates(per_trial, partition);
}

/// Per-interval multisets of negated left offsets, right offsets, and the
/// asymmetry index. Restricted to egos with at least two neighbors; absent
/// asymmetry values are skipped and counted.
struct IntervalOffsetRow {
    std::vector<double> neg_gamma;
    std::vector<double> delta;
    std::vector<double> asymmetry;
    std::int64_t asymmetry_absent = 0;

    std::optional<double> mean_neg_gamma() const {
        if (neg_gamma.empty()) return std::nullopt;
        return numeric::mean(neg_gamma);
    }
    std::optional<double> mean_delta() const {
        if (delta.empty()) return std::nullopt;
        return numeric::mean(delta);
    }
    std::optional<double> mean_asymmetry() const {
        if (asymmetry.empty()) return std::nullopt;
        return numeric::mean(asymmetry);
    }
};

inline std::vector<IntervalOffsetRow> per_interval_offsets(
    std::span<const NeighborProfile> profiles, const IntervalPartition& partition) {
    std::vector<IntervalOffsetRow> rows(partition.k);
    for (const auto& pr : profiles) {
        if (pr.n < 2) continue;
        auto& row = rows[assign_interval(pr.ego_opinion, partition) - 1];
        row.neg_gamma.push_back(-pr.gamma);
        row.delta.push_back(pr.delta);
        if (pr.asymmetry) {
            row.asymmetry.push_back(*pr.asymmetry);
        } else {
            ++row.asymmetry_absent;
        }
    }
    return rows;
}

}  // namespace bchom
