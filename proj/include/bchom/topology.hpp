#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "bchom/common.hpp"
#include "bchom/graph.hpp"
#include "bchom/intervals.hpp"

namespace bchom {

namespace detail {

/// Symmetrized adjacency with multiplicities: weight 2 for mutual pairs,
/// 1 for one-way edges. Neighbor lists are sorted by node id.
struct SymmetrizedGraph {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> targets;
    std::vector<std::uint8_t> weights;  // 1 or 2

    explicit SymmetrizedGraph(const OpinionGraph& g) {
        const std::size_t n = g.node_count();
        std::vector<std::vector<std::pair<NodeId, std::uint8_t>>> adj(n);
        for (NodeId i = 0; i < n; ++i) {
            const auto out = g.out_neighbors(i);
            const auto in = g.in_neighbors(i);
            auto& row = adj[i];
            std::size_t a = 0, b = 0;
            while (a < out.size() || b < in.size()) {
                if (b == in.size() || (a < out.size() && out[a] < in[b])) {
                    row.emplace_back(out[a++], 1);
                } else if (a == out.size() || in[b] < out[a]) {
                    row.emplace_back(in[b++], 1);
                } else {  // mutual
                    row.emplace_back(out[a], 2);
                    ++a;
                    ++b;
                }
            }
        }
        offsets.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + adj[i].size();
        targets.reserve(offsets[n]);
        weights.reserve(offsets[n]);
        for (const auto& row : adj) {
            for (const auto& [t, w] : row) {
                targets.push_back(t);
                weights.push_back(w);
            }
        }
    }

    std::size_t size() const { return offsets.size() - 1; }

    std::span<const NodeId> neighbors(NodeId i) const {
        return {targets.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }

    std::uint8_t weight(NodeId i, NodeId j) const {
        const auto nb = neighbors(i);
        const auto it = std::lower_bound(nb.begin(), nb.end(), j);
        if (it == nb.end() || *it != j) return 0;
        return weights[offsets[i] + static_cast<std::size_t>(it - nb.begin())];
    }

    /// y = (A + I) x with multiplicity weights.
    void shifted_matvec(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < size(); ++i) {
            double acc = x[i];
            for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
                acc += static_cast<double>(weights[e]) * x[targets[e]];
            }
            y[i] = acc;
        }
    }
};

}  // namespace detail

/// Mean in/out-degree over the nodes whose opinion falls in each interval;
/// absent for empty intervals.
inline std::vector<std::optional<std::pair<double, double>>> degree_by_interval(
    const OpinionGraph& g, const IntervalPartition& partition) {
    if (g.node_count() == 0) throw GraphError("degree_by_interval: empty graph");
    std::vector<std::int64_t> node_count(partition.k, 0);
    std::vector<std::int64_t> in_sum(partition.k, 0), out_sum(partition.k, 0);
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const int b = assign_interval(g.opinion(i), partition) - 1;
        ++node_count[b];
        in_sum[b] += static_cast<std::int64_t>(g.in_neighbors(i).size());
        out_sum[b] += static_cast<std::int64_t>(g.out_neighbors(i).size());
    }
    std::vector<std::optional<std::pair<double, double>>> out(partition.k);
    for (int b = 0; b < partition.k; ++b) {
        if (node_count[b] == 0) continue;
        out[b] = std::make_pair(static_cast<double>(in_sum[b]) / static_cast<double>(node_count[b]),
                                static_cast<double>(out_sum[b]) / static_cast<double>(node_count[b]));
    }
    return out;
}

/// Directed local clustering: all-triangle count through i over
/// d_tot(d_tot - 1) - 2 d_mutual, zero when the denominator vanishes.
/// The triangle census is (1/2) [(A + A^T)^3]_ii.
inline double local_clustering(const OpinionGraph& g, NodeId i,
                               const detail::SymmetrizedGraph& sym) {
    const double d_tot =
        static_cast<double>(g.in_neighbors(i).size() + g.out_neighbors(i).size());
    std::int64_t d_mutual = 0;
    for (NodeId j : g.out_neighbors(i)) {
        if (g.has_edge(j, i)) ++d_mutual;
    }
    const double denom = d_tot * (d_tot - 1.0) - 2.0 * static_cast<double>(d_mutual);
    if (denom <= 0.0) return 0.0;

    // paths = [(A + A^T)^3]_ii, accumulated by merging sorted neighbor lists
    double paths = 0.0;
    const auto nbi = sym.neighbors(i);
    const std::size_t base_i = sym.offsets[i];
    for (std::size_t a = 0; a < nbi.size(); ++a) {
        const NodeId j = nbi[a];
        const double wij = static_cast<double>(sym.weights[base_i + a]);
        const auto nbj = sym.neighbors(j);
        const std::size_t base_j = sym.offsets[j];
        std::size_t p = 0, q = 0;
        double inner = 0.0;  // sum over h in nbi cap nbj of w(j,h) w(h,i)
        while (p < nbi.size() && q < nbj.size()) {
            if (nbi[p] < nbj[q]) {
                ++p;
            } else if (nbj[q] < nbi[p]) {
                ++q;
            } else {
                inner += static_cast<double>(sym.weights[base_j + q]) *
                         static_cast<double>(sym.weights[base_i + p]);
                ++p;
                ++q;
            }
        }
        paths += wij * inner;
    }
    return (paths / 2.0) / denom;
}

inline double local_clustering(const OpinionGraph& g, NodeId i) {
    const detail::SymmetrizedGraph sym(g);
    return local_clustering(g, i, sym);
}

inline std::vector<double> local_clustering_all(const OpinionGraph& g) {
    const detail::SymmetrizedGraph sym(g);
    std::vector<double> out(g.node_count());
    parallel_for(g.node_count(), [&](std::size_t i) {
        out[i] = local_clustering(g, static_cast<NodeId>(i), sym);
    });
    return out;
}

namespace detail {

struct PowerIterationResult {
    std::vector<double> vector;  // max-normalized, nonnegative
    double lambda = 0.0;         // dominant eigenvalue of A (not A + I)
    int iterations = 0;
};

/// Power iteration on A + I (the shift breaks the +/-lambda symmetry of
/// bipartite components), restricted to the nodes flagged in `active`.
inline PowerIterationResult power_iteration(const SymmetrizedGraph& sym,
                                            std::span<const char> active, double tol,
                                            int max_iterations) {
    const std::size_t n = sym.size();
    std::vector<double> x(n, 0.0), next(n, 0.0);
    std::size_t active_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
            x[i] = 1.0;
            ++active_count;
        }
    }
    if (active_count == 0) throw ConvergenceError("power iteration: empty node set");
    PowerIterationResult res;
    double shifted_lambda = 1.0;
    for (int it = 1; it <= max_iterations; ++it) {
        sym.shifted_matvec(x, next);
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) {
                next[i] = 0.0;
                continue;
            }
            norm = std::max(norm, std::abs(next[i]));
        }
        if (norm == 0.0) throw ConvergenceError("power iteration: vector collapsed to zero");
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= norm;
            delta = std::max(delta, std::abs(next[i] - x[i]));
        }
        x.swap(next);
        shifted_lambda = norm;
        res.iterations = it;
        if (delta < tol) {
            res.vector = x;
            res.lambda = shifted_lambda - 1.0;
            return res;
        }
    }
    throw ConvergenceError("power iteration failed to converge within " +
                           std::to_string(max_iterations) + " iterations");
}

/// Loose spectral-radius estimate for attenuation defaults. Never throws on
/// the iteration cap; a few percent of accuracy is enough because the Katz
/// default keeps a 10% safety margin below 1/lambda_max.
inline double estimate_lambda_max(const SymmetrizedGraph& sym) {
    const std::size_t n = sym.size();
    std::vector<double> x(n, 1.0), next(n, 0.0);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        sym.shifted_matvec(x, next);
        double norm = 0.0;
        for (double v : next) norm = std::max(norm, std::abs(v));
        if (norm == 0.0) return 0.0;
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= norm;
            delta = std::max(delta, std::abs(next[i] - x[i]));
        }
        x.swap(next);
        lambda = norm - 1.0;
        if (delta < 1e-9) break;
    }
    return lambda;
}

}  // namespace detail

struct KatzResult {
    std::vector<double> values;
    double attenuation = 0.0;
    double lambda_max = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Katz centrality x = alpha A x + 1 on the symmetrized graph, solved by
/// damped iteration to a 1e-10 max-norm residual. Default attenuation is
/// 0.9 / lambda_max with lambda_max estimated by power iteration.
inline KatzResult katz_centrality(const OpinionGraph& g,
                                  std::optional<double> attenuation = std::nullopt) {
    const detail::SymmetrizedGraph sym(g);
    const std::size_t n = g.node_count();
    KatzResult res;
    if (n == 0) return res;

    const bool has_edges = g.edge_count() > 0;
    if (has_edges) res.lambda_max = detail::estimate_lambda_max(sym);
    res.attenuation = attenuation.value_or(res.lambda_max > 0.0 ? 0.9 / res.lambda_max : 0.0);
    if (has_edges && res.lambda_max > 0.0 && res.attenuation >= 1.0 / res.lambda_max) {
        throw ConvergenceError("katz_centrality: attenuation must stay below 1/lambda_max");
    }

    std::vector<double> x(n, 1.0), next(n, 0.0);
    const int max_iterations = 100000;
    for (int it = 1; it <= max_iterations; ++it) {
        // next = alpha * A x + 1  (shifted_matvec gives A x + x)
        sym.shifted_matvec(x, next);
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = res.attenuation * (next[i] - x[i]) + 1.0;
            delta = std::max(delta, std::abs(next[i] - x[i]));
        }
        x.swap(next);
        res.iterations = it;
        if (delta < 1e-10) {
            res.values = x;
            sym.shifted_matvec(x, next);
            double residual = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                residual = std::max(residual,
                                    std::abs(res.attenuation * (next[i] - x[i]) + 1.0 - x[i]));
            }
            res.residual = residual;
            return res;
        }
    }
    throw ConvergenceError("katz_centrality failed to converge; last max-norm step " +
                           std::to_string(res.residual));
}

/// Connected-component labels of the symmetrized graph via union-find.
inline std::vector<NodeId> component_labels(const OpinionGraph& g) {
    std::vector<NodeId> parent(g.node_count());
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](NodeId v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    for (const auto& [s, d] : g.edges()) {
        const NodeId rs = find(s), rd = find(d);
        if (rs != rd) parent[std::max(rs, rd)] = std::min(rs, rd);
    }
    for (NodeId v = 0; v < parent.size(); ++v) parent[v] = find(v);
    return parent;
}

/// Component sizes, largest first; isolated nodes are singletons.
inline std::vector<std::int64_t> weakly_connected_components(const OpinionGraph& g) {
    const auto labels = component_labels(g);
    std::vector<std::int64_t> size_of(g.node_count(), 0);
    for (NodeId v = 0; v < labels.size(); ++v) ++size_of[labels[v]];
    std::vector<std::int64_t> sizes;
    for (std::int64_t s : size_of) {
        if (s > 0) sizes.push_back(s);
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

struct EigenvectorResult {
    std::vector<double> values;  // max-normalized on the largest component, 0 elsewhere
    double lambda = 0.0;
    int iterations = 0;
    std::int64_t component_size = 0;
};

/// Eigenvector centrality of the symmetrized graph, computed on the largest
/// connected component (other nodes score 0) and normalized to max 1.
inline EigenvectorResult eigenvector_centrality(const OpinionGraph& g) {
    EigenvectorResult res;
    const std::size_t n = g.node_count();
    if (n == 0) return res;
    const auto labels = component_labels(g);
    std::vector<std::int64_t> size_of(n, 0);
    for (NodeId v = 0; v < n; ++v) ++size_of[labels[v]];
    NodeId best_root = 0;
    for (NodeId v = 1; v < n; ++v) {
        if (size_of[v] > size_of[best_root]) best_root = v;
    }
    res.component_size = size_of[best_root];

    std::vector<char> active(n, 0);
    for (NodeId v = 0; v < n; ++v) active[v] = labels[v] == best_root ? 1 : 0;
    const detail::SymmetrizedGraph sym(g);
    const auto pi =
        detail::power_iteration(sym, std::span<const char>(active.data(), n), 1e-10, 200000);
    res.values = pi.vector;
    res.lambda = pi.lambda;
    res.iterations = pi.iterations;
    return res;
}

/// Fraction of directed edges whose reverse edge also exists.
inline double reciprocity(const OpinionGraph& g) {
    if (g.edge_count() == 0) throw GraphError("reciprocity: graph has no edges");
    std::int64_t mutual = 0;
    for (const auto& [s, d] : g.edges()) {
        if (g.has_edge(d, s)) ++mutual;
    }
    return static_cast<double>(mutual) / static_cast<double>(g.edge_count());
}

struct TopologyReport {
    std::vector<std::optional<std::pair<double, double>>> degree_by_interval_rows;
    std::vector<double> clustering;
    KatzResult katz;
    EigenvectorResult eigenvector;
    double reciprocity = 0.0;
    std::vector<std::int64_t> wcc_sizes;
};

inline TopologyReport build_topology_report(const OpinionGraph& g,
                                            const IntervalPartition& partition) {
    TopologyReport rep;
    rep.degree_by_interval_rows = degree_by_interval(g, partition);
    rep.clustering = local_clustering_all(g);
    rep.katz = katz_centrality(g);
    rep.eigenvector = eigenvector_centrality(g);
    rep.reciprocity = g.edge_count() > 0 ? reciprocity(g) : 0.0;
    rep.wcc_sizes = weakly_connected_components(g);
    return rep;
}

}  // namespace bchom
