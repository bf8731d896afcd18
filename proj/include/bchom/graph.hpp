#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bchom/common.hpp"

namespace bchom {

/// Immutable directed graph with one opinion in [0,1] per node.
///
/// Node ids are opaque strings at the boundary and dense indices internally.
/// Edges are deduplicated ordered pairs with self-loops removed; both removal
/// counts are kept for data QA. All queries are read-only and safe for
/// unrestricted concurrent access.
class OpinionGraph {
public:
    static constexpr double kClampTolerance = 1e-12;

    /// Builds the graph from a raw edge list and a node -> opinion map.
    ///
    /// Opinions within 1e-12 outside [0,1] are clamped (ingestion noise);
    /// larger violations are rejected. Every edge endpoint must carry an
    /// opinion. Nodes with opinions but no edges are retained; they simply
    /// never appear in any eligibility set.
    static OpinionGraph build(std::span<const std::pair<std::string, std::string>> edge_list,
                              const std::map<std::string, double>& opinions) {
        OpinionGraph g;
        g.names_.reserve(opinions.size());
        g.opinions_.reserve(opinions.size());
        for (const auto& [name, value] : opinions) {  // std::map: names come out sorted
            double x = value;
            if (!std::isfinite(x)) {
                throw GraphError("opinion for node '" + name + "' is not a finite number");
            }
            if (x < 0.0) {
                if (x < -kClampTolerance) {
                    throw GraphError("opinion out of range for node '" + name + "': " +
                                     std::to_string(x) + " (expected [0,1])");
                }
                x = 0.0;
            } else if (x > 1.0) {
                if (x > 1.0 + kClampTolerance) {
                    throw GraphError("opinion out of range for node '" + name + "': " +
                                     std::to_string(x) + " (expected [0,1])");
                }
                x = 1.0;
            }
            g.names_.push_back(name);
            g.opinions_.push_back(x);
        }

        std::vector<std::string> missing;
        std::vector<std::pair<NodeId, NodeId>> edges;
        edges.reserve(edge_list.size());
        for (const auto& [src, dst] : edge_list) {
            const auto si = g.find_index(src);
            const auto di = g.find_index(dst);
            if (!si) missing.push_back(src);
            if (!di) missing.push_back(dst);
            if (!si || !di) continue;
            if (*si == *di) {
                ++g.dropped_self_loops_;
                continue;
            }
            edges.emplace_back(*si, *di);
        }
        if (!missing.empty()) {
            std::sort(missing.begin(), missing.end());
            missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
            std::string msg = "missing opinion for edge endpoint(s):";
            const std::size_t shown = std::min<std::size_t>(missing.size(), 10);
            for (std::size_t i = 0; i < shown; ++i) msg += " '" + missing[i] + "'";
            if (missing.size() > shown) {
                msg += " and " + std::to_string(missing.size() - shown) + " more";
            }
            throw GraphError(msg);
        }

        std::sort(edges.begin(), edges.end());
        const std::size_t before = edges.size();
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        g.collapsed_duplicates_ = before - edges.size();
        g.edges_ = std::move(edges);
        g.build_adjacency();
        return g;
    }

    std::size_t node_count() const { return names_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::string& name_of(NodeId i) const { return names_.at(i); }
    double opinion(NodeId i) const { return opinions_.at(i); }
    const std::vector<double>& opinions() const { return opinions_; }
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

    std::optional<NodeId> find_index(const std::string& name) const {
        const auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name) return std::nullopt;
        return static_cast<NodeId>(it - names_.begin());
    }

    NodeId require_index(const std::string& name) const {
        const auto idx = find_index(name);
        if (!idx) throw GraphError("unknown node '" + name + "'");
        return *idx;
    }

    std::span<const NodeId> out_neighbors(NodeId i) const {
        check_node(i);
        return {out_targets_.data() + out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]};
    }

    std::span<const NodeId> in_neighbors(NodeId i) const {
        check_node(i);
        return {in_targets_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
    }

    /// Neighbor set under a perspective: Follower -> out-neighbors,
    /// Leader -> in-neighbors. Never contains i itself.
    std::span<const NodeId> neighbors(NodeId i, Perspective p) const {
        return p == Perspective::Follower ? out_neighbors(i) : in_neighbors(i);
    }

    std::size_t degree(NodeId i, Perspective p) const { return neighbors(i, p).size(); }

    bool has_edge(NodeId src, NodeId dst) const {
        const auto nb = out_neighbors(src);
        return std::binary_search(nb.begin(), nb.end(), dst);
    }

    /// True when the node takes part in at least one interaction. Nodes that
    /// fail this are kept in the node set but excluded from population pools.
    bool interacting(NodeId i) const {
        return degree(i, Perspective::Follower) > 0 || degree(i, Perspective::Leader) > 0;
    }

    std::vector<NodeId> interacting_nodes() const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < node_count(); ++i) {
            if (interacting(i)) out.push_back(i);
        }
        return out;
    }

    /// Nodes with at least min_neighbors neighbors under p (min_neighbors in {1,2}).
    std::vector<NodeId> eligible_users(Perspective p, int min_neighbors) const {
        if (min_neighbors != 1 && min_neighbors != 2) {
            throw GraphError("eligible_users: min_neighbors must be 1 or 2, got " +
                             std::to_string(min_neighbors));
        }
        std::vector<NodeId> out;
        for (NodeId i = 0; i < node_count(); ++i) {
            if (degree(i, p) >= static_cast<std::size_t>(min_neighbors)) out.push_back(i);
        }
        return out;
    }

    std::size_t collapsed_duplicates() const { return collapsed_duplicates_; }
    std::size_t dropped_self_loops() const { return dropped_self_loops_; }

private:
    void check_node(NodeId i) const {
        if (i >= names_.size()) {
            throw GraphError("unknown node index " + std::to_string(i));
        }
    }

    void build_adjacency() {
        const std::size_t n = names_.size();
        out_offsets_.assign(n + 1, 0);
        in_offsets_.assign(n + 1, 0);
        for (const auto& [s, d] : edges_) {
            ++out_offsets_[s + 1];
            ++in_offsets_[d + 1];
        }
        for (std::size_t i = 0; i < n; ++i) {
            out_offsets_[i + 1] += out_offsets_[i];
            in_offsets_[i + 1] += in_offsets_[i];
        }
        out_targets_.resize(edges_.size());
        in_targets_.resize(edges_.size());
        std::vector<std::size_t> out_cursor(out_offsets_.begin(), out_offsets_.end() - 1);
        std::vector<std::size_t> in_cursor(in_offsets_.begin(), in_offsets_.end() - 1);
        for (const auto& [s, d] : edges_) {  // edges_ sorted: per-source targets ascending
            out_targets_[out_cursor[s]++] = d;
            in_targets_[in_cursor[d]++] = s;
        }
        for (std::size_t i = 0; i < n; ++i) {  // in-lists need an explicit sort
            std::sort(in_targets_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[i]),
                      in_targets_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[i + 1]));
        }
    }

    std::vector<std::string> names_;  // sorted; position = dense NodeId
    std::vector<double> opinions_;
    std::vector<std::pair<NodeId, NodeId>> edges_;  // sorted, unique, no self-loops
    std::vector<std::size_t> out_offsets_, in_offsets_;
    std::vector<NodeId> out_targets_, in_targets_;
    std::size_t collapsed_duplicates_ = 0;
    std::size_t dropped_self_loops_ = 0;
};

/// Affine map of raw opinion values from [source_lo, source_hi] onto [0,1].
/// Values within 1e-12 outside the source interval are snapped to its ends.
inline std::map<std::string, double> rescale_opinions(const std::map<std::string, double>& values,
                                                      double source_lo, double source_hi) {
    if (!(source_lo < source_hi)) {
        throw GraphError("rescale_opinions: source_lo must be strictly below source_hi");
    }
    const double width = source_hi - source_lo;
    std::map<std::string, double> out;
    for (const auto& [name, raw] : values) {
        double v = raw;
        if (!std::isfinite(v)) {
            throw GraphError("rescale_opinions: value for node '" + name + "' is not finite");
        }
        if (v < source_lo) {
            if (v < source_lo - OpinionGraph::kClampTolerance) {
                throw GraphError("rescale_opinions: value " + std::to_string(v) + " for node '" +
                                 name + "' lies outside [" + std::to_string(source_lo) + "," +
                                 std::to_string(source_hi) + "]");
            }
            v = source_lo;
        } else if (v > source_hi) {
            if (v > source_hi + OpinionGraph::kClampTolerance) {
                throw GraphError("rescale_opinions: value " + std::to_string(v) + " for node '" +
                                 name + "' lies outside [" + std::to_string(source_lo) + "," +
                                 std::to_string(source_hi) + "]");
            }
            v = source_hi;
        }
        out[name] = (v - source_lo) / width;
    }
    return out;
}

}  // namespace bchom
