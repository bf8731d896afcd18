#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bchom/common.hpp"
#include "bchom/csv.hpp"
#include "bchom/graph.hpp"
#include "bchom/intervals.hpp"
#include "bchom/metrics.hpp"
#include "bchom/null_models.hpp"
#include "bchom/parallel.hpp"
#include "bchom/rng.hpp"
#include "bchom/stats.hpp"
#include "bchom/topology.hpp"

namespace bchom {

inline constexpr const char* kToolVersion = "bchom 0.1.0";

/// Fixed-edge histogram; values outside [lo,hi] land in the overflow
/// counters so bin edges stay comparable across runs.
struct FixedHistogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::int64_t> counts;
    std::int64_t underflow = 0;
    std::int64_t overflow = 0;

    FixedHistogram() = default;
    FixedHistogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_), counts(bins, 0) {}

    void add(double x) {
        if (x < lo) {
            ++underflow;
            return;
        }
        if (x > hi) {
            ++overflow;
            return;
        }
        const double width = (hi - lo) / static_cast<double>(counts.size());
        auto k = static_cast<std::size_t>((x - lo) / width);
        if (k >= counts.size()) k = counts.size() - 1;
        ++counts[k];
    }
};

/// Empirical histogram plus, when a null comparison exists, the mean per-trial
/// null bin counts on identical edges.
struct ComparedHistogram {
    FixedHistogram empirical;
    std::vector<double> null_mean;  // empty when no null side exists
};

enum class NullModelChoice { Randomized, RangeBased, Both };

inline const char* to_string(NullModelChoice c) {
    switch (c) {
        case NullModelChoice::Randomized: return "randomized";
        case NullModelChoice::RangeBased: return "range_based";
        default: return "both";
    }
}

inline NullModelChoice parse_null_model_choice(const std::string& s) {
    if (s == "randomized") return NullModelChoice::Randomized;
    if (s == "range_based") return NullModelChoice::RangeBased;
    if (s == "both") return NullModelChoice::Both;
    throw ConfigError("unknown null model '" + s + "' (expected randomized|range_based|both)");
}

struct AnalysisConfig {
    Perspective perspective = Perspective::Follower;
    int trials = 20;
    std::uint64_t master_seed = 0;
    int partition_k = 5;
    double decay_bin_width = 0.1;
    NullModelChoice null_model = NullModelChoice::Both;
    int min_neighbors_r3 = 2;  // fixed by the rate definitions
    std::size_t retry_cap = 10000;
    int histogram_bins = 50;

    void validate() const {
        if (trials < 1) throw ConfigError("config: trials must be at least 1");
        if (partition_k < 2) throw ConfigError("config: partition_k must be at least 2");
        if (!(decay_bin_width > 0.0 && decay_bin_width <= 1.0)) {
            throw ConfigError("config: decay_bin_width must lie in (0,1]");
        }
        if (min_neighbors_r3 != 2) throw ConfigError("config: min_neighbors_r3 is fixed at 2");
        if (histogram_bins < 1) throw ConfigError("config: histogram_bins must be positive");
    }

    std::vector<NullModel> models() const {
        switch (null_model) {
            case NullModelChoice::Randomized: return {NullModel::Randomized};
            case NullModelChoice::RangeBased: return {NullModel::RangeBased};
            default: return {NullModel::Randomized, NullModel::RangeBased};
        }
    }
};

struct RatesSummary {
    std::vector<RateReport> per_trial;
    std::vector<std::int64_t> skipped_per_trial;
    std::vector<std::string> skipped_nodes;  // union over trials, sorted
    double r1_mean = 0.0, r1_min = 0.0, r1_max = 0.0;
    double r2_mean = 0.0, r2_min = 0.0, r2_max = 0.0;
    double r3_empirical = 0.0;  // over all egos with >= 2 neighbors
    double r3_null_mean = 0.0, r3_null_min = 0.0, r3_null_max = 0.0;
};

struct ComparisonTests {
    std::optional<TestResult> range;     // c_i, egos with >= 2 neighbors
    std::optional<TestResult> mean_dev;  // egos with >= 1 neighbor
    std::optional<TestResult> max_dev;
};

struct ModelSection {
    NullModel model = NullModel::Randomized;
    RatesSummary rates;
    ComparisonTests tests;  // a = pooled null values, b = empirical values
    std::vector<double> null_matrix_mean;  // row-major percentages
    std::vector<double> residual;          // empirical - null mean
    std::vector<IntervalRateRow> interval_rates;
};

struct OffsetSummaryRow {
    std::optional<double> mean_neg_gamma;
    std::optional<double> mean_delta;
    std::optional<double> mean_asymmetry;
    std::int64_t n_egos = 0;
    std::int64_t asymmetry_absent = 0;
};

struct DecaySummary {
    std::int64_t evaluated = 0;
    std::int64_t dd = 0, ndd = 0, undefined = 0;
    std::int64_t negative_r = 0;
    std::int64_t r_absent = 0;
    std::optional<double> mean_r;
};

struct RangeSpreadSummary {
    std::int64_t n = 0;
    std::optional<double> median_c;
    std::optional<double> iqr_c;
};

struct TopologySummarySection {
    double reciprocity = 0.0;
    std::vector<std::int64_t> wcc_sizes;
    std::vector<std::optional<std::pair<double, double>>> degree_by_interval_rows;
    double katz_attenuation = 0.0;
    double katz_lambda_max = 0.0;
    int katz_iterations = 0;
    double katz_residual = 0.0;
    double eigen_lambda = 0.0;
    int eigen_iterations = 0;
    std::int64_t eigen_component_size = 0;
};

struct AnalysisReport {
    AnalysisConfig config;
    std::string tool_version = kToolVersion;
    std::string edges_digest;    // filled when loaded from files
    std::string opinions_digest;
    IngestStats ingest;

    // dataset summary (interacting users only, mirroring the eligibility table)
    std::int64_t n_total_nodes = 0;
    std::int64_t n_interacting = 0;
    std::int64_t n_edges = 0;
    std::int64_t n_in_ge1 = 0, n_in_ge2 = 0, n_out_ge1 = 0, n_out_ge2 = 0;

    RangeSpreadSummary range_summary_follower;
    RangeSpreadSummary range_summary_leader;

    ComparedHistogram opinion_hist;    // all interacting nodes; no null side
    ComparedHistogram gap_hist;        // egos >= 1 neighbor
    ComparedHistogram range_hist;      // egos >= 2 neighbors
    ComparedHistogram mean_dev_hist;   // egos >= 1 neighbor
    ComparedHistogram max_dev_hist;

    std::vector<ModelSection> models;
    NullModel table_model = NullModel::RangeBased;       // drives interval tables
    NullModel comparison_model = NullModel::Randomized;  // drives fig2/fig3 null sides

    std::vector<double> empirical_matrix;       // row-major percentages
    std::vector<std::int64_t> chord_counts;     // row-major raw counts
    std::vector<OffsetSummaryRow> offset_rows;  // per interval

    DecaySummary decay;
    TopologySummarySection topology;
};

/// Per-node artifacts that are exported as CSV but intentionally kept out of
/// report.json.
struct AnalysisArtifacts {
    std::vector<NeighborProfile> profiles;   // config perspective, egos >= 1 neighbor
    std::vector<DecayDiagnostic> decay;      // egos >= 2 neighbors
    TopologyReport topology;
};

struct AnalysisRun {
    AnalysisReport report;
    AnalysisArtifacts artifacts;
};

inline TopologySummarySection topology_summary_section(const TopologyReport& topo) {
    TopologySummarySection s;
    s.reciprocity = topo.reciprocity;
    s.wcc_sizes = topo.wcc_sizes;
    s.degree_by_interval_rows = topo.degree_by_interval_rows;
    s.katz_attenuation = topo.katz.attenuation;
    s.katz_lambda_max = topo.katz.lambda_max;
    s.katz_iterations = topo.katz.iterations;
    s.katz_residual = topo.katz.residual;
    s.eigen_lambda = topo.eigenvector.lambda;
    s.eigen_iterations = topo.eigenvector.iterations;
    s.eigen_component_size = topo.eigenvector.component_size;
    return s;
}

namespace detail {

inline RangeSpreadSummary range_spread_summary(const OpinionGraph& g, Perspective p) {
    RangeSpreadSummary out;
    std::vector<double> ranges;
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto nb = g.neighbors(i, p);
        if (nb.size() < 2) continue;
        double lo = 1.0, hi = 0.0;
        for (NodeId j : nb) {
            lo = std::min(lo, g.opinion(j));
            hi = std::max(hi, g.opinion(j));
        }
        ranges.push_back(hi - lo);
    }
    out.n = static_cast<std::int64_t>(ranges.size());
    if (!ranges.empty()) {
        std::sort(ranges.begin(), ranges.end());
        out.median_c = numeric::median_sorted(ranges);
        out.iqr_c = numeric::iqr_sorted(ranges);
    }
    return out;
}

}  // namespace detail

/// Full analysis over an already-built graph. The result is a pure function
/// of (graph, config): identical inputs give identical reports independent of
/// thread count.
inline AnalysisRun run_analysis(const OpinionGraph& g, const AnalysisConfig& config) {
    config.validate();
    if (g.edge_count() == 0) throw Error("run_analysis: graph has no edges");

    AnalysisRun run;
    AnalysisReport& rep = run.report;
    rep.config = config;

    const Perspective p = config.perspective;
    const IntervalPartition partition{config.partition_k};

    // dataset summary
    rep.n_total_nodes = static_cast<std::int64_t>(g.node_count());
    rep.n_interacting = static_cast<std::int64_t>(g.interacting_nodes().size());
    rep.n_edges = static_cast<std::int64_t>(g.edge_count());
    rep.n_in_ge1 = static_cast<std::int64_t>(g.eligible_users(Perspective::Leader, 1).size());
    rep.n_in_ge2 = static_cast<std::int64_t>(g.eligible_users(Perspective::Leader, 2).size());
    rep.n_out_ge1 = static_cast<std::int64_t>(g.eligible_users(Perspective::Follower, 1).size());
    rep.n_out_ge2 = static_cast<std::int64_t>(g.eligible_users(Perspective::Follower, 2).size());
    rep.range_summary_follower = detail::range_spread_summary(g, Perspective::Follower);
    rep.range_summary_leader = detail::range_spread_summary(g, Perspective::Leader);

    // empirical profiles under the configured perspective
    const std::vector<NodeId> egos = g.eligible_users(p, 1);
    if (egos.empty()) throw Error("run_analysis: no ego has a neighbor under this perspective");
    run.artifacts.profiles = profiles_for(g, egos, p);
    const auto& profiles = run.artifacts.profiles;

    // histograms (empirical sides)
    rep.opinion_hist.empirical = FixedHistogram(0.0, 1.0, config.histogram_bins);
    for (NodeId i : g.interacting_nodes()) rep.opinion_hist.empirical.add(g.opinion(i));
    rep.gap_hist.empirical = FixedHistogram(-1.0, 1.0, config.histogram_bins);
    rep.range_hist.empirical = FixedHistogram(0.0, 1.0, config.histogram_bins);
    rep.mean_dev_hist.empirical = FixedHistogram(0.0, 1.0, config.histogram_bins);
    rep.max_dev_hist.empirical = FixedHistogram(0.0, 1.0, config.histogram_bins);
    for (const auto& pr : profiles) {
        rep.gap_hist.empirical.add(pr.gap);
        rep.mean_dev_hist.empirical.add(pr.mean_dev);
        rep.max_dev_hist.empirical.add(pr.max_dev);
        if (pr.n >= 2) rep.range_hist.empirical.add(pr.range);
    }

    // empirical R3 over all egos with >= 2 neighbors
    std::int64_t incl = 0, n_ge2 = 0;
    for (const auto& pr : profiles) {
        if (pr.n < 2) continue;
        ++n_ge2;
        if (pr.inclusion) ++incl;
    }
    const double r3_empirical_full =
        n_ge2 > 0 ? static_cast<double>(incl) / static_cast<double>(n_ge2) : 0.0;

    // empirical interval structures
    rep.empirical_matrix = interaction_matrix(g, partition).cells;
    rep.chord_counts = interaction_counts(g, partition);
    const auto offset_data = per_interval_offsets(profiles, partition);
    rep.offset_rows.resize(partition.k);
    for (int b = 0; b < partition.k; ++b) {
        auto& row = rep.offset_rows[b];
        row.mean_neg_gamma = offset_data[b].mean_neg_gamma();
        row.mean_delta = offset_data[b].mean_delta();
        row.mean_asymmetry = offset_data[b].mean_asymmetry();
        row.n_egos = static_cast<std::int64_t>(offset_data[b].neg_gamma.size());
        row.asymmetry_absent = offset_data[b].asymmetry_absent;
    }

    // distance-decay diagnostics
    std::vector<NodeId> decay_egos;
    for (const auto& pr : profiles) {
        if (pr.n >= 2) decay_egos.push_back(pr.ego);
    }
    run.artifacts.decay.resize(decay_egos.size());
    {
        std::vector<const NeighborProfile*> by_ego(g.node_count(), nullptr);
        for (const auto& pr : profiles) by_ego[pr.ego] = &pr;
        auto& decay_rows = run.artifacts.decay;
        parallel_for(decay_egos.size(), [&](std::size_t i) {
            const auto* pr = by_ego[decay_egos[i]];
            decay_rows[i] = distance_decay(pr->ego_opinion, pr->neighbor_opinions,
                                           config.decay_bin_width, pr->ego);
        });
    }
    {
        std::vector<double> r_values;
        for (const auto& d : run.artifacts.decay) {
            ++rep.decay.evaluated;
            switch (d.classification) {
                case DecayClass::DD: ++rep.decay.dd; break;
                case DecayClass::NDD: ++rep.decay.ndd; break;
                default: ++rep.decay.undefined; break;
            }
            if (d.pearson_r) {
                if (*d.pearson_r < 0.0) ++rep.decay.negative_r;
                r_values.push_back(*d.pearson_r);
            } else {
                ++rep.decay.r_absent;
            }
        }
        if (!r_values.empty()) rep.decay.mean_r = numeric::mean(r_values);
    }

    // null models: trials, rates, tests, matrices, per-interval rates
    const auto model_list = config.models();
    const bool has_range = std::find(model_list.begin(), model_list.end(),
                                     NullModel::RangeBased) != model_list.end();
    const bool has_randomized = std::find(model_list.begin(), model_list.end(),
                                          NullModel::Randomized) != model_list.end();
    rep.table_model = has_range ? NullModel::RangeBased : NullModel::Randomized;
    rep.comparison_model = has_randomized ? NullModel::Randomized : NullModel::RangeBased;

    std::vector<double> emp_range_values, emp_mean_dev_values, emp_max_dev_values;
    for (const auto& pr : profiles) {
        emp_mean_dev_values.push_back(pr.mean_dev);
        emp_max_dev_values.push_back(pr.max_dev);
        if (pr.n >= 2) emp_range_values.push_back(pr.range);
    }

    for (NullModel model : model_list) {
        ModelSection section;
        section.model = model;
        const auto trials = run_trials(g, p, model, static_cast<std::size_t>(config.trials),
                                       config.master_seed, config.retry_cap);

        std::vector<double> null_range_values, null_mean_dev_values, null_max_dev_values;
        FixedHistogram null_gap(-1.0, 1.0, config.histogram_bins);
        FixedHistogram null_range(0.0, 1.0, config.histogram_bins);
        FixedHistogram null_mean_dev(0.0, 1.0, config.histogram_bins);
        FixedHistogram null_max_dev(0.0, 1.0, config.histogram_bins);
        std::vector<InteractionMatrix> null_matrices;
        std::vector<std::vector<IntervalRateRow>> interval_rows_per_trial;
        std::vector<std::string> skipped_union;

        for (const auto& trial : trials) {
            null_matrices.push_back(null_interaction_matrix(g, p, trial, partition));

            // aligned (empirical, null) profile pair; skipped egos drop out
            std::vector<NeighborProfile> null_side;
            std::vector<NeighborProfile> emp_subset;
            std::span<const NeighborProfile> emp_span;
            null_side.reserve(profiles.size());
            if (trial.skipped.empty()) {
                for (const auto& pr : profiles) {
                    null_side.push_back(
                        make_profile(pr.ego, p, pr.ego_opinion, trial.assignments[pr.ego].opinions));
                }
                emp_span = profiles;
            } else {
                for (const auto& pr : profiles) {
                    const auto& slot = trial.assignments[pr.ego];
                    if (!slot.assigned()) continue;
                    emp_subset.push_back(pr);
                    null_side.push_back(make_profile(pr.ego, p, pr.ego_opinion, slot.opinions));
                }
                emp_span = emp_subset;
            }

            section.rates.per_trial.push_back(population_rates(emp_span, null_side, trial.seed));
            section.rates.skipped_per_trial.push_back(
                static_cast<std::int64_t>(trial.skipped.size()));
            for (NodeId s : trial.skipped) skipped_union.push_back(g.name_of(s));
            interval_rows_per_trial.push_back(
                per_interval_rates_trial(emp_span, null_side, partition));

            for (const auto& np : null_side) {
                null_mean_dev_values.push_back(np.mean_dev);
                null_max_dev_values.push_back(np.max_dev);
                null_gap.add(np.gap);
                null_mean_dev.add(np.mean_dev);
                null_max_dev.add(np.max_dev);
                if (np.n >= 2) {
                    null_range_values.push_back(np.range);
                    null_range.add(np.range);
                }
            }
        }
        std::sort(skipped_union.begin(), skipped_union.end());
        skipped_union.erase(std::unique(skipped_union.begin(), skipped_union.end()),
                            skipped_union.end());
        section.rates.skipped_nodes = std::move(skipped_union);

        auto& rs = section.rates;
        rs.r3_empirical = r3_empirical_full;
        rs.r1_min = rs.r2_min = rs.r3_null_min = 2.0;
        for (const auto& r : rs.per_trial) {
            rs.r1_mean += r.r1;
            rs.r2_mean += r.r2;
            rs.r3_null_mean += r.r3_null;
            rs.r1_min = std::min(rs.r1_min, r.r1);
            rs.r2_min = std::min(rs.r2_min, r.r2);
            rs.r3_null_min = std::min(rs.r3_null_min, r.r3_null);
            rs.r1_max = std::max(rs.r1_max, r.r1);
            rs.r2_max = std::max(rs.r2_max, r.r2);
            rs.r3_null_max = std::max(rs.r3_null_max, r.r3_null);
        }
        const double t_count = static_cast<double>(rs.per_trial.size());
        rs.r1_mean /= t_count;
        rs.r2_mean /= t_count;
        rs.r3_null_mean /= t_count;

        // null-vs-empirical tests: a = pooled null sample, b = empirical, so a
        // positive d means the empirical values are smaller
        if (null_range_values.size() >= 2 && emp_range_values.size() >= 2) {
            section.tests.range = two_sample_test(null_range_values, emp_range_values);
        }
        if (null_mean_dev_values.size() >= 2 && emp_mean_dev_values.size() >= 2) {
            section.tests.mean_dev = two_sample_test(null_mean_dev_values, emp_mean_dev_values);
            section.tests.max_dev = two_sample_test(null_max_dev_values, emp_max_dev_values);
        }

        InteractionMatrix emp_matrix(partition.k);
        emp_matrix.cells = rep.empirical_matrix;
        const auto residual = residual_matrix(emp_matrix, null_matrices);
        section.residual = residual.cells;
        section.null_matrix_mean.assign(rep.empirical_matrix.size(), 0.0);
        for (std::size_t i = 0; i < section.null_matrix_mean.size(); ++i) {
            section.null_matrix_mean[i] = rep.empirical_matrix[i] - residual.cells[i];
        }

        section.interval_rates = aggregate_interval_rates(interval_rows_per_trial, partition);

        if (model == rep.comparison_model) {
            const double tn = static_cast<double>(trials.size());
            const auto to_mean = [tn](const FixedHistogram& h) {
                std::vector<double> out(h.counts.size());
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i] = static_cast<double>(h.counts[i]) / tn;
                }
                return out;
            };
            rep.gap_hist.null_mean = to_mean(null_gap);
            rep.range_hist.null_mean = to_mean(null_range);
            rep.mean_dev_hist.null_mean = to_mean(null_mean_dev);
            rep.max_dev_hist.null_mean = to_mean(null_max_dev);
        }

        rep.models.push_back(std::move(section));
    }

    // topology
    run.artifacts.topology = build_topology_report(g, partition);
    rep.topology = topology_summary_section(run.artifacts.topology);

    return run;
}

struct FileAnalysis {
    OpinionGraph graph;
    AnalysisRun run;
};

/// Loads the CSV pair, runs the analysis, and fills provenance.
inline FileAnalysis analyze_files(const std::string& edge_path, const std::string& opinion_path,
                                  std::optional<std::pair<double, double>> rescale,
                                  const AnalysisConfig& config) {
    LoadedDataset data = load_dataset(edge_path, opinion_path, rescale);
    FileAnalysis out{std::move(data.graph), {}};
    out.run = run_analysis(out.graph, config);
    out.run.report.ingest = data.stats;
    out.run.report.edges_digest = file_digest(edge_path);
    out.run.report.opinions_digest = file_digest(opinion_path);
    return out;
}

}  // namespace bchom
