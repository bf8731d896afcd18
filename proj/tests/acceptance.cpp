// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion carries its own runtime budget.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bchom/bc_sim.hpp"
#include "bchom/cli.hpp"
#include "bchom/csv.hpp"
#include "bchom/graph.hpp"
#include "bchom/intervals.hpp"
#include "bchom/metrics.hpp"
#include "bchom/null_models.hpp"
#include "bchom/pipeline.hpp"
#include "bchom/report_io.hpp"
#include "bchom/rng.hpp"
#include "bchom/stats.hpp"
#include "bchom/topology.hpp"

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace bchom;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& message) {
        if (!condition && ok) {
            ok = false;
            detail = message;
        }
    }
};

std::string format_seconds(double s) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << s << "s";
    return out.str();
}

// ---------------------------------------------------------------------------
// shared fixtures

struct EdgeList {
    std::vector<std::pair<std::string, std::string>> edges;
    std::map<std::string, double> opinions;
};

EdgeList er_digraph(std::size_t n, std::size_t edges, std::uint64_t seed) {
    EdgeList out;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        out.opinions["u" + std::to_string(i)] = rng.next_double();
    }
    while (out.edges.size() < edges) {
        const auto s = static_cast<std::size_t>(rng.below(n));
        const auto d = static_cast<std::size_t>(rng.below(n));
        if (s == d) continue;
        out.edges.emplace_back("u" + std::to_string(s), "u" + std::to_string(d));
    }
    return out;
}

/// Every node wired to its `degree` nearest peers in opinion space.
EdgeList nearest_peer_graph(std::size_t n, std::size_t degree, std::uint64_t seed) {
    EdgeList out;
    Rng rng(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.next_double();
    for (std::size_t i = 0; i < n; ++i) {
        out.opinions["u" + std::to_string(i)] = xs[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<std::size_t> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;
    for (std::size_t i = 0; i < n; ++i) {
        // expand a window around the ego's sorted position, nearest first
        std::size_t left = rank[i], right = rank[i];
        for (std::size_t picked = 0; picked < degree; ++picked) {
            const bool can_left = left > 0;
            const bool can_right = right + 1 < n;
            bool go_left;
            if (can_left && can_right) {
                go_left = xs[i] - xs[order[left - 1]] <= xs[order[right + 1]] - xs[i];
            } else {
                go_left = can_left;
            }
            std::size_t j;
            if (go_left) {
                --left;
                j = order[left];
            } else {
                ++right;
                j = order[right];
            }
            out.edges.emplace_back("u" + std::to_string(i), "u" + std::to_string(j));
        }
    }
    return out;
}

OpinionGraph build(const EdgeList& data) {
    return OpinionGraph::build(data.edges, data.opinions);
}

struct SharedFixtures {
    OpinionGraph er;
    OpinionGraph nearest;
    AnalysisRun er_run;
    AnalysisRun nearest_run;

    SharedFixtures()
        : er(build(er_digraph(2000, 20000, 1001))),
          nearest(build(nearest_peer_graph(1200, 10, 2002))) {
        AnalysisConfig config;
        config.trials = 20;
        config.master_seed = 404;
        config.null_model = NullModelChoice::Both;
        er_run = run_analysis(er, config);
        nearest_run = run_analysis(nearest, config);
    }

    const ModelSection& section(const AnalysisRun& run, NullModel model) const {
        for (const auto& s : run.report.models) {
            if (s.model == model) return s;
        }
        throw Error("missing model section");
    }
};

// ---------------------------------------------------------------------------
// criteria

Check oracle_equivalence() {
    Check check;
    for (std::uint32_t seed = 1; seed <= 200 && check.ok; ++seed) {
        const auto data = oracle::random_graph(seed, 50, 300);
        const auto g = OpinionGraph::build(data.edges, data.opinions);
        const Perspective p = seed % 2 == 0 ? Perspective::Follower : Perspective::Leader;
        const bool follower = p == Perspective::Follower;
        const auto egos = g.eligible_users(p, 1);
        if (egos.empty()) continue;
        const auto profiles = profiles_for(g, egos, p);

        // profile fields against the naive recomputation
        for (std::size_t k = 0; k < egos.size() && check.ok; ++k) {
            const auto& pr = profiles[k];
            const auto want = oracle::profile(
                g.opinion(egos[k]),
                oracle::neighbor_opinions(data.edges, data.opinions, g.name_of(egos[k]),
                                          follower));
            check.require(static_cast<std::size_t>(pr.n) == want.n, "profile n mismatch");
            check.require(std::abs(pr.gap - want.gap) < 1e-12, "gap mismatch");
            check.require(pr.alpha == want.alpha && pr.beta == want.beta, "alpha/beta mismatch");
            check.require(std::abs(pr.range - want.range) < 1e-12, "range mismatch");
            check.require(std::abs(pr.mean_dev - want.mean_dev) < 1e-12, "mean_dev mismatch");
            check.require(std::abs(pr.max_dev - want.max_dev) < 1e-12, "max_dev mismatch");
            check.require(std::abs(pr.gamma - want.gamma) < 1e-12, "gamma mismatch");
            check.require(std::abs(pr.delta - want.delta) < 1e-12, "delta mismatch");
            check.require(pr.inclusion == want.inclusion, "inclusion mismatch");
            check.require(pr.asymmetry.has_value() == want.has_asymmetry, "asymmetry presence");
            if (pr.asymmetry && want.has_asymmetry) {
                check.require(std::abs(*pr.asymmetry - want.asymmetry) < 1e-12,
                              "asymmetry mismatch");
            }
        }
        if (!check.ok) break;

        // rates for one trial of each model
        for (const auto model : {NullModel::Randomized, NullModel::RangeBased}) {
            const auto trials = run_trials(g, p, model, 1, 31 + seed);
            const auto& trial = trials[0];
            std::map<std::string, double> ego_opinion;
            std::map<std::string, std::vector<double>> emp_map, null_map;
            std::vector<NeighborProfile> emp_sub, null_sub;
            for (std::size_t k = 0; k < egos.size(); ++k) {
                if (!trial.assignments[egos[k]].assigned()) continue;
                const auto& name = g.name_of(egos[k]);
                ego_opinion[name] = g.opinion(egos[k]);
                emp_map[name] = profiles[k].neighbor_opinions;
                null_map[name] = trial.assignments[egos[k]].opinions;
                emp_sub.push_back(profiles[k]);
                null_sub.push_back(make_profile(egos[k], p, g.opinion(egos[k]),
                                                trial.assignments[egos[k]].opinions));
            }
            if (emp_sub.empty()) continue;
            const auto got = population_rates(emp_sub, null_sub, trial.seed);
            const auto want = oracle::rates(ego_opinion, emp_map, null_map);
            check.require(got.n_r1r2 == want.n1, "r1/r2 denominator mismatch");
            check.require(got.n_r3 == want.n3, "r3 denominator mismatch");
            check.require(std::abs(got.r1 - want.r1) < 1e-12, "r1 mismatch");
            check.require(std::abs(got.r2 - want.r2) < 1e-12, "r2 mismatch");
            if (got.n_r3 > 0) {
                check.require(std::abs(got.r3 - want.r3) < 1e-12, "r3 mismatch");
                check.require(std::abs(got.r3_null - want.r3_null) < 1e-12, "r3_null mismatch");
            }
        }

        // interaction matrix against the counting oracle
        if (g.edge_count() > 0) {
            const IntervalPartition part{5};
            const auto counts = interaction_counts(g, part);
            const auto want_counts = oracle::interaction_counts(data.edges, data.opinions, 5);
            check.require(counts == want_counts, "interaction counts mismatch");
            const auto matrix = interaction_matrix(g, part);
            for (std::size_t i = 0; i < matrix.cells.size(); ++i) {
                const double expected = 100.0 * static_cast<double>(want_counts[i]) /
                                        static_cast<double>(g.edge_count());
                check.require(std::abs(matrix.cells[i] - expected) < 1e-12,
                              "matrix cell mismatch");
            }
        }

        // decay diagnostics
        for (std::size_t k = 0; k < egos.size() && check.ok; ++k) {
            if (profiles[k].n < 2) continue;
            const auto got =
                distance_decay(profiles[k].ego_opinion, profiles[k].neighbor_opinions, 0.1);
            const auto want = oracle::decay(profiles[k].ego_opinion,
                                            profiles[k].neighbor_opinions, 0.1);
            check.require(got.bin_counts == want.counts, "decay counts mismatch");
            check.require(got.pearson_r.has_value() == want.has_r, "decay r presence mismatch");
            if (got.pearson_r && want.has_r) {
                check.require(std::abs(*got.pearson_r - want.r) < 1e-12, "decay r mismatch");
            }
            check.require(std::string(to_string(got.classification)) == want.label,
                          "decay label mismatch");
        }
    }
    return check;
}

Check null_calibration(const SharedFixtures& shared) {
    Check check;
    const auto& randomized = shared.section(shared.er_run, NullModel::Randomized);
    check.require(randomized.rates.r1_mean >= 0.45 && randomized.rates.r1_mean <= 0.55,
                  "R1 mean " + std::to_string(randomized.rates.r1_mean));
    check.require(randomized.rates.r2_mean >= 0.45 && randomized.rates.r2_mean <= 0.55,
                  "R2 mean " + std::to_string(randomized.rates.r2_mean));
    for (const auto& trial : randomized.rates.per_trial) {
        check.require(trial.r1 >= 0.45 && trial.r1 <= 0.55,
                      "per-trial R1 " + std::to_string(trial.r1));
        check.require(trial.r2 >= 0.45 && trial.r2 <= 0.55,
                      "per-trial R2 " + std::to_string(trial.r2));
    }
    check.require(randomized.tests.range.has_value(), "missing range test");
    if (randomized.tests.range) {
        check.require(std::abs(randomized.tests.range->cohens_d) < 0.1,
                      "range d " + std::to_string(randomized.tests.range->cohens_d));
    }
    if (randomized.tests.mean_dev) {
        check.require(std::abs(randomized.tests.mean_dev->cohens_d) < 0.1,
                      "mean_dev d " + std::to_string(randomized.tests.mean_dev->cohens_d));
        check.require(std::abs(randomized.tests.max_dev->cohens_d) < 0.1,
                      "max_dev d " + std::to_string(randomized.tests.max_dev->cohens_d));
    }
    check.require(
        std::abs(randomized.rates.r3_empirical - randomized.rates.r3_null_mean) < 0.05,
        "R3 empirical vs null gap " +
            std::to_string(randomized.rates.r3_empirical - randomized.rates.r3_null_mean));
    return check;
}

Check homophily_detection(const SharedFixtures& shared) {
    Check check;
    const auto& range_based = shared.section(shared.nearest_run, NullModel::RangeBased);
    const auto& randomized = shared.section(shared.nearest_run, NullModel::Randomized);
    for (const auto* section : {&range_based, &randomized}) {
        check.require(section->rates.r1_mean > 0.9,
                      "R1 mean " + std::to_string(section->rates.r1_mean));
        check.require(section->rates.r2_mean > 0.9,
                      "R2 mean " + std::to_string(section->rates.r2_mean));
    }
    // range-inclusion contrast against the range-preserving baseline
    check.require(range_based.rates.r3_empirical - range_based.rates.r3_null_mean > 0.3,
                  "R3 gap " + std::to_string(range_based.rates.r3_empirical -
                                             range_based.rates.r3_null_mean));
    // the confidence-range effect, empirical smaller than the randomized null
    check.require(randomized.tests.range.has_value(), "missing range test");
    if (randomized.tests.range) {
        check.require(randomized.tests.range->cohens_d > 0.8,
                      "range d " + std::to_string(randomized.tests.range->cohens_d));
    }
    return check;
}

Check range_null_invariants(const SharedFixtures& shared) {
    Check check;
    for (const OpinionGraph* graph : {&shared.er, &shared.nearest}) {
        const auto& g = *graph;
        std::vector<double> pool_sorted;
        for (NodeId i = 0; i < g.node_count(); ++i) {
            if (g.interacting(i)) pool_sorted.push_back(g.opinion(i));
        }
        std::sort(pool_sorted.begin(), pool_sorted.end());
        const auto trials =
            run_trials(g, Perspective::Follower, NullModel::RangeBased, 20, 404);
        for (const auto& trial : trials) {
            check.require(trial.skipped.empty(),
                          "skipped egos: " + std::to_string(trial.skipped.size()));
            for (NodeId ego = 0; ego < g.node_count() && check.ok; ++ego) {
                const auto& slot = trial.assignments[ego];
                if (!slot.assigned()) continue;
                const auto nb = g.neighbors(ego, Perspective::Follower);
                double lo = 1.0, hi = 0.0;
                for (NodeId j : nb) {
                    lo = std::min(lo, g.opinion(j));
                    hi = std::max(hi, g.opinion(j));
                }
                const double c_i = hi - lo;
                check.require(slot.opinions.size() == nb.size(), "size != n_i");
                check.require(slot.opinions.back() - slot.opinions.front() <= c_i + 1e-12,
                              "span exceeds c_i");
                if (nb.size() >= 2) {
                    check.require(slot.interval.has_value(), "missing interval metadata");
                    if (!slot.interval) continue;
                    const auto [a, b] = *slot.interval;
                    check.require(std::abs((b - a) - c_i) < 1e-12, "interval width != c_i");
                    check.require(a >= 0.0 && b <= 1.0, "interval outside [0,1]");
                    // the candidate extremes (ego entry excluded) must be present
                    const double x_ego = g.opinion(ego);
                    double cand_min = 2.0, cand_max = -1.0;
                    bool ego_excluded = false;
                    for (auto it = std::lower_bound(pool_sorted.begin(), pool_sorted.end(), a);
                         it != pool_sorted.end() && *it <= b; ++it) {
                        if (!ego_excluded && *it == x_ego) {
                            ego_excluded = true;  // drop one instance: the ego's own entry
                            continue;
                        }
                        cand_min = std::min(cand_min, *it);
                        cand_max = std::max(cand_max, *it);
                    }
                    check.require(slot.opinions.front() == cand_min, "candidate minimum missing");
                    check.require(slot.opinions.back() == cand_max, "candidate maximum missing");
                }
            }
        }
    }
    return check;
}

Check bc_simulator() {
    Check check;
    const auto consensus = simulate(uniform_state(500, 0.5, 0.5, 11), 10000, 1e-10);
    const auto& final_state = consensus.trajectory.back();
    const auto [lo, hi] = std::minmax_element(final_state.begin(), final_state.end());
    check.require(consensus.converged, "wide-bounds run did not converge");
    check.require(*hi - *lo < 1e-6, "consensus spread " + std::to_string(*hi - *lo));
    check.require(consensus.clusters.size() == 1, "expected a single cluster");

    const auto clustered = simulate(uniform_state(500, 0.05, 0.05, 11), 10000, 1e-10);
    check.require(clustered.converged, "narrow-bounds run did not converge");
    check.require(clustered.clusters.size() >= 2,
                  "clusters " + std::to_string(clustered.clusters.size()));

    BCState pair;
    pair.opinions = {0.4, 0.6};
    pair.lower_bounds = {0.5, 0.5};
    pair.upper_bounds = {0.5, 0.5};
    const auto stepped = bc_step(pair);
    check.require(stepped.opinions[0] == 0.5 && stepped.opinions[1] == 0.5,
                  "two-agent step is not exactly 0.5");
    return check;
}

Check statistics() {
    Check check;
    const std::vector<double> b{-1.0, 0.0, 1.0};
    const std::vector<double> a{0.0, 1.0, 2.0};  // a = b + 1, pooled sd exactly 1
    check.require(std::abs(cohens_d(a, b) - 1.0) <= 1e-9,
                  "d(b+1, b) = " + std::to_string(cohens_d(a, b)));

    const std::vector<double> same{0.2, 0.4, 0.9, 0.5};
    const auto identical = two_sample_test(same, same);
    check.require(identical.t_statistic == 0.0 && identical.p_value == 1.0 &&
                      identical.cohens_d == 0.0,
                  "identical samples");

    // 20-case grid: sample sizes x mean shifts, deterministic ramps
    int cases = 0;
    for (const std::size_t na : {5, 9, 21, 60}) {
        for (const double shift : {0.0, 0.08, 0.4, 1.2, 3.0}) {
            ++cases;
            std::vector<double> xs(na), ys(na + 6);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                xs[i] = 0.1 + 0.03 * static_cast<double>(i);
            }
            for (std::size_t i = 0; i < ys.size(); ++i) {
                ys[i] = 0.1 + shift + 0.05 * static_cast<double>(i);
            }
            const auto res = two_sample_test(xs, ys);
            const double na_d = static_cast<double>(xs.size());
            const double nb_d = static_cast<double>(ys.size());
            const double va = numeric::sample_variance(xs);
            const double vb = numeric::sample_variance(ys);
            const double sea = va / na_d, seb = vb / nb_d;
            const double df = (sea + seb) * (sea + seb) /
                              (sea * sea / (na_d - 1.0) + seb * seb / (nb_d - 1.0));
            const double want = oracle::student_t_two_sided_p(res.t_statistic, df);
            check.require(std::abs(res.p_value - want) <= 1e-8,
                          "p mismatch " + std::to_string(res.p_value) + " vs " +
                              std::to_string(want));
        }
    }
    check.require(cases == 20, "grid size");
    return check;
}

Check interval_conventions() {
    Check check;
    const IntervalPartition part{5};
    check.require(assign_interval(0.2, part) == 1, "assign(0.2) != 1");
    check.require(assign_interval(0.2 + 1e-9, part) == 2, "assign(0.2+1e-9) != 2");
    check.require(assign_interval(1.0, part) == 5, "assign(1.0) != 5");
    return check;
}

Check topology_fixtures() {
    Check check;
    // layered DAG
    std::vector<std::pair<std::string, std::string>> dag_edges;
    std::map<std::string, double> dag_opinions;
    for (int i = 0; i < 12; ++i) {
        dag_opinions["d" + std::to_string(i)] = 0.05 * (i + 1);
        for (int j = i + 1; j < 12; j += 3) {
            dag_edges.emplace_back("d" + std::to_string(i), "d" + std::to_string(j));
        }
    }
    const auto dag = OpinionGraph::build(dag_edges, dag_opinions);
    check.require(reciprocity(dag) == 0.0, "DAG reciprocity nonzero");

    // star: analytic dominant eigenvector
    const std::size_t leaves = 9;
    std::vector<std::pair<std::string, std::string>> star_edges;
    std::map<std::string, double> star_opinions{{"hub", 0.5}};
    for (std::size_t i = 0; i < leaves; ++i) {
        star_opinions["leaf" + std::to_string(i)] = 0.3;
        star_edges.emplace_back("hub", "leaf" + std::to_string(i));
    }
    const auto star = OpinionGraph::build(star_edges, star_opinions);
    const auto ev = eigenvector_centrality(star);
    const NodeId hub = star.require_index("hub");
    check.require(std::abs(ev.values[hub] - 1.0) <= 1e-8, "hub centrality != 1");
    const double leaf_expected = 1.0 / std::sqrt(static_cast<double>(leaves));
    for (NodeId i = 0; i < star.node_count(); ++i) {
        if (i == hub) continue;
        check.require(std::abs(ev.values[i] - leaf_expected) <= 1e-8,
                      "leaf centrality " + std::to_string(ev.values[i]));
    }

    // two directed triangles plus two isolated nodes
    const auto wcc_graph = OpinionGraph::build(
        std::vector<std::pair<std::string, std::string>>{
            {"a", "b"}, {"b", "c"}, {"c", "a"}, {"x", "y"}, {"y", "z"}, {"z", "x"}},
        {{"a", 0.1},
         {"b", 0.2},
         {"c", 0.3},
         {"x", 0.7},
         {"y", 0.8},
         {"z", 0.9},
         {"iso1", 0.4},
         {"iso2", 0.6}});
    check.require(weakly_connected_components(wcc_graph) ==
                      std::vector<std::int64_t>{3, 3, 1, 1},
                  "WCC sizes");
    return check;
}

Check decay_classifier() {
    Check check;
    const auto pad = [](std::vector<std::int64_t> counts) {
        counts.resize(10, 0);
        return counts;
    };
    check.require(decay_from_counts(pad({5, 3, 1}), 0.1).classification == DecayClass::DD,
                  "[5,3,1] not DD");
    check.require(decay_from_counts(pad({5, 3, 4}), 0.1).classification == DecayClass::NDD,
                  "[5,3,4] not NDD");
    check.require(decay_from_counts(pad({5}), 0.1).classification == DecayClass::NDD,
                  "[5] not NDD");
    std::vector<std::int64_t> affine;
    for (int k = 0; k < 10; ++k) affine.push_back(37 - 3 * k);
    const auto diag = decay_from_counts(affine, 0.1);
    check.require(diag.pearson_r.has_value() && std::abs(*diag.pearson_r + 1.0) < 1e-12,
                  "affine counts pearson != -1");
    return check;
}

Check determinism() {
    Check check;
    const fs::path dir =
        fs::temp_directory_path() / ("bchom_acceptance_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);

    // bundled bimodal fixture: two camps with bounded interaction windows
    const auto init = bimodal_state(400, 0.05, 0.33, 0.67, 0.95, 0.05, 0.05, 7);
    const auto g = snapshot_graph(init);
    std::string edges = "src,dst\n";
    for (const auto& [s, d] : g.edges()) edges += g.name_of(s) + "," + g.name_of(d) + "\n";
    std::string opinions = "node,opinion\n";
    for (NodeId i = 0; i < g.node_count(); ++i) {
        opinions += g.name_of(i) + "," + csv::format_double(g.opinion(i)) + "\n";
    }
    write_text_file((dir / "edges.csv").string(), edges);
    write_text_file((dir / "opinions.csv").string(), opinions);

    std::vector<std::string> reports;
    const int thread_settings[] = {1, 8, 1};
    for (int r = 0; r < 3; ++r) {
        set_thread_cap(thread_settings[r]);
        const auto out = dir / ("run" + std::to_string(r));
        // mute the CLI's progress lines so the criterion output stays one line
        std::ostringstream muted;
        auto* saved = std::cout.rdbuf(muted.rdbuf());
        const int code = cli::run({"bchom", "analyze", "--edges", (dir / "edges.csv").string(),
                                   "--opinions", (dir / "opinions.csv").string(), "--seed", "7",
                                   "--trials", "20", "--out", out.string()});
        std::cout.rdbuf(saved);
        check.require(code == 0, "analyze exited with " + std::to_string(code));
        if (code != 0) break;
        std::ifstream in(out / "report.json", std::ios::binary);
        reports.emplace_back(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
    }
    set_thread_cap(0);
    if (reports.size() == 3) {
        check.require(!reports[0].empty(), "empty report");
        check.require(reports[0] == reports[1], "threads=1 vs threads=8 reports differ");
        check.require(reports[0] == reports[2], "repeated runs differ");
    }
    fs::remove_all(dir);
    return check;
}

Check qualitative_patterns() {
    Check check;
    const IntervalPartition part{5};

    // camp-segregated bimodal fixture: each camp wired within itself
    {
        Rng rng(77);
        const std::size_t half = 150;
        std::vector<double> xs(2 * half);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const bool low = i < half;
            xs[i] = (low ? 0.05 : 0.85) + 0.10 * rng.next_double();
        }
        std::vector<std::pair<std::string, std::string>> edges;
        std::map<std::string, double> opinions;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            opinions["b" + std::to_string(i)] = xs[i];
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            // 8 nearest peers within the same camp
            const std::size_t base = i < half ? 0 : half;
            std::vector<std::size_t> order(half);
            std::iota(order.begin(), order.end(), base);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(xs[a] - xs[i]) < std::abs(xs[b] - xs[i]);
            });
            std::size_t added = 0;
            for (std::size_t k = 0; k < order.size() && added < 8; ++k) {
                if (order[k] == i) continue;
                edges.emplace_back("b" + std::to_string(i), "b" + std::to_string(order[k]));
                ++added;
            }
        }
        const auto g = OpinionGraph::build(edges, opinions);
        const auto matrix = interaction_matrix(g, part);
        double within_camp = 0.0;
        for (int r = 1; r <= 5; ++r) {
            for (int c = 1; c <= 5; ++c) {
                const bool r_low = r <= 2, c_low = c <= 2;
                const bool r_high = r >= 4, c_high = c >= 4;
                if ((r_low && c_low) || (r_high && c_high)) within_camp += matrix.at(r, c);
            }
        }
        check.require(within_camp > 90.0, "within-camp mass " + std::to_string(within_camp));

        const auto egos = g.eligible_users(Perspective::Follower, 1);
        const auto profiles = profiles_for(g, egos, Perspective::Follower);
        const auto offsets = per_interval_offsets(profiles, part);
        for (int b = 0; b < 5; ++b) {
            const auto mean_s = offsets[b].mean_asymmetry();
            if (!mean_s) continue;
            if (offsets[b].asymmetry.size() < 20) continue;  // only the populated camps
            check.require(std::abs(*mean_s) < 0.3,
                          "interval " + std::to_string(b + 1) + " mean s " +
                              std::to_string(*mean_s));
        }
    }

    // unimodal fixture with egos wired toward the mode: the span leans toward
    // 0.5, so mean s is positive below the mode and negative above it
    {
        Rng rng(88);
        const std::size_t n = 500;
        std::vector<double> xs(n);
        for (auto& x : xs) {
            // triangular unimodal shape around 0.5
            x = 0.5 * (rng.next_double() + rng.next_double());
        }
        std::vector<std::pair<std::string, std::string>> edges;
        std::map<std::string, double> opinions;
        for (std::size_t i = 0; i < n; ++i) opinions["m" + std::to_string(i)] = xs[i];
        for (std::size_t i = 0; i < n; ++i) {
            const double target = xs[i] + 0.5 * (0.5 - xs[i]);
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(xs[a] - target) < std::abs(xs[b] - target);
            });
            std::size_t added = 0;
            for (std::size_t k = 0; k < n && added < 8; ++k) {
                if (order[k] == i) continue;
                edges.emplace_back("m" + std::to_string(i), "m" + std::to_string(order[k]));
                ++added;
            }
        }
        const auto g = OpinionGraph::build(edges, opinions);
        const auto egos = g.eligible_users(Perspective::Follower, 1);
        const auto profiles = profiles_for(g, egos, Perspective::Follower);
        const auto offsets = per_interval_offsets(profiles, part);
        for (const int below : {1, 2}) {
            const auto mean_s = offsets[below - 1].mean_asymmetry();
            check.require(mean_s.has_value() && *mean_s > 0.0,
                          "interval " + std::to_string(below) + " should lean toward the mode");
        }
        for (const int above : {4, 5}) {
            const auto mean_s = offsets[above - 1].mean_asymmetry();
            check.require(mean_s.has_value() && *mean_s < 0.0,
                          "interval " + std::to_string(above) + " should lean toward the mode");
        }
    }
    return check;
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        double budget_seconds;
        std::function<Check()> fn;
    };

    // the two analysis fixtures are shared between criteria 2, 3, and 4
    std::unique_ptr<SharedFixtures> shared;
    const auto shared_ref = [&]() -> SharedFixtures& {
        if (!shared) shared = std::make_unique<SharedFixtures>();
        return *shared;
    };

    const std::vector<Criterion> criteria{
        {"oracle equivalence on 200 random graphs", 30.0, oracle_equivalence},
        {"null calibration on an ER digraph", 60.0,
         [&] { return null_calibration(shared_ref()); }},
        {"homophily detection on nearest-peer wiring", 60.0,
         [&] { return homophily_detection(shared_ref()); }},
        {"range-based null invariants", 600.0,
         [&] { return range_null_invariants(shared_ref()); }},
        {"bounded-confidence simulator", 30.0, bc_simulator},
        {"statistics against the quadrature oracle", 600.0, statistics},
        {"interval boundary conventions", 600.0, interval_conventions},
        {"topology fixtures", 600.0, topology_fixtures},
        {"DD/NDD classifier", 600.0, decay_classifier},
        {"byte-identical reports across runs and threads", 120.0, determinism},
        {"qualitative interaction patterns", 600.0, qualitative_patterns},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criteria[i].fn();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed >= criteria[i].budget_seconds) {
            check.ok = false;
            check.detail = "runtime " + format_seconds(elapsed) + " over budget";
        }
        std::cout << "[" << (i + 1 < 10 ? " " : "") << i + 1 << "/11] " << criteria[i].name
                  << " ... ";
        if (check.ok) {
            std::cout << "PASS (" << format_seconds(elapsed) << ")";
        } else {
            ++failures;
            std::cout << "FAIL (" << format_seconds(elapsed) << ") " << check.detail;
        }
        std::cout << std::endl;
    }
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
}
