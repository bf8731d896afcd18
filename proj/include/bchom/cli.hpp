#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bchom/bc_sim.hpp"
#include "bchom/csv.hpp"
#include "bchom/pipeline.hpp"
#include "bchom/report_io.hpp"

namespace bchom::cli {

namespace detail {

struct DatasetFlags {
    std::string edges;
    std::string opinions;
    std::vector<double> rescale;  // empty or {lo, hi}

    std::optional<std::pair<double, double>> rescale_interval() const {
        if (rescale.empty()) return std::nullopt;
        return std::make_pair(rescale[0], rescale[1]);
    }
};

inline void add_dataset_flags(CLI::App* cmd, DatasetFlags& flags) {
    cmd->add_option("--edges", flags.edges, "Edge list CSV with header src,dst")->required();
    cmd->add_option("--opinions", flags.opinions, "Opinion CSV with header node,opinion")
        ->required();
    cmd->add_option("--rescale", flags.rescale,
                    "Source interval LO HI; raw opinions are mapped affinely onto [0,1]")
        ->expected(2);
}

inline void write_simulation_files(const SimulationResult& sim, const BCState& final_state,
                                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string trajectory = "step,node,opinion\n";
    for (std::size_t s = 0; s < sim.trajectory.size(); ++s) {
        for (std::size_t i = 0; i < sim.trajectory[s].size(); ++i) {
            trajectory += std::to_string(s) + "," + std::to_string(i) + "," +
                          csv::format_double(sim.trajectory[s][i]) + "\n";
        }
    }
    write_text_file((dir / "trajectory.csv").string(), trajectory);

    const OpinionGraph g = snapshot_graph(final_state);
    std::string edges = "src,dst\n";
    for (const auto& [s, d] : g.edges()) edges += g.name_of(s) + "," + g.name_of(d) + "\n";
    write_text_file((dir / "edges.csv").string(), edges);
    std::string opinions = "node,opinion\n";
    for (NodeId i = 0; i < g.node_count(); ++i) {
        opinions += g.name_of(i) + "," + csv::format_double(g.opinion(i)) + "\n";
    }
    write_text_file((dir / "opinions.csv").string(), opinions);

    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : sim.clusters) clusters.push_back(c);
    nlohmann::json summary{{"steps", sim.steps},
                           {"converged", sim.converged},
                           {"cluster_count", sim.clusters.size()},
                           {"clusters", std::move(clusters)}};
    write_text_file((dir / "simulation_summary.json").string(), summary.dump(2) + "\n");
}

}  // namespace detail

/// Entry point behind main(); argv[0] is the program name.
/// Exit codes: 0 success, 1 analysis failure, 2 usage error.
inline int run(std::vector<std::string> argv) {
    CLI::App app{
        "bchom - interval-based opinion homophily analysis on directed interaction graphs.\n"
        "Outputs map onto the usual reporting tables: fig2_* opinion/gap histograms,\n"
        "fig3_* range and deviation histograms with null comparisons, fig4_rates.csv\n"
        "per-trial R1/R2/R3, interaction_matrix.csv + residual_matrix.csv +\n"
        "interval_rates.csv + interval_offsets.csv per-interval tables, decay.csv\n"
        "distance-decay diagnostics, topology.csv centralities, report.json everything."};
    app.require_subcommand(1);

    // analyze
    detail::DatasetFlags analyze_data;
    AnalysisConfig config;
    std::string config_path;
    std::string analyze_out = "bchom_out";
    std::string perspective_arg = "follower";
    std::string model_arg = "both";
    auto* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline");
    detail::add_dataset_flags(analyze, analyze_data);
    analyze->add_option("--out", analyze_out, "Output directory");
    auto* opt_persp = analyze->add_option("--perspective", perspective_arg,
                                          "Neighborhood orientation: follower|leader");
    auto* opt_trials = analyze->add_option("--trials", config.trials, "Number of null trials");
    auto* opt_seed = analyze->add_option("--seed", config.master_seed, "Master seed");
    auto* opt_k = analyze->add_option("--k", config.partition_k, "Opinion intervals");
    auto* opt_bw =
        analyze->add_option("--bin-width", config.decay_bin_width, "Distance-decay bin width");
    auto* opt_model =
        analyze->add_option("--model", model_arg, "Null model: randomized|range_based|both");
    auto* opt_cap = analyze->add_option("--retry-cap", config.retry_cap,
                                        "Center draws per ego before a range-based skip");
    analyze->add_option("--config", config_path, "Flat key=value config file (CLI flags win)");

    // nulltrials
    detail::DatasetFlags trials_data;
    std::string trials_out = "bchom_trials";
    std::string trials_persp = "follower";
    std::string trials_model = "range_based";
    int trials_count = 20;
    std::uint64_t trials_seed = 0;
    std::size_t trials_cap = 10000;
    auto* nulltrials =
        app.add_subcommand("nulltrials", "Generate and serialize null trials only");
    detail::add_dataset_flags(nulltrials, trials_data);
    nulltrials->add_option("--out", trials_out, "Output directory");
    nulltrials->add_option("--perspective", trials_persp, "follower|leader");
    nulltrials->add_option("--model", trials_model, "randomized|range_based");
    nulltrials->add_option("--trials", trials_count, "Number of trials");
    nulltrials->add_option("--seed", trials_seed, "Master seed");
    nulltrials->add_option("--retry-cap", trials_cap, "Range-based retry cap");

    // simulate
    std::size_t sim_agents = 500;
    double sim_bounds = 0.5;
    double sim_lower = -1.0, sim_upper = -1.0;
    std::uint64_t sim_seed = 0;
    std::int64_t sim_steps = 100000;
    double sim_tol = 1e-8;
    std::string sim_init = "uniform";
    std::string sim_snapshot = "final";
    std::string sim_out = "bchom_sim";
    auto* simulate_cmd = app.add_subcommand(
        "simulate", "Run bounded-confidence dynamics and emit a synthetic fixture");
    simulate_cmd->add_option("--agents", sim_agents, "Number of agents");
    simulate_cmd->add_option("--bounds", sim_bounds, "Symmetric confidence bound");
    simulate_cmd->add_option("--lower", sim_lower, "Lower confidence bound (overrides --bounds)");
    simulate_cmd->add_option("--upper", sim_upper, "Upper confidence bound (overrides --bounds)");
    simulate_cmd->add_option("--seed", sim_seed, "Seed for the initial opinions");
    simulate_cmd->add_option("--steps", sim_steps, "Step cap");
    simulate_cmd->add_option("--tol", sim_tol, "Convergence tolerance (max-norm step)");
    simulate_cmd->add_option("--init", sim_init, "Initial opinions: uniform|bimodal");
    simulate_cmd->add_option("--snapshot", sim_snapshot,
                             "Which state becomes the fixture graph: initial|final");
    simulate_cmd->add_option("--out", sim_out, "Output directory");

    // topology
    detail::DatasetFlags topo_data;
    std::string topo_out = "bchom_topology";
    int topo_k = 5;
    auto* topology_cmd = app.add_subcommand("topology", "Graph-structure diagnostics only");
    detail::add_dataset_flags(topology_cmd, topo_data);
    topology_cmd->add_option("--out", topo_out, "Output directory");
    topology_cmd->add_option("--k", topo_k, "Opinion intervals for degree summaries");

    // report
    std::string report_path;
    std::string report_out = "bchom_tables";
    auto* report_cmd =
        app.add_subcommand("report", "Re-render the aggregate tables from a saved report.json");
    report_cmd->add_option("--report", report_path, "Path to report.json")->required();
    report_cmd->add_option("--out", report_out, "Output directory");

    try {
        std::vector<const char*> cargs;
        cargs.reserve(argv.size());
        for (const auto& a : argv) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);  // prints the contextual help text
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (analyze->parsed()) {
            if (!config_path.empty()) {
                AnalysisConfig file_config;
                load_config_file(file_config, config_path);
                // CLI flags win over file entries
                if (!opt_trials->count()) config.trials = file_config.trials;
                if (!opt_seed->count()) config.master_seed = file_config.master_seed;
                if (!opt_k->count()) config.partition_k = file_config.partition_k;
                if (!opt_bw->count()) config.decay_bin_width = file_config.decay_bin_width;
                if (!opt_cap->count()) config.retry_cap = file_config.retry_cap;
                if (!opt_persp->count()) config.perspective = file_config.perspective;
                if (!opt_model->count()) config.null_model = file_config.null_model;
                config.histogram_bins = file_config.histogram_bins;
            }
            if (opt_persp->count()) config.perspective = parse_perspective(perspective_arg);
            if (opt_model->count()) config.null_model = parse_null_model_choice(model_arg);
            config.validate();
            const auto analysis = analyze_files(analyze_data.edges, analyze_data.opinions,
                                                analyze_data.rescale_interval(), config);
            write_run_files(analysis.graph, analysis.run, analyze_out);
            const auto& rep = analysis.run.report;
            std::cout << "nodes=" << rep.n_total_nodes << " edges=" << rep.n_edges
                      << " duplicates_collapsed=" << rep.ingest.collapsed_duplicates
                      << " self_loops_dropped=" << rep.ingest.dropped_self_loops << "\n";
            for (const auto& section : rep.models) {
                std::cout << to_string(section.model) << ": R1_mean="
                          << section.rates.r1_mean << " R2_mean=" << section.rates.r2_mean
                          << " R3_empirical=" << section.rates.r3_empirical
                          << " R3_null_mean=" << section.rates.r3_null_mean << "\n";
            }
            std::cout << "report written to " << analyze_out << "/report.json" << std::endl;
        } else if (nulltrials->parsed()) {
            const auto data = load_dataset(trials_data.edges, trials_data.opinions,
                                           trials_data.rescale_interval());
            const auto trials =
                run_trials(data.graph, parse_perspective(trials_persp),
                           parse_null_model(trials_model), static_cast<std::size_t>(trials_count),
                           trials_seed, trials_cap);
            nlohmann::json out = nlohmann::json::array();
            for (const auto& t : trials) out.push_back(trial_to_json(t, data.graph));
            std::filesystem::create_directories(trials_out);
            const auto path = std::filesystem::path(trials_out) /
                              ("trials_" + trials_model + ".json");
            write_text_file(path.string(), out.dump(2) + "\n");
            std::cout << "wrote " << trials.size() << " trials to " << path.string() << std::endl;
        } else if (simulate_cmd->parsed()) {
            const double lower = sim_lower >= 0.0 ? sim_lower : sim_bounds;
            const double upper = sim_upper >= 0.0 ? sim_upper : sim_bounds;
            BCState init = sim_init == "bimodal"
                               ? bimodal_state(sim_agents, 0.05, 0.35, 0.65, 0.95, lower, upper,
                                               sim_seed)
                               : uniform_state(sim_agents, lower, upper, sim_seed);
            if (sim_init != "bimodal" && sim_init != "uniform") {
                throw ConfigError("unknown init '" + sim_init + "' (expected uniform|bimodal)");
            }
            const auto sim = simulate(init, sim_steps, sim_tol);
            BCState snap = init;
            if (sim_snapshot == "final") {
                snap.opinions = sim.trajectory.back();
            } else if (sim_snapshot != "initial") {
                throw ConfigError("unknown snapshot '" + sim_snapshot +
                                  "' (expected initial|final)");
            }
            detail::write_simulation_files(sim, snap, sim_out);
            std::cout << "steps=" << sim.steps << " converged=" << (sim.converged ? "yes" : "no")
                      << " clusters=" << sim.clusters.size() << " fixture in " << sim_out
                      << std::endl;
        } else if (topology_cmd->parsed()) {
            const auto data =
                load_dataset(topo_data.edges, topo_data.opinions, topo_data.rescale_interval());
            const auto topo = build_topology_report(data.graph, IntervalPartition{topo_k});
            write_topology_files(data.graph, topo, topo_out);
            std::cout << "topology tables in " << topo_out << std::endl;
        } else if (report_cmd->parsed()) {
            std::ifstream in(report_path);
            if (!in) throw IoError("cannot open report '" + report_path + "'");
            nlohmann::json j;
            in >> j;
            const AnalysisReport rep = report_from_json(j);
            write_report_tables(rep, report_out);
            std::cout << "tables re-rendered into " << report_out << std::endl;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}

}  // namespace bchom::cli
