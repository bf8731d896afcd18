#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bchom/csv.hpp"
#include "bchom/pipeline.hpp"

namespace bchom {

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
}

inline std::optional<double> opt_double(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

// infinities survive the JSON round trip as strings
inline nlohmann::json finite_or_tag(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double tagged_double(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

inline nlohmann::json histogram_json(const ComparedHistogram& h) {
    nlohmann::json j{{"lo", h.empirical.lo},
                     {"hi", h.empirical.hi},
                     {"counts", h.empirical.counts},
                     {"underflow", h.empirical.underflow},
                     {"overflow", h.empirical.overflow}};
    if (!h.null_mean.empty()) j["null_mean"] = h.null_mean;
    return j;
}

inline ComparedHistogram histogram_from_json(const nlohmann::json& j) {
    ComparedHistogram h;
    h.empirical.lo = j.at("lo").get<double>();
    h.empirical.hi = j.at("hi").get<double>();
    h.empirical.counts = j.at("counts").get<std::vector<std::int64_t>>();
    h.empirical.underflow = j.at("underflow").get<std::int64_t>();
    h.empirical.overflow = j.at("overflow").get<std::int64_t>();
    if (j.contains("null_mean")) h.null_mean = j.at("null_mean").get<std::vector<double>>();
    return h;
}

inline nlohmann::json test_json(const std::optional<TestResult>& t) {
    if (!t) return nlohmann::json{{"skipped", "fewer than two values in a sample"}};
    return nlohmann::json{{"t", finite_or_tag(t->t_statistic)},
                          {"p", t->p_value},
                          {"cohens_d", finite_or_tag(t->cohens_d)},
                          {"n_a", t->n_a},
                          {"n_b", t->n_b},
                          {"degenerate", t->degenerate}};
}

inline std::optional<TestResult> test_from_json(const nlohmann::json& j) {
    if (j.contains("skipped")) return std::nullopt;
    TestResult t;
    t.t_statistic = tagged_double(j.at("t"));
    t.p_value = j.at("p").get<double>();
    t.cohens_d = tagged_double(j.at("cohens_d"));
    t.n_a = j.at("n_a").get<std::int64_t>();
    t.n_b = j.at("n_b").get<std::int64_t>();
    t.degenerate = j.at("degenerate").get<bool>();
    return t;
}

inline nlohmann::json topology_section_json(const TopologySummarySection& s) {
    nlohmann::json degree_rows = nlohmann::json::array();
    for (std::size_t b = 0; b < s.degree_by_interval_rows.size(); ++b) {
        const auto& row = s.degree_by_interval_rows[b];
        if (row) {
            degree_rows.push_back({{"interval", b + 1},
                                   {"mean_in_degree", row->first},
                                   {"mean_out_degree", row->second}});
        } else {
            degree_rows.push_back({{"interval", b + 1},
                                   {"mean_in_degree", nullptr},
                                   {"mean_out_degree", nullptr}});
        }
    }
    return nlohmann::json{
        {"reciprocity", s.reciprocity},
        {"wcc_sizes", s.wcc_sizes},
        {"degree_by_interval", std::move(degree_rows)},
        {"clustering_formula",
         "triangles(i) / (d_tot(d_tot-1) - 2 d_mutual), triangles = (A+A^T)^3_ii / 2"},
        {"katz",
         {{"attenuation", s.katz_attenuation},
          {"lambda_max", s.katz_lambda_max},
          {"iterations", s.katz_iterations},
          {"residual", s.katz_residual}}},
        {"eigenvector",
         {{"lambda", s.eigen_lambda},
          {"iterations", s.eigen_iterations},
          {"component_size", s.eigen_component_size}}}};
}

}  // namespace detail

inline nlohmann::json report_to_json(const AnalysisReport& rep) {
    nlohmann::json j;
    j["config"] = {{"perspective", to_string(rep.config.perspective)},
                   {"trials", rep.config.trials},
                   {"master_seed", rep.config.master_seed},
                   {"partition_k", rep.config.partition_k},
                   {"decay_bin_width", rep.config.decay_bin_width},
                   {"null_model", to_string(rep.config.null_model)},
                   {"min_neighbors_r3", rep.config.min_neighbors_r3},
                   {"retry_cap", rep.config.retry_cap},
                   {"histogram_bins", rep.config.histogram_bins}};
    j["provenance"] = {{"tool_version", rep.tool_version},
                       {"edges_digest", rep.edges_digest},
                       {"opinions_digest", rep.opinions_digest}};
    j["ingestion"] = {{"edge_rows", rep.ingest.edge_rows},
                      {"collapsed_duplicates", rep.ingest.collapsed_duplicates},
                      {"dropped_self_loops", rep.ingest.dropped_self_loops},
                      {"isolated_nodes", rep.ingest.isolated_nodes},
                      {"rescaled", rep.ingest.rescaled},
                      {"rescale_lo", rep.ingest.rescale_lo},
                      {"rescale_hi", rep.ingest.rescale_hi}};
    j["dataset"] = {{"nodes_total", rep.n_total_nodes},
                    {"nodes_interacting", rep.n_interacting},
                    {"edges", rep.n_edges},
                    {"n_in_ge1", rep.n_in_ge1},
                    {"n_in_ge2", rep.n_in_ge2},
                    {"n_out_ge1", rep.n_out_ge1},
                    {"n_out_ge2", rep.n_out_ge2}};
    const auto spread = [](const RangeSpreadSummary& s) {
        return nlohmann::json{{"n", s.n},
                              {"median_c", detail::opt_json(s.median_c)},
                              {"iqr_c", detail::opt_json(s.iqr_c)}};
    };
    j["confidence_range_summary"] = {{"follower", spread(rep.range_summary_follower)},
                                     {"leader", spread(rep.range_summary_leader)}};
    j["histograms"] = {{"opinion", detail::histogram_json(rep.opinion_hist)},
                       {"gap", detail::histogram_json(rep.gap_hist)},
                       {"range", detail::histogram_json(rep.range_hist)},
                       {"mean_dev", detail::histogram_json(rep.mean_dev_hist)},
                       {"max_dev", detail::histogram_json(rep.max_dev_hist)}};

    nlohmann::json models = nlohmann::json::object();
    for (const auto& section : rep.models) {
        nlohmann::json per_trial = nlohmann::json::array();
        for (std::size_t t = 0; t < section.rates.per_trial.size(); ++t) {
            const auto& r = section.rates.per_trial[t];
            per_trial.push_back({{"trial", t},
                                 {"seed", r.trial_seed},
                                 {"r1", r.r1},
                                 {"r2", r.r2},
                                 {"r3", r.r3},
                                 {"r3_null", r.r3_null},
                                 {"n_r1r2", r.n_r1r2},
                                 {"n_r3", r.n_r3}});
        }
        nlohmann::json interval_rates = nlohmann::json::array();
        for (std::size_t b = 0; b < section.interval_rates.size(); ++b) {
            const auto& row = section.interval_rates[b];
            interval_rates.push_back({{"interval", b + 1},
                                      {"r1", detail::opt_json(row.r1)},
                                      {"r2", detail::opt_json(row.r2)},
                                      {"r3", detail::opt_json(row.r3)},
                                      {"r3_null", detail::opt_json(row.r3_null)},
                                      {"n1", row.n1},
                                      {"n3", row.n3},
                                      {"sat1", row.sat1},
                                      {"sat2", row.sat2},
                                      {"sat3", row.sat3},
                                      {"sat3_null", row.sat3_null}});
        }
        models[to_string(section.model)] = {
            {"rates",
             {{"per_trial", std::move(per_trial)},
              {"r1_mean", section.rates.r1_mean},
              {"r1_min", section.rates.r1_min},
              {"r1_max", section.rates.r1_max},
              {"r2_mean", section.rates.r2_mean},
              {"r2_min", section.rates.r2_min},
              {"r2_max", section.rates.r2_max},
              {"r3_empirical", section.rates.r3_empirical},
              {"r3_null_mean", section.rates.r3_null_mean},
              {"r3_null_min", section.rates.r3_null_min},
              {"r3_null_max", section.rates.r3_null_max},
              {"skipped_per_trial", section.rates.skipped_per_trial},
              {"skipped_nodes", section.rates.skipped_nodes}}},
            {"tests",
             {{"null_sample", "pooled over all trials"},
              {"direction", "a = null, b = empirical; positive d means empirical smaller"},
              {"range", detail::test_json(section.tests.range)},
              {"mean_dev", detail::test_json(section.tests.mean_dev)},
              {"max_dev", detail::test_json(section.tests.max_dev)}}},
            {"null_matrix_mean", section.null_matrix_mean},
            {"residual_matrix", section.residual},
            {"interval_rates", std::move(interval_rates)}};
    }
    j["models"] = std::move(models);
    j["table_model"] = to_string(rep.table_model);
    j["comparison_model"] = to_string(rep.comparison_model);

    nlohmann::json offsets = nlohmann::json::array();
    for (std::size_t b = 0; b < rep.offset_rows.size(); ++b) {
        const auto& row = rep.offset_rows[b];
        offsets.push_back({{"interval", b + 1},
                           {"mean_neg_gamma", detail::opt_json(row.mean_neg_gamma)},
                           {"mean_delta", detail::opt_json(row.mean_delta)},
                           {"mean_asymmetry", detail::opt_json(row.mean_asymmetry)},
                           {"n_egos", row.n_egos},
                           {"asymmetry_absent", row.asymmetry_absent}});
    }
    j["intervals"] = {{"k", rep.config.partition_k},
                      {"empirical_matrix", rep.empirical_matrix},
                      {"chord_counts", rep.chord_counts},
                      {"offsets", std::move(offsets)}};

    j["decay"] = {{"bin_width", rep.config.decay_bin_width},
                  {"evaluated", rep.decay.evaluated},
                  {"dd", rep.decay.dd},
                  {"ndd", rep.decay.ndd},
                  {"undefined", rep.decay.undefined},
                  {"negative_r", rep.decay.negative_r},
                  {"r_absent", rep.decay.r_absent},
                  {"mean_r", detail::opt_json(rep.decay.mean_r)}};

    j["topology"] = detail::topology_section_json(rep.topology);
    return j;
}

inline AnalysisReport report_from_json(const nlohmann::json& j) {
    AnalysisReport rep;
    const auto& jc = j.at("config");
    rep.config.perspective = parse_perspective(jc.at("perspective").get<std::string>());
    rep.config.trials = jc.at("trials").get<int>();
    rep.config.master_seed = jc.at("master_seed").get<std::uint64_t>();
    rep.config.partition_k = jc.at("partition_k").get<int>();
    rep.config.decay_bin_width = jc.at("decay_bin_width").get<double>();
    rep.config.null_model = parse_null_model_choice(jc.at("null_model").get<std::string>());
    rep.config.retry_cap = jc.at("retry_cap").get<std::size_t>();
    rep.config.histogram_bins = jc.at("histogram_bins").get<int>();

    const auto& jp = j.at("provenance");
    rep.tool_version = jp.at("tool_version").get<std::string>();
    rep.edges_digest = jp.at("edges_digest").get<std::string>();
    rep.opinions_digest = jp.at("opinions_digest").get<std::string>();

    const auto& ji = j.at("ingestion");
    rep.ingest.edge_rows = ji.at("edge_rows").get<std::size_t>();
    rep.ingest.collapsed_duplicates = ji.at("collapsed_duplicates").get<std::size_t>();
    rep.ingest.dropped_self_loops = ji.at("dropped_self_loops").get<std::size_t>();
    rep.ingest.isolated_nodes = ji.at("isolated_nodes").get<std::size_t>();
    rep.ingest.rescaled = ji.at("rescaled").get<bool>();
    rep.ingest.rescale_lo = ji.at("rescale_lo").get<double>();
    rep.ingest.rescale_hi = ji.at("rescale_hi").get<double>();

    const auto& jd = j.at("dataset");
    rep.n_total_nodes = jd.at("nodes_total").get<std::int64_t>();
    rep.n_interacting = jd.at("nodes_interacting").get<std::int64_t>();
    rep.n_edges = jd.at("edges").get<std::int64_t>();
    rep.n_in_ge1 = jd.at("n_in_ge1").get<std::int64_t>();
    rep.n_in_ge2 = jd.at("n_in_ge2").get<std::int64_t>();
    rep.n_out_ge1 = jd.at("n_out_ge1").get<std::int64_t>();
    rep.n_out_ge2 = jd.at("n_out_ge2").get<std::int64_t>();

    const auto spread = [](const nlohmann::json& s) {
        RangeSpreadSummary out;
        out.n = s.at("n").get<std::int64_t>();
        out.median_c = detail::opt_double(s.at("median_c"));
        out.iqr_c = detail::opt_double(s.at("iqr_c"));
        return out;
    };
    rep.range_summary_follower = spread(j.at("confidence_range_summary").at("follower"));
    rep.range_summary_leader = spread(j.at("confidence_range_summary").at("leader"));

    const auto& jh = j.at("histograms");
    rep.opinion_hist = detail::histogram_from_json(jh.at("opinion"));
    rep.gap_hist = detail::histogram_from_json(jh.at("gap"));
    rep.range_hist = detail::histogram_from_json(jh.at("range"));
    rep.mean_dev_hist = detail::histogram_from_json(jh.at("mean_dev"));
    rep.max_dev_hist = detail::histogram_from_json(jh.at("max_dev"));

    for (const auto& [name, jm] : j.at("models").items()) {
        ModelSection section;
        section.model = parse_null_model(name);
        const auto& jr = jm.at("rates");
        for (const auto& row : jr.at("per_trial")) {
            RateReport r;
            r.trial_seed = row.at("seed").get<std::uint64_t>();
            r.r1 = row.at("r1").get<double>();
            r.r2 = row.at("r2").get<double>();
            r.r3 = row.at("r3").get<double>();
            r.r3_null = row.at("r3_null").get<double>();
            r.n_r1r2 = row.at("n_r1r2").get<std::int64_t>();
            r.n_r3 = row.at("n_r3").get<std::int64_t>();
            section.rates.per_trial.push_back(r);
        }
        section.rates.r1_mean = jr.at("r1_mean").get<double>();
        section.rates.r1_min = jr.at("r1_min").get<double>();
        section.rates.r1_max = jr.at("r1_max").get<double>();
        section.rates.r2_mean = jr.at("r2_mean").get<double>();
        section.rates.r2_min = jr.at("r2_min").get<double>();
        section.rates.r2_max = jr.at("r2_max").get<double>();
        section.rates.r3_empirical = jr.at("r3_empirical").get<double>();
        section.rates.r3_null_mean = jr.at("r3_null_mean").get<double>();
        section.rates.r3_null_min = jr.at("r3_null_min").get<double>();
        section.rates.r3_null_max = jr.at("r3_null_max").get<double>();
        section.rates.skipped_per_trial =
            jr.at("skipped_per_trial").get<std::vector<std::int64_t>>();
        section.rates.skipped_nodes = jr.at("skipped_nodes").get<std::vector<std::string>>();
        const auto& jt = jm.at("tests");
        section.tests.range = detail::test_from_json(jt.at("range"));
        section.tests.mean_dev = detail::test_from_json(jt.at("mean_dev"));
        section.tests.max_dev = detail::test_from_json(jt.at("max_dev"));
        section.null_matrix_mean = jm.at("null_matrix_mean").get<std::vector<double>>();
        section.residual = jm.at("residual_matrix").get<std::vector<double>>();
        for (const auto& row : jm.at("interval_rates")) {
            IntervalRateRow r;
            r.r1 = detail::opt_double(row.at("r1"));
            r.r2 = detail::opt_double(row.at("r2"));
            r.r3 = detail::opt_double(row.at("r3"));
            r.r3_null = detail::opt_double(row.at("r3_null"));
            r.n1 = row.at("n1").get<std::int64_t>();
            r.n3 = row.at("n3").get<std::int64_t>();
            r.sat1 = row.at("sat1").get<std::int64_t>();
            r.sat2 = row.at("sat2").get<std::int64_t>();
            r.sat3 = row.at("sat3").get<std::int64_t>();
            r.sat3_null = row.at("sat3_null").get<std::int64_t>();
            section.interval_rates.push_back(r);
        }
        rep.models.push_back(std::move(section));
    }
    rep.table_model = parse_null_model(j.at("table_model").get<std::string>());
    rep.comparison_model = parse_null_model(j.at("comparison_model").get<std::string>());

    const auto& jiv = j.at("intervals");
    rep.empirical_matrix = jiv.at("empirical_matrix").get<std::vector<double>>();
    rep.chord_counts = jiv.at("chord_counts").get<std::vector<std::int64_t>>();
    for (const auto& row : jiv.at("offsets")) {
        OffsetSummaryRow r;
        r.mean_neg_gamma = detail::opt_double(row.at("mean_neg_gamma"));
        r.mean_delta = detail::opt_double(row.at("mean_delta"));
        r.mean_asymmetry = detail::opt_double(row.at("mean_asymmetry"));
        r.n_egos = row.at("n_egos").get<std::int64_t>();
        r.asymmetry_absent = row.at("asymmetry_absent").get<std::int64_t>();
        rep.offset_rows.push_back(r);
    }

    const auto& jdec = j.at("decay");
    rep.decay.evaluated = jdec.at("evaluated").get<std::int64_t>();
    rep.decay.dd = jdec.at("dd").get<std::int64_t>();
    rep.decay.ndd = jdec.at("ndd").get<std::int64_t>();
    rep.decay.undefined = jdec.at("undefined").get<std::int64_t>();
    rep.decay.negative_r = jdec.at("negative_r").get<std::int64_t>();
    rep.decay.r_absent = jdec.at("r_absent").get<std::int64_t>();
    rep.decay.mean_r = detail::opt_double(jdec.at("mean_r"));

    const auto& jtop = j.at("topology");
    rep.topology.reciprocity = jtop.at("reciprocity").get<double>();
    rep.topology.wcc_sizes = jtop.at("wcc_sizes").get<std::vector<std::int64_t>>();
    for (const auto& row : jtop.at("degree_by_interval")) {
        if (row.at("mean_in_degree").is_null()) {
            rep.topology.degree_by_interval_rows.push_back(std::nullopt);
        } else {
            rep.topology.degree_by_interval_rows.push_back(std::make_pair(
                row.at("mean_in_degree").get<double>(), row.at("mean_out_degree").get<double>()));
        }
    }
    rep.topology.katz_attenuation = jtop.at("katz").at("attenuation").get<double>();
    rep.topology.katz_lambda_max = jtop.at("katz").at("lambda_max").get<double>();
    rep.topology.katz_iterations = jtop.at("katz").at("iterations").get<int>();
    rep.topology.katz_residual = jtop.at("katz").at("residual").get<double>();
    rep.topology.eigen_lambda = jtop.at("eigenvector").at("lambda").get<double>();
    rep.topology.eigen_iterations = jtop.at("eigenvector").at("iterations").get<int>();
    rep.topology.eigen_component_size = jtop.at("eigenvector").at("component_size").get<std::int64_t>();
    return rep;
}

namespace detail {

inline std::string opt_field(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

inline std::string histogram_csv(const ComparedHistogram& h) {
    std::string out = h.null_mean.empty() ? "bin_lo,bin_hi,count\n"
                                          : "bin_lo,bin_hi,empirical,null_mean\n";
    const double width =
        (h.empirical.hi - h.empirical.lo) / static_cast<double>(h.empirical.counts.size());
    for (std::size_t i = 0; i < h.empirical.counts.size(); ++i) {
        const double lo = h.empirical.lo + width * static_cast<double>(i);
        const double hi = i + 1 == h.empirical.counts.size() ? h.empirical.hi
                                                             : h.empirical.lo + width * (i + 1.0);
        out += csv::format_double(lo) + "," + csv::format_double(hi) + "," +
               std::to_string(h.empirical.counts[i]);
        if (!h.null_mean.empty()) out += "," + csv::format_double(h.null_mean[i]);
        out += "\n";
    }
    return out;
}

inline std::string matrix_csv(const std::vector<double>& cells, int k) {
    std::string out = "src_interval";
    for (int c = 1; c <= k; ++c) out += ",dst_" + std::to_string(c);
    out += "\n";
    for (int r = 0; r < k; ++r) {
        out += std::to_string(r + 1);
        for (int c = 0; c < k; ++c) {
            out += "," + csv::format_double(cells[static_cast<std::size_t>(r) * k + c]);
        }
        out += "\n";
    }
    return out;
}

inline const ModelSection& section_for(const AnalysisReport& rep, NullModel model) {
    for (const auto& s : rep.models) {
        if (s.model == model) return s;
    }
    throw Error("report does not contain the requested null model section");
}

}  // namespace detail

/// Writes every aggregate table that can be re-rendered from report.json.
inline void write_report_tables(const AnalysisReport& rep, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int k = rep.config.partition_k;

    write_text_file((dir / "fig2_opinion_hist.csv").string(),
                    detail::histogram_csv(rep.opinion_hist));
    write_text_file((dir / "fig2_gap_hist.csv").string(), detail::histogram_csv(rep.gap_hist));
    write_text_file((dir / "fig3_range_hist.csv").string(), detail::histogram_csv(rep.range_hist));
    write_text_file((dir / "fig3_mean_dev_hist.csv").string(),
                    detail::histogram_csv(rep.mean_dev_hist));
    write_text_file((dir / "fig3_max_dev_hist.csv").string(),
                    detail::histogram_csv(rep.max_dev_hist));

    std::string rates = "model,trial,seed,r1,r2,r3,r3_null,n_r1r2,n_r3\n";
    for (const auto& section : rep.models) {
        for (std::size_t t = 0; t < section.rates.per_trial.size(); ++t) {
            const auto& r = section.rates.per_trial[t];
            rates += std::string(to_string(section.model)) + "," + std::to_string(t) + "," +
                     std::to_string(r.trial_seed) + "," + csv::format_double(r.r1) + "," +
                     csv::format_double(r.r2) + "," + csv::format_double(r.r3) + "," +
                     csv::format_double(r.r3_null) + "," + std::to_string(r.n_r1r2) + "," +
                     std::to_string(r.n_r3) + "\n";
        }
    }
    write_text_file((dir / "fig4_rates.csv").string(), rates);

    write_text_file((dir / "interaction_matrix.csv").string(),
                    detail::matrix_csv(rep.empirical_matrix, k));
    const auto& table_section = detail::section_for(rep, rep.table_model);
    write_text_file((dir / "residual_matrix.csv").string(),
                    detail::matrix_csv(table_section.residual, k));
    write_text_file((dir / "null_matrix_mean.csv").string(),
                    detail::matrix_csv(table_section.null_matrix_mean, k));

    std::string interval_rates = "interval,R1,R2,R3,n1,n3\n";
    for (int b = 0; b < k; ++b) {
        const auto& row = table_section.interval_rates[b];
        interval_rates += std::to_string(b + 1) + "," + detail::opt_field(row.r1) + "," +
                          detail::opt_field(row.r2) + "," + detail::opt_field(row.r3) + "," +
                          std::to_string(row.n1) + "," + std::to_string(row.n3) + "\n";
    }
    write_text_file((dir / "interval_rates.csv").string(), interval_rates);

    std::string offsets = "interval,stat,value\n";
    for (int b = 0; b < k; ++b) {
        const auto& row = rep.offset_rows[b];
        const auto emit = [&](const std::string& stat, const std::string& value) {
            offsets += std::to_string(b + 1) + "," + stat + "," + value + "\n";
        };
        emit("mean_neg_gamma", detail::opt_field(row.mean_neg_gamma));
        emit("mean_delta", detail::opt_field(row.mean_delta));
        emit("mean_asymmetry", detail::opt_field(row.mean_asymmetry));
        emit("n_egos", std::to_string(row.n_egos));
        emit("asymmetry_absent", std::to_string(row.asymmetry_absent));
    }
    write_text_file((dir / "interval_offsets.csv").string(), offsets);

    std::string chord = "src,dst,count\n";
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            chord += std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
                     std::to_string(rep.chord_counts[static_cast<std::size_t>(r) * k + c]) + "\n";
        }
    }
    write_text_file((dir / "chord.csv").string(), chord);
}

/// Per-node centralities plus the machine-readable topology summary.
inline void write_topology_files(const OpinionGraph& g, const TopologyReport& topo,
                                 const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string topology = "node,in_deg,out_deg,clustering,katz,eigenvector\n";
    for (NodeId i = 0; i < g.node_count(); ++i) {
        topology += g.name_of(i) + "," + std::to_string(g.in_neighbors(i).size()) + "," +
                    std::to_string(g.out_neighbors(i).size()) + "," +
                    csv::format_double(topo.clustering[i]) + "," +
                    csv::format_double(topo.katz.values[i]) + "," +
                    csv::format_double(topo.eigenvector.values[i]) + "\n";
    }
    write_text_file((dir / "topology.csv").string(), topology);
    const auto summary = detail::topology_section_json(topology_summary_section(topo));
    write_text_file((dir / "topology_summary.json").string(), summary.dump(2) + "\n");
}

/// Per-node exports that accompany a fresh analysis run.
inline void write_artifact_tables(const OpinionGraph& g, const AnalysisRun& run,
                                  const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::string profiles =
        "node,perspective,n,gap,alpha,beta,range,mean_dev,max_dev,gamma,delta,asymmetry,inclusion\n";
    for (const auto& pr : run.artifacts.profiles) {
        profiles += g.name_of(pr.ego) + "," + to_string(pr.perspective) + "," +
                    std::to_string(pr.n) + "," + csv::format_double(pr.gap) + "," +
                    csv::format_double(pr.alpha) + "," + csv::format_double(pr.beta) + "," +
                    csv::format_double(pr.range) + "," + csv::format_double(pr.mean_dev) + "," +
                    csv::format_double(pr.max_dev) + "," + csv::format_double(pr.gamma) + "," +
                    csv::format_double(pr.delta) + "," + detail::opt_field(pr.asymmetry) + "," +
                    (pr.inclusion ? "true" : "false") + "\n";
    }
    write_text_file((dir / "profiles.csv").string(), profiles);

    std::size_t max_bins = 0;
    for (const auto& d : run.artifacts.decay) max_bins = std::max(max_bins, d.bin_counts.size());
    std::string decay = "node,pearson_r,classification";
    for (std::size_t b = 1; b <= max_bins; ++b) decay += ",bin_" + std::to_string(b);
    decay += "\n";
    for (const auto& d : run.artifacts.decay) {
        decay += g.name_of(d.ego) + "," + detail::opt_field(d.pearson_r) + "," +
                 to_string(d.classification);
        for (std::size_t b = 0; b < max_bins; ++b) {
            decay += ",";
            if (b < d.bin_counts.size()) decay += std::to_string(d.bin_counts[b]);
        }
        decay += "\n";
    }
    write_text_file((dir / "decay.csv").string(), decay);

    write_topology_files(g, run.artifacts.topology, dir);
}

/// Full output of an `analyze` run: report.json plus every table.
inline void write_run_files(const OpinionGraph& g, const AnalysisRun& run,
                            const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file((dir / "report.json").string(), report_to_json(run.report).dump(2) + "\n");
    write_report_tables(run.report, dir);
    write_artifact_tables(g, run, dir);
}

/// Flat key=value config file; later entries win, CLI flags override both.
inline void apply_config_entry(AnalysisConfig& config, const std::string& key,
                               const std::string& value) {
    try {
        if (key == "perspective") {
            config.perspective = parse_perspective(value);
        } else if (key == "trials") {
            config.trials = std::stoi(value);
        } else if (key == "seed") {
            config.master_seed = std::stoull(value);
        } else if (key == "partition_k") {
            config.partition_k = std::stoi(value);
        } else if (key == "decay_bin_width") {
            config.decay_bin_width = std::stod(value);
        } else if (key == "null_model") {
            config.null_model = parse_null_model_choice(value);
        } else if (key == "retry_cap") {
            config.retry_cap = static_cast<std::size_t>(std::stoull(value));
        } else if (key == "histogram_bins") {
            config.histogram_bins = std::stoi(value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("invalid value '" + value + "' for config key '" + key + "'");
    }
}

inline void load_config_file(AnalysisConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = csv::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        apply_config_entry(config, csv::trim(t.substr(0, eq)), csv::trim(t.substr(eq + 1)));
    }
}

}  // namespace bchom
