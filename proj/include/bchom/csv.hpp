#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "bchom/common.hpp"
#include "bchom/graph.hpp"

namespace bchom {

namespace csv {

/// Shortest round-trip decimal form of a double (locale independent).
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_line(const std::string& line, const std::string& file,
                                           std::size_t line_no) {
    if (line.find('"') != std::string::npos) {
        throw IoError(file + ":" + std::to_string(line_no) +
                      ": quoted fields are not supported; node ids must be plain strings");
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

inline double parse_double(const std::string& field, const std::string& file,
                           std::size_t line_no) {
    const std::string t = trim(field);
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw IoError(file + ":" + std::to_string(line_no) + ": cannot parse number '" + field +
                      "'");
    }
    return value;
}

}  // namespace csv

/// Reads a `src,dst` edge list (UTF-8, one directed edge per row).
inline std::vector<std::pair<std::string, std::string>> read_edge_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<std::string, std::string>> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line, path, line_no);
        if (line_no == 1) {
            if (fields.size() != 2 || fields[0] != "src" || fields[1] != "dst") {
                throw IoError(path + ":1: expected header 'src,dst'");
            }
            continue;
        }
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected two non-empty fields 'src,dst'");
        }
        edges.emplace_back(fields[0], fields[1]);
    }
    if (line_no == 0) throw IoError(path + ": empty file, expected 'src,dst' header");
    return edges;
}

/// Reads a `node,opinion` file; duplicate node rows are rejected.
inline std::map<std::string, double> read_opinion_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open opinion file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, double> opinions;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line, path, line_no);
        if (line_no == 1) {
            if (fields.size() != 2 || fields[0] != "node" || fields[1] != "opinion") {
                throw IoError(path + ":1: expected header 'node,opinion'");
            }
            continue;
        }
        if (fields.size() != 2 || fields[0].empty()) {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected two fields 'node,opinion'");
        }
        const double value = csv::parse_double(fields[1], path, line_no);
        if (!opinions.emplace(fields[0], value).second) {
            throw IoError(path + ":" + std::to_string(line_no) + ": duplicate opinion for node '" +
                          fields[0] + "'");
        }
    }
    if (line_no == 0) throw IoError(path + ": empty file, expected 'node,opinion' header");
    return opinions;
}

struct IngestStats {
    std::size_t edge_rows = 0;
    std::size_t collapsed_duplicates = 0;
    std::size_t dropped_self_loops = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t isolated_nodes = 0;
    bool rescaled = false;
    double rescale_lo = 0.0;
    double rescale_hi = 1.0;
};

struct LoadedDataset {
    OpinionGraph graph;
    IngestStats stats;
};

/// Builds the graph from the two CSV schemas, with optional affine rescaling
/// of the raw opinion values into [0,1] first.
inline LoadedDataset load_dataset(const std::string& edge_path, const std::string& opinion_path,
                                  std::optional<std::pair<double, double>> rescale = std::nullopt) {
    const auto edges = read_edge_csv(edge_path);
    auto opinions = read_opinion_csv(opinion_path);
    IngestStats stats;
    stats.edge_rows = edges.size();
    if (rescale) {
        opinions = rescale_opinions(opinions, rescale->first, rescale->second);
        stats.rescaled = true;
        stats.rescale_lo = rescale->first;
        stats.rescale_hi = rescale->second;
    }
    LoadedDataset out{OpinionGraph::build(edges, opinions), stats};
    out.stats.collapsed_duplicates = out.graph.collapsed_duplicates();
    out.stats.dropped_self_loops = out.graph.dropped_self_loops();
    out.stats.nodes = out.graph.node_count();
    out.stats.edges = out.graph.edge_count();
    out.stats.isolated_nodes = out.graph.node_count() - out.graph.interacting_nodes().size();
    return out;
}

/// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for digesting");
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001B3ULL;
        }
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace bchom
