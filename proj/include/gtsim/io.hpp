#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/algorithms.hpp"
#include "gtsim/common.hpp"
#include "gtsim/mixing.hpp"

namespace gtsim {

// Adjacency-list text format: one line per node, whitespace-separated
// 0-based neighbor indices; blank line = isolated node.
inline Graph parse_adjacency_list(std::istream& in) {
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int node = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        int nb;
        while (ls >> nb) {
            if (nb < 0) throw invalid_input("adjacency list: negative node index");
            if (nb != node) edges.emplace_back(std::min(node, nb), std::max(node, nb));
        }
        if (!ls.eof()) throw invalid_input("adjacency list: non-integer token on line " +
                                           std::to_string(node + 1));
        ++node;
    }
    if (node == 0) throw invalid_input("adjacency list: empty input");
    for (auto& e : edges)
        if (e.second >= node)
            throw invalid_input("adjacency list: neighbor index out of range");
    return Graph::from_edges(node, std::move(edges));
}

inline Graph load_adjacency_list(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw invalid_input("cannot open graph file: " + path);
    return parse_adjacency_list(f);
}

inline void write_adjacency_list(std::ostream& out, const Graph& g) {
    std::vector<std::vector<int>> adj(g.n);
    for (auto& e : g.edges) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    for (int i = 0; i < g.n; ++i) {
        for (std::size_t k = 0; k < adj[i].size(); ++k)
            out << (k ? " " : "") << adj[i][k];
        out << "\n";
    }
}

// Row-major CSV, 17 significant digits.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out << (c ? "," : "") << format_g17(m(r, c));
        out << "\n";
    }
}

inline Eigen::MatrixXd read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw invalid_input("csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw invalid_input("csv: empty input");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

// Consensus targets: one CSV row per worker -> d x n column layout.
inline Eigen::MatrixXd load_targets_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw invalid_input("cannot open targets file: " + path);
    return read_matrix_csv(f).transpose();
}

inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    out << "t,opt_error,consensus_dist,mean_dist_to_opt\n";
    for (const auto& s : trace.snapshots)
        out << s.t << "," << format_g17(s.opt_error) << "," << format_g17(s.consensus_dist) << ","
            << format_g17(s.mean_dist) << "\n";
}

}  // namespace gtsim
