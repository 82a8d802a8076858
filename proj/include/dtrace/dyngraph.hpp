#pragma once

#include "dtrace/oracle.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dtrace {

enum class EdgeListFormat { snap, matrix_market };

EdgeListFormat parse_edge_list_format(const std::string& name);

/**
 Unweighted undirected graph with reference-counted edges.

 Every unordered pair carries a multiplicity; the adjacency entry is 1 while
 the multiplicity is positive. Cliques added through add_clique are logged so
 they can later be removed without disturbing edges that other insertions
 still hold.
 */
class DynamicGraph {
public:
    using Node = std::int32_t;
    using CliqueId = std::int64_t;

    explicit DynamicGraph(Index n);

    Index node_count() const { return n_; }
    std::size_t edge_count() const { return multiplicity_.size(); }
    bool has_edge(Node u, Node v) const;
    int multiplicity(Node u, Node v) const;
    const std::vector<Node>& neighbors(Node u) const { return adj_[static_cast<std::size_t>(u)]; }

    /// Adds one reference to {u, v}; self loops are rejected.
    void add_edge(Node u, Node v);
    void remove_edge(Node u, Node v);

    CliqueId add_clique(const std::vector<Node>& nodes);
    void remove_clique(CliqueId id);
    const std::map<CliqueId, std::vector<Node>>& clique_log() const { return cliques_; }

    /// Uniformly random non-adjacent pair, deterministic in (seed, step). Throws on a complete graph.
    std::pair<Node, Node> add_random_edge(std::uint64_t seed, std::uint64_t step);

    Vector adjacency_matvec(const Vector& x) const;
    Matrix adjacency_matvec(const Matrix& x) const;
    /// Snapshot of the current adjacency.
    SparseMatrix adjacency() const;
    Matrix dense_adjacency() const;

    /// Map from packed pair key to multiplicity; exposed for replay checks.
    const std::unordered_map<std::uint64_t, int>& multiplicities() const { return multiplicity_; }

private:
    std::uint64_t key(Node u, Node v) const;
    void check_node(Node u) const;
    void link(Node u, Node v);
    void unlink(Node u, Node v);

    Index n_;
    std::unordered_map<std::uint64_t, int> multiplicity_;
    std::vector<std::vector<Node>> adj_;  // sorted
    std::map<CliqueId, std::vector<Node>> cliques_;
    CliqueId next_clique_ = 0;
};

/// Parses a SNAP edge list ('#' comments, 0-based ids, n = max id + 1) or a
/// MatrixMarket coordinate file ('%' comments, 1-based). Self loops are dropped,
/// duplicates collapse to multiplicity 1. Errors carry the line number.
DynamicGraph load_edge_list(std::istream& in, EdgeListFormat format);
DynamicGraph load_edge_list_file(const std::string& path, EdgeListFormat format);

/// Adjacency oracle over a snapshot of `graph` (cost 1).
MatVecOracle adjacency_oracle(const DynamicGraph& graph);

/// Exact count by sorted neighbor-list intersection; requires n ≤ 5·10⁴.
std::int64_t exact_triangles(const DynamicGraph& graph);

DynamicGraph erdos_renyi(Index n, double p, std::uint64_t seed);

/**
 Clique insertion/deletion process: each update before `delete_after` adds a
 clique on k distinct random nodes (k uniform in [k_min, k_max], capped at n);
 later updates delete one uniformly chosen live clique.
 */
struct CliqueDynamics {
    int k_min = 10;
    int k_max = 150;
    std::size_t delete_after = 75;
    std::uint64_t seed = 0;

    /// Applies the update that produces time step `step` (≥ 2).
    void apply(DynamicGraph& graph, std::size_t step) const;
};

}  // namespace dtrace
