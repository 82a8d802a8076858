#include "dtrace/dyngraph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dtrace {

namespace {

std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t step, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                      static_cast<std::uint32_t>(salt)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    throw std::runtime_error("edge list line " + std::to_string(line) + ": " + what);
}

}  // namespace

EdgeListFormat parse_edge_list_format(const std::string& name) {
    if (name == "snap") return EdgeListFormat::snap;
    if (name == "matrix-market" || name == "mtx" || name == "matrix_market") return EdgeListFormat::matrix_market;
    throw std::invalid_argument("unknown graph format '" + name + "' (expected snap or matrix-market)");
}

DynamicGraph::DynamicGraph(Index n) : n_(n), adj_(static_cast<std::size_t>(n)) {
    if (n < 1) throw std::invalid_argument("DynamicGraph: node count must be >= 1");
    if (n > std::numeric_limits<Node>::max()) throw std::invalid_argument("DynamicGraph: too many nodes");
}

std::uint64_t DynamicGraph::key(Node u, Node v) const {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

void DynamicGraph::check_node(Node u) const {
    if (u < 0 || u >= n_) throw std::out_of_range("node " + std::to_string(u) + " out of range [0, " + std::to_string(n_) + ")");
}

bool DynamicGraph::has_edge(Node u, Node v) const { return multiplicity(u, v) > 0; }

int DynamicGraph::multiplicity(Node u, Node v) const {
    check_node(u);
    check_node(v);
    if (u == v) return 0;
    const auto it = multiplicity_.find(key(u, v));
    return it == multiplicity_.end() ? 0 : it->second;
}

void DynamicGraph::link(Node u, Node v) {
    auto& a = adj_[static_cast<std::size_t>(u)];
    a.insert(std::lower_bound(a.begin(), a.end(), v), v);
    auto& b = adj_[static_cast<std::size_t>(v)];
    b.insert(std::lower_bound(b.begin(), b.end(), u), u);
}

void DynamicGraph::unlink(Node u, Node v) {
    auto& a = adj_[static_cast<std::size_t>(u)];
    a.erase(std::lower_bound(a.begin(), a.end(), v));
    auto& b = adj_[static_cast<std::size_t>(v)];
    b.erase(std::lower_bound(b.begin(), b.end(), u));
}

void DynamicGraph::add_edge(Node u, Node v) {
    check_node(u);
    check_node(v);
    if (u == v) throw std::invalid_argument("DynamicGraph: self loops are not allowed");
    int& m = multiplicity_[key(u, v)];
    if (m++ == 0) link(u, v);
}

void DynamicGraph::remove_edge(Node u, Node v) {
    check_node(u);
    check_node(v);
    const auto it = multiplicity_.find(key(u, v));
    if (u == v || it == multiplicity_.end())
        throw std::invalid_argument("DynamicGraph: removing an absent edge");
    if (--it->second == 0) {
        multiplicity_.erase(it);
        unlink(u, v);
    }
}

DynamicGraph::CliqueId DynamicGraph::add_clique(const std::vector<Node>& nodes) {
    if (nodes.size() < 2) throw std::invalid_argument("add_clique: need at least two nodes");
    for (Node u : nodes) check_node(u);
    std::vector<Node> sorted = nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("add_clique: nodes must be distinct");
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j) add_edge(sorted[i], sorted[j]);
    const CliqueId id = next_clique_++;
    cliques_.emplace(id, std::move(sorted));
    return id;
}

void DynamicGraph::remove_clique(CliqueId id) {
    const auto it = cliques_.find(id);
    if (it == cliques_.end()) throw std::invalid_argument("remove_clique: unknown clique id " + std::to_string(id));
    const auto& nodes = it->second;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j) remove_edge(nodes[i], nodes[j]);
    cliques_.erase(it);
}

std::pair<DynamicGraph::Node, DynamicGraph::Node> DynamicGraph::add_random_edge(std::uint64_t seed,
                                                                                std::uint64_t step) {
    const std::uint64_t pairs = static_cast<std::uint64_t>(n_) * static_cast<std::uint64_t>(n_ - 1) / 2;
    if (multiplicity_.size() >= pairs) throw std::runtime_error("add_random_edge: graph is complete");
    std::mt19937_64 rng(seed_mix(seed, step, 0xed9eULL));
    std::uniform_int_distribution<Node> pick(0, static_cast<Node>(n_ - 1));
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Node u = pick(rng);
        const Node v = pick(rng);
        if (u != v && !has_edge(u, v)) {
            add_edge(u, v);
            return {std::min(u, v), std::max(u, v)};
        }
    }
    // Dense graph: choose the r-th non-edge in lexicographic order.
    std::uniform_int_distribution<std::uint64_t> rank(0, pairs - multiplicity_.size() - 1);
    std::uint64_t r = rank(rng);
    for (Node u = 0; u < n_; ++u) {
        const auto& nb = adj_[static_cast<std::size_t>(u)];
        const auto higher = static_cast<std::uint64_t>(nb.end() - std::upper_bound(nb.begin(), nb.end(), u));
        const std::uint64_t free = static_cast<std::uint64_t>(n_ - 1 - u) - higher;
        if (r >= free) {
            r -= free;
            continue;
        }
        for (Node v = u + 1; v < n_; ++v) {
            if (has_edge(u, v)) continue;
            if (r-- == 0) {
                add_edge(u, v);
                return {u, v};
            }
        }
    }
    throw std::logic_error("add_random_edge: non-edge enumeration out of sync");
}

Matrix DynamicGraph::adjacency_matvec(const Matrix& x) const {
    if (x.rows() != n_) throw std::invalid_argument("adjacency_matvec: length mismatch");
    Matrix y = Matrix::Zero(n_, x.cols());
    for (Index u = 0; u < n_; ++u)
        for (Node v : adj_[static_cast<std::size_t>(u)]) y.row(u) += x.row(v);
    return y;
}

Vector DynamicGraph::adjacency_matvec(const Vector& x) const {
    if (x.size() != n_) throw std::invalid_argument("adjacency_matvec: length mismatch");
    Vector y = Vector::Zero(n_);
    for (Index u = 0; u < n_; ++u)
        for (Node v : adj_[static_cast<std::size_t>(u)]) y(u) += x(v);
    return y;
}

SparseMatrix DynamicGraph::adjacency() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * multiplicity_.size());
    for (Index u = 0; u < n_; ++u)
        for (Node v : adj_[static_cast<std::size_t>(u)]) trips.emplace_back(u, v, 1.0);
    SparseMatrix a(n_, n_);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

Matrix DynamicGraph::dense_adjacency() const { return Matrix(adjacency()); }

DynamicGraph load_edge_list(std::istream& in, EdgeListFormat format) {
    std::vector<std::pair<long long, long long>> edges;
    long long max_id = -1;
    long long declared = -1;
    std::string line;
    std::size_t lineno = 0;
    const char comment = format == EdgeListFormat::snap ? '#' : '%';
    bool header_seen = format == EdgeListFormat::snap;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == comment) continue;
        std::istringstream fields(line);
        if (!header_seen) {
            long long rows = 0, cols = 0, nnz = 0;
            if (!(fields >> rows >> cols >> nnz)) parse_error(lineno, "expected 'rows cols nnz' size line");
            if (rows != cols || rows < 1) parse_error(lineno, "adjacency matrix must be square and non-empty");
            declared = rows;
            header_seen = true;
            continue;
        }
        long long u = 0, v = 0;
        if (!(fields >> u >> v)) parse_error(lineno, "expected two integer node ids");
        std::string rest;
        if (format == EdgeListFormat::snap && (fields >> rest)) parse_error(lineno, "unexpected trailing field '" + rest + "'");
        if (format == EdgeListFormat::matrix_market) {
            --u;
            --v;
            if (u < 0 || v < 0 || u >= declared || v >= declared) parse_error(lineno, "index out of range");
        } else if (u < 0 || v < 0) {
            parse_error(lineno, "negative node id");
        }
        max_id = std::max({max_id, u, v});
        edges.emplace_back(u, v);
    }
    if (!header_seen) throw std::runtime_error("edge list: missing MatrixMarket size line");
    const long long n = format == EdgeListFormat::matrix_market ? declared : max_id + 1;
    if (n < 1) throw std::runtime_error("edge list: no nodes");
    DynamicGraph g(static_cast<Index>(n));
    for (auto [u, v] : edges) {
        if (u == v) continue;
        const auto a = static_cast<DynamicGraph::Node>(u);
        const auto b = static_cast<DynamicGraph::Node>(v);
        if (!g.has_edge(a, b)) g.add_edge(a, b);
    }
    return g;
}

DynamicGraph load_edge_list_file(const std::string& path, EdgeListFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
    try {
        return load_edge_list(in, format);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

MatVecOracle adjacency_oracle(const DynamicGraph& graph) { return sparse_oracle(graph.adjacency()); }

std::int64_t exact_triangles(const DynamicGraph& graph) {
    if (graph.node_count() > 50000) throw std::invalid_argument("exact_triangles: graph too large for enumeration");
    std::int64_t count = 0;
    for (DynamicGraph::Node u = 0; u < graph.node_count(); ++u) {
        const auto& nu = graph.neighbors(u);
        for (auto it = std::upper_bound(nu.begin(), nu.end(), u); it != nu.end(); ++it) {
            const DynamicGraph::Node v = *it;
            const auto& nv = graph.neighbors(v);
            // common neighbors w > v
            auto a = std::upper_bound(nu.begin(), nu.end(), v);
            auto b = std::upper_bound(nv.begin(), nv.end(), v);
            while (a != nu.end() && b != nv.end()) {
                if (*a < *b) ++a;
                else if (*b < *a) ++b;
                else {
                    ++count;
                    ++a;
                    ++b;
                }
            }
        }
    }
    return count;
}

DynamicGraph erdos_renyi(Index n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("erdos_renyi: p must lie in [0, 1]");
    DynamicGraph g(n);
    std::mt19937_64 rng(seed_mix(seed, 0, 0xe7ULL));
    std::bernoulli_distribution coin(p);
    for (DynamicGraph::Node u = 0; u < n; ++u)
        for (DynamicGraph::Node v = u + 1; v < n; ++v)
            if (coin(rng)) g.add_edge(u, v);
    return g;
}

void CliqueDynamics::apply(DynamicGraph& graph, std::size_t step) const {
    std::mt19937_64 rng(seed_mix(seed, step, 0xc119eULL));
    const auto& live = graph.clique_log();
    if (step > delete_after && !live.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
        auto it = live.begin();
        std::advance(it, static_cast<std::ptrdiff_t>(pick(rng)));
        graph.remove_clique(it->first);
        return;
    }
    const int n = static_cast<int>(graph.node_count());
    const int hi = std::min(k_max, n);
    const int lo = std::min(k_min, hi);
    std::uniform_int_distribution<int> size(lo, hi);
    const int k = size(rng);
    std::vector<DynamicGraph::Node> nodes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = i;
    // partial Fisher-Yates
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> j(i, n - 1);
        std::swap(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j(rng))]);
    }
    nodes.resize(static_cast<std::size_t>(k));
    if (k >= 2) graph.add_clique(nodes);
}

}  // namespace dtrace
