#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatdist/error.hpp"
#include "heatdist/matrix.hpp"
#include "heatdist/random.hpp"

namespace heatdist {

struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double w = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphErrorKind { self_loop, duplicate_edge, nonpositive_weight, index_out_of_range };

inline const char* to_string(GraphErrorKind k) {
    switch (k) {
        case GraphErrorKind::self_loop: return "self-loop";
        case GraphErrorKind::duplicate_edge: return "duplicate edge";
        case GraphErrorKind::nonpositive_weight: return "non-positive weight";
        case GraphErrorKind::index_out_of_range: return "node index out of range";
    }
    return "graph error";
}

/// Rejected edge list. Carries the position of the offending edge in the input.
class GraphError : public InvalidArgument {
public:
    GraphError(GraphErrorKind kind, std::size_t position, const Edge& e)
        : InvalidArgument(std::string(to_string(kind)) + " at edge #" + std::to_string(position) + " (" +
                          std::to_string(e.i) + ", " + std::to_string(e.j) + ", " + std::to_string(e.w) + ")"),
          kind_(kind), position_(position), edge_(e) {}

    GraphErrorKind kind() const noexcept { return kind_; }
    std::size_t position() const noexcept { return position_; }
    const Edge& edge() const noexcept { return edge_; }

private:
    GraphErrorKind kind_;
    std::size_t position_;
    Edge edge_;
};

/// Weighted undirected simple graph on nodes 0..n-1. Immutable once built;
/// every edge is stored once with i < j.
class Graph {
public:
    Graph() = default;

    std::size_t node_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    friend Graph build_graph(std::size_t n, std::vector<Edge> edges);

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
};

/// Validates and canonicalizes an edge list. Input order is kept.
inline Graph build_graph(std::size_t n, std::vector<Edge> edges) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        Edge& e = edges[k];
        if (e.i >= n || e.j >= n) throw GraphError(GraphErrorKind::index_out_of_range, k, e);
        if (e.i == e.j) throw GraphError(GraphErrorKind::self_loop, k, e);
        if (!(e.w > 0.0)) throw GraphError(GraphErrorKind::nonpositive_weight, k, e);
        if (e.i > e.j) std::swap(e.i, e.j);
        if (!seen.emplace(e.i, e.j).second) throw GraphError(GraphErrorKind::duplicate_edge, k, e);
    }
    Graph g;
    g.n_ = n;
    g.edges_ = std::move(edges);
    return g;
}

inline SymMatrix adjacency(const Graph& g) {
    SymMatrix a(g.node_count());
    for (const Edge& e : g.edges()) a.set(e.i, e.j, e.w);
    return a;
}

inline SymMatrix degree(const Graph& g) {
    SymMatrix d(g.node_count());
    for (const Edge& e : g.edges()) {
        d.add(e.i, e.i, e.w);
        d.add(e.j, e.j, e.w);
    }
    return d;
}

/// L = D - A.
inline SymMatrix laplacian(const Graph& g) {
    SymMatrix l(g.node_count());
    for (const Edge& e : g.edges()) {
        l.set(e.i, e.j, -e.w);
        l.add(e.i, e.i, e.w);
        l.add(e.j, e.j, e.w);
    }
    return l;
}

/// Number of connected components (union-find).
inline std::size_t component_count(const Graph& g) {
    std::vector<std::size_t> parent(g.node_count());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = g.node_count();
    for (const Edge& e : g.edges()) {
        const auto a = find(e.i), b = find(e.j);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components;
}

inline bool is_connected(const Graph& g) { return component_count(g) <= 1; }

// --- perturbation ------------------------------------------------------------

struct PerturbationConfig {
    double delta = 0.05;  ///< weights are scaled by Uniform[1 - delta, 1 + delta]
    std::uint64_t seed = 0;

    void validate() const {
        if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("perturbation delta must lie in [0, 1)");
    }
};

struct PerturbedGraph {
    Graph graph;
    SymMatrix laplacian_delta;  ///< E = L(perturbed) - L(original)
};

/// Multiplies each edge weight by an independent Uniform[1 - delta, 1 + delta] draw.
inline PerturbedGraph perturb_weights(const Graph& g, const PerturbationConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    for (Edge& e : edges) e.w *= rng.uniform(1.0 - cfg.delta, 1.0 + cfg.delta);
    Graph perturbed = build_graph(g.node_count(), std::move(edges));
    SymMatrix delta = laplacian(perturbed) - laplacian(g);
    return {std::move(perturbed), std::move(delta)};
}

// --- generators ----------------------------------------------------------------

/// The 10-node example network with three one-hot signals.
struct Figure1 {
    Graph graph;
    Vector r;  ///< indicator of node 0
    Vector g;  ///< indicator of node 5
    Vector y;  ///< indicator of node 6
};

inline Figure1 figure1_graph() {
    // 1-based labels x1..x10 shifted to 0-based.
    const std::vector<std::pair<std::size_t, std::size_t>> pairs = {
        {1, 2}, {2, 3}, {1, 4}, {2, 4}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {8, 10}};
    std::vector<Edge> edges;
    for (auto [a, b] : pairs) edges.push_back({a - 1, b - 1, 1.0});
    Figure1 f{build_graph(10, std::move(edges)), Vector(10, 0.0), Vector(10, 0.0), Vector(10, 0.0)};
    f.r[0] = 1.0;
    f.g[5] = 1.0;
    f.y[6] = 1.0;
    return f;
}

struct ClusterGraphConfig {
    std::vector<std::size_t> sizes = {9, 8, 10};
    double p_intra = 0.4;
    double w_lo = 1.0;
    double w_hi = 3.0;
    std::size_t bridges = 3;
    std::size_t max_attempts = 10000;

    void validate() const {
        if (sizes.empty()) throw InvalidArgument("cluster sizes must be nonempty");
        for (auto s : sizes)
            if (s == 0) throw InvalidArgument("cluster sizes must be positive");
        if (!(p_intra > 0.0 && p_intra <= 1.0)) throw InvalidArgument("p_intra must lie in (0, 1]");
        if (!(w_lo > 0.0 && w_lo <= w_hi)) throw InvalidArgument("need 0 < w_lo <= w_hi");
        if (bridges == 0) throw InvalidArgument("need at least one bridge edge");
        if (max_attempts == 0) throw InvalidArgument("max_attempts must be positive");
    }
};

struct ClusteredGraph {
    Graph graph;
    std::vector<int> clusters;  ///< cluster index per node
};

/// One unconditioned draw of the clustered random graph; may be disconnected.
inline ClusteredGraph three_cluster_graph_draw(const ClusterGraphConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<int> clusters;
    std::vector<std::size_t> start;
    for (std::size_t c = 0; c < cfg.sizes.size(); ++c) {
        start.push_back(clusters.size());
        clusters.insert(clusters.end(), cfg.sizes[c], static_cast<int>(c));
    }
    const std::size_t n = clusters.size();

    std::size_t cross_pairs = 0;
    for (std::size_t a = 0; a < cfg.sizes.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.sizes.size(); ++b) cross_pairs += cfg.sizes[a] * cfg.sizes[b];
    if (cfg.bridges > cross_pairs)
        throw InvalidArgument("more bridge edges requested than inter-cluster node pairs exist");

    std::vector<Edge> edges;
    for (std::size_t c = 0; c < cfg.sizes.size(); ++c)
        for (std::size_t u = start[c]; u < start[c] + cfg.sizes[c]; ++u)
            for (std::size_t v = u + 1; v < start[c] + cfg.sizes[c]; ++v)
                if (rng.bernoulli(cfg.p_intra)) edges.push_back({u, v, rng.uniform(cfg.w_lo, cfg.w_hi)});

    std::set<std::pair<std::size_t, std::size_t>> bridged;
    while (bridged.size() < cfg.bridges) {
        std::size_t u = rng.index(n), v = rng.index(n);
        if (clusters[u] == clusters[v]) continue;
        if (u > v) std::swap(u, v);
        if (bridged.emplace(u, v).second) edges.push_back({u, v, 1.0});
    }
    return {build_graph(n, std::move(edges)), std::move(clusters)};
}

/// Clustered random graph, redrawn from scratch until connected.
inline ClusteredGraph three_cluster_graph(const ClusterGraphConfig& cfg, Rng& rng) {
    cfg.validate();
    for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        ClusteredGraph cg = three_cluster_graph_draw(cfg, rng);
        if (is_connected(cg.graph)) return cg;
    }
    throw NumericError("three_cluster_graph: no connected graph after " + std::to_string(cfg.max_attempts) +
                       " attempts");
}

/// rows x cols pixel grid with unit edges between 4-neighbours; node = row * cols + col.
inline Graph lattice_graph(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw InvalidArgument("lattice dimensions must be positive");
    std::vector<Edge> edges;
    edges.reserve(rows * (cols - 1) + cols * (rows - 1));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t u = r * cols + c;
            if (c + 1 < cols) edges.push_back({u, u + 1, 1.0});
            if (r + 1 < rows) edges.push_back({u, u + cols, 1.0});
        }
    return build_graph(rows * cols, std::move(edges));
}

}  // namespace heatdist
