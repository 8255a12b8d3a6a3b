#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgraph/errors.hpp"

namespace qgraph {

inline constexpr double pi = std::numbers::pi;

/// Maps an angle onto the torus representative in (-pi, pi].
inline double wrap_angle(double phi)
{
    double r = std::remainder(phi, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

/// Distance between two angles on the circle.
inline double angle_distance(double a, double b)
{
    return std::abs(wrap_angle(a - b));
}

/**
 * A delta-type vertex condition  sum_e f'_e(v) = alpha f(v), stored as the
 * angle phi with alpha = tan(phi/2).  phi = pi is the Dirichlet condition
 * f(v) = 0, phi = 0 is Neumann-Kirchhoff.
 */
class VertexCondition {
public:
    VertexCondition() = default;

    static VertexCondition neumann() { return VertexCondition(0.0); }
    static VertexCondition dirichlet() { return VertexCondition(pi); }

    static VertexCondition robin(double alpha)
    {
        if (std::isnan(alpha)) throw Error(ErrorCode::InvalidGraph, "Robin coupling is NaN");
        if (std::isinf(alpha)) return dirichlet();
        return VertexCondition(2.0 * std::atan(alpha));
    }

    static VertexCondition from_angle(double phi)
    {
        if (!std::isfinite(phi)) throw Error(ErrorCode::InvalidGraph, "vertex angle must be finite");
        return VertexCondition(wrap_angle(phi));
    }

    double angle() const noexcept { return angle_; }
    bool is_dirichlet() const noexcept { return angle_ == pi; }

    /// Coupling strength; +infinity for Dirichlet.
    double alpha() const noexcept
    {
        if (is_dirichlet()) return std::numeric_limits<double>::infinity();
        return std::tan(0.5 * angle_);
    }

    friend bool operator==(const VertexCondition&, const VertexCondition&) = default;

private:
    explicit VertexCondition(double phi) : angle_(phi) {}

    double angle_ = 0.0;
};

struct Edge {
    int u = 0;      // vertex at x = 0
    int v = 0;      // vertex at x = length
    double length = 1.0;
};

/// One end of an edge as seen from a vertex.
struct EdgeEnd {
    int edge = 0;
    bool at_end = false;   // true: x = L, false: x = 0
};

/**
 * Combinatorial graph with edge lengths and a delta-type condition per vertex.
 * Loops and parallel edges are allowed.  Values are immutable once built.
 */
class MetricGraph {
public:
    int add_vertex(VertexCondition cond, std::string name = {})
    {
        if (name.empty()) name = std::to_string(conditions_.size());
        conditions_.push_back(cond);
        vertex_names_.push_back(std::move(name));
        return static_cast<int>(conditions_.size()) - 1;
    }

    int add_edge(int u, int v, double length, std::string name = {})
    {
        if (u < 0 || v < 0 || u >= num_vertices() || v >= num_vertices())
            throw Error(ErrorCode::InvalidGraph, "edge references a missing vertex");
        if (!(length > 0.0) || !std::isfinite(length))
            throw Error(ErrorCode::InvalidGraph, "edge length must be positive and finite");
        if (name.empty()) name = std::to_string(edges_.size());
        edges_.push_back({u, v, length});
        edge_names_.push_back(std::move(name));
        return static_cast<int>(edges_.size()) - 1;
    }

    int num_vertices() const noexcept { return static_cast<int>(conditions_.size()); }
    int num_edges() const noexcept { return static_cast<int>(edges_.size()); }

    const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const VertexCondition& condition(int v) const { return conditions_.at(static_cast<std::size_t>(v)); }
    const std::string& vertex_name(int v) const { return vertex_names_.at(static_cast<std::size_t>(v)); }
    const std::string& edge_name(int e) const { return edge_names_.at(static_cast<std::size_t>(e)); }

    MetricGraph with_condition(int v, VertexCondition cond) const
    {
        MetricGraph g = *this;
        g.conditions_.at(static_cast<std::size_t>(v)) = cond;
        return g;
    }

    /// Edge ends incident to v in edge-index order; a loop contributes both of its ends.
    std::vector<EdgeEnd> ends(int v) const
    {
        std::vector<EdgeEnd> out;
        for (int e = 0; e < num_edges(); ++e) {
            if (edges_[e].u == v) out.push_back({e, false});
            if (edges_[e].v == v) out.push_back({e, true});
        }
        return out;
    }

    int degree(int v) const { return static_cast<int>(ends(v).size()); }

    double total_length() const
    {
        double s = 0.0;
        for (const auto& e : edges_) s += e.length;
        return s;
    }

    double min_length() const
    {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& e : edges_) s = std::min(s, e.length);
        return s;
    }

private:
    std::vector<VertexCondition> conditions_;
    std::vector<std::string> vertex_names_;
    std::vector<Edge> edges_;
    std::vector<std::string> edge_names_;
};

// ---------------------------------------------------------------------------
// Connectivity

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n))
    {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

} // namespace detail

struct Components {
    std::vector<int> vertex_label;   // dense labels 0..count-1, ordered by lowest vertex
    std::vector<int> edge_label;
    int count = 0;
};

inline Components components(const MetricGraph& g, const std::vector<bool>& removed_edges = {})
{
    detail::DisjointSets sets(g.num_vertices());
    for (int e = 0; e < g.num_edges(); ++e) {
        if (!removed_edges.empty() && removed_edges[e]) continue;
        sets.unite(g.edge(e).u, g.edge(e).v);
    }
    Components c;
    c.vertex_label.assign(static_cast<std::size_t>(g.num_vertices()), -1);
    std::vector<int> label_of_root(static_cast<std::size_t>(g.num_vertices()), -1);
    for (int v = 0; v < g.num_vertices(); ++v) {
        int r = sets.find(v);
        if (label_of_root[r] < 0) label_of_root[r] = c.count++;
        c.vertex_label[v] = label_of_root[r];
    }
    c.edge_label.resize(static_cast<std::size_t>(g.num_edges()));
    for (int e = 0; e < g.num_edges(); ++e) c.edge_label[e] = c.vertex_label[g.edge(e).u];
    return c;
}

/// First Betti number |E| - |V| + (number of connected components).
inline int betti(const MetricGraph& g)
{
    return g.num_edges() - g.num_vertices() + components(g).count;
}

inline bool is_connected(const MetricGraph& g) { return components(g).count == 1; }

// ---------------------------------------------------------------------------
// Partitions

struct EdgePoint {
    int edge = 0;
    double x = 0.0;

    friend bool operator==(const EdgePoint&, const EdgePoint&) = default;
};

/**
 * An ordered set of partition points.  `proper` can be cleared by producers
 * that detect a point numerically at a vertex (see spectral zeros()).
 */
struct Partition {
    std::vector<EdgePoint> points;
    bool proper = true;

    std::size_t size() const noexcept { return points.size(); }
};

/// All points strictly inside their edges and pairwise distinct.
inline bool is_proper(const MetricGraph& g, const Partition& p)
{
    if (!p.proper) return false;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        const auto& pt = p.points[i];
        if (pt.edge < 0 || pt.edge >= g.num_edges()) return false;
        if (!(pt.x > 0.0 && pt.x < g.edge(pt.edge).length)) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (p.points[j] == pt) return false;
    }
    return true;
}

/// Sub-interval [start, end] of an edge of the parent graph.
struct Segment {
    int edge = 0;
    double start = 0.0;
    double end = 0.0;
};

/**
 * A graph obtained by splitting edges at points.  Each split point i yields
 * two new degree-one vertices: the one on the smaller-coordinate side
 * (`minus`) and the one on the larger side (`plus`).
 */
struct SplitGraph {
    MetricGraph graph;
    std::vector<Segment> origin;            // per edge of `graph`
    std::vector<int> minus_vertex;          // per split point
    std::vector<int> plus_vertex;
    std::vector<int> minus_edge;            // segment ending at the point
    std::vector<int> plus_edge;             // segment starting at the point
    Components parts;

    /// Edge of `graph` that contains parent coordinate x on parent edge e (x interior to a segment).
    int locate(int e, double x) const
    {
        for (int s = 0; s < graph.num_edges(); ++s) {
            const auto& seg = origin[s];
            if (seg.edge == e && x >= seg.start && x <= seg.end) return s;
        }
        return -1;
    }
};

namespace detail {

template <class MinusCond, class PlusCond>
SplitGraph split_edges(const MetricGraph& g, std::span<const EdgePoint> points, MinusCond minus_cond,
                       PlusCond plus_cond)
{
    SplitGraph out;
    for (int v = 0; v < g.num_vertices(); ++v) out.graph.add_vertex(g.condition(v), g.vertex_name(v));
    const std::size_t n = points.size();
    out.minus_vertex.resize(n);
    out.plus_vertex.resize(n);
    out.minus_edge.resize(n);
    out.plus_edge.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.minus_vertex[i] = out.graph.add_vertex(minus_cond(i), "p" + std::to_string(i) + "-");
        out.plus_vertex[i] = out.graph.add_vertex(plus_cond(i), "p" + std::to_string(i) + "+");
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        std::vector<std::size_t> on_edge;
        for (std::size_t i = 0; i < n; ++i)
            if (points[i].edge == e) on_edge.push_back(i);
        std::sort(on_edge.begin(), on_edge.end(),
                  [&](std::size_t a, std::size_t b) { return points[a].x < points[b].x; });
        const Edge& ed = g.edge(e);
        int from = ed.u;
        double start = 0.0;
        for (std::size_t i : on_edge) {
            int s = out.graph.add_edge(from, out.minus_vertex[i], points[i].x - start,
                                       g.edge_name(e) + "." + std::to_string(out.graph.num_edges()));
            out.origin.push_back({e, start, points[i].x});
            out.minus_edge[i] = s;
            from = out.plus_vertex[i];
            start = points[i].x;
            out.plus_edge[i] = s + 1;
        }
        out.graph.add_edge(from, ed.v, ed.length - start,
                           g.edge_name(e) + "." + std::to_string(out.graph.num_edges()));
        out.origin.push_back({e, start, ed.length});
    }
    out.parts = components(out.graph);
    return out;
}

} // namespace detail

/// Splits g at every point of p, imposing Dirichlet conditions on both new ends.
inline SplitGraph cut(const MetricGraph& g, const Partition& p)
{
    if (!is_proper(g, p)) throw Error(ErrorCode::ImproperPartition, "partition point at a vertex or repeated");
    return detail::split_edges(
        g, p.points, [](std::size_t) { return VertexCondition::dirichlet(); },
        [](std::size_t) { return VertexCondition::dirichlet(); });
}

/// Number of pieces of g cut at p.
inline int count_parts(const MetricGraph& g, const Partition& p) { return cut(g, p).parts.count; }

/// Connected component `label` of a split graph as a standalone graph.
struct Piece {
    MetricGraph graph;
    std::vector<int> parent_edge;     // local edge -> edge of the split graph
    std::vector<int> parent_vertex;   // local vertex -> vertex of the split graph
};

inline Piece extract_piece(const MetricGraph& g, const Components& parts, int label)
{
    Piece piece;
    std::vector<int> local(static_cast<std::size_t>(g.num_vertices()), -1);
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (parts.vertex_label[v] != label) continue;
        local[v] = piece.graph.add_vertex(g.condition(v), g.vertex_name(v));
        piece.parent_vertex.push_back(v);
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        if (parts.edge_label[e] != label) continue;
        const Edge& ed = g.edge(e);
        piece.graph.add_edge(local[ed.u], local[ed.v], ed.length, g.edge_name(e));
        piece.parent_edge.push_back(e);
    }
    return piece;
}

/**
 * Identifies v0 and v1.  The merged vertex keeps index min(v0, v1), the other
 * index is removed and later vertices shift down by one.  Couplings add.
 */
inline MetricGraph glue(const MetricGraph& g, int v0, int v1)
{
    if (v0 == v1 || v0 < 0 || v1 < 0 || v0 >= g.num_vertices() || v1 >= g.num_vertices())
        throw Error(ErrorCode::InvalidGraph, "glue needs two distinct existing vertices");
    if (g.condition(v0).is_dirichlet() || g.condition(v1).is_dirichlet())
        throw Error(ErrorCode::DirichletGlue, "cannot glue a Dirichlet vertex");
    const int keep = std::min(v0, v1);
    const int drop = std::max(v0, v1);
    auto renumber = [&](int v) {
        if (v == drop) return keep;
        return v > drop ? v - 1 : v;
    };
    MetricGraph out;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (v == drop) continue;
        VertexCondition c = g.condition(v);
        if (v == keep) c = VertexCondition::robin(g.condition(v0).alpha() + g.condition(v1).alpha());
        out.add_vertex(c, g.vertex_name(v));
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        out.add_edge(renumber(ed.u), renumber(ed.v), ed.length, g.edge_name(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Section points

/// Tree edges of a breadth-first spanning forest, exploring edges in index order.
inline std::vector<bool> spanning_tree_edges(const MetricGraph& g)
{
    std::vector<bool> in_tree(static_cast<std::size_t>(g.num_edges()), false);
    std::vector<bool> seen(static_cast<std::size_t>(g.num_vertices()), false);
    for (int root = 0; root < g.num_vertices(); ++root) {
        if (seen[root]) continue;
        seen[root] = true;
        std::queue<int> frontier;
        frontier.push(root);
        while (!frontier.empty()) {
            int v = frontier.front();
            frontier.pop();
            for (const EdgeEnd& end : g.ends(v)) {
                const Edge& ed = g.edge(end.edge);
                int w = end.at_end ? ed.u : ed.v;
                if (seen[w]) continue;
                seen[w] = true;
                in_tree[end.edge] = true;
                frontier.push(w);
            }
        }
    }
    return in_tree;
}

/// One midpoint on every edge outside the BFS spanning tree; cutting there leaves a tree.
inline std::vector<EdgePoint> choose_sections(const MetricGraph& g)
{
    auto in_tree = spanning_tree_edges(g);
    std::vector<EdgePoint> out;
    for (int e = 0; e < g.num_edges(); ++e)
        if (!in_tree[e]) out.push_back({e, 0.5 * g.edge(e).length});
    return out;
}

/**
 * Section points adapted to a partition q: walk the edges carrying points of q
 * in index order and cut each one unless that would disconnect the graph.
 * The section sits at the midpoint of the longest q-free sub-segment.
 */
inline std::vector<EdgePoint> local_sections(const MetricGraph& g, const Partition& q)
{
    if (!is_proper(g, q)) throw Error(ErrorCode::ImproperPartition, "local sections need a proper partition");
    const int base = components(g).count;
    std::vector<bool> removed(static_cast<std::size_t>(g.num_edges()), false);
    std::vector<EdgePoint> out;
    for (int e = 0; e < g.num_edges(); ++e) {
        std::vector<double> xs;
        for (const auto& pt : q.points)
            if (pt.edge == e) xs.push_back(pt.x);
        if (xs.empty()) continue;
        removed[e] = true;
        if (components(g, removed).count != base) {
            removed[e] = false;
            continue;
        }
        std::sort(xs.begin(), xs.end());
        xs.insert(xs.begin(), 0.0);
        xs.push_back(g.edge(e).length);
        std::size_t best = 0;
        for (std::size_t i = 1; i + 1 < xs.size(); ++i)
            if (xs[i + 1] - xs[i] > xs[best + 1] - xs[best]) best = i;
        out.push_back({e, 0.5 * (xs[best] + xs[best + 1])});
    }
    return out;
}

struct Bipartition {
    bool bipartite = false;
    std::vector<int> sign;   // +1/-1 per piece of cut(g, p) when bipartite
};

/// 2-colours the pieces of g cut at p so that pieces meeting at a point differ.
inline Bipartition is_bipartite(const MetricGraph& g, const Partition& p)
{
    SplitGraph s = cut(g, p);
    const int n = s.parts.count;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        int a = s.parts.vertex_label[s.minus_vertex[i]];
        int b = s.parts.vertex_label[s.plus_vertex[i]];
        if (a == b) return {};
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    Bipartition out;
    out.sign.assign(static_cast<std::size_t>(n), 0);
    for (int root = 0; root < n; ++root) {
        if (out.sign[root] != 0) continue;
        out.sign[root] = 1;
        std::queue<int> frontier;
        frontier.push(root);
        while (!frontier.empty()) {
            int a = frontier.front();
            frontier.pop();
            for (int b : adj[a]) {
                if (out.sign[b] == 0) {
                    out.sign[b] = -out.sign[a];
                    frontier.push(b);
                } else if (out.sign[b] == out.sign[a]) {
                    return {};
                }
            }
        }
    }
    out.bipartite = true;
    return out;
}

/**
 * The graph Gamma_phi: g split at the section points, the minus end of
 * section i carrying alpha = -tan(phi_i/2) and the plus end +tan(phi_i/2).
 */
inline SplitGraph build_robin_tree(const MetricGraph& g, std::span<const EdgePoint> sections,
                                   std::span<const double> phi)
{
    if (sections.size() != phi.size())
        throw Error(ErrorCode::InvalidGraph, "one angle per section point is required");
    Partition as_partition{{sections.begin(), sections.end()}, true};
    if (!is_proper(g, as_partition)) throw Error(ErrorCode::ImproperPartition, "section point at a vertex");
    SplitGraph s = detail::split_edges(
        g, sections, [&](std::size_t i) { return VertexCondition::from_angle(-phi[i]); },
        [&](std::size_t i) { return VertexCondition::from_angle(phi[i]); });
    if (s.parts.count != components(g).count)
        throw Error(ErrorCode::Disconnects, "section points disconnect the graph");
    return s;
}

} // namespace qgraph
