#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qgraph/graph.hpp"
#include "qgraph/graph_io.hpp"
#include "qgraph/spectral.hpp"

namespace qgraph {

/**
 * Splits edge pt.edge at pt.x with a new Kirchhoff vertex.  The first half
 * keeps the edge index, the second half and the vertex are appended.  The
 * spectrum is unchanged.
 */
inline MetricGraph insert_vertex(const MetricGraph& g, const EdgePoint& pt)
{
    if (!(pt.x > 0.0 && pt.x < g.edge(pt.edge).length))
        throw Error(ErrorCode::ImproperPartition, "inserted vertex must be interior to its edge");
    MetricGraph out;
    for (int v = 0; v < g.num_vertices(); ++v) out.add_vertex(g.condition(v), g.vertex_name(v));
    const int w = out.add_vertex(VertexCondition::neumann(), g.edge_name(pt.edge) + "@" + detail::format_real(pt.x));
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (e != pt.edge) {
            out.add_edge(ed.u, ed.v, ed.length, g.edge_name(e));
            continue;
        }
        out.add_edge(ed.u, w, pt.x, g.edge_name(e) + "a");
    }
    const Edge& ed = g.edge(pt.edge);
    out.add_edge(w, ed.v, ed.length - pt.x, g.edge_name(pt.edge) + "b");
    return out;
}

struct InterlacingCase {
    std::string suite;          // "robin", "glue", "glue-k"
    std::string description;
    int shift = 1;              // k in lambda_n <= lambda'_n <= lambda_{n+k}
    int checked = 0;
    double worst = -std::numeric_limits<double>::infinity();   // max scaled violation, <= 0 passes
    bool pass = true;
};

struct InterlacingOptions {
    int max_n = 20;
    double tol = 1e-9;          // relative to max(1, |lambda|)
};

namespace detail {

/// Checks lower_n <= upper_n <= lower_{n+shift} for n = 1..max_n.
inline void check_interlacing(const MetricGraph& lower_graph, const MetricGraph& upper_graph, int shift,
                              const InterlacingOptions& opt, InterlacingCase& c)
{
    auto lo = eigenvalues(lower_graph, SpectrumQuery::first(opt.max_n + shift));
    auto up = eigenvalues(upper_graph, SpectrumQuery::first(opt.max_n));
    for (int n = 1; n <= opt.max_n; ++n) {
        double a = lo[n - 1].lambda;
        double b = up[n - 1].lambda;
        double cc = lo[n - 1 + shift].lambda;
        double scale = opt.tol * std::max({1.0, std::abs(a), std::abs(b), std::abs(cc)});
        double violation = std::max(a - b, b - cc) / scale;
        c.worst = std::max(c.worst, violation);
        if (violation > 1.0) c.pass = false;
        ++c.checked;
    }
}

inline std::string alpha_name(double a)
{
    return std::isinf(a) ? std::string("inf") : format_real(a);
}

/// g with Kirchhoff vertices inserted at 1/4, 1/2 and 3/4 of every edge.
inline MetricGraph with_inner_vertices(const MetricGraph& g)
{
    MetricGraph out = g;
    for (int e = 0; e < g.num_edges(); ++e)
        for (double t : {0.75, 0.5, 0.25}) out = insert_vertex(out, {e, t * g.edge(e).length});
    return out;
}

inline std::vector<int> gluable(const MetricGraph& g)
{
    std::vector<int> out;
    for (int v = 0; v < g.num_vertices(); ++v)
        if (!g.condition(v).is_dirichlet() && g.degree(v) > 0) out.push_back(v);
    return out;
}

} // namespace detail

/**
 * Raising a vertex coupling from alpha to alpha' shifts eigenvalues up by at
 * most one index.  Every vertex is swept over alpha in {-2, 0, 1, inf} plus
 * alpha_v + {0.5, 2, 10}, all ordered pairs.
 */
inline std::vector<InterlacingCase> robin_suite(const MetricGraph& g, const InterlacingOptions& opt = {})
{
    std::vector<InterlacingCase> out;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.degree(v) == 0) continue;
        std::vector<double> alphas{-2.0, 0.0, 1.0, std::numeric_limits<double>::infinity()};
        double a0 = g.condition(v).alpha();
        if (std::isfinite(a0))
            for (double d : {0.5, 2.0, 10.0}) alphas.push_back(a0 + d);
        std::sort(alphas.begin(), alphas.end());
        alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
        for (std::size_t i = 0; i < alphas.size(); ++i)
            for (std::size_t j = i + 1; j < alphas.size(); ++j) {
                InterlacingCase c;
                c.suite = "robin";
                c.description = "vertex " + g.vertex_name(v) + ": alpha " + detail::alpha_name(alphas[i]) + " -> " +
                                detail::alpha_name(alphas[j]);
                detail::check_interlacing(g.with_condition(v, VertexCondition::robin(alphas[i])),
                                          g.with_condition(v, VertexCondition::robin(alphas[j])), 1, opt, c);
                out.push_back(std::move(c));
            }
    }
    return out;
}

/**
 * Identifying two vertices shifts eigenvalues up by at most one index.
 * Candidates are the non-Dirichlet vertices and Kirchhoff vertices inserted
 * inside the edges.
 */
inline std::vector<InterlacingCase> glue_suite(const MetricGraph& g, const InterlacingOptions& opt = {},
                                               std::size_t max_cases = 24)
{
    MetricGraph base = detail::with_inner_vertices(g);
    auto cand = detail::gluable(base);
    std::vector<InterlacingCase> out;
    for (std::size_t i = 0; i < cand.size() && out.size() < max_cases; ++i)
        for (std::size_t j = i + 1; j < cand.size() && out.size() < max_cases; ++j) {
            InterlacingCase c;
            c.suite = "glue";
            c.description = base.vertex_name(cand[i]) + " ~ " + base.vertex_name(cand[j]);
            detail::check_interlacing(base, glue(base, cand[i], cand[j]), 1, opt, c);
            out.push_back(std::move(c));
        }
    return out;
}

/// k = 2 identifications: three candidates merged into one vertex, or two disjoint pairs.
inline std::vector<InterlacingCase> multi_glue_suite(const MetricGraph& g, const InterlacingOptions& opt = {},
                                                     std::size_t max_cases = 12)
{
    MetricGraph base = detail::with_inner_vertices(g);
    auto cand = detail::gluable(base);
    std::vector<InterlacingCase> out;
    auto name = [&](int v) { return base.vertex_name(v); };
    // after glue(a, b) vertex max(a, b) disappears and later indices shift down
    auto after = [](int v, int a, int b) {
        int drop = std::max(a, b);
        if (v == drop) return std::min(a, b);
        return v > drop ? v - 1 : v;
    };
    const std::size_t n = cand.size();
    for (std::size_t i = 0; i < n && out.size() < max_cases; ++i)
        for (std::size_t j = i + 1; j < n && out.size() < max_cases; ++j)
            for (std::size_t k = j + 1; k < n && out.size() < max_cases; ++k) {
                int a = cand[i], b = cand[j], c3 = cand[k];
                InterlacingCase c;
                c.suite = "glue-k";
                c.shift = 2;
                c.description = name(a) + " ~ " + name(b) + " ~ " + name(c3);
                MetricGraph once = glue(base, a, b);
                MetricGraph twice = glue(once, after(a, a, b), after(c3, a, b));
                detail::check_interlacing(base, twice, 2, opt, c);
                out.push_back(std::move(c));
                if (k + 1 < n && out.size() < max_cases) {
                    int d = cand[k + 1];
                    InterlacingCase p;
                    p.suite = "glue-k";
                    p.shift = 2;
                    p.description = name(a) + " ~ " + name(b) + ", " + name(c3) + " ~ " + name(d);
                    MetricGraph two = glue(once, after(c3, a, b), after(d, a, b));
                    detail::check_interlacing(base, two, 2, opt, p);
                    out.push_back(std::move(p));
                }
            }
    return out;
}

inline std::vector<InterlacingCase> interlacing_suites(const MetricGraph& g, const InterlacingOptions& opt = {})
{
    auto all = robin_suite(g, opt);
    for (auto& c : glue_suite(g, opt)) all.push_back(std::move(c));
    for (auto& c : multi_glue_suite(g, opt)) all.push_back(std::move(c));
    return all;
}

} // namespace qgraph
