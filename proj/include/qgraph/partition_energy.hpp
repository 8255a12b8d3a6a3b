#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qgraph/graph.hpp"
#include "qgraph/spectral.hpp"

namespace qgraph {

/// Angles in (-pi, pi], one per section point.
using TorusPoint = std::vector<double>;

/// Ground energy of every piece of g cut at p, in piece-label order.
inline std::vector<double> component_energies(const MetricGraph& g, const Partition& p)
{
    SplitGraph s = cut(g, p);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.parts.count));
    for (int label = 0; label < s.parts.count; ++label)
        out.push_back(ground_energy(extract_piece(s.graph, s.parts, label).graph));
    return out;
}

/// Lambda(P) = max_j lambda_1(Gamma_j).
inline double lambda_of_partition(const MetricGraph& g, const Partition& p)
{
    auto e = component_energies(g, p);
    return *std::max_element(e.begin(), e.end());
}

namespace detail {

inline bool energies_agree(const MetricGraph& g, const std::vector<double>& energies, double tol)
{
    double mean = 0.0;
    for (double e : energies) mean += e;
    mean /= static_cast<double>(energies.size());
    const double scale = std::max(std::abs(mean), 1.0 / (g.total_length() * g.total_length()));
    for (double e : energies)
        if (std::abs(e - mean) > tol * scale) return false;
    return true;
}

} // namespace detail

inline bool is_equipartition(const MetricGraph& g, const Partition& p, double tol = 1e-8)
{
    return detail::energies_agree(g, component_energies(g, p), tol);
}

/**
 * Moves one boundary point of the highest-energy piece into a neighbouring
 * lower-energy piece by step * L_e, enlarging the former.  Returns nothing if
 * the maximum is shared or no point separates the top piece from a lower one.
 */
inline std::optional<Partition> descent_move(const MetricGraph& g, const Partition& p, double step = 1e-4)
{
    SplitGraph s = cut(g, p);
    std::vector<double> energy;
    for (int label = 0; label < s.parts.count; ++label)
        energy.push_back(ground_energy(extract_piece(s.graph, s.parts, label).graph));
    const int top = static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
    for (int label = 0; label < s.parts.count; ++label)
        if (label != top && energy[label] == energy[top]) return std::nullopt;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        int before = s.parts.edge_label[s.minus_edge[i]];
        int after = s.parts.edge_label[s.plus_edge[i]];
        if (before == after || (before != top && after != top)) continue;
        Partition moved = p;
        double dx = step * g.edge(p.points[i].edge).length;
        moved.points[i].x += before == top ? dx : -dx;
        return moved;
    }
    return std::nullopt;
}

/// One-point partitions found by single_point_equipartitions.
struct SinglePointSearch {
    std::vector<Partition> found;
    std::vector<double> min_gap;    // per edge, min |E_minus - E_plus| over the samples; NaN for cycle edges
    int samples = 0;
};

/**
 * Scans every edge for points splitting g into two pieces of equal ground
 * energy.  D(x) = E(piece before x) - E(piece after x) is sampled at interior
 * points and sign changes are refined by bisection.  Edges on cycles do not
 * disconnect g and are skipped.
 */
inline SinglePointSearch single_point_equipartitions(const MetricGraph& g, int samples_per_edge = 256,
                                                     double tol = 1e-8)
{
    SinglePointSearch out;
    auto difference = [&](int e, double x) {
        Partition p{{{e, x}}, true};
        SplitGraph s = cut(g, p);
        if (s.parts.count != 2) return std::numeric_limits<double>::quiet_NaN();
        double a = ground_energy(extract_piece(s.graph, s.parts, s.parts.edge_label[s.minus_edge[0]]).graph);
        double b = ground_energy(extract_piece(s.graph, s.parts, s.parts.edge_label[s.plus_edge[0]]).graph);
        return a - b;
    };
    for (int e = 0; e < g.num_edges(); ++e) {
        const double L = g.edge(e).length;
        double gap = std::numeric_limits<double>::infinity();
        double prev_x = 0.0, prev_d = std::numeric_limits<double>::quiet_NaN();
        for (int i = 1; i <= samples_per_edge; ++i) {
            double x = L * i / (samples_per_edge + 1.0);
            double d = difference(e, x);
            ++out.samples;
            if (std::isnan(d)) {
                gap = std::numeric_limits<double>::quiet_NaN();
                break;
            }
            gap = std::min(gap, std::abs(d));
            if (d == 0.0) {
                out.found.push_back({{{e, x}}, true});
            } else if (!std::isnan(prev_d) && prev_d != 0.0 && (d > 0) != (prev_d > 0)) {
                double lo = prev_x, hi = x, dlo = prev_d;
                while (hi - lo > tol * L) {
                    double mid = 0.5 * (lo + hi);
                    double dm = difference(e, mid);
                    if ((dm > 0) == (dlo > 0)) {
                        lo = mid;
                        dlo = dm;
                    } else {
                        hi = mid;
                    }
                }
                out.found.push_back({{{e, 0.5 * (lo + hi)}}, true});
            }
            prev_x = x;
            prev_d = d;
        }
        out.min_gap.push_back(gap);
    }
    return out;
}

/**
 * Smallest N with lambda_{N - beta + 1}(g) >= max_e (pi / L_e)^2.  For larger
 * m every partition produced by phi_map has a point on every edge.
 */
inline int minimal_m(const MetricGraph& g)
{
    if (!is_connected(g)) throw Error(ErrorCode::InvalidGraph, "minimal_m needs a connected graph");
    const double lambda_d = std::pow(pi / g.min_length(), 2);
    const int beta = betti(g);
    for (int j = 1;; ++j) {
        if (eigenvalue_at(g, j).lambda >= lambda_d * (1.0 - 1e-12)) return j + beta - 1;
    }
}

struct EquipartitionRecord {
    Partition q;
    TorusPoint phi;
    int m = 0;
    double lambda = 0.0;
    EigenPair eigen;                 // eigenpair of Gamma_phi
    int eigen_index = 0;             // m + 1 - #{phi_j = pi}
    std::vector<double> components;  // ground energies of the pieces of g cut at q
};

/// Eigenpair of Gamma_phi that phi_map reads its zeros from.
struct RobinEigenpair {
    SplitGraph tree;
    EigenPair eigen;
    int index = 0;
};

namespace detail {

inline int count_dirichlet_angles(std::span<const double> phi)
{
    int p = 0;
    for (double a : phi)
        if (wrap_angle(a) == pi) ++p;
    return p;
}

inline Error outside(const std::string& why) { return Error(ErrorCode::OutsideDomain, why); }

} // namespace detail

/**
 * Builds Gamma_phi and its (m + 1 - p)-th eigenpair, p the number of angles
 * equal to pi.  Throws OutsideDomain unless the eigenvalue is simple and the
 * eigenfunction is non-zero at every non-Dirichlet vertex.
 */
inline RobinEigenpair robin_eigenpair(const MetricGraph& g, std::span<const EdgePoint> sections,
                                      std::span<const double> phi, int m, const SpectralOptions& opt = {})
{
    RobinEigenpair r;
    r.tree = build_robin_tree(g, sections, phi);
    r.index = m + 1 - detail::count_dirichlet_angles(phi);
    if (r.index < 1) throw detail::outside("eigenvalue index below 1");
    EigenPair p = eigenvalue_at(r.tree.graph, r.index, 1e-15, opt);
    if (!p.simple) throw detail::outside("eigenvalue " + std::to_string(r.index) + " is not simple");
    try {
        r.eigen = eigenfunction(r.tree.graph, p, opt);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateEigenvalue) throw detail::outside(e.what());
        throw;
    }
    if (!is_proper(r.tree.graph, r.eigen, opt)) throw detail::outside("eigenfunction vanishes at a vertex");
    return r;
}

namespace detail {

inline void sort_points(Partition& q)
{
    std::sort(q.points.begin(), q.points.end(), [](const EdgePoint& a, const EdgePoint& b) {
        return a.edge != b.edge ? a.edge < b.edge : a.x < b.x;
    });
}

inline EquipartitionRecord equipartition_from(const MetricGraph& g, std::span<const EdgePoint> sections,
                                              std::span<const double> phi, int m, const SpectralOptions& opt)
{
    RobinEigenpair r = robin_eigenpair(g, sections, phi, m, opt);
    Partition z;
    try {
        z = zeros(r.tree.graph, r.eigen, opt);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::IdenticallyZeroEdge) throw outside(e.what());
        throw;
    }
    if (!z.proper) throw outside("zero at a vertex of the cut graph");

    EquipartitionRecord rec;
    rec.m = m;
    rec.phi.assign(phi.begin(), phi.end());
    for (auto& a : rec.phi) a = wrap_angle(a);
    rec.eigen = r.eigen;
    rec.eigen_index = r.index;
    for (const auto& pt : z.points) {
        const Segment& seg = r.tree.origin[pt.edge];
        rec.q.points.push_back({seg.edge, seg.start + pt.x});
    }
    for (std::size_t i = 0; i < sections.size(); ++i)
        if (rec.phi[i] == pi) rec.q.points.push_back(sections[i]);
    sort_points(rec.q);
    if (static_cast<int>(rec.q.size()) != m)
        throw outside("eigenfunction has " + std::to_string(rec.q.size()) + " zeros, expected " +
                      std::to_string(m));
    if (!is_proper(g, rec.q)) throw outside("partition point at a vertex");

    rec.components = component_energies(g, rec.q);
    rec.lambda = *std::max_element(rec.components.begin(), rec.components.end());
    if (!energies_agree(g, rec.components, 1e-8))
        throw std::logic_error("phi_map produced a partition that is not an equipartition");
    if (std::abs(rec.lambda - r.eigen.lambda) > 1e-8 * std::max(1.0, std::abs(rec.lambda)))
        throw std::logic_error("partition energy differs from the cut-graph eigenvalue");
    return rec;
}

} // namespace detail

/// The equipartition Phi_m(phi) read off the zeros of the cut graph's eigenfunction.
inline EquipartitionRecord phi_map(const MetricGraph& g, std::span<const EdgePoint> sections,
                                   std::span<const double> phi, int m, const SpectralOptions& opt = {})
{
    return detail::equipartition_from(g, sections, phi, m, opt);
}

/**
 * Angles phi_i = 2 atan2(f'(v_i), f(v_i)) with f the ground state of the piece
 * of g \ q containing section point v_i, derivatives along the edge direction.
 */
inline TorusPoint phi_inverse(const MetricGraph& g, std::span<const EdgePoint> sections, const Partition& q)
{
    SplitGraph s = cut(g, q);
    std::vector<double> energies;
    std::map<int, std::pair<Piece, EigenPair>> ground;
    for (int label = 0; label < s.parts.count; ++label) {
        Piece piece = extract_piece(s.graph, s.parts, label);
        EigenPair f = eigenpair(piece.graph, 1);
        energies.push_back(f.lambda);
        ground.emplace(label, std::make_pair(std::move(piece), std::move(f)));
    }
    if (!detail::energies_agree(g, energies, 1e-8))
        throw Error(ErrorCode::NotEquipartition, "pieces have different ground energies");

    TorusPoint phi;
    for (const auto& sec : sections) {
        for (const auto& pt : q.points)
            if (pt.edge == sec.edge && pt.x == sec.x)
                throw Error(ErrorCode::SectionOnZero, "section point coincides with a partition point");
        int seg = s.locate(sec.edge, sec.x);
        const auto& [piece, f] = ground.at(s.parts.edge_label[seg]);
        int local = static_cast<int>(std::find(piece.parent_edge.begin(), piece.parent_edge.end(), seg) -
                                     piece.parent_edge.begin());
        double x = sec.x - s.origin[seg].start;
        double value = evaluate(piece.graph, f, local, x);
        double slope = evaluate_slope(piece.graph, f, local, x);
        double scale = std::max(std::abs(value), std::abs(slope) / std::max(1.0, std::sqrt(std::abs(f.lambda))));
        if (scale < 1e-12) throw Error(ErrorCode::SectionOnZero, "ground state and slope vanish at a section");
        phi.push_back(wrap_angle(2.0 * std::atan2(slope, value)));
    }
    return phi;
}

/**
 * Phi_m near an equipartition q0, using local_sections(q0).  The result keeps
 * the number of points on every edge; otherwise LeftNeighborhood.
 */
inline EquipartitionRecord phi_map_local(const MetricGraph& g, const Partition& q0, std::span<const double> phi,
                                         const SpectralOptions& opt = {})
{
    auto sections = local_sections(g, q0);
    if (sections.size() != phi.size())
        throw Error(ErrorCode::InvalidGraph, "expected " + std::to_string(sections.size()) + " angles");
    const int m = static_cast<int>(q0.size());
    EquipartitionRecord rec;
    try {
        rec = detail::equipartition_from(g, sections, phi, m, opt);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::OutsideDomain) throw Error(ErrorCode::LeftNeighborhood, e.what());
        throw;
    }
    std::vector<int> before(static_cast<std::size_t>(g.num_edges()), 0), after = before;
    for (const auto& pt : q0.points) ++before[pt.edge];
    for (const auto& pt : rec.q.points) ++after[pt.edge];
    if (before != after) throw Error(ErrorCode::LeftNeighborhood, "points moved to a different edge");
    return rec;
}

} // namespace qgraph
