#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/edge_basis.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

/**
 * One eigenvalue of -d^2/dx^2 on a metric graph.  `coefficients[e]` are the
 * amplitudes of the two EdgeBasis::make(lambda, L_e) functions on edge e and
 * are empty until eigenfunction() fills them.
 */
struct EigenPair {
    int index = 0;              // 1-based position in the ordered spectrum
    double lambda = 0.0;
    double wavenumber = 0.0;    // signed: k for lambda >= 0, -kappa for lambda < 0
    int multiplicity = 1;
    bool simple = true;
    bool normalized = false;
    std::vector<std::array<double, 2>> coefficients;

    bool has_coefficients() const noexcept { return !coefficients.empty(); }
};

struct SpectrumQuery {
    std::optional<int> count;
    std::optional<double> kmax;
    double tolerance = 1e-12;   // relative, in the wavenumber

    static SpectrumQuery first(int n, double tol = 1e-12) { return {n, std::nullopt, tol}; }
    static SpectrumQuery up_to(double k, double tol = 1e-12) { return {std::nullopt, k, tol}; }
};

/// Thresholds shared by the spectral routines.
struct SpectralOptions {
    double cluster = 1e-7;          // relative wavenumber window for multiplicity counting
    double rank = 1e-8;             // relative singular value threshold for the null space
    double vertex_zero = 1e-9;      // |f(v)| <= vertex_zero * max|f| counts as vanishing
};

// ---------------------------------------------------------------------------
// Eigenvalue counting

/**
 * N(lambda) = #{eigenvalues < lambda}, counted with multiplicity.
 *
 * For lambda outside every edge Dirichlet spectrum the quadratic form splits
 * into functions vanishing at all vertices plus lambda-harmonic extensions of
 * vertex values, so N is the number of edge Dirichlet eigenvalues below lambda
 * plus the number of negative eigenvalues of the vertex matrix
 *   M = diag(alpha) + sum_e k / sin(kL) [[cos kL, -1], [-1, cos kL]].
 */
class CountingFunction {
public:
    explicit CountingFunction(const MetricGraph& g) : g_(g)
    {
        free_index_.assign(static_cast<std::size_t>(g.num_vertices()), -1);
        for (int v = 0; v < g.num_vertices(); ++v)
            if (!g.condition(v).is_dirichlet() && g.degree(v) > 0) free_index_[v] = num_free_++;
    }

    /// Count below lambda(s) for signed wavenumber s.
    int operator()(double s) const
    {
        for (int attempt = 0; attempt < 8; ++attempt) {
            auto n = try_count(s);
            if (n) return *n;
            s = std::nextafter(s, std::numeric_limits<double>::infinity());
        }
        throw Error(ErrorCode::BracketFailure, "counting function is singular");
    }

private:
    std::optional<int> try_count(double s) const
    {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(num_free_, num_free_);
        int dirichlet_count = 0;
        for (int v = 0; v < g_.num_vertices(); ++v)
            if (free_index_[v] >= 0) M(free_index_[v], free_index_[v]) += g_.condition(v).alpha();
        for (const Edge& ed : g_.edges()) {
            const double L = ed.length;
            double diag = 0.0;
            double off = 0.0;
            if (s > 0.0) {
                const double kL = s * L;
                dirichlet_count += static_cast<int>(std::ceil(kL / pi)) - 1;
                const double sn = std::sin(kL);
                if (sn == 0.0) return std::nullopt;
                diag = s * std::cos(kL) / sn;
                off = -s / sn;
            } else if (s == 0.0) {
                diag = 1.0 / L;
                off = -1.0 / L;
            } else {
                const double kappa = -s;
                const double x = kappa * L;
                diag = kappa / std::tanh(x);
                off = -2.0 * kappa * std::exp(-x) / (-std::expm1(-2.0 * x));
            }
            const int a = free_index_[ed.u];
            const int b = free_index_[ed.v];
            if (ed.u == ed.v) {
                if (a >= 0) M(a, a) += 2.0 * (diag + off);
                continue;
            }
            if (a >= 0) M(a, a) += diag;
            if (b >= 0) M(b, b) += diag;
            if (a >= 0 && b >= 0) {
                M(a, b) += off;
                M(b, a) += off;
            }
        }
        if (!M.allFinite()) return std::nullopt;
        int negative = 0;
        if (num_free_ > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
            for (int i = 0; i < num_free_; ++i)
                if (eig.eigenvalues()(i) < 0.0) ++negative;
        }
        return dirichlet_count + negative;
    }

    const MetricGraph& g_;
    std::vector<int> free_index_;
    int num_free_ = 0;
};

// ---------------------------------------------------------------------------
// Secular system

namespace detail {

/// Assembled vertex-condition system with positive row and column scalings.
struct SecularSystem {
    Eigen::MatrixXd matrix;      // D_r * M * D_c
    Eigen::VectorXd col_scale;   // D_c
    Eigen::VectorXd row_scale;   // D_r
};

inline SecularSystem secular_system(const MetricGraph& g, double lambda)
{
    const int n = 2 * g.num_edges();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    // sum of |terms| per entry; scales come from this so that rows whose
    // terms cancel at an eigenvalue stay small after equilibration
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    auto add = [&](int r, int c, double t) {
        M(r, c) += t;
        W(r, c) += std::abs(t);
    };
    std::vector<EdgeBasis> basis;
    basis.reserve(static_cast<std::size_t>(g.num_edges()));
    for (const Edge& ed : g.edges()) basis.push_back(EdgeBasis::make(lambda, ed.length));

    auto end_value = [&](const EdgeEnd& end) {
        const auto& b = basis[end.edge];
        return b.value(end.at_end ? b.L : 0.0);
    };
    auto end_inward_slope = [&](const EdgeEnd& end) {
        const auto& b = basis[end.edge];
        auto d = b.slope(end.at_end ? b.L : 0.0);
        if (end.at_end) return std::array<double, 2>{-d[0], -d[1]};
        return d;
    };

    int row = 0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        auto ends = g.ends(v);
        if (ends.empty()) continue;
        const auto& cond = g.condition(v);
        if (cond.is_dirichlet()) {
            for (const auto& end : ends) {
                auto val = end_value(end);
                add(row, 2 * end.edge, val[0]);
                add(row, 2 * end.edge + 1, val[1]);
                ++row;
            }
            continue;
        }
        auto first = end_value(ends[0]);
        for (std::size_t i = 1; i < ends.size(); ++i) {
            auto val = end_value(ends[i]);
            add(row, 2 * ends[0].edge, first[0]);
            add(row, 2 * ends[0].edge + 1, first[1]);
            add(row, 2 * ends[i].edge, -val[0]);
            add(row, 2 * ends[i].edge + 1, -val[1]);
            ++row;
        }
        // cos(phi/2) sum f' - sin(phi/2) f = 0
        const double c = std::cos(0.5 * cond.angle());
        const double s = std::sin(0.5 * cond.angle());
        for (const auto& end : ends) {
            auto d = end_inward_slope(end);
            add(row, 2 * end.edge, c * d[0]);
            add(row, 2 * end.edge + 1, c * d[1]);
        }
        add(row, 2 * ends[0].edge, -s * first[0]);
        add(row, 2 * ends[0].edge + 1, -s * first[1]);
        ++row;
    }

    // column scale: size of each basis function as (value, slope / k) at the edge ends,
    // which cannot vanish together
    SecularSystem sys;
    sys.col_scale = Eigen::VectorXd::Ones(n);
    sys.row_scale = Eigen::VectorXd::Ones(n);
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& b = basis[e];
        const double ks = std::max(b.k, 1.0 / b.L);
        for (int i = 0; i < 2; ++i) {
            double size = 0.0;
            for (double x : {0.0, b.L}) size = std::max(size, std::hypot(b.value(x)[i], b.slope(x)[i] / ks));
            sys.col_scale(2 * e + i) = 1.0 / size;
        }
    }
    W = W * sys.col_scale.asDiagonal();
    for (int i = 0; i < n; ++i) {
        double norm = W.row(i).norm();
        if (norm > 0.0) sys.row_scale(i) = 1.0 / norm;
    }
    sys.matrix = sys.row_scale.asDiagonal() * M * sys.col_scale.asDiagonal();
    return sys;
}

} // namespace detail

/**
 * Sign-carrying determinant of the row/column-equilibrated vertex-condition
 * system at lambda(s).  Zero exactly at eigenvalues.  Edges in the decaying
 * exponential branch contribute a sign flip so the sign matches the
 * (sinh, cosh) basis convention.
 */
inline double secular_value(const MetricGraph& g, double s)
{
    const double lambda = lambda_of(s);
    auto sys = detail::secular_system(g, lambda);
    double det = sys.matrix.partialPivLu().determinant();
    for (const Edge& ed : g.edges())
        if (EdgeBasis::make(lambda, ed.length).branch == Branch::exponential) det = -det;
    return det;
}

// ---------------------------------------------------------------------------
// Eigenvalues

namespace detail {

class SpectrumSolver {
public:
    SpectrumSolver(const MetricGraph& g, double tolerance)
        : g_(g), count_(g), tol_(tolerance), scale_(1.0 / g.total_length())
    {
    }

    int count(double s)
    {
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        int n = count_(s);
        cache_.emplace(s, n);
        return n;
    }

    /// Signed wavenumber with count 0.
    double lower_bound()
    {
        double s = -1.0 / g_.min_length();
        for (int i = 0; i < 200 && count(s) > 0; ++i) s *= 2.0;
        if (count(s) > 0) throw Error(ErrorCode::BracketFailure, "spectrum is not bounded below");
        return s;
    }

    /// Signed wavenumber with count >= n.
    double upper_bound(int n)
    {
        double s = pi * (n + g_.num_edges() + 1) / g_.total_length();
        for (int i = 0; i < 200 && count(s) < n; ++i) s *= 2.0;
        if (count(s) < n) throw Error(ErrorCode::BracketFailure, "no upper bracket");
        return s;
    }

    /// Signed wavenumber of the n-th eigenvalue.
    double locate(int n)
    {
        double lo = lower_bound();
        double hi = upper_bound(n);
        for (const auto& [s, c] : cache_) {
            if (c < n && s > lo) lo = s;
            if (c >= n && s < hi) hi = s;
        }
        const double coarse = std::max(tol_, 1e-10);
        for (int iter = 0; iter < 400; ++iter) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (hi - lo <= coarse * std::max({std::abs(lo), std::abs(hi), scale_})) break;
            if (count(mid) < n)
                lo = mid;
            else
                hi = mid;
        }
        double s = 0.5 * (lo + hi);
        if (std::abs(s) * g_.total_length() < 1e-6 && null_ratio(0.0) < 1e-10) return 0.0;
        return polish(n, s);
    }

    /// Nullity of the secular matrix at lambda(s).
    int nullity(double s, double rank)
    {
        auto sys = secular_system(g_, lambda_of(s));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix);
        const auto& sv = svd.singularValues();
        int k = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) < rank * sv(0)) ++k;
        return k;
    }

    int multiplicity(double s, double cluster, double rank)
    {
        if (s == 0.0) return nullity(0.0, rank);
        double delta = cluster * std::max(std::abs(s), scale_);
        return count(s + delta) - count(s - delta);
    }

private:
    double null_ratio(double s)
    {
        auto sys = secular_system(g_, lambda_of(s));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix);
        const auto& sv = svd.singularValues();
        return sv(sv.size() - 1) / sv(0);
    }

    // Even-multiplicity roots: the smallest singular value has a V-shaped minimum.
    double minimise_sigma(double a, double b)
    {
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - r * (b - a);
        double x2 = a + r * (b - a);
        double f1 = null_ratio(x1);
        double f2 = null_ratio(x2);
        for (int iter = 0; iter < 200; ++iter) {
            if (b - a <= tol_ * std::max({std::abs(a), std::abs(b), scale_})) break;
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = null_ratio(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = null_ratio(x2);
            }
        }
        return 0.5 * (a + b);
    }

    // The counting function loses accuracy next to edge Dirichlet eigenvalues,
    // where the vertex matrix has poles.  An isolated simple root is refined on
    // the secular determinant, which has no poles.
    double polish(int n, double s)
    {
        const double w = 1e-6 * std::max(std::abs(s), scale_);
        double a = s - w;
        double b = s + w;
        if (count(a) >= n || count(b) < n) return s;
        double fa = secular_value(g_, a);
        double fb = secular_value(g_, b);
        if (fa == 0.0) return a;
        if (fb == 0.0) return b;
        if (count(a) != n - 1 || count(b) != n || (fa < 0.0) == (fb < 0.0)) return minimise_sigma(a, b);
        for (int iter = 0; iter < 200; ++iter) {
            double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (b - a <= tol_ * std::max({std::abs(a), std::abs(b), scale_})) break;
            double fm = secular_value(g_, mid);
            if (fm == 0.0) return mid;
            if ((fm < 0.0) == (fa < 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        return 0.5 * (a + b);
    }

private:
    const MetricGraph& g_;
    CountingFunction count_;
    double tol_;
    double scale_;
    std::map<double, int> cache_;
};

inline EigenPair make_pair(int n, double s, int multiplicity)
{
    EigenPair p;
    p.index = n;
    p.wavenumber = s;
    p.lambda = lambda_of(s);
    p.multiplicity = std::max(1, multiplicity);
    p.simple = p.multiplicity == 1;
    return p;
}

} // namespace detail

struct WeylAudit {
    double min_discrepancy = 0.0;   // min over n of n - L k_n / pi
    double max_discrepancy = 0.0;
    double lower_limit = 0.0;       // -(|E| + 1)
    double upper_limit = 0.0;       // |V| + 1
    bool ok = true;
};

/// Checks n - L k_n / pi against the bounds implied by the Dirichlet-decoupled count.
inline WeylAudit weyl_audit(const MetricGraph& g, const std::vector<EigenPair>& pairs)
{
    WeylAudit a;
    a.lower_limit = -(g.num_edges() + 1.0);
    a.upper_limit = g.num_vertices() + 1.0;
    bool first = true;
    for (const auto& p : pairs) {
        if (p.lambda <= 0.0) continue;
        double d = p.index - g.total_length() * p.wavenumber / pi;
        if (first) {
            a.min_discrepancy = a.max_discrepancy = d;
            first = false;
        }
        a.min_discrepancy = std::min(a.min_discrepancy, d);
        a.max_discrepancy = std::max(a.max_discrepancy, d);
    }
    a.ok = a.min_discrepancy >= a.lower_limit && a.max_discrepancy <= a.upper_limit;
    return a;
}

/// Ordered eigenvalues lambda_1 <= lambda_2 <= ... with multiplicities.
inline std::vector<EigenPair> eigenvalues(const MetricGraph& g, const SpectrumQuery& q,
                                          const SpectralOptions& opt = {})
{
    if (q.count.has_value() == q.kmax.has_value())
        throw std::invalid_argument("SpectrumQuery needs exactly one of count / kmax");
    if (g.num_edges() == 0) return {};
    detail::SpectrumSolver solver(g, q.tolerance);
    int count = 0;
    if (q.count) {
        count = *q.count;
    } else {
        double s = *q.kmax;
        count = solver.count(std::nextafter(s, std::numeric_limits<double>::infinity()));
    }
    std::vector<EigenPair> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int n = 1; n <= count; ++n) {
        double s = solver.locate(n);
        out.push_back(detail::make_pair(n, s, solver.multiplicity(s, opt.cluster, opt.rank)));
    }
    if (!weyl_audit(g, out).ok)
        throw Error(ErrorCode::BracketFailure, "eigenvalue count deviates from the Weyl bounds");
    return out;
}

/// The n-th eigenvalue alone (1-based).
inline EigenPair eigenvalue_at(const MetricGraph& g, int n, double tolerance = 1e-15,
                               const SpectralOptions& opt = {})
{
    if (n < 1) throw std::invalid_argument("eigenvalue index starts at 1");
    detail::SpectrumSolver solver(g, tolerance);
    double s = solver.locate(n);
    return detail::make_pair(n, s, solver.multiplicity(s, opt.cluster, opt.rank));
}

inline double ground_energy(const MetricGraph& g) { return eigenvalue_at(g, 1).lambda; }

// ---------------------------------------------------------------------------
// Eigenfunctions

inline double evaluate(const MetricGraph& g, const EigenPair& p, int e, double x)
{
    auto b = EdgeBasis::make(p.lambda, g.edge(e).length).value(x);
    return p.coefficients.at(static_cast<std::size_t>(e))[0] * b[0] + p.coefficients[e][1] * b[1];
}

/// Derivative along the edge orientation (increasing x).
inline double evaluate_slope(const MetricGraph& g, const EigenPair& p, int e, double x)
{
    auto b = EdgeBasis::make(p.lambda, g.edge(e).length).slope(x);
    return p.coefficients.at(static_cast<std::size_t>(e))[0] * b[0] + p.coefficients[e][1] * b[1];
}

/// Value at vertex v, read from its first incident edge end.
inline double vertex_value(const MetricGraph& g, const EigenPair& p, int v)
{
    auto ends = g.ends(v);
    if (ends.empty()) return 0.0;
    const auto& end = ends.front();
    return evaluate(g, p, end.edge, end.at_end ? g.edge(end.edge).length : 0.0);
}

/// Sum of inward derivatives at v.
inline double vertex_flux(const MetricGraph& g, const EigenPair& p, int v)
{
    double sum = 0.0;
    for (const auto& end : g.ends(v)) {
        double L = g.edge(end.edge).length;
        sum += end.at_end ? -evaluate_slope(g, p, end.edge, L) : evaluate_slope(g, p, end.edge, 0.0);
    }
    return sum;
}

inline double norm_squared(const MetricGraph& g, const EigenPair& p)
{
    double total = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        auto m = EdgeBasis::make(p.lambda, g.edge(e).length).mass();
        const auto& c = p.coefficients[e];
        total += m[0] * c[0] * c[0] + 2.0 * m[1] * c[0] * c[1] + m[2] * c[1] * c[1];
    }
    return total;
}

/// h[f, f] = sum_e int |f'|^2 + sum_v alpha_v |f(v)|^2 (Dirichlet vertices excluded).
inline double quadratic_form(const MetricGraph& g, const EigenPair& p)
{
    double total = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        auto s = EdgeBasis::make(p.lambda, g.edge(e).length).stiffness();
        const auto& c = p.coefficients[e];
        total += s[0] * c[0] * c[0] + 2.0 * s[1] * c[0] * c[1] + s[2] * c[1] * c[1];
    }
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto& cond = g.condition(v);
        if (cond.is_dirichlet() || g.degree(v) == 0) continue;
        double f = vertex_value(g, p, v);
        total += cond.alpha() * f * f;
    }
    return total;
}

/// Upper estimate of max |f| over edge e.
inline double edge_sup(const MetricGraph& g, const EigenPair& p, int e)
{
    const double L = g.edge(e).length;
    const auto& c = p.coefficients[e];
    auto b = EdgeBasis::make(p.lambda, L);
    if (b.branch == Branch::oscillatory) return std::hypot(c[0], c[1]);
    return std::max(std::abs(evaluate(g, p, e, 0.0)), std::abs(evaluate(g, p, e, L)));
}

inline double sup_norm(const MetricGraph& g, const EigenPair& p)
{
    double m = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) m = std::max(m, edge_sup(g, p, e));
    return m;
}

/// Residual of the equilibrated vertex-condition system, relative to the coefficient size.
inline double vertex_residual(const MetricGraph& g, const EigenPair& p)
{
    auto sys = detail::secular_system(g, p.lambda);
    const int n = 2 * g.num_edges();
    Eigen::VectorXd y(n);
    for (int e = 0; e < g.num_edges(); ++e) {
        y(2 * e) = p.coefficients[e][0] / sys.col_scale(2 * e);
        y(2 * e + 1) = p.coefficients[e][1] / sys.col_scale(2 * e + 1);
    }
    double ny = y.norm();
    return ny > 0.0 ? (sys.matrix * y).norm() / ny : 0.0;
}

/**
 * Fills in the L2-normalised eigenfunction of a simple eigenvalue: the null
 * vector of the secular system, signed so that the first non-negligible
 * coefficient in edge order is positive.
 */
inline EigenPair eigenfunction(const MetricGraph& g, EigenPair pair, const SpectralOptions& opt = {})
{
    if (!pair.simple)
        throw Error(ErrorCode::DegenerateEigenvalue, "eigenvalue " + std::to_string(pair.index) + " is not simple");
    auto sys = detail::secular_system(g, pair.lambda);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int n = static_cast<int>(sv.size());
    int nullity = 0;
    for (int i = 0; i < n; ++i)
        if (sv(i) < opt.rank * sv(0)) ++nullity;
    if (nullity >= 2)
        throw Error(ErrorCode::DegenerateEigenvalue,
                    "null space of dimension " + std::to_string(nullity) + " at eigenvalue " +
                        std::to_string(pair.index));
    Eigen::VectorXd c = sys.col_scale.asDiagonal() * svd.matrixV().col(n - 1);
    pair.coefficients.assign(static_cast<std::size_t>(g.num_edges()), {0.0, 0.0});
    for (int e = 0; e < g.num_edges(); ++e) pair.coefficients[e] = {c(2 * e), c(2 * e + 1)};
    double scale = 1.0 / std::sqrt(norm_squared(g, pair));
    double biggest = 0.0;
    for (const auto& cf : pair.coefficients) biggest = std::max({biggest, std::abs(cf[0]), std::abs(cf[1])});
    for (const auto& cf : pair.coefficients) {
        double lead = std::abs(cf[0]) > 1e-12 * biggest ? cf[0] : cf[1];
        if (std::abs(lead) > 1e-12 * biggest) {
            if (lead < 0.0) scale = -scale;
            break;
        }
    }
    for (auto& cf : pair.coefficients) {
        cf[0] *= scale;
        cf[1] *= scale;
    }
    pair.normalized = true;
    return pair;
}

/// Computes the n-th eigenpair with its eigenfunction; DegenerateEigenvalue when not simple.
inline EigenPair eigenpair(const MetricGraph& g, int n, const SpectralOptions& opt = {})
{
    return eigenfunction(g, eigenvalue_at(g, n, 1e-15, opt), opt);
}

// ---------------------------------------------------------------------------
// Zeros and nodal counts

/**
 * Interior zeros of an eigenfunction, edge by edge in closed form.  A zero
 * within vertex_zero * L of a non-Dirichlet vertex marks the partition
 * improper; zeros sitting on Dirichlet vertices are not partition points.
 */
inline Partition zeros(const MetricGraph& g, const EigenPair& p, const SpectralOptions& opt = {})
{
    if (!p.has_coefficients()) throw std::invalid_argument("zeros() needs eigenfunction coefficients");
    Partition out;
    const double global_rms = std::sqrt(norm_squared(g, p) / g.total_length());
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        const double L = ed.length;
        const auto& c = p.coefficients[e];
        auto basis = EdgeBasis::make(p.lambda, L);
        auto m = basis.mass();
        double edge_rms = std::sqrt(std::max(0.0, m[0] * c[0] * c[0] + 2.0 * m[1] * c[0] * c[1] + m[2] * c[1] * c[1]) / L);
        if (edge_rms <= opt.vertex_zero * global_rms)
            throw Error(ErrorCode::IdenticallyZeroEdge, "eigenfunction vanishes on edge " + g.edge_name(e));

        std::vector<double> xs;
        const double tol = opt.vertex_zero * L;
        switch (basis.branch) {
        case Branch::oscillatory: {
            // a sin kx + b cos kx = R sin(kx + theta)
            const double k = basis.k;
            const double theta = std::atan2(c[1], c[0]);
            long j0 = static_cast<long>(std::floor((theta - k * tol) / pi));
            for (long j = j0; ; ++j) {
                double x = (j * pi - theta) / k;
                if (x > L + tol) break;
                if (x >= -tol) xs.push_back(x);
            }
            break;
        }
        case Branch::linear:
            if (c[0] != 0.0) xs.push_back(-c[1] / c[0]);
            break;
        case Branch::hyperbolic:
            if (c[0] != 0.0 && std::abs(c[1] / c[0]) < 1.0) xs.push_back(std::atanh(-c[1] / c[0]) / basis.k);
            break;
        case Branch::exponential:
            if (c[0] * c[1] < 0.0) xs.push_back(0.5 * (L + std::log(-c[0] / c[1]) / basis.k));
            break;
        }
        for (double x : xs) {
            if (x < -tol || x > L + tol) continue;
            bool near_u = x <= tol;
            bool near_v = x >= L - tol;
            if (near_u && g.condition(ed.u).is_dirichlet()) continue;
            if (near_v && g.condition(ed.v).is_dirichlet()) continue;
            if (near_u || near_v) out.proper = false;
            out.points.push_back({e, std::clamp(x, 0.0, L)});
        }
    }
    return out;
}

struct NodalCounts {
    int mu = 0;               // interior zeros
    int nu = 0;               // nodal domains
    int betti_cut = 0;        // Betti number of the graph cut at the zeros
};

/**
 * Counts zeros and nodal domains.  nu is obtained from the pieces of the cut
 * graph and, independently, from the cycle rank of the edges free of zeros;
 * the two must agree.
 */
inline NodalCounts nodal_counts(const MetricGraph& g, const EigenPair& p, const SpectralOptions& opt = {})
{
    Partition z = zeros(g, p, opt);
    if (!is_proper(g, z)) throw Error(ErrorCode::ImproperEigenfunction, "eigenfunction vanishes at a vertex");
    SplitGraph pieces = cut(g, z);
    NodalCounts out;
    out.mu = static_cast<int>(z.size());
    out.nu = pieces.parts.count;

    std::vector<bool> has_zero(static_cast<std::size_t>(g.num_edges()), false);
    for (const auto& pt : z.points) has_zero[pt.edge] = true;
    detail::DisjointSets sets(g.num_vertices());
    int cycles = 0;
    for (int e = 0; e < g.num_edges(); ++e) {
        if (has_zero[e]) continue;
        int a = sets.find(g.edge(e).u);
        int b = sets.find(g.edge(e).v);
        if (a == b)
            ++cycles;
        else
            sets.unite(a, b);
    }
    out.betti_cut = cycles;
    const int by_identity = out.mu + components(g).count - (betti(g) - cycles);
    if (by_identity != out.nu) throw std::logic_error("nodal count identity violated");
    return out;
}

/// Simple, and non-zero at every non-Dirichlet vertex.
inline bool is_proper(const MetricGraph& g, const EigenPair& p, const SpectralOptions& opt = {})
{
    if (!p.simple) return false;
    if (!p.has_coefficients()) throw std::invalid_argument("is_proper() needs eigenfunction coefficients");
    const double sup = sup_norm(g, p);
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.condition(v).is_dirichlet() || g.degree(v) == 0) continue;
        for (const auto& end : g.ends(v)) {
            double f = evaluate(g, p, end.edge, end.at_end ? g.edge(end.edge).length : 0.0);
            if (std::abs(f) <= opt.vertex_zero * sup) return false;
        }
    }
    return true;
}

} // namespace qgraph
