#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qgraph/graph_io.hpp"
#include "qgraph/spectral.hpp"

using namespace qgraph;

namespace {

MetricGraph bundled(const std::string& name)
{
    return load_graph(std::string(QGRAPH_GRAPH_DIR) + "/" + name + ".qg");
}

MetricGraph interval(VertexCondition a, VertexCondition b, double L = 1.0)
{
    MetricGraph g;
    g.add_vertex(a);
    g.add_vertex(b);
    g.add_edge(0, 1, L);
    return g;
}

MetricGraph star(std::vector<double> lengths, VertexCondition tip = VertexCondition::dirichlet())
{
    MetricGraph g;
    int c = g.add_vertex(VertexCondition::neumann());
    for (double L : lengths) g.add_edge(c, g.add_vertex(tip), L);
    return g;
}

template <class F>
double bisect(F f, double a, double b)
{
    double fa = f(a);
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Roots of the secular determinant located by sign changes on a dense k grid.
std::vector<double> dense_scan_roots(const MetricGraph& g, double kmax, int samples)
{
    std::vector<double> roots;
    double prev_k = 1e-3;
    double prev = secular_value(g, prev_k);
    for (int i = 1; i <= samples; ++i) {
        double k = 1e-3 + (kmax - 1e-3) * i / samples;
        double v = secular_value(g, k);
        if ((v < 0) != (prev < 0))
            roots.push_back(bisect([&](double s) { return secular_value(g, s); }, prev_k, k));
        prev = v;
        prev_k = k;
    }
    return roots;
}

// Integral of f^2 and of f'^2 by composite Simpson, independent of the closed forms.
std::pair<double, double> simpson_energy(const MetricGraph& g, const EigenPair& p, int per_edge = 2000)
{
    double mass = 0.0, stiff = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        double L = g.edge(e).length;
        double h = L / per_edge;
        for (int i = 0; i <= per_edge; ++i) {
            double w = (i == 0 || i == per_edge) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            double f = evaluate(g, p, e, i * h);
            double d = evaluate_slope(g, p, e, i * h);
            mass += w * h / 3.0 * f * f;
            stiff += w * h / 3.0 * d * d;
        }
    }
    return {mass, stiff};
}

}  // namespace

TEST(Spectral, DirichletInterval)
{
    auto g = interval(VertexCondition::dirichlet(), VertexCondition::dirichlet());
    auto ev = eigenvalues(g, SpectrumQuery::first(50));
    ASSERT_EQ(ev.size(), 50u);
    for (int n = 1; n <= 50; ++n) {
        const auto& p = ev[n - 1];
        EXPECT_NEAR(p.lambda / std::pow(n * pi, 2), 1.0, 1e-12) << n;
        EXPECT_EQ(p.multiplicity, 1);
        auto f = eigenfunction(g, p);
        EXPECT_EQ(nodal_counts(g, f).mu, n - 1);
        EXPECT_EQ(nodal_counts(g, f).nu, n);
    }
}

TEST(Spectral, NeumannIntervalHasZeroMode)
{
    auto g = interval(VertexCondition::neumann(), VertexCondition::neumann(), 2.0);
    auto ev = eigenvalues(g, SpectrumQuery::first(4));
    EXPECT_EQ(ev[0].lambda, 0.0);
    for (int n = 2; n <= 4; ++n) EXPECT_NEAR(ev[n - 1].lambda, std::pow((n - 1) * pi / 2.0, 2), 1e-10);
    auto f = eigenfunction(g, ev[0]);
    EXPECT_NEAR(evaluate(g, f, 0, 0.3), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_EQ(zeros(g, f).size(), 0u);
}

TEST(Spectral, KmaxQuery)
{
    auto g = interval(VertexCondition::dirichlet(), VertexCondition::dirichlet());
    auto ev = eigenvalues(g, SpectrumQuery::up_to(3.5 * pi));
    EXPECT_EQ(ev.size(), 3u);
    EXPECT_THROW(eigenvalues(g, SpectrumQuery{}), std::invalid_argument);
}

TEST(Spectral, RobinNegativeEigenvalueMatchesBisection)
{
    // f'(0) = alpha f(0) with alpha = -10, f(1) = 0: bound state kappa coth kappa = 10
    auto g = interval(VertexCondition::robin(-10.0), VertexCondition::dirichlet());
    double kappa = bisect([](double x) { return x / std::tanh(x) - 10.0; }, 1.0, 20.0);
    auto ev = eigenvalues(g, SpectrumQuery::first(4));
    EXPECT_NEAR(ev[0].lambda, -kappa * kappa, 1e-10 * kappa * kappa);
    EXPECT_LT(ev[0].wavenumber, 0.0);
    // positive branch: tan k = k / 10
    for (int j = 1; j <= 3; ++j) {
        double k = bisect([](double x) { return std::sin(x) * 10.0 - x * std::cos(x); },
                          (j - 0.5) * pi + 1e-9, (j + 0.5) * pi - 1e-9);
        EXPECT_NEAR(ev[j].wavenumber, k, 1e-11 * k) << j;
    }
    auto f = eigenfunction(g, ev[0]);
    EXPECT_LT(vertex_residual(g, f), 1e-10);
    EXPECT_NEAR(quadratic_form(g, f), f.lambda, 1e-9 * std::abs(f.lambda));
}

TEST(Spectral, DeepRobinBoundStateStaysFinite)
{
    auto g = interval(VertexCondition::robin(-1e4), VertexCondition::neumann(), 3.0);
    auto f = eigenpair(g, 1);
    EXPECT_NEAR(f.lambda, -1e8, 1e-4 * 1e8);
    EXPECT_NEAR(norm_squared(g, f), 1.0, 1e-10);
    EXPECT_LT(vertex_residual(g, f), 1e-10);
}

TEST(Spectral, DenseScanOracleAgrees)
{
    // generic lengths keep the spectrum simple, so every root is a sign change
    auto g = star({0.83, 1.0, 1.37});
    auto roots = dense_scan_roots(g, 12.0, 24000);
    auto ev = eigenvalues(g, SpectrumQuery::up_to(12.0));
    ASSERT_EQ(ev.size(), roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(ev[i].wavenumber, roots[i], 1e-9);
}

TEST(Spectral, EquilateralStarDegeneracy)
{
    auto g = star({1.0, 1.0, 1.0});
    auto ev = eigenvalues(g, SpectrumQuery::first(3));
    EXPECT_NEAR(ev[0].wavenumber, pi / 2.0, 1e-12);
    EXPECT_TRUE(ev[0].simple);
    EXPECT_NEAR(ev[1].wavenumber, pi, 1e-12 * pi);
    EXPECT_NEAR(ev[2].wavenumber, pi, 1e-12 * pi);
    EXPECT_EQ(ev[1].multiplicity, 2);
    EXPECT_FALSE(ev[1].simple);
    EXPECT_FALSE(is_proper(g, ev[1]));
    try {
        eigenfunction(g, ev[1]);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateEigenvalue);
    }
    // forcing the simple flag still hits the two-dimensional null space
    auto forced = ev[1];
    forced.simple = true;
    EXPECT_THROW(eigenfunction(g, forced), Error);
}

TEST(Spectral, SecularValueVanishesAtEigenvalues)
{
    auto g = bundled("lasso");
    auto ev = eigenvalues(g, SpectrumQuery::first(10));
    for (const auto& p : ev) {
        double at = std::abs(secular_value(g, p.wavenumber));
        double off = std::abs(secular_value(g, p.wavenumber + 1e-3));
        EXPECT_LT(at, 1e-6 * off) << p.index;
    }
}

TEST(Spectral, EigenfunctionsSatisfyConditions)
{
    for (const char* name : {"lasso", "figure_eight", "star_short", "star_long", "loop_edge"}) {
        auto g = bundled(name);
        auto ev = eigenvalues(g, SpectrumQuery::first(15));
        for (const auto& p : ev) {
            if (!p.simple) continue;
            auto f = eigenfunction(g, p);
            EXPECT_LT(vertex_residual(g, f), 1e-9) << name << " " << p.index;
            auto [mass, stiff] = simpson_energy(g, f);
            EXPECT_NEAR(mass, 1.0, 1e-8) << name << " " << p.index;
            EXPECT_NEAR(stiff, f.lambda, 1e-7 * std::max(1.0, f.lambda)) << name << " " << p.index;
            // independent substitution: continuity and Kirchhoff flux at every vertex
            for (int v = 0; v < g.num_vertices(); ++v) {
                double flux = 0.0, first = NAN;
                for (const auto& end : g.ends(v)) {
                    double L = g.edge(end.edge).length;
                    double val = evaluate(g, f, end.edge, end.at_end ? L : 0.0);
                    double d = evaluate_slope(g, f, end.edge, end.at_end ? L : 0.0);
                    flux += end.at_end ? -d : d;
                    if (std::isnan(first)) first = val;
                    if (g.condition(v).is_dirichlet()) {
                        EXPECT_NEAR(val, 0.0, 1e-9);
                    } else {
                        EXPECT_NEAR(val, first, 1e-9);
                    }
                }
                if (!g.condition(v).is_dirichlet()) {
                    EXPECT_NEAR(flux, g.condition(v).alpha() * first, 1e-8 * (1.0 + std::sqrt(std::abs(f.lambda))));
                }
            }
        }
    }
}

TEST(Spectral, SignConventionAndNormalisation)
{
    auto g = bundled("lasso");
    auto a = eigenpair(g, 3);
    auto b = eigenpair(g, 3);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_NEAR(norm_squared(g, a), 1.0, 1e-12);
    EXPECT_GT(a.coefficients[0][0] != 0.0 ? a.coefficients[0][0] : a.coefficients[0][1], 0.0);
}

TEST(Spectral, WeylAuditBounds)
{
    auto g = bundled("figure_eight");
    auto ev = eigenvalues(g, SpectrumQuery::first(60));
    auto audit = weyl_audit(g, ev);
    EXPECT_TRUE(audit.ok);
    EXPECT_GE(audit.min_discrepancy, -g.num_edges());
    EXPECT_LE(audit.max_discrepancy, g.num_vertices());
}

TEST(Spectral, ZerosOfLassoModes)
{
    auto g = bundled("lasso");
    auto ev = eigenvalues(g, SpectrumQuery::first(20));
    for (const auto& p : ev) {
        auto f = eigenfunction(g, p);
        if (!is_proper(g, f)) continue;
        auto z = zeros(g, f);
        ASSERT_TRUE(z.proper);
        for (const auto& pt : z.points) EXPECT_NEAR(evaluate(g, f, pt.edge, pt.x), 0.0, 1e-10);
        // sign changes between consecutive sample points match the zero count per edge
        for (int e = 0; e < g.num_edges(); ++e) {
            int changes = 0;
            double L = g.edge(e).length;
            double prev = evaluate(g, f, e, 0.0);
            for (int i = 1; i <= 20000; ++i) {
                double cur = evaluate(g, f, e, L * i / 20000);
                if ((cur < 0) != (prev < 0) && cur != 0.0) ++changes;
                prev = cur;
            }
            int counted = 0;
            for (const auto& pt : z.points) counted += pt.edge == e;
            EXPECT_EQ(changes, counted) << p.index << " edge " << e;
        }
    }
}

TEST(Spectral, ImproperLoopModesDetected)
{
    // k = 2 pi: the antisymmetric loop mode vanishes at the junction and on the tail
    auto g = bundled("lasso");
    auto ev = eigenvalues(g, SpectrumQuery::up_to(2.0 * pi + 0.01));
    const auto& p = ev.back();
    EXPECT_NEAR(p.wavenumber, 2.0 * pi, 1e-10);
    auto f = eigenfunction(g, p);
    EXPECT_FALSE(is_proper(g, f));
    EXPECT_THROW(zeros(g, f), Error);
}

TEST(Spectral, NodalIdentityOnBundledGraphs)
{
    for (const char* name : {"interval", "lasso", "figure_eight", "star_short", "star_long", "loop_edge"}) {
        auto g = bundled(name);
        int beta = betti(g);
        for (const auto& p : eigenvalues(g, SpectrumQuery::first(30))) {
            if (!p.simple) continue;
            auto f = eigenfunction(g, p);
            if (!is_proper(g, f)) continue;
            auto c = nodal_counts(g, f);
            EXPECT_EQ(c.nu, c.mu + 1 - (beta - c.betti_cut)) << name << " " << p.index;
            EXPECT_LE(c.nu, p.index);
            EXPECT_GE(c.nu, p.index - (beta - c.betti_cut));
        }
    }
}

TEST(Spectral, GroundEnergy)
{
    auto g = interval(VertexCondition::dirichlet(), VertexCondition::dirichlet(), 0.5);
    EXPECT_NEAR(ground_energy(g), 4.0 * pi * pi, 1e-12);
}
