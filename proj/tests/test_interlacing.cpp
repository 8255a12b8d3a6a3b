#include <gtest/gtest.h>

#include "qgraph/graph_io.hpp"
#include "qgraph/interlacing.hpp"

using namespace qgraph;

namespace {

MetricGraph bundled(const std::string& name)
{
    return load_graph(std::string(QGRAPH_GRAPH_DIR) + "/" + name + ".qg");
}

const char* kGraphs[] = {"interval", "lasso", "figure_eight", "star_short", "star_long", "loop_edge"};

}  // namespace

TEST(Interlacing, InsertedVertexLeavesSpectrumUnchanged)
{
    for (const char* name : kGraphs) {
        auto g = bundled(name);
        auto h = insert_vertex(g, {0, 0.37 * g.edge(0).length});
        EXPECT_EQ(h.num_edges(), g.num_edges() + 1);
        EXPECT_EQ(betti(h), betti(g));
        auto a = eigenvalues(g, SpectrumQuery::first(15));
        auto b = eigenvalues(h, SpectrumQuery::first(15));
        for (int n = 0; n < 15; ++n) EXPECT_NEAR(a[n].lambda, b[n].lambda, 1e-9 * std::max(1.0, a[n].lambda)) << name;
    }
}

TEST(Interlacing, IntervalRobinSweep)
{
    auto cases = robin_suite(bundled("interval"));
    EXPECT_FALSE(cases.empty());
    for (const auto& c : cases) EXPECT_TRUE(c.pass) << c.description << " worst " << c.worst;
}

TEST(Interlacing, AllSuitesPassOnBundledGraphs)
{
    for (const char* name : kGraphs) {
        auto cases = interlacing_suites(bundled(name));
        int glue = 0, multi = 0;
        for (const auto& c : cases) {
            EXPECT_TRUE(c.pass) << name << " " << c.suite << " " << c.description << " worst " << c.worst;
            EXPECT_EQ(c.checked, 20);
            glue += c.suite == "glue";
            multi += c.suite == "glue-k";
        }
        EXPECT_GT(glue, 0) << name;
        EXPECT_GT(multi, 0) << name;
    }
}

TEST(Interlacing, LassoTailTipOntoJunction)
{
    auto g = bundled("lasso");
    InterlacingCase c;
    detail::check_interlacing(g, glue(g, 0, 1), 1, {}, c);
    EXPECT_TRUE(c.pass);
    EXPECT_EQ(betti(glue(g, 0, 1)), 2);
}

TEST(Interlacing, DetectsViolations)
{
    // reversing the roles must break the lower inequality somewhere
    auto g = bundled("lasso");
    InterlacingCase c;
    detail::check_interlacing(glue(g, 0, 1), g, 1, {}, c);
    EXPECT_FALSE(c.pass);
}
