#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/*
 * Line-oriented graph text format, '#' starts a comment:
 *
 *   vertex <id> neumann | dirichlet | robin <alpha> | angle <phi>
 *   edge <id> <u> <v> length <L>
 *
 * Vertices must be declared before the edges that use them.
 */

namespace detail {

inline std::vector<std::string_view> split_words(std::string_view line)
{
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) words.push_back(line.substr(i, j - i));
        i = j;
    }
    return words;
}

inline double parse_real(std::string_view word, int line_no)
{
    double value = 0.0;
    const char* first = word.data();
    const char* last = word.data() + word.size();
    if (!word.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" +
                                               std::string(word) + "'");
    return value;
}

inline std::string format_real(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

} // namespace detail

inline MetricGraph parse_graph(std::istream& in)
{
    MetricGraph g;
    std::map<std::string, int, std::less<>> vertex_ids;
    std::map<std::string, int, std::less<>> edge_ids;
    std::string raw;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto w = detail::split_words(line);
        if (w.empty()) continue;
        if (w[0] == "vertex") {
            if (w.size() < 3) fail("vertex needs an id and a condition");
            std::string id(w[1]);
            if (vertex_ids.count(id)) fail("duplicate vertex id '" + id + "'");
            VertexCondition cond;
            if (w[2] == "neumann" && w.size() == 3) {
                cond = VertexCondition::neumann();
            } else if (w[2] == "dirichlet" && w.size() == 3) {
                cond = VertexCondition::dirichlet();
            } else if (w[2] == "robin" && w.size() == 4) {
                cond = VertexCondition::robin(detail::parse_real(w[3], line_no));
            } else if (w[2] == "angle" && w.size() == 4) {
                cond = VertexCondition::from_angle(detail::parse_real(w[3], line_no));
            } else {
                fail("unknown vertex condition");
            }
            vertex_ids[id] = g.add_vertex(cond, id);
        } else if (w[0] == "edge") {
            if (w.size() != 6 || w[4] != "length") fail("expected: edge <id> <u> <v> length <L>");
            std::string id(w[1]);
            if (edge_ids.count(id)) fail("duplicate edge id '" + id + "'");
            auto u = vertex_ids.find(w[2]);
            auto v = vertex_ids.find(w[3]);
            if (u == vertex_ids.end() || v == vertex_ids.end()) fail("edge references an undeclared vertex");
            double length = detail::parse_real(w[5], line_no);
            if (!(length > 0.0) || !std::isfinite(length)) fail("edge length must be positive and finite");
            edge_ids[id] = g.add_edge(u->second, v->second, length, id);
        } else {
            fail("unknown record '" + std::string(w[0]) + "'");
        }
    }
    if (g.num_edges() == 0) throw Error(ErrorCode::ParseError, "graph has no edges");
    return g;
}

inline MetricGraph parse_graph(const std::string& text)
{
    std::istringstream in(text);
    return parse_graph(in);
}

inline MetricGraph load_graph(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    return parse_graph(in);
}

inline std::string format_graph(const MetricGraph& g)
{
    std::ostringstream out;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto& c = g.condition(v);
        out << "vertex " << g.vertex_name(v) << ' ';
        if (c.is_dirichlet())
            out << "dirichlet";
        else if (c.angle() == 0.0)
            out << "neumann";
        else
            out << "angle " << detail::format_real(c.angle());
        out << '\n';
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        out << "edge " << g.edge_name(e) << ' ' << g.vertex_name(ed.u) << ' ' << g.vertex_name(ed.v)
            << " length " << detail::format_real(ed.length) << '\n';
    }
    return out.str();
}

} // namespace qgraph
