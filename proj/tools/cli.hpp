#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/qgraph.hpp"

namespace qgraph::cli {

enum ExitCode { ok = 0, verification_failed = 1, input_error = 2, numerical_failure = 3 };

struct RunConfig {
    std::string input;
    std::string command;
    std::string out_dir = ".";
    char separator = ',';
    int count = 10;
    int n_from = 1;
    int n_to = 12;
    std::optional<int> m;
    int grid = 64;
    std::optional<int> line;            // 1-based coordinate for a line scan
    double tol_root = 1e-12;
    double tol_grad = 1e-8;
    double fd_step = 1e-4;
};

/// Thrown for unusable options; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate(const RunConfig& c)
{
    if (!(c.tol_root > 0.0) || !(c.tol_grad > 0.0) || !(c.fd_step > 0.0))
        throw UsageError("tolerances and steps must be positive");
    if (c.count < 1) throw UsageError("--count must be at least 1");
    if (c.n_from < 1 || c.n_to < c.n_from) throw UsageError("--n-from/--n-to must give a nonempty range starting at 1 or above");
    if (c.grid < 1) throw UsageError("--grid must be at least 1");
    if (c.m && *c.m < 0) throw UsageError("--m must be non-negative");
}

class Table {
public:
    Table(const RunConfig& c, const std::string& name) : sep_(c.separator)
    {
        std::filesystem::create_directories(c.out_dir);
        path_ = (std::filesystem::path(c.out_dir) / name).string();
        out_.open(path_, std::ios::binary | std::ios::trunc);
        if (!out_) throw UsageError("cannot write '" + path_ + "'");
    }

    template <class... Cells>
    void row(const Cells&... cells)
    {
        bool first = true;
        ((out_ << (first ? "" : std::string(1, sep_)) << cell(cells), first = false), ...);
        out_ << '\n';
    }

    const std::string& path() const { return path_; }

private:
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(double x) { return detail::format_real(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(bool b) { return b ? "1" : "0"; }

    char sep_;
    std::string path_;
    std::ofstream out_;
};

inline std::string angle_label(int j) { return "phi" + std::to_string(j + 1); }

// ---------------------------------------------------------------------------

inline int cmd_spectrum(const RunConfig& c, std::ostream& log)
{
    MetricGraph g = load_graph(c.input);
    auto spectrum = eigenvalues(g, SpectrumQuery::first(c.count, c.tol_root));
    Table t(c, "spectrum.csv");
    t.row("n", "k", "lambda", "multiplicity", "proper", "mu", "nu", "deficiency");
    for (const auto& p : spectrum) {
        bool proper = false;
        NodalCounts counts;
        if (p.simple) {
            EigenPair f = eigenfunction(g, p);
            proper = is_proper(g, f);
            if (proper) counts = nodal_counts(g, f);
        }
        if (proper)
            t.row(p.index, p.wavenumber, p.lambda, p.multiplicity, true, counts.mu, counts.nu, p.index - counts.nu);
        else
            t.row(p.index, p.wavenumber, p.lambda, p.multiplicity, false, "", "", "");
    }
    auto audit = weyl_audit(g, spectrum);
    log << "weyl audit: n - L k / pi in [" << audit.min_discrepancy << ", " << audit.max_discrepancy
        << "], allowed [" << audit.lower_limit << ", " << audit.upper_limit << "] "
        << (audit.ok ? "ok" : "VIOLATED") << '\n';
    log << "wrote " << t.path() << '\n';
    return ok;
}

inline int cmd_scan(const RunConfig& c, std::ostream& log)
{
    MetricGraph g = load_graph(c.input);
    auto sections = choose_sections(g);
    const int beta = static_cast<int>(sections.size());
    if (beta == 0) throw UsageError("graph is a tree; the torus is a point");
    if (!c.line && beta > 2) throw Error(ErrorCode::UnsupportedBeta, "grid scans need beta <= 2; use --line j");
    if (c.line && (*c.line < 1 || *c.line > beta)) throw UsageError("--line must be between 1 and beta");
    const int m = c.m ? *c.m : minimal_m(g) + 1;
    auto angle = [&](int i) { return -pi + (i + 1) * 2.0 * pi / c.grid; };

    Table t(c, "lambda_scan.csv");
    int in_domain = 0, total = 0;
    auto emit = [&](const TorusPoint& phi) {
        std::ostringstream line;
        for (int j = 0; j < beta; ++j) line << (j ? std::string(1, c.separator) : "") << detail::format_real(phi[j]);
        ++total;
        try {
            auto rec = phi_map(g, sections, phi, m);
            ++in_domain;
            t.row(line.str(), rec.lambda, true);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OutsideDomain) throw;
            t.row(line.str(), "", false);
        }
    };
    std::ostringstream head;
    for (int j = 0; j < beta; ++j) head << (j ? std::string(1, c.separator) : "") << angle_label(j);
    t.row(head.str(), "lambda", "in_domain");
    if (c.line) {
        TorusPoint phi(beta, 0.0);
        for (int i = 0; i < c.grid; ++i) {
            phi[*c.line - 1] = angle(i);
            emit(phi);
        }
    } else if (beta == 1) {
        for (int i = 0; i < c.grid; ++i) emit({angle(i)});
    } else {
        for (int i = 0; i < c.grid; ++i)
            for (int j = 0; j < c.grid; ++j) emit({angle(i), angle(j)});
    }
    log << "m = " << m << ", " << in_domain << " of " << total << " points in the domain\n";
    log << "wrote " << t.path() << '\n';
    return ok;
}

inline int cmd_verify(const RunConfig& c, std::ostream& log)
{
    MetricGraph g = load_graph(c.input);
    VerifyOptions opt;
    opt.grad_tol = c.tol_grad;
    opt.hessian.step = c.fd_step;
    Table t(c, "morse_report.csv");
    t.row("n", "lambda", "mu", "nu", "deficiency", "grad_norm", "morse_index", "nondegenerate", "verdict");
    int passed = 0, failed = 0, withheld = 0, skipped = 0;
    for (int n = c.n_from; n <= c.n_to; ++n) {
        MorseReport r;
        try {
            r = verify_theorem(g, n, opt);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ImproperEigenfunction) throw;
            t.row(n, eigenvalue_at(g, n).lambda, "", "", "", "", "", "", "skipped_improper");
            ++skipped;
            continue;
        }
        t.row(n, r.lambda_n, r.mu, r.nu, r.deficiency, r.grad_norm, r.morse_index, r.nondegenerate,
              to_string(r.verdict));
        switch (r.verdict) {
        case Verdict::pass: ++passed; break;
        case Verdict::fail: ++failed; break;
        case Verdict::withheld: ++withheld; break;
        }
    }
    log << passed << " pass, " << failed << " fail, " << withheld << " withheld, " << skipped
        << " skipped (improper)\n";
    log << "wrote " << t.path() << '\n';
    return failed == 0 ? ok : verification_failed;
}

inline int cmd_interlace(const RunConfig& c, std::ostream& log)
{
    MetricGraph g = load_graph(c.input);
    InterlacingOptions opt;
    opt.max_n = std::min(c.n_to, 20);
    auto cases = interlacing_suites(g, opt);
    int failures = 0;
    log << "suite    checked  worst/tol   result  case\n";
    for (const auto& k : cases) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-8s %7d  %9.2e  %-6s  ", k.suite.c_str(), k.checked, k.worst,
                      k.pass ? "PASS" : "FAIL");
        log << buf << k.description << '\n';
        failures += !k.pass;
    }
    log << cases.size() - failures << " of " << cases.size() << " cases pass\n";
    return failures == 0 ? ok : verification_failed;
}

inline int cmd_histogram(const RunConfig& c, std::ostream& log)
{
    MetricGraph g = load_graph(c.input);
    auto h = deficiency_histogram(g, c.n_from, c.n_to);
    Table t(c, "deficiency_hist.csv");
    t.row("d", "count", "frequency", "binomial_reference");
    for (std::size_t d = 0; d < h.count.size(); ++d)
        t.row(static_cast<int>(d), h.count[d], h.frequency[d], h.binomial[d]);
    log << h.total << " proper eigenfunctions, " << h.skipped.size() << " skipped\n";
    log << "wrote " << t.path() << '\n';
    return ok;
}

/// Newton runs from a uniform grid of seeds; one row per converged seed.
inline int cmd_critical(const RunConfig& c, std::ostream& log)
{
    MetricGraph g = load_graph(c.input);
    auto sections = choose_sections(g);
    const int beta = static_cast<int>(sections.size());
    if (beta == 0) throw UsageError("graph is a tree; the torus is a point");
    if (beta > 2) throw Error(ErrorCode::UnsupportedBeta, "seed grids need beta <= 2");
    const int m = c.m ? *c.m : minimal_m(g) + 1;
    CriticalSearchOptions copt;
    copt.hessian.step = c.fd_step;
    std::vector<TorusPoint> seeds;
    auto angle = [&](int i) { return -pi + (i + 0.5) * 2.0 * pi / c.grid; };
    for (int i = 0; i < c.grid; ++i) {
        if (beta == 1) {
            seeds.push_back({angle(i)});
            continue;
        }
        for (int j = 0; j < c.grid; ++j) seeds.push_back({angle(i), angle(j)});
    }
    struct Row {
        TorusPoint seed, phi;
        double lambda, grad;
        int iterations, index;
        bool nondegenerate, bipartite;
    };
    std::vector<Row> rows;
    int failed = 0;
    for (const auto& seed : seeds) {
        try {
            auto cp = find_critical(g, sections, seed, m, copt);
            auto rec = phi_map(g, sections, cp.phi, m);
            auto h = hessian(g, sections, cp.phi, m, copt.hessian);
            double floor = std::max(1e-7 * (1.0 + std::abs(rec.lambda)), 10.0 * h.discrepancy * std::max(1.0, h.matrix.norm()));
            auto mi = morse_index(h.matrix, 1e-6, floor);
            rows.push_back({seed, cp.phi, rec.lambda, cp.grad_norm, cp.iterations, mi.index, mi.nondegenerate,
                            is_bipartite(g, rec.q).bipartite});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::LeftDomain) throw;
            ++failed;
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.phi < b.phi; });
    Table t(c, "critical_points.csv");
    std::ostringstream head;
    for (int j = 0; j < beta; ++j) head << "seed" << j + 1 << c.separator;
    for (int j = 0; j < beta; ++j) head << angle_label(j) << c.separator;
    head << "lambda";
    t.row(head.str(), "grad_norm", "iterations", "morse_index", "nondegenerate", "bipartite");
    for (const auto& r : rows) {
        std::ostringstream line;
        for (double a : r.seed) line << detail::format_real(a) << c.separator;
        for (double a : r.phi) line << detail::format_real(a) << c.separator;
        line << detail::format_real(r.lambda);
        t.row(line.str(), r.grad, r.iterations, r.index, r.nondegenerate, r.bipartite);
    }
    log << rows.size() << " seeds converged, " << failed << " did not\n";
    log << "wrote " << t.path() << '\n';
    return ok;
}

/// Runs one command, mapping failures onto exit codes.
inline int run(const RunConfig& c, std::ostream& log)
{
    try {
        validate(c);
        if (c.command == "spectrum") return cmd_spectrum(c, log);
        if (c.command == "scan") return cmd_scan(c, log);
        if (c.command == "verify") return cmd_verify(c, log);
        if (c.command == "interlace") return cmd_interlace(c, log);
        if (c.command == "histogram") return cmd_histogram(c, log);
        if (c.command == "critical") return cmd_critical(c, log);
        throw UsageError("unknown command '" + c.command + "'");
    } catch (const UsageError& e) {
        log << "error: " << e.what() << '\n';
        return input_error;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::InvalidGraph:
        case ErrorCode::UnsupportedBeta: return input_error;
        default: return numerical_failure;
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return numerical_failure;
    }
}

} // namespace qgraph::cli
