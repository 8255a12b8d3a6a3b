#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/partition_energy.hpp"

namespace qgraph {

/**
 * d Lambda / d phi_j on the torus, from boundary data of the normalised
 * eigenfunction of Gamma_phi at both sides of section j.  The value form is
 * used when |cos(phi_j/2)| >= 1e-3, the derivative form otherwise.
 */
inline std::vector<double> grad_lambda(const MetricGraph& g, std::span<const EdgePoint> sections,
                                       std::span<const double> phi, int m, const SpectralOptions& opt = {})
{
    RobinEigenpair r = robin_eigenpair(g, sections, phi, m, opt);
    const auto& tree = r.tree;
    std::vector<double> grad(sections.size());
    for (std::size_t j = 0; j < sections.size(); ++j) {
        const int em = tree.minus_edge[j];
        const int ep = tree.plus_edge[j];
        const double Lm = tree.graph.edge(em).length;
        const double half = 0.5 * wrap_angle(phi[j]);
        const double c = std::cos(half);
        if (std::abs(c) >= 1e-3) {
            double fp = evaluate(tree.graph, r.eigen, ep, 0.0);
            double fm = evaluate(tree.graph, r.eigen, em, Lm);
            grad[j] = (fp * fp - fm * fm) / (2.0 * c * c);
        } else {
            const double s = std::sin(half);
            double dp = evaluate_slope(tree.graph, r.eigen, ep, 0.0);
            double dm = -evaluate_slope(tree.graph, r.eigen, em, Lm);
            grad[j] = (dp * dp - dm * dm) / (2.0 * s * s);
        }
    }
    return grad;
}

/// Lambda(Phi_m(phi)) = lambda_{m+1-p}(Gamma_phi), without building the partition.
inline double lambda_on_torus(const MetricGraph& g, std::span<const EdgePoint> sections, std::span<const double> phi,
                              int m, const SpectralOptions& opt = {})
{
    return robin_eigenpair(g, sections, phi, m, opt).eigen.lambda;
}

inline double norm2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct HessianOptions {
    double step = 1e-4;
};

struct HessianResult {
    Eigen::MatrixXd matrix;         // Richardson-extrapolated, symmetrised
    Eigen::MatrixXd coarse;         // step h
    Eigen::MatrixXd fine;           // step h/2
    double discrepancy = 0.0;       // ||extrapolated - fine|| / max(1, ||extrapolated||)
};

namespace detail {

inline Eigen::MatrixXd gradient_differences(const MetricGraph& g, std::span<const EdgePoint> sections,
                                            std::span<const double> phi, int m, double h,
                                            const SpectralOptions& opt)
{
    const int k = static_cast<int>(phi.size());
    Eigen::MatrixXd H(k, k);
    for (int j = 0; j < k; ++j) {
        std::vector<double> plus(phi.begin(), phi.end()), minus = plus;
        plus[j] += h;
        minus[j] -= h;
        auto gp = grad_lambda(g, sections, plus, m, opt);
        auto gm = grad_lambda(g, sections, minus, m, opt);
        for (int i = 0; i < k; ++i) H(i, j) = (gp[i] - gm[i]) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
}

} // namespace detail

/// Central differences of the analytic gradient at h and h/2, Richardson-combined.
inline HessianResult hessian(const MetricGraph& g, std::span<const EdgePoint> sections, std::span<const double> phi,
                             int m, const HessianOptions& hopt = {}, const SpectralOptions& opt = {})
{
    HessianResult r;
    r.coarse = detail::gradient_differences(g, sections, phi, m, hopt.step, opt);
    r.fine = detail::gradient_differences(g, sections, phi, m, 0.5 * hopt.step, opt);
    r.matrix = (4.0 * r.fine - r.coarse) / 3.0;
    if (r.matrix.size() > 0) {
        double scale = std::max(1.0, r.matrix.norm());
        r.discrepancy = (r.matrix - r.fine).norm() / scale;
    }
    return r;
}

struct MorseIndex {
    int index = 0;
    bool nondegenerate = true;
    Eigen::VectorXd eigenvalues;
};

/**
 * Negative eigenvalues below -max(tol * ||H||, floor).  Degenerate when an
 * eigenvalue lies within that band.
 */
inline MorseIndex morse_index(const Eigen::MatrixXd& hess, double tol = 1e-6, double floor = 0.0)
{
    MorseIndex r;
    if (hess.size() == 0) return r;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (hess + hess.transpose()), Eigen::EigenvaluesOnly);
    r.eigenvalues = eig.eigenvalues();
    const double band = std::max(tol * r.eigenvalues.cwiseAbs().maxCoeff(), floor);
    for (int i = 0; i < r.eigenvalues.size(); ++i) {
        if (r.eigenvalues(i) < -band) ++r.index;
        if (std::abs(r.eigenvalues(i)) <= band) r.nondegenerate = false;
    }
    return r;
}

struct CriticalSearchOptions {
    double grad_tol = 1e-9;
    int max_iterations = 60;
    double max_step = 0.5;
    HessianOptions hessian;
};

struct CriticalPoint {
    TorusPoint phi;
    TorusPoint seed;
    double grad_norm = 0.0;
    int iterations = 0;
};

/**
 * Damped Newton iteration on grad_lambda with the finite-difference Hessian.
 * Steps are halved while they leave the domain or fail to reduce ||grad||.
 */
inline CriticalPoint find_critical(const MetricGraph& g, std::span<const EdgePoint> sections,
                                   std::span<const double> seed, int m, const CriticalSearchOptions& copt = {},
                                   const SpectralOptions& opt = {})
{
    CriticalPoint cp;
    cp.seed.assign(seed.begin(), seed.end());
    cp.phi = cp.seed;
    std::vector<double> grad;
    try {
        grad = grad_lambda(g, sections, cp.phi, m, opt);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::OutsideDomain) throw Error(ErrorCode::LeftDomain, "seed outside the domain");
        throw;
    }
    cp.grad_norm = norm2(grad);
    const int k = static_cast<int>(cp.phi.size());
    while (cp.grad_norm > copt.grad_tol) {
        if (cp.iterations >= copt.max_iterations)
            throw Error(ErrorCode::NoConvergence, "no critical point after " + std::to_string(cp.iterations) +
                                                      " iterations, |grad| = " + std::to_string(cp.grad_norm));
        ++cp.iterations;
        Eigen::MatrixXd H = hessian(g, sections, cp.phi, m, copt.hessian, opt).coarse;
        Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(grad.data(), k);
        Eigen::VectorXd step = H.completeOrthogonalDecomposition().solve(-gv);
        if (!step.allFinite() || step.norm() == 0.0) step = -gv;
        if (step.norm() > copt.max_step) step *= copt.max_step / step.norm();
        bool accepted = false;
        for (int halving = 0; halving < 40 && !accepted; ++halving, step *= 0.5) {
            TorusPoint trial = cp.phi;
            for (int i = 0; i < k; ++i) trial[i] = wrap_angle(trial[i] + step(i));
            std::vector<double> tg;
            try {
                tg = grad_lambda(g, sections, trial, m, opt);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::OutsideDomain) continue;
                throw;
            }
            double tn = norm2(tg);
            if (tn < cp.grad_norm) {
                cp.phi = trial;
                grad = tg;
                cp.grad_norm = tn;
                accepted = true;
            }
        }
        if (!accepted) throw Error(ErrorCode::LeftDomain, "no admissible step reduces the gradient");
    }
    return cp;
}

enum class Verdict { pass, fail, withheld };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::withheld: return "withheld";
    }
    return "?";
}

struct MorseReport {
    int n = 0;
    double lambda_n = 0.0;
    int mu = 0;
    int nu = 0;
    int deficiency = 0;
    int torus_dim = 0;                   // beta - beta(g \ P)
    std::vector<EdgePoint> sections;
    TorusPoint phi_star;
    double torus_lambda = 0.0;           // lambda_{m+1}(Gamma_{phi*})
    double grad_norm = 0.0;
    Eigen::MatrixXd hessian;
    double richardson_discrepancy = 0.0;
    Eigen::VectorXd hessian_eigenvalues;
    int morse_index = 0;
    bool nondegenerate = true;
    Verdict verdict = Verdict::withheld;
};

struct VerifyOptions {
    double grad_tol = 1e-8;
    double index_tol = 1e-6;             // relative band for zero Hessian eigenvalues
    HessianOptions hessian;
    SpectralOptions spectral;
};

/**
 * Checks that the nodal deficiency of the n-th eigenfunction equals the Morse
 * index of Lambda at the angles read off its zero set.
 */
inline MorseReport verify_theorem(const MetricGraph& g, int n, const VerifyOptions& vopt = {})
{
    MorseReport r;
    r.n = n;
    EigenPair p = eigenvalue_at(g, n, 1e-15, vopt.spectral);
    r.lambda_n = p.lambda;
    if (!p.simple) throw Error(ErrorCode::ImproperEigenfunction, "eigenvalue " + std::to_string(n) + " is not simple");
    EigenPair f = eigenfunction(g, p, vopt.spectral);
    if (!is_proper(g, f, vopt.spectral))
        throw Error(ErrorCode::ImproperEigenfunction, "eigenfunction " + std::to_string(n) + " vanishes at a vertex");
    Partition z = zeros(g, f, vopt.spectral);
    NodalCounts counts = nodal_counts(g, f, vopt.spectral);
    r.mu = counts.mu;
    r.nu = counts.nu;
    r.deficiency = n - counts.nu;

    r.sections = local_sections(g, z);
    r.torus_dim = static_cast<int>(r.sections.size());
    r.phi_star = phi_inverse(g, r.sections, z);
    auto grad = grad_lambda(g, r.sections, r.phi_star, r.mu, vopt.spectral);
    r.grad_norm = norm2(grad);
    r.torus_lambda = lambda_on_torus(g, r.sections, r.phi_star, r.mu, vopt.spectral);
    if (std::abs(r.torus_lambda - r.lambda_n) > 1e-8 * std::max(1.0, std::abs(r.lambda_n)))
        throw std::logic_error("cut-graph eigenvalue at phi* differs from lambda_n");

    if (r.torus_dim > 0) {
        HessianResult h = hessian(g, r.sections, r.phi_star, r.mu, vopt.hessian, vopt.spectral);
        r.hessian = h.matrix;
        r.richardson_discrepancy = h.discrepancy;
        double floor = std::max(1e-7 * (1.0 + std::abs(r.lambda_n)), 10.0 * h.discrepancy * std::max(1.0, h.matrix.norm()));
        MorseIndex mi = morse_index(h.matrix, vopt.index_tol, floor);
        r.morse_index = mi.index;
        r.nondegenerate = mi.nondegenerate;
        r.hessian_eigenvalues = mi.eigenvalues;
    }
    if (!r.nondegenerate)
        r.verdict = Verdict::withheld;
    else
        r.verdict = (r.grad_norm <= vopt.grad_tol && r.morse_index == r.deficiency) ? Verdict::pass : Verdict::fail;
    return r;
}

struct MinimaxResult {
    std::vector<int> sigma;          // 1: phi*_j minimises, 0: maximises
    std::vector<double> lower;       // min and max of each 1-D scan
    std::vector<double> upper;
    int sigma_sum = 0;
    int expected_sum = 0;            // m + 1 - n
    int morse_index = 0;
    bool nondegenerate = true;
    bool consistent = false;         // sum and index relations both hold
};

struct MinimaxOptions {
    int grid = 720;
    double tol = 1e-9;               // relative to 1 + |lambda_n|
    VerifyOptions verify;
};

/**
 * Sequential one-dimensional optimisation: at step j the graph is cut only at
 * sections j..k with the later angles held at phi*, and phi_j is scanned over
 * the circle.  phi*_j must be the global minimum (sigma_j = 1) or maximum
 * (sigma_j = 0) of the eigenvalue with index m + 1 - sum_{i<j} sigma_i.
 */
inline MinimaxResult mixed_minimax_check(const MetricGraph& g, int n, const MinimaxOptions& mopt = {})
{
    MorseReport rep = verify_theorem(g, n, mopt.verify);
    const int k = rep.torus_dim;
    if (k > 2) throw Error(ErrorCode::UnsupportedBeta, "mixed minimax scan needs at most two angles");
    MinimaxResult res;
    res.morse_index = rep.morse_index;
    res.nondegenerate = rep.nondegenerate;
    res.expected_sum = rep.mu + 1 - n;
    const double band = mopt.tol * (1.0 + std::abs(rep.lambda_n));
    int index = rep.mu + 1;
    for (int j = 0; j < k; ++j) {
        std::vector<EdgePoint> secs(rep.sections.begin() + j, rep.sections.end());
        TorusPoint phi(rep.phi_star.begin() + j, rep.phi_star.end());
        double lo = INFINITY, hi = -INFINITY;
        for (int i = 0; i < mopt.grid; ++i) {
            phi[0] = -pi + (i + 1) * 2.0 * pi / mopt.grid;
            auto tree = build_robin_tree(g, secs, phi);
            int idx = index - detail::count_dirichlet_angles(phi);
            double lam = eigenvalue_at(tree.graph, idx, 1e-15, mopt.verify.spectral).lambda;
            lo = std::min(lo, lam);
            hi = std::max(hi, lam);
        }
        res.lower.push_back(lo);
        res.upper.push_back(hi);
        int s;
        if (lo >= rep.lambda_n - band)
            s = 1;
        else if (hi <= rep.lambda_n + band)
            s = 0;
        else
            throw Error(ErrorCode::NoConvergence, "phi*_" + std::to_string(j + 1) + " is neither a minimum nor a maximum");
        res.sigma.push_back(s);
        res.sigma_sum += s;
        index -= s;
    }
    res.consistent = res.sigma_sum == res.expected_sum && (!res.nondegenerate || k - res.sigma_sum == res.morse_index);
    return res;
}

struct DeficiencyHistogram {
    std::vector<int> count;              // per d = 0..beta
    std::vector<double> frequency;
    std::vector<double> binomial;        // binomial(beta, 1/2)
    std::vector<int> skipped;            // improper or degenerate indices
    int total = 0;
};

/// d_n = n - nu_n over the proper eigenfunctions with n in [n_from, n_to].
inline DeficiencyHistogram deficiency_histogram(const MetricGraph& g, int n_from, int n_to,
                                                const SpectralOptions& opt = {})
{
    const int beta = betti(g);
    DeficiencyHistogram h;
    h.count.assign(static_cast<std::size_t>(beta + 1), 0);
    auto spectrum = eigenvalues(g, SpectrumQuery::first(n_to, 1e-15), opt);
    for (int n = n_from; n <= n_to; ++n) {
        const EigenPair& p = spectrum[n - 1];
        if (!p.simple) {
            h.skipped.push_back(n);
            continue;
        }
        EigenPair f = eigenfunction(g, p, opt);
        if (!is_proper(g, f, opt)) {
            h.skipped.push_back(n);
            continue;
        }
        int d = n - nodal_counts(g, f, opt).nu;
        if (d < 0 || d > beta) throw std::logic_error("nodal deficiency outside [0, beta]");
        ++h.count[d];
        ++h.total;
    }
    double choose = 1.0;
    for (int d = 0; d <= beta; ++d) {
        h.frequency.push_back(h.total > 0 ? static_cast<double>(h.count[d]) / h.total : 0.0);
        h.binomial.push_back(choose / std::pow(2.0, beta));
        choose = choose * (beta - d) / (d + 1);
    }
    return h;
}

} // namespace qgraph
