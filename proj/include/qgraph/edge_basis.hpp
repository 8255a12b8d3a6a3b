#pragma once

#include <array>
#include <cmath>

namespace qgraph {

/// lambda = s|s| for the signed wavenumber s (k for lambda >= 0, -kappa below).
inline double lambda_of(double s) { return s * std::abs(s); }

inline double signed_wavenumber(double lambda)
{
    return lambda >= 0.0 ? std::sqrt(lambda) : -std::sqrt(-lambda);
}

enum class Branch {
    oscillatory,   // (sin kx, cos kx)
    linear,        // (x, 1)
    hyperbolic,    // (sinh kx, cosh kx), kappa L < 1
    exponential,   // (e^{-kx}, e^{-k(L-x)}), kappa L >= 1
};

namespace detail {

// 1 - sin(w)/w without cancellation near 0
inline double one_minus_sinc(double w)
{
    if (std::abs(w) > 0.1) return 1.0 - std::sin(w) / w;
    double w2 = w * w;
    return w2 / 6.0 * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0 * (1.0 - w2 / 72.0)));
}

// sinh(w)/w - 1 without cancellation near 0
inline double sinhc_minus_one(double w)
{
    if (std::abs(w) > 0.1) return std::sinh(w) / w - 1.0;
    double w2 = w * w;
    return w2 / 6.0 * (1.0 + w2 / 20.0 * (1.0 + w2 / 42.0 * (1.0 + w2 / 72.0)));
}

} // namespace detail

/**
 * Closed-form fundamental system of -f'' = lambda f on [0, L].  The branch is
 * a fixed function of (lambda, L) so stored coefficients are unambiguous.
 */
struct EdgeBasis {
    Branch branch = Branch::linear;
    double k = 0.0;   // k or kappa, always >= 0
    double L = 1.0;

    static EdgeBasis make(double lambda, double L)
    {
        if (lambda > 0.0) return {Branch::oscillatory, std::sqrt(lambda), L};
        if (lambda == 0.0) return {Branch::linear, 0.0, L};
        double kappa = std::sqrt(-lambda);
        return {kappa * L < 1.0 ? Branch::hyperbolic : Branch::exponential, kappa, L};
    }

    std::array<double, 2> value(double x) const
    {
        switch (branch) {
        case Branch::oscillatory: return {std::sin(k * x), std::cos(k * x)};
        case Branch::linear: return {x, 1.0};
        case Branch::hyperbolic: return {std::sinh(k * x), std::cosh(k * x)};
        case Branch::exponential: return {std::exp(-k * x), std::exp(-k * (L - x))};
        }
        return {0.0, 0.0};
    }

    /// d/dx of the two basis functions.
    std::array<double, 2> slope(double x) const
    {
        switch (branch) {
        case Branch::oscillatory: return {k * std::cos(k * x), -k * std::sin(k * x)};
        case Branch::linear: return {1.0, 0.0};
        case Branch::hyperbolic: return {k * std::cosh(k * x), k * std::sinh(k * x)};
        case Branch::exponential: return {-k * std::exp(-k * x), k * std::exp(-k * (L - x))};
        }
        return {0.0, 0.0};
    }

    /// Gram matrix entries {int b0^2, int b0 b1, int b1^2} over [0, L].
    std::array<double, 3> mass() const
    {
        switch (branch) {
        case Branch::oscillatory: {
            double w = 2.0 * k * L;
            double s = std::sin(k * L);
            return {0.5 * L * detail::one_minus_sinc(w), s * s / (2.0 * k),
                    0.5 * L * (2.0 - detail::one_minus_sinc(w))};
        }
        case Branch::linear: return {L * L * L / 3.0, L * L / 2.0, L};
        case Branch::hyperbolic: {
            double w = 2.0 * k * L;
            double s = std::sinh(k * L);
            return {0.5 * L * detail::sinhc_minus_one(w), s * s / (2.0 * k),
                    0.5 * L * (2.0 + detail::sinhc_minus_one(w))};
        }
        case Branch::exponential: {
            double diag = -std::expm1(-2.0 * k * L) / (2.0 * k);
            return {diag, L * std::exp(-k * L), diag};
        }
        }
        return {0.0, 0.0, 0.0};
    }

    /// Gram entries of the derivatives {int b0'^2, int b0' b1', int b1'^2}.
    std::array<double, 3> stiffness() const
    {
        auto m = mass();
        double k2 = k * k;
        switch (branch) {
        case Branch::oscillatory: return {k2 * m[2], -k2 * m[1], k2 * m[0]};
        case Branch::linear: return {L, 0.0, 0.0};
        case Branch::hyperbolic: return {k2 * m[2], k2 * m[1], k2 * m[0]};
        case Branch::exponential: return {k2 * m[0], -k2 * m[1], k2 * m[2]};
        }
        return {0.0, 0.0, 0.0};
    }
};

} // namespace qgraph
