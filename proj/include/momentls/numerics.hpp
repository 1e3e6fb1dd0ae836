#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "momentls/linalg.hpp"

namespace mls {

// ---------------------------------------------------------------------------
// Nonnegative quadratic programming
// ---------------------------------------------------------------------------

struct NnlsOptions {
    /// Cap on outer (variable-adding) iterations; 0 selects 10 * s.
    std::size_t max_iterations = 0;
    /// KKT tolerance on the gradient 2(Bw - a); 0 selects 1e-12 * ||a||_inf.
    double tolerance = 0.0;
};

struct NnlsResult {
    Vector weights;
    std::size_t iterations = 0;
    /// Largest KKT violation at the returned point (see kkt_violation).
    double kkt_residual = 0.0;
    double tolerance = 0.0;
};

/**
 * Minimizes  c - 2 a'w + w'Bw  subject to w >= 0 for symmetric PSD B.
 *
 * Lawson-Hanson active-set iteration expressed on the normal equations
 * (the cross-product form of Bro and de Jong): the passive-set subproblem
 * B_PP z = a_P is solved directly, so the design matrix whose Gram matrix
 * is B never has to exist.
 *
 * Throws InvalidArgument on size mismatch, DataError on non-finite input or
 * asymmetric B (tolerance 1e-12 relative), ConvergenceError at the cap.
 */
[[nodiscard]] NnlsResult nnls_qp(const Vector& a, const Matrix& gram, const NnlsOptions& options = {});

/// c - 2 a'w + w'Bw.
[[nodiscard]] double nnls_objective(const Vector& a, const Matrix& gram, const Vector& w, double constant = 0.0);

/// max_i of max(-g_i, |w_i g_i|) with g = 2(Bw - a), restricted to the usual KKT terms.
[[nodiscard]] double kkt_violation(const Vector& a, const Matrix& gram, const Vector& w);

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

struct EigenDecomposition {
    Vector values;   ///< descending
    Matrix vectors;  ///< columns are orthonormal eigenvectors

    [[nodiscard]] Matrix reconstruct() const;
};

/// Cyclic Jacobi. Sweeps until the off-diagonal Frobenius norm drops below
/// 1e-12 * ||A||_F. Each eigenvector is sign-normalized so its largest-magnitude
/// entry is positive.
[[nodiscard]] EigenDecomposition sym_eigen(const Matrix& a);

/// U f(Lambda) U^T, exactly symmetric.
template <typename F>
[[nodiscard]] Matrix spectral_map(const EigenDecomposition& eig, F&& f) {
    const auto n = eig.values.size();
    Vector mapped(n);
    for (Eigen::Index i = 0; i < n; ++i) mapped(i) = f(eig.values(i));
    Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) out(i, j) = out(j, i);
    return out;
}

// ---------------------------------------------------------------------------
// Chi-squared distribution
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(s, x).
[[nodiscard]] double regularized_gamma_p(double s, double x);

[[nodiscard]] double chi2_cdf(double x, int dof);

/// Inverse of chi2_cdf; p in [0, 1), dof >= 1.
[[nodiscard]] double chi2_quantile(double p, int dof);

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/**
 * A reproducible random stream keyed by (seed, stream id).
 *
 * Backed by std::mt19937_64 initialized through std::seed_seq from the four
 * 32-bit halves of the key, so distinct ids give unrelated engine states.
 * Output is reproducible within one standard library implementation only.
 * Single owner; derive new ids rather than sharing one stream across threads.
 */
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Uniform on [0, 1) with 53 random bits.
    double draw_uniform();
    double draw_normal();
    /// Index i with probability probs[i]; probs must sum to 1 within 1e-12.
    std::size_t draw_categorical(std::span<const double> probs);
    /// Same as draw_categorical but on a precomputed cumulative distribution
    /// (last entry 1); no validation.
    std::size_t draw_from_cdf(std::span<const double> cdf);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// SplitMix64 finalizer; used to derive stream ids from structured keys.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace mls
