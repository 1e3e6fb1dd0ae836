#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "momentls/autocov.hpp"
#include "momentls/linalg.hpp"
#include "momentls/moment_ls.hpp"

namespace mls {

/// Per-component half-gaps, each in (0, 1).
struct DeltaVector {
    std::vector<double> values;

    DeltaVector() = default;
    explicit DeltaVector(std::vector<double> v);
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values.at(i); }
    [[nodiscard]] double min() const;
};

struct MomentLSOptions {
    std::size_t grid_size = kDefaultGridSize;
    std::size_t delta_splits = kDefaultDeltaSplits;
};

/// Shares one MomentProjector per half-gap value across the fits of a single
/// estimate. Thread-safe.
class ProjectorCache {
public:
    explicit ProjectorCache(std::size_t grid_size = kDefaultGridSize) : grid_size_(grid_size) {}
    [[nodiscard]] std::shared_ptr<const MomentProjector> get(double delta);

private:
    std::size_t grid_size_;
    std::mutex mutex_;
    std::map<double, std::shared_ptr<const MomentProjector>> cache_;
};

/// Fits of a*g_i + b*g_j and a*g_i - b*g_j with a common half-gap.
struct SignedMomentPair {
    MomentMeasure plus;
    MomentMeasure minus;
    double a = 1.0;
    double b = 1.0;
    double delta = 0.0;

    /// (plus(k) - minus(k)) / (4ab)
    [[nodiscard]] double eval(std::int64_t k) const;
    [[nodiscard]] double avar() const;
    /// The difference as one signed atom list, already divided by 4ab.
    [[nodiscard]] std::vector<Atom> signed_atoms() const;
};

/// Estimated auto- (i == j) or cross- (i != j) covariance sequence.
class CrossCovariance {
public:
    CrossCovariance(std::size_t i, std::size_t j, std::variant<MomentMeasure, SignedMomentPair> fit)
        : i_(i), j_(j), fit_(std::move(fit)) {}

    [[nodiscard]] std::size_t row() const noexcept { return i_; }
    [[nodiscard]] std::size_t col() const noexcept { return j_; }
    [[nodiscard]] bool is_diagonal() const noexcept { return std::holds_alternative<MomentMeasure>(fit_); }
    [[nodiscard]] const MomentMeasure& measure() const { return std::get<MomentMeasure>(fit_); }
    [[nodiscard]] const SignedMomentPair& pair() const { return std::get<SignedMomentPair>(fit_); }

    [[nodiscard]] double eval(std::int64_t k) const;
    [[nodiscard]] double avar() const;
    [[nodiscard]] std::vector<Atom> signed_atoms() const;

private:
    std::size_t i_;
    std::size_t j_;
    std::variant<MomentMeasure, SignedMomentPair> fit_;
};

struct AvarMatrix {
    Matrix sigma;
    std::string method;
    std::vector<double> delta;
    bool refined = false;
};

/// Component i is tune_delta(Y[:, i], L).
[[nodiscard]] DeltaVector tune_delta_vector(const Chain& chain, std::size_t splits = kDefaultDeltaSplits);

/// Default weights a = 1/sqrt(r_i(0)), b = 1/sqrt(r_j(0)); delta_ij = min(delta_i, delta_j).
/// Throws DataError if either column has zero empirical variance.
[[nodiscard]] CrossCovariance estimate_cross_cov(const Chain& chain, std::size_t i, std::size_t j,
                                                 const DeltaVector& delta, ProjectorCache& cache);

/// Polarization fit with caller-chosen positive weights and half-gap.
[[nodiscard]] SignedMomentPair estimate_cross_cov_weighted(const Chain& chain, std::size_t i, std::size_t j, double a,
                                                           double b, double delta, ProjectorCache& cache);

/// Element-wise plug-in matrix; exactly symmetric.
[[nodiscard]] AvarMatrix sigma_pw(const Chain& chain, const DeltaVector& delta, ProjectorCache& cache);
[[nodiscard]] AvarMatrix sigma_pw(const Chain& chain, const DeltaVector& delta, const MomentLSOptions& options = {});

/// Re-estimates the eigenvalues of sigma_pw along its eigenvectors with the
/// smallest half-gap; the result is PSD.
[[nodiscard]] AvarMatrix sigma_psd(const Chain& chain, const AvarMatrix& pw, const DeltaVector& delta,
                                   ProjectorCache& cache);
[[nodiscard]] AvarMatrix sigma_psd(const Chain& chain, const AvarMatrix& pw, const DeltaVector& delta,
                                   const MomentLSOptions& options = {});

/// lambda_min >= -1e-10 * max(1, lambda_max).
[[nodiscard]] bool is_numerically_psd(const Matrix& a);

/// sigma_pw when it is PSD, otherwise sigma_psd (refined = true).
[[nodiscard]] AvarMatrix momentls_avar(const Chain& chain, const DeltaVector& delta,
                                       const MomentLSOptions& options = {});

/// Tunes the half-gaps and runs momentls_avar.
[[nodiscard]] AvarMatrix mtv_mlse(const Chain& chain, const MomentLSOptions& options = {});

/// ||S^{-1/2} (estimate - S) S^{-1/2}||_F; S must be symmetric positive definite.
[[nodiscard]] double relative_error(const Matrix& estimate, const Matrix& truth);

/// M (mu_hat - mu)^T sigma_hat^{-1} (mu_hat - mu). Throws NumericalError when
/// sigma_hat is singular (lambda_min <= 1e-12 lambda_max).
[[nodiscard]] double region_statistic(const Vector& mean_hat, const Matrix& sigma_hat, const Vector& mean,
                                      std::size_t length);

/// Whether mu lies strictly inside the 1 - alpha confidence ellipsoid.
[[nodiscard]] bool region_contains(const Vector& mean_hat, const Matrix& sigma_hat, const Vector& mean,
                                   std::size_t length, double alpha);

}  // namespace mls
