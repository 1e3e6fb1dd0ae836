#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "momentls/linalg.hpp"

namespace mls {

/// An M x d matrix of chain iterates g(X_t), one row per time step.
/// Invariants: M >= 2, d >= 1, all entries finite (DataError otherwise).
class Chain {
public:
    explicit Chain(Matrix values);
    static Chain from_series(std::span<const double> series);

    [[nodiscard]] std::size_t length() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    /// Contiguous view of column i (0-based).
    [[nodiscard]] std::span<const double> column(std::size_t i) const;
    [[nodiscard]] Vector mean() const { return values_.colwise().mean().transpose(); }
    /// The first m rows.
    [[nodiscard]] Chain head(std::size_t m) const;

private:
    Matrix values_;
};

/// Autocovariances r(0..K) of a univariate chain of length M. Negative lags
/// mirror the positive ones and lags beyond the stored range are zero.
class LagSequence {
public:
    LagSequence() = default;
    LagSequence(std::vector<double> values, std::size_t chain_length)
        : values_(std::move(values)), chain_length_(chain_length) {}

    [[nodiscard]] double operator()(std::int64_t k) const noexcept {
        const auto lag = static_cast<std::size_t>(k < 0 ? -k : k);
        return lag < values_.size() ? values_[lag] : 0.0;
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    /// Number of stored nonnegative lags.
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::size_t chain_length() const noexcept { return chain_length_; }

    /// Sum over all k in Z of r(k)^2.
    [[nodiscard]] double squared_norm() const noexcept;

private:
    std::vector<double> values_;
    std::size_t chain_length_ = 0;
};

/// Matrix autocovariances R(0..K); R(-k) = R(k)^T.
class LagMatrixSequence {
public:
    LagMatrixSequence() = default;
    explicit LagMatrixSequence(std::vector<Matrix> lags) : lags_(std::move(lags)) {}

    [[nodiscard]] Matrix at(std::int64_t k) const;
    [[nodiscard]] const Matrix& lag(std::size_t k) const { return lags_.at(k); }
    [[nodiscard]] std::size_t size() const noexcept { return lags_.size(); }

private:
    std::vector<Matrix> lags_;
};

inline constexpr std::size_t kAllLags = std::numeric_limits<std::size_t>::max();

/// r(k) = M^-1 sum_{t=0}^{M-1-k} y~_t y~_{t+k}, y~ = y - mean(y), for k = 0..min(max_lag, M-1).
/// Long sequences go through an FFT; short ones are summed directly.
[[nodiscard]] LagSequence empirical_autocov(std::span<const double> y, std::size_t max_lag = kAllLags);

/// Reference O(M K) summation; same contract as empirical_autocov.
[[nodiscard]] LagSequence empirical_autocov_direct(std::span<const double> y, std::size_t max_lag = kAllLags);

/// R(k) = M^-1 sum_t g~(X_t) g~(X_{t+k})^T for k = 0..min(max_lag, M-1).
[[nodiscard]] LagMatrixSequence empirical_autocov_matrix(const Chain& chain, std::size_t max_lag = kAllLags);

/// Column-centered copy of the chain values.
[[nodiscard]] Matrix centered(const Chain& chain);

/// A single lag matrix of already-centered data.
[[nodiscard]] Matrix lag_covariance(const Matrix& centered_values, std::size_t k);

enum class Sign { Plus, Minus };

/// a * Y[:, i] + sign * b * Y[:, j] (0-based indices).
[[nodiscard]] std::vector<double> combine_components(const Chain& chain, std::size_t i, std::size_t j, double a,
                                                     double b, Sign sign);

}  // namespace mls
