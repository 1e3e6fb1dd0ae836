#pragma once

#include <cstddef>
#include <functional>

#include "momentls/autocov.hpp"
#include "momentls/linalg.hpp"

namespace mls {

/// Spectral variance estimate with the modified Bartlett window
/// w(k) = (1 - |k|/b) 1{|k| < b}. Requires 1 <= b <= M.
[[nodiscard]] Matrix sv_bartlett(const Chain& chain, std::size_t truncation);

/// Non-overlapping batch means with batch size b; needs floor(M/b) >= 2.
/// Iterates past the last full batch are dropped.
[[nodiscard]] Matrix batch_means(const Chain& chain, std::size_t batch_size);

/// Overlapping batch means over all M - b + 1 windows; 1 <= b <= M - 1.
[[nodiscard]] Matrix overlapping_batch_means(const Chain& chain, std::size_t batch_size);

struct InitialSequenceResult {
    Matrix sigma;
    std::size_t truncation = 0;  ///< index m of the returned partial sum
};

/// Multivariate initial sequence estimator (Dai and Jones construction).
///
/// With symmetrized lags S(k) = (R(k) + R(k)^T) / 2 the partial sums are
///   Sigma_m = -S(0) + 2 sum_{k=0}^{m} (S(2k) + S(2k+1)).
/// Starting from the first m for which Sigma_m is positive definite, m advances
/// while Sigma_{m+1} stays positive definite and det(Sigma_{m+1}) > det(Sigma_m).
/// Throws NumericalError when no partial sum is positive definite.
[[nodiscard]] InitialSequenceResult mtv_initial_seq_detail(const Chain& chain);
[[nodiscard]] Matrix mtv_initial_seq(const Chain& chain);

/// Same recursion on caller-supplied lag matrices; lag(k) must be valid for k <= max_lag.
[[nodiscard]] InitialSequenceResult initial_sequence_from_lags(const std::function<Matrix(std::size_t)>& lag,
                                                               std::size_t max_lag);

/// floor(sqrt(M)) clamped to [2, M/2]; requires M >= 4.
[[nodiscard]] std::size_t default_batch_size(std::size_t length, std::size_t dim);

}  // namespace mls
