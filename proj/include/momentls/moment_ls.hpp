#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "momentls/autocov.hpp"
#include "momentls/linalg.hpp"
#include "momentls/numerics.hpp"

namespace mls {

inline constexpr std::size_t kDefaultGridSize = 1001;
inline constexpr std::size_t kDefaultDeltaSplits = 5;
/// Ceiling applied to tuned half-gaps before they are used to filter a grid.
inline constexpr double kMaxTunedDelta = 0.99;

/// Sorted candidate support points inside [-1 + delta, 1 - delta].
struct SupportGrid {
    std::vector<double> points;
    double delta = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// Uniform s0-point grid on [-1, 1] (s0 >= 3), keeping points with |alpha| <= 1 - delta.
/// Throws InvalidArgument unless 0 < delta < 1, and when nothing survives the filter.
[[nodiscard]] SupportGrid build_grid(std::size_t s0, double delta);

/// A point mass (or a signed coefficient, in the signed utilities below).
struct Atom {
    double support = 0.0;
    double weight = 0.0;
};

/// Discrete nonnegative measure on (-1, 1); weights are strictly positive.
struct MomentMeasure {
    std::vector<Atom> atoms;
    double delta = 0.0;

    [[nodiscard]] bool empty() const noexcept { return atoms.empty(); }
};

/// m(k) = sum_i w_i alpha_i^|k|, with 0^0 = 1.
[[nodiscard]] double eval_sequence(const MomentMeasure& measure, std::int64_t k);
[[nodiscard]] double eval_sequence(std::span<const Atom> atoms, std::int64_t k);

/// sum_i w_i (1 + alpha_i) / (1 - alpha_i). Throws InvalidArgument for |alpha| >= 1.
[[nodiscard]] double avar_from_measure(const MomentMeasure& measure);
[[nodiscard]] double avar_from_atoms(std::span<const Atom> atoms);

/// sum_{k in Z} (sum_i c_i beta_i^|k|)^2 for signed coefficients c_i and |beta_i| < 1.
[[nodiscard]] double geometric_squared_norm(std::span<const Atom> atoms);

/// sum_{k in Z} (r(k) - m(k))^2. Lags past r's support are summed in closed form.
[[nodiscard]] double squared_distance(const MomentMeasure& measure, const LagSequence& r);

// ---------------------------------------------------------------------------
// Half-gap tuning
// ---------------------------------------------------------------------------

struct DeltaEstimate {
    double value = 0.0;               ///< 0.8 * mean(per_split)
    std::vector<double> per_split;    ///< one value per split, each in [1/B, 1]
    std::size_t batch_size = 0;       ///< B = floor(M / L)
};

/// Per-split half-gap from the first even index m with r(m + 2) <= 0.
/// No crossing gives 1/B; m = 0 gives 1; otherwise max(1 - exp(-log B / (2m)), 1/B).
[[nodiscard]] double split_delta(std::optional<std::size_t> crossing, std::size_t batch_size);

/// Lag-k autocovariance of split l (1-based) of a globally centered series.
/// For l > 1 the summation window is t = (l-1)B - k .. lB - 1 - k, so the
/// leading factor can reach k positions into the previous split.
[[nodiscard]] double split_autocov(std::span<const double> centered, std::size_t split, std::size_t batch_size,
                                   std::size_t k);

/// Smallest t in {0, 2, 4, ...} with r_l(t + 2) <= 0 and t + 2 <= B - 1.
[[nodiscard]] std::optional<std::size_t> first_even_crossing(std::span<const double> centered, std::size_t split,
                                                             std::size_t batch_size);

/// Requires L >= 1 and M >= 2L.
[[nodiscard]] DeltaEstimate tune_delta(std::span<const double> y, std::size_t splits = kDefaultDeltaSplits);

// ---------------------------------------------------------------------------
// Projection onto the moment cone
// ---------------------------------------------------------------------------

struct Projection {
    MomentMeasure measure;
    Vector weights;              ///< full weight vector on the grid
    double loss = 0.0;           ///< sum_k (r(k) - m(k))^2 via the quadratic form
    std::size_t iterations = 0;
    double kkt_residual = 0.0;
};

/**
 * Projects autocovariance sequences onto the moment sequences of measures
 * supported on a fixed grid.
 *
 * Holds the grid and its Gram matrix B_ij = (1 + a_i a_j) / (1 - a_i a_j)
 * (the l2(Z) inner products of the geometric sequences a_i^|k|). Immutable
 * once built and safe to share across threads.
 */
class MomentProjector {
public:
    explicit MomentProjector(SupportGrid grid);
    MomentProjector(double delta, std::size_t s0 = kDefaultGridSize);

    [[nodiscard]] const SupportGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] double delta() const noexcept { return grid_.delta; }
    [[nodiscard]] const Matrix& gram() const noexcept { return gram_; }

    /// a_i = r(0) + 2 sum_{k>=1} alpha_i^k r(k).
    [[nodiscard]] Vector inner_products(const LagSequence& r) const;

    /// Zero-variance input (r(0) == 0) returns the empty measure without solving.
    [[nodiscard]] Projection fit(const LagSequence& r, const NnlsOptions& options = {}) const;
    [[nodiscard]] MomentMeasure project(const LagSequence& r) const { return fit(r).measure; }

private:
    SupportGrid grid_;
    Matrix gram_;
};

[[nodiscard]] MomentMeasure project_momentls(const LagSequence& r, double delta, const SupportGrid& grid);

/// Convenience: autocovariance of y projected with the given projector; returns sigma^2.
[[nodiscard]] double univariate_avar(std::span<const double> y, const MomentProjector& projector);

}  // namespace mls
