#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "momentls/autocov.hpp"
#include "momentls/linalg.hpp"
#include "momentls/moment_ls.hpp"
#include "momentls/numerics.hpp"

namespace mls {

/// Exact asymptotic variance and mean of g under the stationary law. For the
/// discrete MH model the spectral atoms are also kept:
///   gamma_ij(k) = sum_l c_il c_jl lambda_l^|k|, l ranging over non-unit eigenvalues.
struct GroundTruth {
    Matrix sigma;
    Vector mean;
    Vector eigenvalues;    ///< lambda_2..lambda_s (empty for VAR(1))
    Matrix coefficients;   ///< d x (s-1), c_il = <g_i, phi_l>_pi

    [[nodiscard]] bool has_atoms() const noexcept { return eigenvalues.size() > 0; }
    /// Signed atoms (lambda_l, c_il c_jl) of gamma_ij.
    [[nodiscard]] std::vector<Atom> cross_atoms(std::size_t i, std::size_t j) const;
    [[nodiscard]] double cross_cov(std::size_t i, std::size_t j, std::int64_t k) const;
};

// ---------------------------------------------------------------------------
// Discrete-state Metropolis-Hastings
// ---------------------------------------------------------------------------

struct DiscreteMHModel {
    std::size_t states = 0;
    std::size_t dim = 0;
    double rho = 0.0;
    std::uint64_t seed = 0;
    Vector target;       ///< pi, length s
    Matrix proposal;     ///< P, s x s, row stochastic
    Matrix kernel;       ///< Q, s x s, MH kernel built from P and pi
    Matrix g;            ///< s x d, row i is g(i)
};

inline constexpr std::size_t kDefaultMhStates = 100;
inline constexpr std::size_t kDefaultMhDim = 4;
inline constexpr double kDefaultMhRho = 0.5;

/// pi and each proposal row are normalized iid Uniform(0,1) draws; g(i) ~ N(0, Sigma_g)
/// with Sigma_g[j][j] = (j+1)^2 and Sigma_g[i][j] = sqrt(Sigma_g[i][i] Sigma_g[j][j]) rho^|i-j|.
[[nodiscard]] DiscreteMHModel build_mh_model(std::uint64_t seed, std::size_t states = kDefaultMhStates,
                                             std::size_t dim = kDefaultMhDim, double rho = kDefaultMhRho);

/// Throws DataError unless rows of Q sum to 1 and pi_i Q_ij = pi_j Q_ji, both within 1e-12.
void validate_mh_model(const DiscreteMHModel& model);

/// Spectral ground truth via the symmetrized kernel D^{1/2} Q D^{-1/2}.
/// Throws NumericalError if the unit eigenvalue is not simple or -1 is an eigenvalue.
[[nodiscard]] GroundTruth mh_ground_truth(const DiscreteMHModel& model);

/// Stationary start X_0 ~ pi. When states is non-null it receives the raw state path.
[[nodiscard]] Chain simulate_mh(const DiscreteMHModel& model, std::size_t length, RngStream& rng,
                                std::vector<std::size_t>* states = nullptr);

// ---------------------------------------------------------------------------
// Reversible VAR(1)
// ---------------------------------------------------------------------------

struct VAR1Model {
    Matrix transition;        ///< A, symmetric
    Matrix noise_cov;         ///< Sigma_eps
    Matrix stationary_cov;    ///< V = (I - A^2)^{-1} Sigma_eps
};

/// A = diag(diagonal) + off (11^T - I). Throws InvalidArgument when the spectral
/// radius of A is >= 1 or A Sigma_eps is not symmetric (within 1e-12).
[[nodiscard]] VAR1Model build_var1(std::span<const double> diagonal, double off, const Matrix& noise_cov);

/// "1": diag(0.9, 0.9, -0.9, -0.9); "2": diag(0.9, 0.9, 0.9, 0.9) (both off = 0.01,
/// Sigma_eps = I); "ar1": scalar a = 0.5, unit noise.
[[nodiscard]] VAR1Model var1_preset(std::string_view name);

/// 2 (I - A)^{-1} V - V.
[[nodiscard]] Matrix var1_ground_truth(const VAR1Model& model);

/// X_0 ~ N(0, V), X_t = A X_{t-1} + eps_t.
[[nodiscard]] Chain simulate_var1(const VAR1Model& model, std::size_t length, RngStream& rng);

// ---------------------------------------------------------------------------
// Tagged model used by the harness, the C API and the CLI
// ---------------------------------------------------------------------------

class Model {
public:
    static Model mh(std::uint64_t seed, std::size_t states = kDefaultMhStates, std::size_t dim = kDefaultMhDim,
                    double rho = kDefaultMhRho);
    static Model var1(std::string_view preset);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(truth_.sigma.rows()); }
    [[nodiscard]] const GroundTruth& truth() const noexcept { return truth_; }
    [[nodiscard]] const std::variant<DiscreteMHModel, VAR1Model>& spec() const noexcept { return spec_; }

    [[nodiscard]] Chain simulate(std::size_t length, RngStream& rng) const;

private:
    Model(std::string name, std::variant<DiscreteMHModel, VAR1Model> spec, GroundTruth truth)
        : name_(std::move(name)), spec_(std::move(spec)), truth_(std::move(truth)) {}

    std::string name_;
    std::variant<DiscreteMHModel, VAR1Model> spec_;
    GroundTruth truth_;
};

}  // namespace mls
