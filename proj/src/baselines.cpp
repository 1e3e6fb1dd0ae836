#include "momentls/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "momentls/error.hpp"
#include "momentls/numerics.hpp"

namespace mls {

Matrix sv_bartlett(const Chain& chain, std::size_t truncation) {
    const std::size_t m = chain.length();
    if (truncation < 1 || truncation > m) {
        throw InvalidArgument("sv_bartlett: truncation " + std::to_string(truncation) + " outside [1, " +
                              std::to_string(m) + "]");
    }
    const LagMatrixSequence lags = empirical_autocov_matrix(chain, truncation - 1);
    Matrix sigma = lags.lag(0);
    const double b = static_cast<double>(truncation);
    for (std::size_t k = 1; k < truncation && k < lags.size(); ++k) {
        const Matrix& r = lags.lag(k);
        sigma += (1.0 - static_cast<double>(k) / b) * (r + r.transpose());
    }
    mirror_upper(sigma);
    return sigma;
}

Matrix batch_means(const Chain& chain, std::size_t batch_size) {
    const std::size_t m = chain.length();
    if (batch_size < 1) throw InvalidArgument("batch_means: batch size must be positive");
    const std::size_t batches = m / batch_size;
    if (batches < 2) {
        throw InvalidArgument("batch_means: batch size " + std::to_string(batch_size) + " leaves fewer than 2 batches");
    }
    const Vector grand = chain.mean();
    const auto d = static_cast<Eigen::Index>(chain.dim());
    Matrix sigma = Matrix::Zero(d, d);
    const auto b = static_cast<Eigen::Index>(batch_size);
    for (std::size_t j = 0; j < batches; ++j) {
        const Vector diff =
            chain.values().middleRows(static_cast<Eigen::Index>(j) * b, b).colwise().mean().transpose() - grand;
        sigma.noalias() += diff * diff.transpose();
    }
    sigma *= static_cast<double>(batch_size) / static_cast<double>(batches - 1);
    mirror_upper(sigma);
    return sigma;
}

Matrix overlapping_batch_means(const Chain& chain, std::size_t batch_size) {
    const std::size_t m = chain.length();
    if (batch_size < 1 || batch_size > m - 1) {
        throw InvalidArgument("overlapping_batch_means: batch size " + std::to_string(batch_size) +
                              " outside [1, " + std::to_string(m - 1) + "]");
    }
    const auto d = static_cast<Eigen::Index>(chain.dim());
    const Vector grand = chain.mean();
    const auto b = static_cast<Eigen::Index>(batch_size);
    const Matrix& y = chain.values();

    Vector window = y.topRows(b).colwise().sum().transpose();
    Matrix sigma = Matrix::Zero(d, d);
    const std::size_t windows = m - batch_size + 1;
    for (std::size_t j = 0; j < windows; ++j) {
        const auto start = static_cast<Eigen::Index>(j);
        if (j > 0) {
            // Refresh the running sum periodically to bound drift.
            if (j % 1024 == 0) {
                window = y.middleRows(start, b).colwise().sum().transpose();
            } else {
                window += (y.row(start + b - 1) - y.row(start - 1)).transpose();
            }
        }
        const Vector diff = window / static_cast<double>(batch_size) - grand;
        sigma.noalias() += diff * diff.transpose();
    }
    const double md = static_cast<double>(m);
    const double bd = static_cast<double>(batch_size);
    sigma *= (md * bd) / ((md - bd) * (md - bd + 1.0));
    mirror_upper(sigma);
    return sigma;
}

InitialSequenceResult initial_sequence_from_lags(const std::function<Matrix(std::size_t)>& lag,
                                                 std::size_t max_lag) {
    if (max_lag < 1) throw InvalidArgument("initial sequence: need at least lags 0 and 1");
    const std::size_t last = (max_lag - 1) / 2;  // largest m with 2m + 1 <= max_lag
    auto symmetrized = [&](std::size_t k) {
        const Matrix r = lag(k);
        return Matrix(0.5 * (r + r.transpose()));
    };

    const Matrix s0 = symmetrized(0);
    Matrix partial = -s0;
    auto advance = [&](std::size_t m) {
        const Matrix even = m == 0 ? s0 : symmetrized(2 * m);
        partial += 2.0 * (even + symmetrized(2 * m + 1));
    };
    auto positive_det = [](const Matrix& a, double& det) {
        const Vector values = sym_eigen(a).values;
        if (!(values(values.size() - 1) > 0.0)) return false;
        det = values.prod();
        return true;
    };

    double det = 0.0;
    std::size_t m = 0;
    bool found = false;
    for (; m <= last; ++m) {
        advance(m);
        if (positive_det(partial, det)) {
            found = true;
            break;
        }
    }
    if (!found) throw NumericalError("mtv_initial_seq: no positive definite partial sum (degenerate chain?)");

    InitialSequenceResult out{partial, m};
    while (m + 1 <= last) {
        advance(m + 1);
        double next_det = 0.0;
        if (!positive_det(partial, next_det) || !(next_det > det)) break;
        ++m;
        det = next_det;
        out.sigma = partial;
        out.truncation = m;
    }
    mirror_upper(out.sigma);
    return out;
}

InitialSequenceResult mtv_initial_seq_detail(const Chain& chain) {
    if (chain.length() < 4) throw InvalidArgument("mtv_initial_seq: chain must have at least 4 iterates");
    const Matrix z = centered(chain);
    return initial_sequence_from_lags([&](std::size_t k) { return lag_covariance(z, k); }, chain.length() - 1);
}

Matrix mtv_initial_seq(const Chain& chain) { return mtv_initial_seq_detail(chain).sigma; }

std::size_t default_batch_size(std::size_t length, std::size_t /*dim*/) {
    if (length < 4) throw InvalidArgument("default_batch_size: chain length must be at least 4");
    auto root = static_cast<std::size_t>(std::sqrt(static_cast<double>(length)));
    while (root * root > length) --root;
    while ((root + 1) * (root + 1) <= length) ++root;
    return std::clamp(root, std::size_t{2}, length / 2);
}

}  // namespace mls
