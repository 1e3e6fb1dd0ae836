#include "momentls/multivar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "momentls/error.hpp"
#include "momentls/numerics.hpp"

namespace mls {

DeltaVector::DeltaVector(std::vector<double> v) : values(std::move(v)) {
    for (double d : values) {
        if (!(d > 0.0 && d < 1.0)) throw InvalidArgument("delta values must lie in (0, 1), got " + std::to_string(d));
    }
}

double DeltaVector::min() const {
    if (values.empty()) throw InvalidArgument("empty delta vector");
    return *std::min_element(values.begin(), values.end());
}

std::shared_ptr<const MomentProjector> ProjectorCache::get(double delta) {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(delta);
    if (it != cache_.end()) return it->second;
    auto projector = std::make_shared<const MomentProjector>(delta, grid_size_);
    cache_.emplace(delta, projector);
    return projector;
}

// ---------------------------------------------------------------------------

double SignedMomentPair::eval(std::int64_t k) const {
    return (eval_sequence(plus, k) - eval_sequence(minus, k)) / (4.0 * a * b);
}

double SignedMomentPair::avar() const { return (avar_from_measure(plus) - avar_from_measure(minus)) / (4.0 * a * b); }

std::vector<Atom> SignedMomentPair::signed_atoms() const {
    const double scale = 1.0 / (4.0 * a * b);
    std::vector<Atom> out;
    out.reserve(plus.atoms.size() + minus.atoms.size());
    for (const auto& atom : plus.atoms) out.push_back({atom.support, atom.weight * scale});
    for (const auto& atom : minus.atoms) out.push_back({atom.support, -atom.weight * scale});
    return out;
}

double CrossCovariance::eval(std::int64_t k) const {
    return is_diagonal() ? eval_sequence(measure(), k) : pair().eval(k);
}

double CrossCovariance::avar() const { return is_diagonal() ? avar_from_measure(measure()) : pair().avar(); }

std::vector<Atom> CrossCovariance::signed_atoms() const {
    return is_diagonal() ? measure().atoms : pair().signed_atoms();
}

// ---------------------------------------------------------------------------

DeltaVector tune_delta_vector(const Chain& chain, std::size_t splits) {
    std::vector<double> out;
    out.reserve(chain.dim());
    for (std::size_t i = 0; i < chain.dim(); ++i) out.push_back(tune_delta(chain.column(i), splits).value);
    return DeltaVector(std::move(out));
}

namespace {

void check_delta(const Chain& chain, const DeltaVector& delta) {
    if (delta.size() != chain.dim()) {
        throw InvalidArgument("delta vector has " + std::to_string(delta.size()) + " entries for a " +
                              std::to_string(chain.dim()) + "-dimensional chain");
    }
}

double component_scale(const LagSequence& r, std::size_t i) {
    if (!(r(0) > 0.0)) throw DataError("component " + std::to_string(i + 1) + " has zero empirical variance");
    return std::sqrt(r(0));
}

SignedMomentPair fit_pair(const Chain& chain, std::size_t i, std::size_t j, double a, double b,
                          const MomentProjector& projector) {
    SignedMomentPair pair;
    pair.a = a;
    pair.b = b;
    pair.delta = projector.delta();
    pair.plus = projector.project(empirical_autocov(combine_components(chain, i, j, a, b, Sign::Plus)));
    pair.minus = projector.project(empirical_autocov(combine_components(chain, i, j, a, b, Sign::Minus)));
    return pair;
}

}  // namespace

SignedMomentPair estimate_cross_cov_weighted(const Chain& chain, std::size_t i, std::size_t j, double a, double b,
                                             double delta, ProjectorCache& cache) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InvalidArgument("polarization weights must be positive and finite");
    }
    return fit_pair(chain, i, j, a, b, *cache.get(delta));
}

CrossCovariance estimate_cross_cov(const Chain& chain, std::size_t i, std::size_t j, const DeltaVector& delta,
                                   ProjectorCache& cache) {
    check_delta(chain, delta);
    if (i >= chain.dim() || j >= chain.dim()) throw InvalidArgument("estimate_cross_cov: index out of range");
    const LagSequence ri = empirical_autocov(chain.column(i));
    const double si = component_scale(ri, i);
    if (i == j) return CrossCovariance(i, j, cache.get(delta[i])->project(ri));
    const double sj = component_scale(empirical_autocov(chain.column(j)), j);
    const double dij = std::min(delta[i], delta[j]);
    return CrossCovariance(i, j, fit_pair(chain, i, j, 1.0 / si, 1.0 / sj, *cache.get(dij)));
}

AvarMatrix sigma_pw(const Chain& chain, const DeltaVector& delta, ProjectorCache& cache) {
    check_delta(chain, delta);
    const std::size_t d = chain.dim();
    std::vector<LagSequence> lags;
    std::vector<double> scale;
    lags.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        lags.push_back(empirical_autocov(chain.column(i)));
        scale.push_back(component_scale(lags.back(), i));
    }

    AvarMatrix out;
    out.method = "mtv-mlse";
    out.delta = delta.values;
    out.sigma = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out.sigma(ii, ii) = avar_from_measure(cache.get(delta[i])->project(lags[i]));
        for (std::size_t j = i + 1; j < d; ++j) {
            const auto& projector = *cache.get(std::min(delta[i], delta[j]));
            const double value = fit_pair(chain, i, j, 1.0 / scale[i], 1.0 / scale[j], projector).avar();
            out.sigma(ii, static_cast<Eigen::Index>(j)) = value;
            out.sigma(static_cast<Eigen::Index>(j), ii) = value;
        }
    }
    return out;
}

AvarMatrix sigma_pw(const Chain& chain, const DeltaVector& delta, const MomentLSOptions& options) {
    ProjectorCache cache(options.grid_size);
    return sigma_pw(chain, delta, cache);
}

AvarMatrix sigma_psd(const Chain& chain, const AvarMatrix& pw, const DeltaVector& delta, ProjectorCache& cache) {
    check_delta(chain, delta);
    const auto d = static_cast<Eigen::Index>(chain.dim());
    if (pw.sigma.rows() != d || pw.sigma.cols() != d) throw InvalidArgument("sigma_psd: dimension mismatch");
    const EigenDecomposition eig = sym_eigen(pw.sigma);
    const Matrix rotated = chain.values() * eig.vectors;
    const auto& projector = *cache.get(delta.min());

    EigenDecomposition refit = eig;
    for (Eigen::Index j = 0; j < d; ++j) {
        const std::span<const double> column(rotated.col(j).data(), chain.length());
        refit.values(j) = avar_from_measure(projector.project(empirical_autocov(column)));
    }

    AvarMatrix out;
    out.method = pw.method;
    out.delta = delta.values;
    out.refined = true;
    out.sigma = refit.reconstruct();
    return out;
}

AvarMatrix sigma_psd(const Chain& chain, const AvarMatrix& pw, const DeltaVector& delta,
                     const MomentLSOptions& options) {
    ProjectorCache cache(options.grid_size);
    return sigma_psd(chain, pw, delta, cache);
}

bool is_numerically_psd(const Matrix& a) {
    const Vector values = sym_eigen(a).values;
    const double top = values(0);
    const double bottom = values(values.size() - 1);
    return bottom >= -1e-10 * std::max(1.0, top);
}

AvarMatrix momentls_avar(const Chain& chain, const DeltaVector& delta, const MomentLSOptions& options) {
    ProjectorCache cache(options.grid_size);
    AvarMatrix pw = sigma_pw(chain, delta, cache);
    if (is_numerically_psd(pw.sigma)) return pw;
    return sigma_psd(chain, pw, delta, cache);
}

AvarMatrix mtv_mlse(const Chain& chain, const MomentLSOptions& options) {
    DeltaVector delta = tune_delta_vector(chain, options.delta_splits);
    for (auto& v : delta.values) v = std::min(v, kMaxTunedDelta);
    return momentls_avar(chain, delta, options);
}

// ---------------------------------------------------------------------------

double relative_error(const Matrix& estimate, const Matrix& truth) {
    if (truth.rows() != truth.cols() || estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw InvalidArgument("relative_error: dimension mismatch");
    }
    const EigenDecomposition eig = sym_eigen(truth);
    if (!(eig.values(eig.values.size() - 1) > 0.0)) {
        throw InvalidArgument("relative_error: reference matrix is not positive definite");
    }
    const Matrix whiten = spectral_map(eig, [](double v) { return 1.0 / std::sqrt(v); });
    return (whiten * (estimate - truth) * whiten).norm();
}

double region_statistic(const Vector& mean_hat, const Matrix& sigma_hat, const Vector& mean, std::size_t length) {
    const auto d = sigma_hat.rows();
    if (sigma_hat.cols() != d || mean_hat.size() != d || mean.size() != d) {
        throw InvalidArgument("region_contains: dimension mismatch");
    }
    const EigenDecomposition eig = sym_eigen(sigma_hat);
    const double top = eig.values(0);
    const double bottom = eig.values(d - 1);
    if (!(top > 0.0) || !(bottom > 1e-12 * top)) {
        throw NumericalError("region_contains: covariance estimate is singular or indefinite");
    }
    const Vector rotated = eig.vectors.transpose() * (mean_hat - mean);
    double q = 0.0;
    for (Eigen::Index l = 0; l < d; ++l) q += rotated(l) * rotated(l) / eig.values(l);
    return static_cast<double>(length) * q;
}

bool region_contains(const Vector& mean_hat, const Matrix& sigma_hat, const Vector& mean, std::size_t length,
                     double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("region_contains: alpha must lie in (0, 1)");
    const double q = region_statistic(mean_hat, sigma_hat, mean, length);
    return q < chi2_quantile(1.0 - alpha, static_cast<int>(sigma_hat.rows()));
}

}  // namespace mls
