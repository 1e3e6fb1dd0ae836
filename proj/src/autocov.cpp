#include "momentls/autocov.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>
#include <string>

#include "momentls/error.hpp"

namespace mls {

Chain::Chain(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 2) throw DataError("chain needs at least 2 iterates, got " + std::to_string(values_.rows()));
    if (values_.cols() < 1) throw DataError("chain needs at least one component");
    if (!values_.allFinite()) throw DataError("chain contains non-finite values");
}

Chain Chain::from_series(std::span<const double> series) {
    Matrix m(static_cast<Eigen::Index>(series.size()), 1);
    for (std::size_t t = 0; t < series.size(); ++t) m(static_cast<Eigen::Index>(t), 0) = series[t];
    return Chain(std::move(m));
}

std::span<const double> Chain::column(std::size_t i) const {
    if (i >= dim()) throw InvalidArgument("column index " + std::to_string(i) + " out of range");
    return {values_.col(static_cast<Eigen::Index>(i)).data(), length()};
}

Chain Chain::head(std::size_t m) const {
    if (m > length()) throw InvalidArgument("head: requested " + std::to_string(m) + " rows of " + std::to_string(length()));
    return Chain(values_.topRows(static_cast<Eigen::Index>(m)));
}

double LagSequence::squared_norm() const noexcept {
    if (values_.empty()) return 0.0;
    double tail = 0.0;
    for (std::size_t k = 1; k < values_.size(); ++k) tail += values_[k] * values_[k];
    return values_[0] * values_[0] + 2.0 * tail;
}

Matrix LagMatrixSequence::at(std::int64_t k) const {
    const auto lag = static_cast<std::size_t>(k < 0 ? -k : k);
    if (lag >= lags_.size()) {
        const auto d = lags_.empty() ? 0 : lags_.front().rows();
        return Matrix::Zero(d, d);
    }
    return k < 0 ? Matrix(lags_[lag].transpose()) : lags_[lag];
}

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t fft_size(std::size_t at_least) {
    std::size_t best = 1;
    while (best < at_least) best <<= 1;
    for (std::size_t p5 = 1; p5 < best; p5 *= 5) {
        for (std::size_t p3 = p5; p3 < best; p3 *= 3) {
            std::size_t n = p3;
            while (n < at_least) n <<= 1;
            best = std::min(best, n);
        }
    }
    return best;
}

bool use_fft(std::size_t length, std::size_t lags) { return lags > 32 && length * lags > (std::size_t{1} << 18); }

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

/// Transforms of zero-padded, already-centered columns, plus the cross-correlation step.
class CorrelationFft {
public:
    explicit CorrelationFft(std::size_t length)
        : length_(length), n_(fft_size(2 * length)), bins_(n_ / 2 + 1),
          real_(static_cast<double*>(fftw_malloc(sizeof(double) * n_))),
          spec_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins_))) {
        std::lock_guard lock(fftw_planner_mutex());
        const int n = static_cast<int>(n_);
        forward_ = fftw_plan_dft_r2c_1d(n, real_.get(), spec_.get(), FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(n, spec_.get(), real_.get(), FFTW_ESTIMATE);
    }
    ~CorrelationFft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }
    CorrelationFft(const CorrelationFft&) = delete;
    CorrelationFft& operator=(const CorrelationFft&) = delete;

    std::vector<std::complex<double>> transform(const double* x) {
        std::fill(real_.get(), real_.get() + n_, 0.0);
        std::copy(x, x + length_, real_.get());
        fftw_execute(forward_);
        std::vector<std::complex<double>> out(bins_);
        for (std::size_t i = 0; i < bins_; ++i) out[i] = {spec_[i][0], spec_[i][1]};
        return out;
    }

    /// out[k] = M^-1 sum_t x(t) y(t+k), k = 0..lags-1.
    void correlate(const std::vector<std::complex<double>>& fx, const std::vector<std::complex<double>>& fy,
                   std::size_t lags, double* out) {
        for (std::size_t i = 0; i < bins_; ++i) {
            const auto c = std::conj(fx[i]) * fy[i];
            spec_[i][0] = c.real();
            spec_[i][1] = c.imag();
        }
        fftw_execute(inverse_);
        const double scale = 1.0 / (static_cast<double>(n_) * static_cast<double>(length_));
        for (std::size_t k = 0; k < lags; ++k) out[k] = real_[k] * scale;
    }

private:
    std::size_t length_;
    std::size_t n_;
    std::size_t bins_;
    FftwBuffer<double> real_;
    FftwBuffer<fftw_complex> spec_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

std::vector<double> center(std::span<const double> y) {
    double sum = 0.0;
    for (double v : y) sum += v;
    const double mean = sum / static_cast<double>(y.size());
    std::vector<double> out(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) out[t] = y[t] - mean;
    return out;
}

void check_series(std::span<const double> y) {
    if (y.size() < 2) throw DataError("autocovariance needs at least 2 iterates");
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("autocovariance input contains non-finite values");
}

}  // namespace

LagSequence empirical_autocov_direct(std::span<const double> y, std::size_t max_lag) {
    check_series(y);
    const std::size_t m = y.size();
    const std::size_t lags = std::min(max_lag, m - 1) + 1;
    const auto z = center(y);
    std::vector<double> r(lags);
    for (std::size_t k = 0; k < lags; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < m; ++t) acc += z[t] * z[t + k];
        r[k] = acc / static_cast<double>(m);
    }
    return {std::move(r), m};
}

LagSequence empirical_autocov(std::span<const double> y, std::size_t max_lag) {
    check_series(y);
    const std::size_t m = y.size();
    const std::size_t lags = std::min(max_lag, m - 1) + 1;
    if (!use_fft(m, lags)) return empirical_autocov_direct(y, max_lag);
    const auto z = center(y);
    CorrelationFft fft(m);
    const auto fz = fft.transform(z.data());
    std::vector<double> r(lags);
    fft.correlate(fz, fz, lags, r.data());
    return {std::move(r), m};
}

Matrix centered(const Chain& chain) { return chain.values().rowwise() - chain.values().colwise().mean(); }

Matrix lag_covariance(const Matrix& z, std::size_t k) {
    const auto m = z.rows();
    const auto lag = static_cast<Eigen::Index>(k);
    if (lag >= m) return Matrix::Zero(z.cols(), z.cols());
    Matrix r = z.topRows(m - lag).transpose() * z.bottomRows(m - lag);
    r /= static_cast<double>(m);
    return r;
}

LagMatrixSequence empirical_autocov_matrix(const Chain& chain, std::size_t max_lag) {
    const std::size_t m = chain.length();
    const auto d = static_cast<Eigen::Index>(chain.dim());
    const std::size_t lags = std::min(max_lag, m - 1) + 1;
    const Matrix z = centered(chain);
    std::vector<Matrix> out(lags, Matrix(d, d));

    if (!use_fft(m, lags)) {
        for (std::size_t k = 0; k < lags; ++k) out[k] = lag_covariance(z, k);
    } else {
        CorrelationFft fft(m);
        std::vector<std::vector<std::complex<double>>> spectra;
        spectra.reserve(static_cast<std::size_t>(d));
        for (Eigen::Index i = 0; i < d; ++i) spectra.push_back(fft.transform(z.col(i).data()));
        std::vector<double> buf(lags);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                fft.correlate(spectra[static_cast<std::size_t>(i)], spectra[static_cast<std::size_t>(j)], lags,
                              buf.data());
                for (std::size_t k = 0; k < lags; ++k) out[k](i, j) = buf[k];
            }
        }
    }
    mirror_upper(out[0]);
    return LagMatrixSequence(std::move(out));
}

std::vector<double> combine_components(const Chain& chain, std::size_t i, std::size_t j, double a, double b,
                                       Sign sign) {
    if (i >= chain.dim() || j >= chain.dim()) throw InvalidArgument("combine_components: index out of range");
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("combine_components: non-finite weight");
    const auto yi = chain.column(i);
    const auto yj = chain.column(j);
    const double sb = sign == Sign::Plus ? b : -b;
    std::vector<double> out(chain.length());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = a * yi[t] + sb * yj[t];
    return out;
}

}  // namespace mls
