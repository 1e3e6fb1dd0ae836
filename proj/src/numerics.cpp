#include "momentls/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "momentls/error.hpp"

namespace mls {

// ---------------------------------------------------------------------------
// NNLS
// ---------------------------------------------------------------------------

namespace {

Vector solve_passive(const Matrix& gram, const Vector& a, const std::vector<Eigen::Index>& passive) {
    const auto n = static_cast<Eigen::Index>(passive.size());
    Matrix sub(n, n);
    Vector rhs(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        rhs(r) = a(passive[r]);
        for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = gram(passive[r], passive[c]);
    }
    Eigen::LDLT<Matrix> ldlt(sub);
    Vector z = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !z.allFinite()) {
        z = sub.completeOrthogonalDecomposition().solve(rhs);
    }
    return z;
}

}  // namespace

double nnls_objective(const Vector& a, const Matrix& gram, const Vector& w, double constant) {
    return constant - 2.0 * a.dot(w) + w.dot(gram * w);
}

double kkt_violation(const Vector& a, const Matrix& gram, const Vector& w) {
    const Vector grad = 2.0 * (gram * w - a);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
        worst = std::max(worst, -grad(i));
        worst = std::max(worst, std::abs(w(i) * grad(i)));
    }
    return worst;
}

NnlsResult nnls_qp(const Vector& a, const Matrix& gram, const NnlsOptions& options) {
    const Eigen::Index s = a.size();
    if (s == 0) throw InvalidArgument("nnls_qp: empty problem");
    if (gram.rows() != s || gram.cols() != s) {
        throw InvalidArgument("nnls_qp: Gram matrix is " + std::to_string(gram.rows()) + "x" +
                              std::to_string(gram.cols()) + ", expected " + std::to_string(s));
    }
    if (!a.allFinite() || !gram.allFinite()) throw DataError("nnls_qp: non-finite input");
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if (asymmetry(gram) > 1e-12 * scale) throw DataError("nnls_qp: Gram matrix is not symmetric");
    if (options.tolerance < 0.0) throw InvalidArgument("nnls_qp: negative tolerance");

    NnlsResult result;
    result.weights = Vector::Zero(s);
    const double a_max = a.cwiseAbs().maxCoeff();
    result.tolerance = options.tolerance > 0.0 ? options.tolerance : 1e-12 * a_max;
    if (a_max == 0.0) return result;

    const std::size_t cap = options.max_iterations > 0 ? options.max_iterations : 10 * static_cast<std::size_t>(s);
    // g holds a - Bw, i.e. minus half the gradient.
    const double threshold = 0.5 * result.tolerance;

    Vector& w = result.weights;
    std::vector<Eigen::Index> passive;
    std::vector<char> in_passive(static_cast<std::size_t>(s), 0);
    std::vector<char> blocked(static_cast<std::size_t>(s), 0);
    Vector g(s);

    for (;;) {
        g = a;
        for (auto p : passive) g.noalias() -= gram.col(p) * w(p);

        Eigen::Index enter = -1;
        double best = threshold;
        for (Eigen::Index i = 0; i < s; ++i) {
            if (in_passive[i] || blocked[i]) continue;
            if (g(i) > best) {
                best = g(i);
                enter = i;
            }
        }
        if (enter < 0) break;

        if (++result.iterations > cap) {
            std::vector<double> best_iterate(w.data(), w.data() + s);
            const double residual = kkt_violation(a, gram, w);
            throw ConvergenceError("nnls_qp: no convergence within " + std::to_string(cap) +
                                       " iterations (KKT residual " + std::to_string(residual) + ")",
                                   std::move(best_iterate), residual);
        }

        passive.insert(std::upper_bound(passive.begin(), passive.end(), enter), enter);
        in_passive[enter] = 1;

        bool first_pass = true;
        bool moved = false;
        while (!passive.empty()) {
            const Vector z = solve_passive(gram, a, passive);
            if (first_pass) {
                first_pass = false;
                const auto pos = std::lower_bound(passive.begin(), passive.end(), enter) - passive.begin();
                if (!(z(pos) > 0.0)) {
                    // Rank-deficient direction; the entering variable cannot move.
                    passive.erase(passive.begin() + pos);
                    in_passive[enter] = 0;
                    blocked[enter] = 1;
                    break;
                }
            }
            bool feasible = true;
            for (Eigen::Index r = 0; r < z.size(); ++r) {
                if (!(z(r) > 0.0)) {
                    feasible = false;
                    break;
                }
            }
            moved = true;
            if (feasible) {
                for (std::size_t r = 0; r < passive.size(); ++r) w(passive[r]) = z(static_cast<Eigen::Index>(r));
                break;
            }

            double step = std::numeric_limits<double>::infinity();
            std::size_t leaving = 0;
            for (std::size_t r = 0; r < passive.size(); ++r) {
                const double zr = z(static_cast<Eigen::Index>(r));
                if (zr > 0.0) continue;
                const double wr = w(passive[r]);
                const double ratio = wr / (wr - zr);
                if (ratio < step) {
                    step = ratio;
                    leaving = r;
                }
            }
            for (std::size_t r = 0; r < passive.size(); ++r) {
                const auto idx = passive[r];
                w(idx) += step * (z(static_cast<Eigen::Index>(r)) - w(idx));
            }
            w(passive[leaving]) = 0.0;
            std::vector<Eigen::Index> kept;
            kept.reserve(passive.size());
            for (auto idx : passive) {
                if (w(idx) > 0.0) {
                    kept.push_back(idx);
                } else {
                    w(idx) = 0.0;
                    in_passive[idx] = 0;
                }
            }
            passive.swap(kept);
        }
        if (moved) std::fill(blocked.begin(), blocked.end(), 0);
    }

    result.kkt_residual = kkt_violation(a, gram, w);
    return result;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver
// ---------------------------------------------------------------------------

Matrix EigenDecomposition::reconstruct() const {
    return spectral_map(*this, [](double v) { return v; });
}

EigenDecomposition sym_eigen(const Matrix& input) {
    const Eigen::Index n = input.rows();
    if (n < 1 || input.cols() != n) throw InvalidArgument("sym_eigen: expected a nonempty square matrix");
    if (!input.allFinite()) throw DataError("sym_eigen: non-finite entries");
    const double norm = input.norm();
    if (asymmetry(input) > 1e-10 * norm) throw DataError("sym_eigen: matrix is not symmetric");

    Matrix a = 0.5 * (input + input.transpose());
    Matrix v = Matrix::Identity(n, n);

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index q = 1; q < n; ++q)
            for (Eigen::Index p = 0; p < q; ++p) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-12 * norm) break;

        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = a(p, r) = c * arp - s * arq;
                    a(r, q) = a(q, r) = s * arp + c * arq;
                }
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }
    if (sweep == kMaxSweeps) throw NumericalError("sym_eigen: Jacobi sweeps did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src);
        Vector col = v.col(src);
        Eigen::Index arg = 0;
        col.cwiseAbs().maxCoeff(&arg);
        if (col(arg) < 0.0) col = -col;
        out.vectors.col(k) = col;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Incomplete gamma and chi-squared quantiles
// ---------------------------------------------------------------------------

double regularized_gamma_p(double s, double x) {
    if (!(s > 0.0)) throw InvalidArgument("regularized_gamma_p: shape must be positive");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double log_prefactor = -x + s * std::log(x) - std::lgamma(s);
    constexpr double kEps = 1e-16;
    constexpr int kMaxTerms = 100000;

    if (x < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        for (int n = 1; n < kMaxTerms; ++n) {
            term *= x / (s + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * kEps) break;
        }
        return std::min(1.0, sum * std::exp(log_prefactor));
    }

    // Upper tail by modified Lentz continued fraction.
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
}

double chi2_cdf(double x, int dof) {
    if (dof < 1) throw InvalidArgument("chi2_cdf: dof must be >= 1");
    return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

namespace {

double chi2_pdf(double x, int dof) {
    if (x <= 0.0) return 0.0;
    const double k = 0.5 * dof;
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

}  // namespace

double chi2_quantile(double p, int dof) {
    if (dof < 1) throw InvalidArgument("chi2_quantile: dof must be >= 1");
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("chi2_quantile: p must lie in [0, 1)");
    if (p == 0.0) return 0.0;

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi2_cdf(hi, dof) < p) {
        lo = hi;
        hi *= 2.0;
    }
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double f = chi2_cdf(x, dof) - p;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double pdf = chi2_pdf(x, dof);
        double next = pdf > 0.0 ? x - f / pdf : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, x) || hi - lo <= 1e-15 * hi) return next;
        x = next;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::draw_uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::draw_normal() { return normal_(engine_); }

std::size_t RngStream::draw_categorical(std::span<const double> probs) {
    if (probs.empty()) throw InvalidArgument("draw_categorical: empty probability vector");
    double total = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("draw_categorical: invalid probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("draw_categorical: probabilities do not sum to 1");
    const double u = draw_uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        acc += probs[i];
        if (u < acc) return i;
    }
    return last_positive;
}

std::size_t RngStream::draw_from_cdf(std::span<const double> cdf) {
    const double u = draw_uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    return std::min(idx, cdf.size() - 1);
}

}  // namespace mls
