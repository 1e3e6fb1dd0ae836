#include "momentls/moment_ls.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "momentls/error.hpp"

namespace mls {

SupportGrid build_grid(std::size_t s0, double delta) {
    if (s0 < 3) throw InvalidArgument("build_grid: grid size must be at least 3");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("build_grid: delta must lie in (0, 1)");
    SupportGrid grid;
    grid.delta = delta;
    const double bound = 1.0 - delta;
    const double denom = static_cast<double>(s0 - 1);
    for (std::size_t i = 0; i < s0; ++i) {
        // Symmetric integer numerator keeps the grid exactly symmetric and hits 0 exactly for odd s0.
        const double alpha = (2.0 * static_cast<double>(i) - denom) / denom;
        if (std::abs(alpha) <= bound) grid.points.push_back(alpha);
    }
    if (grid.points.empty()) {
        throw InvalidArgument("build_grid: no grid point within 1 - delta = " + std::to_string(bound));
    }
    return grid;
}

double eval_sequence(std::span<const Atom> atoms, std::int64_t k) {
    const auto lag = static_cast<int>(k < 0 ? -k : k);
    double total = 0.0;
    for (const auto& atom : atoms) total += atom.weight * (lag == 0 ? 1.0 : std::pow(atom.support, lag));
    return total;
}

double eval_sequence(const MomentMeasure& measure, std::int64_t k) { return eval_sequence(measure.atoms, k); }

double avar_from_atoms(std::span<const Atom> atoms) {
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (!(std::abs(atom.support) < 1.0)) {
            throw InvalidArgument("avar_from_measure: support point " + std::to_string(atom.support) +
                                  " outside (-1, 1)");
        }
        total += atom.weight * (1.0 + atom.support) / (1.0 - atom.support);
    }
    return total;
}

double avar_from_measure(const MomentMeasure& measure) { return avar_from_atoms(measure.atoms); }

double geometric_squared_norm(std::span<const Atom> atoms) {
    double total = 0.0;
    for (const auto& x : atoms) {
        for (const auto& y : atoms) {
            const double p = x.support * y.support;
            total += x.weight * y.weight * (1.0 + p) / (1.0 - p);
        }
    }
    return total;
}

double squared_distance(const MomentMeasure& measure, const LagSequence& r) {
    const std::size_t lags = r.size();
    double head = 0.0;
    for (std::size_t k = 0; k < lags; ++k) {
        const double diff = r(static_cast<std::int64_t>(k)) - eval_sequence(measure, static_cast<std::int64_t>(k));
        head += (k == 0 ? 1.0 : 2.0) * diff * diff;
    }
    // Two-sided tail of m(k)^2 over |k| >= lags.
    double tail = 0.0;
    for (const auto& x : measure.atoms) {
        for (const auto& y : measure.atoms) {
            const double p = x.support * y.support;
            tail += x.weight * y.weight * std::pow(p, static_cast<double>(lags)) / (1.0 - p);
        }
    }
    return head + 2.0 * tail;
}

// ---------------------------------------------------------------------------
// Half-gap tuning
// ---------------------------------------------------------------------------

double split_delta(std::optional<std::size_t> crossing, std::size_t batch_size) {
    if (batch_size < 1) throw InvalidArgument("split_delta: batch size must be positive");
    const double floor_value = 1.0 / static_cast<double>(batch_size);
    if (!crossing) return floor_value;
    if (*crossing == 0) return 1.0;
    const double raw =
        1.0 - std::exp(-std::log(static_cast<double>(batch_size)) / (2.0 * static_cast<double>(*crossing)));
    return std::max(raw, floor_value);
}

double split_autocov(std::span<const double> z, std::size_t split, std::size_t batch_size, std::size_t k) {
    if (split < 1 || split * batch_size > z.size()) throw InvalidArgument("split_autocov: split out of range");
    if (k >= batch_size) throw InvalidArgument("split_autocov: lag out of range");
    std::size_t begin = 0;
    std::size_t end = batch_size - k;  // exclusive
    if (split > 1) {
        begin = (split - 1) * batch_size - k;
        end = split * batch_size - k;
    }
    double acc = 0.0;
    for (std::size_t t = begin; t < end; ++t) acc += z[t] * z[t + k];
    return acc / static_cast<double>(batch_size);
}

std::optional<std::size_t> first_even_crossing(std::span<const double> z, std::size_t split, std::size_t batch_size) {
    for (std::size_t t = 0; t + 2 <= batch_size - 1; t += 2) {
        if (split_autocov(z, split, batch_size, t + 2) <= 0.0) return t;
    }
    return std::nullopt;
}

DeltaEstimate tune_delta(std::span<const double> y, std::size_t splits) {
    if (splits < 1) throw InvalidArgument("tune_delta: need at least one split");
    if (y.size() < 2 * splits) {
        throw InvalidArgument("tune_delta: chain length " + std::to_string(y.size()) + " is below 2L = " +
                              std::to_string(2 * splits));
    }
    double sum = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) throw DataError("tune_delta: non-finite values");
        sum += v;
    }
    const double mean = sum / static_cast<double>(y.size());
    std::vector<double> z(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) z[t] = y[t] - mean;

    DeltaEstimate est;
    est.batch_size = y.size() / splits;
    est.per_split.reserve(splits);
    double total = 0.0;
    for (std::size_t l = 1; l <= splits; ++l) {
        const double d = split_delta(first_even_crossing(z, l, est.batch_size), est.batch_size);
        est.per_split.push_back(d);
        total += d;
    }
    est.value = 0.8 * (total / static_cast<double>(splits));
    return est;
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

MomentProjector::MomentProjector(SupportGrid grid) : grid_(std::move(grid)) {
    if (grid_.points.empty()) throw InvalidArgument("MomentProjector: empty grid");
    for (double alpha : grid_.points) {
        if (!(std::abs(alpha) < 1.0)) throw InvalidArgument("MomentProjector: grid point outside (-1, 1)");
    }
    const auto s = static_cast<Eigen::Index>(grid_.points.size());
    gram_.resize(s, s);
    for (Eigen::Index j = 0; j < s; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double p = grid_.points[static_cast<std::size_t>(i)] * grid_.points[static_cast<std::size_t>(j)];
            gram_(i, j) = gram_(j, i) = (1.0 + p) / (1.0 - p);
        }
    }
}

MomentProjector::MomentProjector(double delta, std::size_t s0) : MomentProjector(build_grid(s0, delta)) {}

Vector MomentProjector::inner_products(const LagSequence& r) const {
    const auto values = r.values();
    const auto s = static_cast<Eigen::Index>(grid_.points.size());
    Vector a(s);
    for (Eigen::Index i = 0; i < s; ++i) {
        const double alpha = grid_.points[static_cast<std::size_t>(i)];
        double power = 1.0;
        double tail = 0.0;
        for (std::size_t k = 1; k < values.size(); ++k) {
            power *= alpha;
            // Geometric weights below the normal range contribute nothing representable.
            if (std::abs(power) < DBL_MIN) break;
            tail += power * values[k];
        }
        a(i) = (values.empty() ? 0.0 : values[0]) + 2.0 * tail;
    }
    return a;
}

Projection MomentProjector::fit(const LagSequence& r, const NnlsOptions& options) const {
    Projection out;
    out.measure.delta = grid_.delta;
    out.weights = Vector::Zero(static_cast<Eigen::Index>(grid_.points.size()));
    for (double v : r.values())
        if (!std::isfinite(v)) throw DataError("momentLS projection: non-finite autocovariance");
    const double rr = r.squared_norm();
    if (r.size() == 0 || r(0) == 0.0) {
        out.loss = rr;
        return out;
    }
    const Vector a = inner_products(r);
    const NnlsResult solved = nnls_qp(a, gram_, options);
    out.weights = solved.weights;
    out.iterations = solved.iterations;
    out.kkt_residual = solved.kkt_residual;
    out.loss = nnls_objective(a, gram_, solved.weights, rr);
    for (Eigen::Index i = 0; i < solved.weights.size(); ++i) {
        if (solved.weights(i) > 0.0) {
            out.measure.atoms.push_back({grid_.points[static_cast<std::size_t>(i)], solved.weights(i)});
        }
    }
    return out;
}

MomentMeasure project_momentls(const LagSequence& r, double delta, const SupportGrid& grid) {
    const double bound = 1.0 - delta;
    for (double alpha : grid.points) {
        if (std::abs(alpha) > bound) throw InvalidArgument("project_momentls: grid point outside [-1+delta, 1-delta]");
    }
    SupportGrid copy = grid;
    copy.delta = delta;
    return MomentProjector(std::move(copy)).project(r);
}

double univariate_avar(std::span<const double> y, const MomentProjector& projector) {
    return avar_from_measure(projector.project(empirical_autocov(y)));
}

}  // namespace mls
