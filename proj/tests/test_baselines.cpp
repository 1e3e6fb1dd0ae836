#include <doctest.h>

#include <cmath>
#include <vector>

#include "momentls/baselines.hpp"
#include "momentls/error.hpp"
#include "momentls/estimator.hpp"
#include "momentls/simulate.hpp"

using namespace mls;

namespace {

Chain series(std::initializer_list<double> v) {
    const std::vector<double> y(v);
    return Chain::from_series(y);
}

Chain var_chain(std::uint64_t seed, std::size_t m) {
    RngStream rng(seed, 0);
    return Model::var1("1").simulate(m, rng);
}

struct ScalarInitialSequence {
    double sigma;
    std::size_t truncation;
};

// Univariate initial positive sequence: Gamma_m = r(2m) + r(2m+1), partial sums
// S_m = -r(0) + 2 sum_{k<=m} Gamma_k, starting at the first positive S_m and
// advancing while S stays positive and increases.
ScalarInitialSequence scalar_initial_sequence(const std::vector<double>& r) {
    const std::size_t last = (r.size() - 2) / 2;
    double s = -r[0];
    std::size_t m = 0;
    for (; m <= last; ++m) {
        s += 2.0 * (r[2 * m] + r[2 * m + 1]);
        if (s > 0.0) break;
    }
    REQUIRE(m <= last);
    while (m + 1 <= last) {
        const double next = s + 2.0 * (r[2 * m + 2] + r[2 * m + 3]);
        if (!(next > 0.0) || !(next > s)) break;
        s = next;
        ++m;
    }
    return {s, m};
}

}  // namespace

TEST_CASE("spectral variance with the Bartlett window") {
    CHECK(sv_bartlett(series({1, -1, 1, -1}), 2)(0, 0) == doctest::Approx(0.25));
    const Chain c = var_chain(1, 500);
    CHECK(sv_bartlett(c, 1) == empirical_autocov_matrix(c, 0).lag(0));
    CHECK(sv_bartlett(series({3, 3, 3, 3, 3}), 3).isZero());
    CHECK_THROWS_AS((void)sv_bartlett(c, 0), InvalidArgument);
    CHECK_THROWS_AS((void)sv_bartlett(c, 501), InvalidArgument);
}

TEST_CASE("batch means") {
    CHECK(batch_means(series({0, 0, 2, 2}), 2)(0, 0) == doctest::Approx(4.0));
    CHECK(batch_means(series({0, 0, 2, 2, 100}), 2)(0, 0) != doctest::Approx(4.0));
    CHECK(batch_means(series({5, 5, 5, 5, 5, 5}), 2).isZero());
    Matrix dup(6, 2);
    dup << 1, 1, 4, 4, 2, 2, 0, 0, 3, 3, 7, 7;
    const Matrix s = batch_means(Chain(dup), 2);
    CHECK(s(0, 0) == s(0, 1));
    CHECK(s(1, 1) == s(0, 1));
    CHECK_THROWS_AS((void)batch_means(series({1, 2, 3}), 2), InvalidArgument);
}

TEST_CASE("overlapping batch means") {
    CHECK(overlapping_batch_means(series({0, 2}), 1)(0, 0) == doctest::Approx(2.0));
    CHECK(overlapping_batch_means(series({1, 1, 1, 1}), 2).isZero());
    const Chain c = var_chain(2, 300);
    const Matrix edge = overlapping_batch_means(c, 299);
    CHECK(edge.allFinite());
    CHECK(edge == edge.transpose());
    CHECK_THROWS_AS((void)overlapping_batch_means(c, 300), InvalidArgument);
    CHECK_THROWS_AS((void)overlapping_batch_means(c, 0), InvalidArgument);

    SUBCASE("running sum agrees with direct window means") {
        const Chain long_chain = var_chain(3, 5000);
        const std::size_t b = 37;
        const Matrix& y = long_chain.values();
        const Vector grand = long_chain.mean();
        Matrix direct = Matrix::Zero(4, 4);
        for (std::size_t j = 0; j + b <= 5000; ++j) {
            const Vector mean = y.middleRows(static_cast<Eigen::Index>(j), b).colwise().mean().transpose() - grand;
            direct += mean * mean.transpose();
        }
        direct *= 5000.0 * b / ((5000.0 - b) * (5000.0 - b + 1));
        CHECK((overlapping_batch_means(long_chain, b) - direct).norm() < 1e-10 * direct.norm());
    }
}

TEST_CASE("baselines are exactly symmetric") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Chain c = var_chain(10 + seed, 2000);
        for (const Matrix& m :
             {sv_bartlett(c, 44), batch_means(c, 44), overlapping_batch_means(c, 44), mtv_initial_seq(c)}) {
            CHECK(m == m.transpose());
        }
    }
}

TEST_CASE("initial sequence matches the scalar oracle") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(seed, 7);
        const std::size_t m = 200 + seed * 37;
        const double a = -0.8 + 1.7 * rng.draw_uniform();
        std::vector<double> y(m);
        double x = rng.draw_normal();
        for (auto& v : y) {
            v = x;
            x = a * x + rng.draw_normal();
        }
        const Chain c = Chain::from_series(y);
        const Matrix z = centered(c);
        std::vector<double> lags(m);
        for (std::size_t k = 0; k < m; ++k) lags[k] = lag_covariance(z, k)(0, 0);

        const auto oracle = scalar_initial_sequence(lags);
        const auto got = mtv_initial_seq_detail(c);
        CHECK(got.truncation == oracle.truncation);
        CHECK(got.sigma(0, 0) == oracle.sigma);

        const auto direct = empirical_autocov_direct(y);
        const auto loose = scalar_initial_sequence(std::vector<double>(direct.values().begin(), direct.values().end()));
        CHECK(got.sigma(0, 0) == doctest::Approx(loose.sigma).epsilon(1e-10));
    }
}

TEST_CASE("initial sequence on iid normals") {
    Matrix mean = Matrix::Zero(2, 2);
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        RngStream rng(rep, 99);
        Matrix y(50000, 2);
        for (Eigen::Index t = 0; t < y.rows(); ++t) {
            y(t, 0) = rng.draw_normal();
            y(t, 1) = rng.draw_normal();
        }
        mean += mtv_initial_seq(Chain(y)) / 20.0;
    }
    CHECK((mean - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("initial sequence on degenerate input") {
    CHECK_THROWS_AS((void)mtv_initial_seq(series({1, 2, 3})), InvalidArgument);
    CHECK_THROWS_AS((void)mtv_initial_seq(series({2, 2, 2, 2, 2})), NumericalError);
}

TEST_CASE("default batch size") {
    CHECK(default_batch_size(10000, 1) == 100u);
    CHECK(default_batch_size(4, 1) == 2u);
    CHECK(default_batch_size(50, 3) == 7u);
    CHECK_THROWS_AS((void)default_batch_size(3, 1), InvalidArgument);
}

TEST_CASE("SV and OBM agree on long chains") {
    SUBCASE("unit-scale VAR(1)") {
        RngStream rng(20, 0);
        const Chain c = Model::var1("ar1").simulate(50000, rng);
        CHECK((sv_bartlett(c, 100) - overlapping_batch_means(c, 100)).cwiseAbs().maxCoeff() < 0.1);
    }
    SUBCASE("gap is of order b/M relative to the estimate") {
        const Chain c = var_chain(20, 50000);
        const Matrix sv = sv_bartlett(c, 100);
        const double gap = (sv - overlapping_batch_means(c, 100)).cwiseAbs().maxCoeff();
        CHECK(gap < 2.0 * (100.0 / 50000.0) * sv.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("estimator dispatch") {
    CHECK(parse_method("MTV_MLSE") == Method::MtvMlse);
    CHECK(parse_method("sv-bartlett") == Method::SvBartlett);
    CHECK(parse_method("obm") == Method::OverlappingBatchMeans);
    CHECK_FALSE(parse_method("nope").has_value());
    for (auto m : {Method::SvBartlett, Method::BatchMeans, Method::OverlappingBatchMeans, Method::MtvInit,
                   Method::MtvMlse})
        CHECK(parse_method(method_name(m)) == m);

    const Chain c = var_chain(30, 2500);
    EstimatorConfig cfg;
    cfg.method = Method::BatchMeans;
    const auto bm = estimate_avar(c, cfg);
    CHECK(bm.batch_size == 50u);
    CHECK(bm.sigma == batch_means(c, 50));
    cfg.batch_or_truncation = 2500;
    CHECK_THROWS_AS((void)estimate_avar(c, cfg), InvalidArgument);
    cfg.method = Method::MtvMlse;
    cfg.batch_or_truncation.reset();
    const auto ml = estimate_avar(c, cfg);
    CHECK(ml.delta.size() == 4u);
    CHECK_FALSE(ml.batch_size.has_value());
}
