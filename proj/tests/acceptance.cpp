// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "momentls/autocov.hpp"
#include "momentls/baselines.hpp"
#include "momentls/harness.hpp"
#include "momentls/moment_ls.hpp"
#include "momentls/multivar.hpp"
#include "momentls/numerics.hpp"
#include "momentls/simulate.hpp"

#ifndef MOMENTLS_CLI
#error "MOMENTLS_CLI must name the command-line binary"
#endif

using namespace mls;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail = what;
            pass = false;
        }
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Chain replicate_chain(const Model& model, std::uint64_t seed, std::size_t length, std::size_t rep) {
    RngStream rng(seed, replicate_stream_id(length, rep));
    return model.simulate(length, rng);
}

Matrix random_psd(RngStream& rng, int n, int rank) {
    Matrix x(rank, n);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = rng.draw_normal();
    Matrix b = x.transpose() * x;
    mirror_upper(b);
    return b;
}

// ---------------------------------------------------------------------------

Verdict exact_oracles() {
    Verdict v;
    {
        const auto r = empirical_autocov(std::vector<double>{1, -1, 1, -1});
        v.require(r(0) == 1.0 && r(1) == -0.75 && r(2) == 0.5 && r(3) == -0.25, "autocov alternating case");
        const auto two = empirical_autocov(std::vector<double>{0, 1});
        v.require(two(0) == 0.25 && two(1) == -0.125, "autocov two-point case");
        const auto flat = empirical_autocov(std::vector<double>{3, 3, 3, 3});
        v.require(flat(0) == 0.0 && flat(3) == 0.0, "autocov constant case");
    }

    RngStream rng(101, 0);
    double worst_kkt = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.draw_uniform() * 40);
        const int rank = 1 + static_cast<int>(rng.draw_uniform() * n);
        const Matrix b = random_psd(rng, n, rank);
        Vector z(n);
        for (int i = 0; i < n; ++i) z(i) = rng.draw_normal();
        const Vector a = b * z;
        const auto res = nnls_qp(a, b);
        worst_kkt = std::max(worst_kkt, kkt_violation(a, b, res.weights));
        v.require(res.weights.minCoeff() >= 0.0, "nnls returned a negative weight");
    }
    v.require(worst_kkt <= 1e-8, fmt("nnls KKT violation %.3g", worst_kkt));

    double worst_eig = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.draw_uniform() * 20);
        Matrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) a(i, j) = a(j, i) = rng.draw_normal();
        const auto eig = sym_eigen(a);
        worst_eig = std::max(worst_eig, (eig.reconstruct() - a).norm() / a.norm());
    }
    v.require(worst_eig < 1e-10, fmt("sym_eigen reconstruction %.3g", worst_eig));

    double worst_chi = 0.0;
    for (double p : {0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999}) {
        const double two = chi2_quantile(p, 2);
        worst_chi = std::max(worst_chi, std::abs(two / (-2.0 * std::log1p(-p)) - 1.0));
        const double one = chi2_quantile(p, 1);
        worst_chi = std::max(worst_chi, std::abs(std::erf(std::sqrt(one / 2.0)) - p));
    }
    v.require(worst_chi <= 1e-8, fmt("chi-square quantile error %.3g", worst_chi));
    if (v.pass) v.detail = fmt("kkt %.2g, eig %.2g, chi2 %.2g", worst_kkt, worst_eig, worst_chi);
    return v;
}

Verdict recovery() {
    Verdict v;
    RngStream rng(202, 0);
    const MomentProjector p(0.1);
    double worst_avar = 0.0, worst_l2 = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng.draw_uniform() * 3);
        std::vector<Atom> atoms;
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(rng.draw_uniform() * p.grid().size());
            atoms.push_back({p.grid().points[idx], 0.1 + rng.draw_uniform()});
        }
        std::vector<double> r(201);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = eval_sequence(atoms, static_cast<std::int64_t>(k));
        const auto fit = p.fit(LagSequence(r, r.size()));
        const double truth = avar_from_atoms(atoms);
        worst_avar = std::max(worst_avar, std::abs(avar_from_measure(fit.measure) / truth - 1.0));
        std::vector<Atom> diff = fit.measure.atoms;
        for (const auto& a : atoms) diff.push_back({a.support, -a.weight});
        worst_l2 = std::max(worst_l2, std::sqrt(std::max(0.0, geometric_squared_norm(diff))));
    }
    v.require(worst_avar <= 1e-3, fmt("avar relative error %.3g", worst_avar));
    v.require(worst_l2 < 1e-4, fmt("sequence l2 error %.3g", worst_l2));
    if (v.pass) v.detail = fmt("max avar rel %.2g, max l2 %.2g", worst_avar, worst_l2);
    return v;
}

Verdict scalar_ar1() {
    Verdict v;
    const Model model = Model::var1("ar1");
    std::vector<double> est(50);
    parallel_for(est.size(), workers(), [&](std::size_t rep) {
        est[rep] = mtv_mlse(replicate_chain(model, 303, 50000, rep)).sigma(0, 0);
    });
    double mean = 0.0;
    for (double e : est) mean += e / static_cast<double>(est.size());
    v.require(std::abs(mean / 4.0 - 1.0) <= 0.05, fmt("mean sigma^2 %.4f", mean));
    if (v.pass) v.detail = fmt("mean sigma^2 %.4f (truth 4)", mean);
    return v;
}

const BenchmarkRow& row_of(const BenchmarkResult& r, const std::string& method, std::size_t m) {
    for (const auto& row : r.rows)
        if (row.method == method && row.length == m) return row;
    throw std::runtime_error("missing row " + method);
}

Verdict var_benchmark() {
    Verdict v;
    BenchmarkConfig cfg{Model::var1("1"), {5000, 20000}, 200, {}, 0.05, 404, workers(), false};
    for (auto m : {Method::MtvMlse, Method::BatchMeans}) {
        EstimatorConfig e;
        e.method = m;
        cfg.methods.push_back(make_benchmark_method(e));
    }
    const auto res = run_benchmark(cfg);
    const auto& small = row_of(res, "mtv-mlse", 5000);
    const auto& big = row_of(res, "mtv-mlse", 20000);
    const auto& bm = row_of(res, "bm", 20000);
    v.require(small.fail_count == 0 && big.fail_count == 0 && bm.fail_count == 0, "estimator failures");
    const double e5 = small.rel_err_mean.value_or(NAN), e20 = big.rel_err_mean.value_or(NAN);
    const double ebm = bm.rel_err_mean.value_or(NAN), cov = big.coverage.value_or(NAN);
    v.require(e20 < e5, fmt("mtv-mlse error %.4f -> %.4f", e5, e20));
    v.require(e20 <= ebm, fmt("mtv-mlse %.4f vs bm %.4f at M=20000", e20, ebm));
    v.require(cov >= 0.90 && cov <= 0.98, fmt("coverage %.3f", cov));
    std::ostringstream d;
    d << fmt("mtv-mlse err %.4f -> %.4f, ", e5, e20) << fmt("bm err %.4f, coverage %.3f", ebm, cov);
    if (v.pass) v.detail = d.str();
    return v;
}

double mean_atom_distance(const Model& model, std::size_t length, std::size_t reps) {
    const auto& truth = model.truth();
    const std::size_t d = model.dim();
    std::vector<double> per_rep(reps);
    parallel_for(reps, workers(), [&](std::size_t rep) {
        const Chain chain = replicate_chain(model, 505, length, rep);
        DeltaVector delta = tune_delta_vector(chain);
        for (auto& x : delta.values) x = std::min(x, kMaxTunedDelta);
        ProjectorCache cache;
        double total = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) {
                std::vector<Atom> diff = estimate_cross_cov(chain, i, j, delta, cache).signed_atoms();
                for (const auto& a : truth.cross_atoms(i, j)) diff.push_back({a.support, -a.weight});
                total += std::sqrt(std::max(0.0, geometric_squared_norm(diff)));
                ++pairs;
            }
        }
        per_rep[rep] = total / static_cast<double>(pairs);
    });
    double mean = 0.0;
    for (double x : per_rep) mean += x / static_cast<double>(reps);
    return mean;
}

Verdict mh_atoms() {
    Verdict v;
    const Model model = Model::mh(1);
    const double small = mean_atom_distance(model, 4000, 30);
    const double big = mean_atom_distance(model, 32000, 30);
    v.require(big < small, fmt("l2 distance %.4g -> %.4g", small, big));
    if (v.pass) v.detail = fmt("mean l2 distance %.4g -> %.4g", small, big);
    return v;
}

Verdict invariants() {
    Verdict v;
    const Model models[] = {Model::var1("1"), Model::var1("2"), Model::var1("ar1"), Model::mh(1), Model::mh(2, 30, 2)};
    std::vector<std::string> failures(500);
    parallel_for(500, workers(), [&](std::size_t n) {
        RngStream rng(606, n);
        const Model& model = models[n % 5];
        const auto length = static_cast<std::size_t>(300 + rng.draw_uniform() * 2700);
        const Chain chain = model.simulate(length, rng);
        const std::size_t d = chain.dim();
        std::string& fail = failures[n];

        DeltaVector delta = tune_delta_vector(chain);
        for (auto& x : delta.values) x = std::min(x, kMaxTunedDelta);
        const AvarMatrix est = momentls_avar(chain, delta);
        if (!(est.sigma == est.sigma.transpose())) fail = "asymmetric estimate";
        else if (sym_eigen(est.sigma).values.minCoeff() < -1e-10) fail = "negative eigenvalue";

        Vector scale(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < scale.size(); ++i)
            scale(i) = std::ldexp(1.0, static_cast<int>(rng.draw_uniform() * 9) - 4);
        const Chain scaled(chain.values() * scale.asDiagonal());
        const AvarMatrix pw = sigma_pw(chain, delta);
        const AvarMatrix pw_scaled = sigma_pw(scaled, delta);
        if (!(pw_scaled.sigma == Matrix(scale.asDiagonal() * pw.sigma * scale.asDiagonal())))
            fail = "sigma_pw scaling";

        const MomentProjector projector(delta.min());
        const auto col = chain.column(0);
        const std::vector<double> y(col.begin(), col.end());
        const LagSequence r = empirical_autocov(y);
        const MomentMeasure base = projector.project(r);
        const double c = std::ldexp(1.0, static_cast<int>(rng.draw_uniform() * 13) - 6);
        std::vector<double> rs(r.values().begin(), r.values().end());
        for (auto& x : rs) x *= c;
        const MomentMeasure m = projector.project(LagSequence(rs, r.chain_length()));
        bool homogeneous = m.atoms.size() == base.atoms.size();
        for (std::size_t i = 0; homogeneous && i < m.atoms.size(); ++i)
            homogeneous = m.atoms[i].support == base.atoms[i].support && m.atoms[i].weight == c * base.atoms[i].weight;
        if (!homogeneous) fail = "projection homogeneity";

        const double t = 0.01 + 100.0 * rng.draw_uniform();
        std::vector<double> ty(y);
        for (auto& x : ty) x *= t;
        if (tune_delta(ty).value != tune_delta(y).value) fail = "tune_delta scale invariance";
    });
    std::size_t bad = 0;
    for (const auto& f : failures)
        if (!f.empty()) {
            if (bad == 0) v.detail = f;
            ++bad;
        }
    v.require(bad == 0, v.detail);
    v.detail = v.pass ? "500 chains" : fmt("%.0f failing chains, first: ", static_cast<double>(bad)) + v.detail;
    return v;
}

struct ScalarIs {
    double sigma;
    std::size_t truncation;
};

ScalarIs scalar_initial_sequence(const std::vector<double>& r) {
    const std::size_t last = (r.size() - 2) / 2;
    double s = -r[0];
    std::size_t m = 0;
    for (; m <= last; ++m) {
        s += 2.0 * (r[2 * m] + r[2 * m + 1]);
        if (s > 0.0) break;
    }
    while (m + 1 <= last) {
        const double next = s + 2.0 * (r[2 * m + 2] + r[2 * m + 3]);
        if (!(next > 0.0) || !(next > s)) break;
        s = next;
        ++m;
    }
    return {s, m};
}

Verdict baselines() {
    Verdict v;
    BenchmarkConfig cfg{Model::var1("1"), {5000, 80000}, 30, {}, 0.05, 707, workers(), false};
    for (auto m : {Method::SvBartlett, Method::BatchMeans, Method::OverlappingBatchMeans, Method::MtvInit}) {
        EstimatorConfig e;
        e.method = m;
        cfg.methods.push_back(make_benchmark_method(e));
    }
    const auto res = run_benchmark(cfg);
    std::ostringstream d;
    for (const auto& method : cfg.methods) {
        const auto& a = row_of(res, method.name, 5000);
        const auto& b = row_of(res, method.name, 80000);
        const double ea = a.rel_err_mean.value_or(NAN), eb = b.rel_err_mean.value_or(NAN);
        v.require(a.fail_count == 0 && b.fail_count == 0, method.name + " failures");
        v.require(eb < ea, method.name + fmt(" error %.4f -> %.4f", ea, eb));
        d << method.name << fmt(" %.3f->%.3f ", ea, eb);
    }

    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(seed, 808);
        const auto m = static_cast<std::size_t>(200 + rng.draw_uniform() * 1800);
        const double a = -0.8 + 1.7 * rng.draw_uniform();
        std::vector<double> y(m);
        double x = rng.draw_normal();
        for (auto& val : y) {
            val = x;
            x = a * x + rng.draw_normal();
        }
        const Chain c = Chain::from_series(y);
        const Matrix z = centered(c);
        std::vector<double> lags(m);
        for (std::size_t k = 0; k < m; ++k) lags[k] = lag_covariance(z, k)(0, 0);
        const auto oracle = scalar_initial_sequence(lags);
        const auto got = mtv_initial_seq_detail(c);
        if (!(got.sigma(0, 0) == oracle.sigma && got.truncation == oracle.truncation)) ++mismatches;
    }
    v.require(mismatches == 0, fmt("%.0f initial-sequence oracle mismatches", static_cast<double>(mismatches)));
    if (v.pass) v.detail = d.str() + "| oracle 50/50";
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict cli_determinism() {
    Verdict v;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "momentls_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "smoke.json") << R"({
        "model": {"type": "var1", "preset": "1"},
        "lengths": [1000, 2000], "replicates": 5, "seed": 1,
        "methods": ["sv-bartlett", "bm", "obm", "mtv-init", "mtv-mlse"]
    })";
    auto bench = [&](const std::string& out, int w) {
        const std::string cmd = "'" MOMENTLS_CLI "' benchmark --config '" + (dir / "smoke.json").string() +
                                "' --out '" + (dir / out).string() + "' --workers " + std::to_string(w) +
                                " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    v.require(bench("a.csv", 1) && bench("b.csv", 1) && bench("c.csv", 4) && bench("d.csv", 3), "cli exited nonzero");
    const auto a = slurp(dir / "a.csv");
    v.require(!a.empty(), "empty output");
    v.require(a == slurp(dir / "b.csv"), "repeat run differs");
    v.require(a == slurp(dir / "c.csv") && a == slurp(dir / "d.csv"), "worker count changes output");
    if (v.pass) v.detail = "identical across runs and 1/3/4 workers";
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"exact oracles", exact_oracles},
        {"momentLS recovery", recovery},
        {"scalar AR(1)", scalar_ar1},
        {"VAR(1) benchmark", var_benchmark},
        {"MH atom distance", mh_atoms},
        {"structural invariants", invariants},
        {"baseline sanity", baselines},
        {"end-to-end determinism", cli_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %s: %s (%s; %.1fs)\n", i + 1, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                    v.detail.c_str(), secs);
        std::fflush(stdout);
        if (!v.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
