#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "momentls/error.hpp"
#include "momentls/harness.hpp"
#include "momentls/io.hpp"

using namespace mls;

namespace {

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "momentls_unit";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string results_text(const BenchmarkResult& r) {
    std::ostringstream out;
    write_results_csv(r, out);
    return out.str();
}

BenchmarkConfig small_config(std::size_t workers) {
    BenchmarkConfig cfg{Model::var1("1"), {500, 1000}, 4, {}, 0.05, 17, workers, false};
    for (auto m : {Method::SvBartlett, Method::BatchMeans, Method::MtvMlse}) {
        EstimatorConfig e;
        e.method = m;
        cfg.methods.push_back(make_benchmark_method(e));
    }
    return cfg;
}

}  // namespace

TEST_CASE("chain CSV round trip") {
    RngStream rng(1, 0);
    Matrix v(100, 3);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) v(i, j) = rng.draw_normal() * std::pow(10.0, static_cast<double>(j * 5 - 5));
    const Chain c(v);
    const auto path = scratch_dir() / "roundtrip.csv";
    write_chain_csv(c, path);
    const Chain back = read_chain_csv(path);
    CHECK(back.dim() == 3u);
    CHECK(back.length() == 100u);
    CHECK(back.values() == c.values());

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "g1,g2,g3");
}

TEST_CASE("chain CSV validation") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_chain_csv(in, "test.csv");
    };
    CHECK(parse("g1,g2\n1,2\n3,4\n").dim() == 2u);
    CHECK(parse("a,b,c\n1,2,3\n\n4,5,6\n").length() == 2u);
    try {
        (void)parse("g1,g2\n1,2,3\n4,5\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    try {
        (void)parse("g1\n1\nabc\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse("g1\n1\n"), DataError);
    CHECK_THROWS_AS((void)parse(""), DataError);
    CHECK_THROWS_AS((void)parse("g1\n1\nnan\n"), DataError);
    CHECK_THROWS_AS((void)read_chain_csv(scratch_dir() / "does_not_exist.csv"), DataError);
}

TEST_CASE("JSON helpers") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6.5;
    CHECK(matrix_from_json(matrix_to_json(m)) == m);
    Vector v(3);
    v << 0.1, -2, 1e-300;
    CHECK(vector_from_json(vector_to_json(v)) == v);
    CHECK_THROWS_AS((void)matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")), DataError);
    CHECK_THROWS_AS((void)vector_from_json(nlohmann::json::parse("[1,\"x\"]")), DataError);

    const auto mh = model_to_json(Model::mh(2, 6, 2));
    CHECK(mh["type"] == "mh");
    CHECK(mh["kernel"].size() == 6u);
    CHECK(mh["truth"]["sigma"].size() == 2u);
    const auto var = model_to_json(Model::var1("2"));
    CHECK(var["preset"] == "2");
    CHECK(matrix_from_json(var["truth"]["sigma"]) == Model::var1("2").truth().sigma);
}

TEST_CASE("estimate JSON report") {
    RngStream rng(2, 0);
    const Chain c = Model::var1("1").simulate(2000, rng);
    EstimatorConfig cfg;
    const auto est = estimate_avar(c, cfg);
    const auto j = estimate_to_json(est, c, 0.05);
    CHECK(j["method"] == "mtv-mlse");
    CHECK(j["d"] == 4);
    CHECK(j["M"] == 2000);
    CHECK(j["sigma"].size() == 16u);
    CHECK(j["delta"].size() == 4u);
    CHECK(j["batch_size"].is_null());
    CHECK(j["avar_diagonal"][2].get<double>() == est.sigma(2, 2));
    CHECK(j["chi2_quantile"].get<double>() == doctest::Approx(9.487729).epsilon(1e-6));
}

TEST_CASE("replicate stream ids do not depend on the rest of the grid") {
    CHECK(replicate_stream_id(1000, 3) == replicate_stream_id(1000, 3));
    CHECK(replicate_stream_id(1000, 3) != replicate_stream_id(1000, 4));
    CHECK(replicate_stream_id(1000, 3) != replicate_stream_id(2000, 3));

    auto a = small_config(1);
    auto b = small_config(1);
    b.lengths = {1000};
    const auto ra = run_benchmark(a);
    const auto rb = run_benchmark(b);
    for (std::size_t i = 0; i < rb.rows.size(); ++i) {
        const auto& row = ra.rows[rb.rows.size() + i];
        CHECK(row.length == 1000u);
        CHECK(row.rel_err_mean == rb.rows[i].rel_err_mean);
    }
}

TEST_CASE("benchmark determinism across worker counts") {
    const auto one = results_text(run_benchmark(small_config(1)));
    const auto four = results_text(run_benchmark(small_config(4)));
    CHECK(one == four);
    CHECK(one == results_text(run_benchmark(small_config(1))));
}

TEST_CASE("benchmark rows, oracle and standard errors") {
    BenchmarkConfig cfg{Model::var1("ar1"), {200}, 400, {}, 0.05, 3, 2, false};
    cfg.methods.push_back(oracle_method(cfg.truth().sigma));
    std::atomic<std::size_t> calls{0};
    const auto result = run_benchmark(cfg, [&](std::size_t, std::size_t total) {
        ++calls;
        CHECK(total == 400u);
    });
    CHECK(calls == 400u);
    REQUIRE(result.rows.size() == 1u);
    const auto& row = result.rows[0];
    CHECK(row.method == "oracle");
    CHECK(*row.rel_err_mean == 0.0);
    CHECK(*row.rel_err_se == 0.0);
    CHECK(std::abs(*row.coverage - 0.95) <= 3 * std::sqrt(0.05 * 0.95 / 400));
    CHECK(*row.coverage_se == doctest::Approx(std::sqrt(*row.coverage * (1 - *row.coverage) / 399)));
    CHECK_FALSE(row.time_mean_s.has_value());

    cfg.replicates = 1;
    const auto single = run_benchmark(cfg);
    CHECK(single.rows[0].rel_err_mean.has_value());
    CHECK_FALSE(single.rows[0].rel_err_se.has_value());
    CHECK_FALSE(single.rows[0].coverage_se.has_value());
    const auto text = results_text(single);
    CHECK(text.find("oracle,200,0,,") != std::string::npos);

    cfg.timing = true;
    CHECK(run_benchmark(cfg).rows[0].time_mean_s.has_value());
}

TEST_CASE("estimator failures are isolated") {
    BenchmarkConfig cfg{Model::var1("1"), {300}, 6, {}, 0.05, 5, 3, false};
    std::atomic<int> counter{0};
    cfg.methods.push_back({"flaky", [&](const Chain& c) -> Matrix {
                               if (c.values()(0, 0) > 0.0) throw std::runtime_error("boom");
                               ++counter;
                               return Model::var1("1").truth().sigma;
                           }});
    EstimatorConfig e;
    e.method = Method::BatchMeans;
    cfg.methods.push_back(make_benchmark_method(e));
    const auto r = run_benchmark(cfg);
    REQUIRE(r.rows.size() == 2u);
    CHECK(r.rows[0].fail_count + static_cast<std::size_t>(counter.load()) == 6u);
    CHECK(r.rows[0].fail_count > 0u);
    CHECK(r.rows[1].fail_count == 0u);
    CHECK(r.rows[1].rel_err_mean.has_value());
}

TEST_CASE("benchmark config validation") {
    BenchmarkConfig cfg = small_config(1);
    cfg.replicates = 0;
    CHECK_THROWS_AS((void)run_benchmark(cfg), InvalidArgument);
    cfg = small_config(1);
    cfg.lengths = {3};
    CHECK_THROWS_AS((void)run_benchmark(cfg), InvalidArgument);
    cfg = small_config(1);
    cfg.alpha = 1.0;
    CHECK_THROWS_AS((void)run_benchmark(cfg), InvalidArgument);
}

TEST_CASE("benchmark config parsing") {
    const auto doc = nlohmann::json::parse(R"({
        "model": {"type": "var1", "preset": 1},
        "lengths": [400, 800], "replicates": 3, "seed": 9, "workers": 2,
        "methods": ["bm", {"method": "obm", "batch_size": 10}, {"method": "mtv-mlse", "delta_L": 4}, "oracle"]
    })");
    const auto cfg = parse_benchmark_config(doc);
    CHECK(cfg.lengths == std::vector<std::size_t>{400, 800});
    CHECK(cfg.replicates == 3u);
    CHECK(cfg.seed == 9u);
    CHECK(cfg.workers == 2u);
    REQUIRE(cfg.methods.size() == 4u);
    CHECK(cfg.methods[1].name == "obm");
    CHECK(cfg.methods[3].name == "oracle");
    CHECK(std::get<Model>(cfg.source).name() == "var1:1");

    const auto mh = parse_benchmark_config(nlohmann::json::parse(
        R"({"model": {"type": "mh", "seed": 4, "states": 8, "dim": 2}, "lengths": [100], "methods": ["bm"]})"));
    CHECK(mh.truth().sigma.rows() == 2);

    for (const char* bad : {R"({"lengths": [100], "methods": ["bm"]})",
                            R"({"model": {"type": "var1", "preset": "9"}, "lengths": [100], "methods": ["bm"]})",
                            R"({"model": {"type": "var1", "preset": "1"}, "lengths": [100], "methods": ["xx"]})",
                            R"({"model": {"type": "zz"}, "lengths": [100], "methods": ["bm"]})",
                            R"({"model": {"type": "var1", "preset": "1"}, "lengths": [], "methods": ["bm"]})",
                            R"([1, 2])"}) {
        CHECK_THROWS_AS((void)parse_benchmark_config(nlohmann::json::parse(bad)), DataError);
    }
}

TEST_CASE("benchmark on external chains") {
    const auto dir = scratch_dir();
    const Model model = Model::var1("ar1");
    for (int i = 0; i < 3; ++i) {
        RngStream rng(50, i);
        write_chain_csv(model.simulate(600, rng), dir / ("ext" + std::to_string(i) + ".csv"));
    }
    const auto doc = nlohmann::json::parse(R"({
        "model": {"type": "csv", "chains": ["ext0.csv", "ext1.csv", "ext2.csv"], "sigma": [[4.0]], "mean": [0.0]},
        "lengths": [300, 600], "methods": ["bm", "mtv-mlse"]
    })");
    const auto cfg = parse_benchmark_config(doc, dir);
    const auto result = run_benchmark(cfg);
    REQUIRE(result.rows.size() == 4u);
    for (const auto& row : result.rows) {
        CHECK(row.fail_count == 0u);
        CHECK(std::isfinite(*row.rel_err_mean));
    }
}
