#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "momentls/estimator.hpp"
#include "momentls/simulate.hpp"

namespace mls {

/// Replicate chains read from CSV files, with a caller-supplied truth.
struct ExternalChains {
    std::vector<std::filesystem::path> paths;
    GroundTruth truth;
};

struct BenchmarkMethod {
    std::string name;
    std::function<Matrix(const Chain&)> estimate;
};

[[nodiscard]] BenchmarkMethod make_benchmark_method(const EstimatorConfig& config);
/// Returns the true Sigma regardless of input.
[[nodiscard]] BenchmarkMethod oracle_method(const Matrix& truth);

struct BenchmarkConfig {
    std::variant<Model, ExternalChains> source;
    std::vector<std::size_t> lengths;
    std::size_t replicates = 1;
    std::vector<BenchmarkMethod> methods;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    /// Wall times are not reproducible, so they are only reported when asked for.
    bool timing = false;

    [[nodiscard]] const GroundTruth& truth() const;
};

struct BenchmarkRow {
    std::string method;
    std::size_t length = 0;
    std::optional<double> rel_err_mean;
    std::optional<double> rel_err_se;
    std::optional<double> coverage;
    std::optional<double> coverage_se;
    std::size_t fail_count = 0;
    std::optional<double> time_mean_s;
};

struct BenchmarkResult {
    /// Ordered by length, then by method in config order.
    std::vector<BenchmarkRow> rows;
};

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Stream id of replicate r at chain length M; independent of the rest of the grid.
[[nodiscard]] std::uint64_t replicate_stream_id(std::size_t length, std::size_t replicate) noexcept;

/// Runs body(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

/// Simulates (or loads) B chains per length, runs every method on each, and
/// aggregates relative error and confidence-region coverage. Failures of a
/// method on a replicate are counted, not propagated.
[[nodiscard]] BenchmarkResult run_benchmark(const BenchmarkConfig& config, const ProgressCallback& progress = {});

/// Parses the JSON benchmark document. Relative chain paths resolve against base_dir.
/// Throws DataError on malformed input.
[[nodiscard]] BenchmarkConfig parse_benchmark_config(const nlohmann::json& doc,
                                                     const std::filesystem::path& base_dir = {});

inline constexpr const char* kResultsHeader =
    "method,M,rel_err_mean,rel_err_se,coverage,coverage_se,fail_count,time_mean_s";

void write_results_csv(const BenchmarkResult& result, std::ostream& out);
void write_results_csv(const BenchmarkResult& result, const std::filesystem::path& path);

}  // namespace mls
