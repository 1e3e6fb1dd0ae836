#include "momentls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>

#include "momentls/error.hpp"
#include "momentls/io.hpp"
#include "momentls/multivar.hpp"

namespace mls {

const GroundTruth& BenchmarkConfig::truth() const {
    if (const auto* model = std::get_if<Model>(&source)) return model->truth();
    return std::get<ExternalChains>(source).truth;
}

BenchmarkMethod make_benchmark_method(const EstimatorConfig& config) {
    return {std::string(method_name(config.method)),
            [config](const Chain& chain) { return estimate_avar(chain, config).sigma; }};
}

BenchmarkMethod oracle_method(const Matrix& truth) {
    return {"oracle", [truth](const Chain&) { return truth; }};
}

std::uint64_t replicate_stream_id(std::size_t length, std::size_t replicate) noexcept {
    return mix64(mix64(static_cast<std::uint64_t>(length)) ^ static_cast<std::uint64_t>(replicate));
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

namespace {

struct Outcome {
    bool ok = false;
    double rel_err = 0.0;
    bool covered = false;
    double seconds = 0.0;
};

struct MeanSe {
    std::optional<double> mean;
    std::optional<double> se;
};

MeanSe summarize(const std::vector<double>& xs) {
    MeanSe out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    out.mean = mean;
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        out.se = sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config, const ProgressCallback& progress) {
    if (config.replicates < 1) throw InvalidArgument("benchmark: replicates must be >= 1");
    if (config.lengths.empty()) throw InvalidArgument("benchmark: empty length grid");
    for (auto m : config.lengths)
        if (m < 4) throw InvalidArgument("benchmark: chain lengths must be >= 4");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InvalidArgument("benchmark: alpha must lie in (0, 1)");
    if (config.methods.empty()) throw InvalidArgument("benchmark: no methods");

    const GroundTruth& truth = config.truth();
    const auto* external = std::get_if<ExternalChains>(&config.source);
    std::vector<Chain> loaded;
    std::size_t replicates = config.replicates;
    if (external) {
        if (external->paths.empty()) throw DataError("benchmark: no chain files given");
        for (const auto& path : external->paths) loaded.push_back(read_chain_csv(path));
        replicates = loaded.size();
    }

    const std::size_t n_len = config.lengths.size();
    const std::size_t n_meth = config.methods.size();
    const std::size_t total = n_len * replicates;
    std::vector<Outcome> outcomes(total * n_meth);
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    parallel_for(total, config.workers, [&](std::size_t item) {
        const std::size_t li = item / replicates;
        const std::size_t rep = item % replicates;
        const std::size_t length = config.lengths[li];
        std::optional<Chain> chain;
        if (external) {
            chain = loaded[rep].head(length);
        } else {
            RngStream rng(config.seed, replicate_stream_id(length, rep));
            chain = std::get<Model>(config.source).simulate(length, rng);
        }
        const Vector mean_hat = chain->mean();
        for (std::size_t mi = 0; mi < n_meth; ++mi) {
            Outcome& out = outcomes[item * n_meth + mi];
            try {
                const auto start = std::chrono::steady_clock::now();
                const Matrix sigma = config.methods[mi].estimate(*chain);
                out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                out.rel_err = relative_error(sigma, truth.sigma);
                out.covered = region_contains(mean_hat, sigma, truth.mean, length, config.alpha);
                out.ok = std::isfinite(out.rel_err);
            } catch (...) {
                out.ok = false;
            }
        }
        const std::size_t finished = ++done;
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(finished, total);
        }
    });

    BenchmarkResult result;
    for (std::size_t li = 0; li < n_len; ++li) {
        for (std::size_t mi = 0; mi < n_meth; ++mi) {
            std::vector<double> errs;
            std::vector<double> cover;
            double seconds = 0.0;
            BenchmarkRow row;
            row.method = config.methods[mi].name;
            row.length = config.lengths[li];
            for (std::size_t rep = 0; rep < replicates; ++rep) {
                const Outcome& out = outcomes[(li * replicates + rep) * n_meth + mi];
                if (!out.ok) {
                    ++row.fail_count;
                    continue;
                }
                errs.push_back(out.rel_err);
                cover.push_back(out.covered ? 1.0 : 0.0);
                seconds += out.seconds;
            }
            const MeanSe e = summarize(errs);
            const MeanSe c = summarize(cover);
            row.rel_err_mean = e.mean;
            row.rel_err_se = e.se;
            row.coverage = c.mean;
            row.coverage_se = c.se;
            if (config.timing && !errs.empty()) row.time_mean_s = seconds / static_cast<double>(errs.size());
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
T get_or(const nlohmann::json& doc, const char* key, T fallback) {
    if (!doc.contains(key) || doc[key].is_null()) return fallback;
    return doc[key].get<T>();
}

EstimatorConfig parse_estimator(const nlohmann::json& entry, std::string& name) {
    EstimatorConfig cfg;
    name = entry.is_string() ? entry.get<std::string>() : entry.at("method").get<std::string>();
    if (name == "oracle") return cfg;
    const auto method = parse_method(name);
    if (!method) throw DataError("benchmark config: unknown method '" + name + "'");
    cfg.method = *method;
    if (entry.is_object()) {
        if (entry.contains("batch_size") && !entry["batch_size"].is_null()) {
            const auto b = entry["batch_size"].get<long long>();
            if (b < 1) throw DataError("benchmark config: batch_size must be positive");
            cfg.batch_or_truncation = static_cast<std::size_t>(b);
        }
        cfg.delta_splits = get_or<std::size_t>(entry, "delta_L", cfg.delta_splits);
        cfg.grid_size = get_or<std::size_t>(entry, "grid_size", cfg.grid_size);
    }
    return cfg;
}

}  // namespace

BenchmarkConfig parse_benchmark_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    try {
        if (!doc.is_object()) throw DataError("benchmark config must be a JSON object");
        const auto& model = doc.at("model");
        const auto type = model.at("type").get<std::string>();

        std::optional<std::variant<Model, ExternalChains>> source;
        if (type == "var1") {
            const auto& preset = model.at("preset");
            source = Model::var1(preset.is_string() ? preset.get<std::string>() : std::to_string(preset.get<int>()));
        } else if (type == "mh") {
            source = Model::mh(get_or<std::uint64_t>(model, "seed", 1), get_or<std::size_t>(model, "states", kDefaultMhStates),
                               get_or<std::size_t>(model, "dim", kDefaultMhDim), get_or<double>(model, "rho", kDefaultMhRho));
        } else if (type == "csv") {
            ExternalChains ext;
            for (const auto& p : model.at("chains")) {
                std::filesystem::path path = p.get<std::string>();
                ext.paths.push_back(path.is_relative() && !base_dir.empty() ? base_dir / path : path);
            }
            ext.truth.sigma = matrix_from_json(model.at("sigma"));
            ext.truth.mean = vector_from_json(model.at("mean"));
            if (ext.truth.sigma.rows() != ext.truth.sigma.cols() || ext.truth.mean.size() != ext.truth.sigma.rows()) {
                throw DataError("benchmark config: truth sigma/mean dimensions disagree");
            }
            source = std::move(ext);
        } else {
            throw DataError("benchmark config: unknown model type '" + type + "'");
        }

        BenchmarkConfig cfg{std::move(*source), {}, 1, {}, 0.05, 1, 1, false};
        for (const auto& m : doc.at("lengths")) cfg.lengths.push_back(m.get<std::size_t>());
        cfg.replicates = get_or<std::size_t>(doc, "replicates", 1);
        cfg.alpha = get_or<double>(doc, "alpha", 0.05);
        cfg.seed = get_or<std::uint64_t>(doc, "seed", 1);
        cfg.workers = get_or<std::size_t>(doc, "workers", 1);
        cfg.timing = get_or<bool>(doc, "timing", false);
        for (const auto& entry : doc.at("methods")) {
            std::string name;
            const EstimatorConfig est = parse_estimator(entry, name);
            cfg.methods.push_back(name == "oracle" ? oracle_method(cfg.truth().sigma) : make_benchmark_method(est));
        }
        if (cfg.methods.empty()) throw DataError("benchmark config: no methods");
        if (cfg.lengths.empty()) throw DataError("benchmark config: empty length grid");
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("benchmark config: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("benchmark config: ") + e.what());
    }
}

void write_results_csv(const BenchmarkResult& result, std::ostream& out) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    out << kResultsHeader << '\n';
    for (const auto& row : result.rows) {
        out << row.method << ',' << row.length << ',' << opt(row.rel_err_mean) << ',' << opt(row.rel_err_se) << ','
            << opt(row.coverage) << ',' << opt(row.coverage_se) << ',' << row.fail_count << ','
            << opt(row.time_mean_s) << '\n';
    }
}

void write_results_csv(const BenchmarkResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    write_results_csv(result, out);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace mls
