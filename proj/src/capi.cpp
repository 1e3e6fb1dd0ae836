#include "momentls/momentls.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "momentls/error.hpp"
#include "momentls/harness.hpp"
#include "momentls/io.hpp"
#include "momentls/multivar.hpp"

struct mls_chain {
    mls::Chain chain;
};

struct mls_model {
    mls::Model model;
};

struct mls_estimate {
    mls::Estimate estimate;
    double alpha;
};

namespace {

thread_local std::string g_last_error;

mls_status fail(mls_status status, const char* message) {
    g_last_error = message;
    return status;
}

template <typename F>
mls_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return MLS_OK;
    } catch (const mls::Error& e) {
        return fail(static_cast<mls_status>(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(MLS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(MLS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(MLS_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    auto* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool condition, const char* message) {
    if (!condition) throw mls::InvalidArgument(message);
}

mls::Method to_method(mls_method m) {
    switch (m) {
        case MLS_METHOD_SV_BARTLETT: return mls::Method::SvBartlett;
        case MLS_METHOD_BM: return mls::Method::BatchMeans;
        case MLS_METHOD_OBM: return mls::Method::OverlappingBatchMeans;
        case MLS_METHOD_MTV_INIT: return mls::Method::MtvInit;
        case MLS_METHOD_MTV_MLSE: return mls::Method::MtvMlse;
    }
    throw mls::InvalidArgument("unknown method code");
}

mls_method from_method(mls::Method m) {
    switch (m) {
        case mls::Method::SvBartlett: return MLS_METHOD_SV_BARTLETT;
        case mls::Method::BatchMeans: return MLS_METHOD_BM;
        case mls::Method::OverlappingBatchMeans: return MLS_METHOD_OBM;
        case mls::Method::MtvInit: return MLS_METHOD_MTV_INIT;
        case mls::Method::MtvMlse: break;
    }
    return MLS_METHOD_MTV_MLSE;
}

mls::Matrix square_from(const double* values, size_t dim) {
    mls::Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (size_t i = 0; i < dim; ++i)
        for (size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * dim + j];
    return m;
}

mls::Vector vector_from(const double* values, size_t dim) {
    return Eigen::Map<const mls::Vector>(values, static_cast<Eigen::Index>(dim));
}

}  // namespace

extern "C" {

const char* mls_last_error(void) { return g_last_error.c_str(); }

const char* mls_version(void) { return "momentls " MOMENTLS_VERSION; }

void mls_string_free(char* s) { delete[] s; }

// ---- chains ----

mls_status mls_chain_from_rows(const double* values, size_t length, size_t dim, mls_chain** out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        require(values != nullptr || length * dim == 0, "values is null");
        mls::Matrix m(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(dim));
        for (size_t t = 0; t < length; ++t)
            for (size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = values[t * dim + j];
        *out = new mls_chain{mls::Chain(std::move(m))};
    });
}

mls_status mls_chain_read_csv(const char* path, mls_chain** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new mls_chain{mls::read_chain_csv(path)};
    });
}

mls_status mls_chain_write_csv(const mls_chain* chain, const char* path) {
    return guarded([&] {
        require(chain != nullptr && path != nullptr, "null argument");
        mls::write_chain_csv(chain->chain, std::filesystem::path(path));
    });
}

size_t mls_chain_length(const mls_chain* chain) { return chain ? chain->chain.length() : 0; }

size_t mls_chain_dim(const mls_chain* chain) { return chain ? chain->chain.dim() : 0; }

mls_status mls_chain_copy_rows(const mls_chain* chain, double* out) {
    return guarded([&] {
        require(chain != nullptr && out != nullptr, "null argument");
        const auto& y = chain->chain.values();
        for (Eigen::Index t = 0; t < y.rows(); ++t)
            for (Eigen::Index j = 0; j < y.cols(); ++j) out[t * y.cols() + j] = y(t, j);
    });
}

void mls_chain_free(mls_chain* chain) { delete chain; }

// ---- models ----

mls_status mls_model_var1_preset(const char* preset, mls_model** out) {
    return guarded([&] {
        require(preset != nullptr && out != nullptr, "null argument");
        *out = new mls_model{mls::Model::var1(preset)};
    });
}

mls_status mls_model_mh(uint64_t seed, size_t states, size_t dim, double rho, mls_model** out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = new mls_model{mls::Model::mh(seed, states ? states : mls::kDefaultMhStates,
                                            dim ? dim : mls::kDefaultMhDim, rho < 0.0 ? mls::kDefaultMhRho : rho)};
    });
}

size_t mls_model_dim(const mls_model* model) { return model ? model->model.dim() : 0; }

mls_status mls_model_truth(const mls_model* model, double* sigma, double* mu) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        const auto& truth = model->model.truth();
        const auto d = truth.sigma.rows();
        if (sigma)
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) sigma[i * d + j] = truth.sigma(i, j);
        if (mu)
            for (Eigen::Index i = 0; i < d; ++i) mu[i] = truth.mean(i);
    });
}

mls_status mls_model_simulate(const mls_model* model, size_t length, uint64_t seed, mls_chain** out) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, "null argument");
        require(length >= 2, "length must be >= 2");
        mls::RngStream rng(seed, 0);
        *out = new mls_chain{model->model.simulate(length, rng)};
    });
}

mls_status mls_model_to_json(const mls_model* model, char** out) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, "null argument");
        *out = dup_string(mls::model_to_json(model->model).dump(2));
    });
}

mls_status mls_model_truth_json(const mls_model* model, char** out) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, "null argument");
        *out = dup_string(mls::truth_to_json(model->model.truth()).dump(2));
    });
}

mls_status mls_model_validate(const mls_model* model) {
    return guarded([&] {
        require(model != nullptr, "model is null");
        if (const auto* mh = std::get_if<mls::DiscreteMHModel>(&model->model.spec())) mls::validate_mh_model(*mh);
    });
}

void mls_model_free(mls_model* model) { delete model; }

// ---- estimation ----

mls_status mls_method_parse(const char* name, mls_method* out) {
    return guarded([&] {
        require(name != nullptr && out != nullptr, "null argument");
        const auto m = mls::parse_method(name);
        if (!m) throw mls::InvalidArgument(std::string("unknown method '") + name + "'");
        *out = from_method(*m);
    });
}

const char* mls_method_name(mls_method method) {
    try {
        return mls::method_name(to_method(method)).data();
    } catch (...) {
        return "";
    }
}

mls_estimate_options mls_estimate_options_default(void) {
    return {MLS_METHOD_MTV_MLSE, 0, mls::kDefaultDeltaSplits, mls::kDefaultGridSize, 0.05};
}

mls_status mls_estimate_run(const mls_chain* chain, const mls_estimate_options* options, mls_estimate** out) {
    return guarded([&] {
        require(chain != nullptr && out != nullptr, "null argument");
        const mls_estimate_options opts = options ? *options : mls_estimate_options_default();
        require(opts.alpha > 0.0 && opts.alpha < 1.0, "alpha must lie in (0, 1)");
        mls::EstimatorConfig config;
        config.method = to_method(opts.method);
        if (opts.batch_size > 0) config.batch_or_truncation = opts.batch_size;
        config.delta_splits = opts.delta_splits;
        config.grid_size = opts.grid_size;
        *out = new mls_estimate{mls::estimate_avar(chain->chain, config), opts.alpha};
    });
}

size_t mls_estimate_dim(const mls_estimate* estimate) {
    return estimate ? static_cast<size_t>(estimate->estimate.sigma.rows()) : 0;
}

mls_status mls_estimate_sigma(const mls_estimate* estimate, double* out) {
    return guarded([&] {
        require(estimate != nullptr && out != nullptr, "null argument");
        const auto& s = estimate->estimate.sigma;
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index j = 0; j < s.cols(); ++j) out[i * s.cols() + j] = s(i, j);
    });
}

int mls_estimate_refined(const mls_estimate* estimate) { return estimate && estimate->estimate.refined ? 1 : 0; }

size_t mls_estimate_batch_size(const mls_estimate* estimate) {
    return estimate ? estimate->estimate.batch_size.value_or(0) : 0;
}

size_t mls_estimate_delta(const mls_estimate* estimate, double* out, size_t capacity) {
    if (!estimate) return 0;
    const auto& delta = estimate->estimate.delta;
    for (size_t i = 0; out && i < delta.size() && i < capacity; ++i) out[i] = delta[i];
    return delta.size();
}

mls_status mls_estimate_to_json(const mls_estimate* estimate, const mls_chain* chain, char** out) {
    return guarded([&] {
        require(estimate != nullptr && chain != nullptr && out != nullptr, "null argument");
        *out = dup_string(mls::estimate_to_json(estimate->estimate, chain->chain, estimate->alpha).dump(2));
    });
}

void mls_estimate_free(mls_estimate* estimate) { delete estimate; }

// ---- metrics ----

mls_status mls_relative_error(const double* sigma_hat, const double* sigma, size_t dim, double* out) {
    return guarded([&] {
        require(sigma_hat != nullptr && sigma != nullptr && out != nullptr && dim > 0, "invalid argument");
        *out = mls::relative_error(square_from(sigma_hat, dim), square_from(sigma, dim));
    });
}

mls_status mls_region_contains(const double* mean_hat, const double* sigma_hat, const double* mean, size_t dim,
                               size_t length, double alpha, int* out) {
    return guarded([&] {
        require(mean_hat && sigma_hat && mean && out && dim > 0, "invalid argument");
        *out = mls::region_contains(vector_from(mean_hat, dim), square_from(sigma_hat, dim), vector_from(mean, dim),
                                    length, alpha)
                   ? 1
                   : 0;
    });
}

mls_status mls_chi2_quantile(double p, int dof, double* out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = mls::chi2_quantile(p, dof);
    });
}

// ---- benchmark ----

mls_status mls_benchmark_run(const char* config_json, size_t workers, const char* out_csv_path,
                             mls_progress_fn progress, void* user) {
    return guarded([&] {
        require(config_json != nullptr && out_csv_path != nullptr, "null argument");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
            throw mls::DataError(std::string("benchmark config is not valid JSON: ") + e.what());
        }
        auto config = mls::parse_benchmark_config(doc);
        if (workers > 0) config.workers = workers;
        mls::ProgressCallback cb;
        if (progress) cb = [progress, user](std::size_t done, std::size_t total) { progress(done, total, user); };
        mls::BenchmarkResult result;
        try {
            result = mls::run_benchmark(config, cb);
        } catch (const mls::InvalidArgument& e) {
            throw mls::DataError(e.what());
        }
        mls::write_results_csv(result, std::filesystem::path(out_csv_path));
    });
}

}  // extern "C"
