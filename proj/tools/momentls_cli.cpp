// momentls command-line front end. Links only the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "momentls/momentls.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Failure {
    int code;
    std::string message;
};

int exit_code(mls_status status) {
    switch (status) {
        case MLS_OK: return 0;
        case MLS_ERR_INVALID_ARGUMENT: return kExitUsage;
        case MLS_ERR_DATA: return kExitData;
        default: return kExitNumerical;
    }
}

void check(mls_status status, const std::string& context) {
    if (status != MLS_OK) throw Failure{exit_code(status), context + ": " + mls_last_error()};
}

struct StringDeleter {
    void operator()(char* s) const { mls_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ChainDeleter {
    void operator()(mls_chain* c) const { mls_chain_free(c); }
};
struct ModelDeleter {
    void operator()(mls_model* m) const { mls_model_free(m); }
};
struct EstimateDeleter {
    void operator()(mls_estimate* e) const { mls_estimate_free(e); }
};

struct ModelArgs {
    std::string kind = "var1";
    std::string preset = "1";
    uint64_t model_seed = 1;
    size_t states = 0;
    size_t dim = 0;
    double rho = -1.0;
};

std::unique_ptr<mls_model, ModelDeleter> make_model(const ModelArgs& args) {
    mls_model* raw = nullptr;
    if (args.kind == "var1") {
        check(mls_model_var1_preset(args.preset.c_str(), &raw), "model");
    } else {
        check(mls_model_mh(args.model_seed, args.states, args.dim, args.rho, &raw), "model");
    }
    return std::unique_ptr<mls_model, ModelDeleter>(raw);
}

void add_model_options(CLI::App* cmd, ModelArgs& args) {
    cmd->add_option("--model", args.kind, "Model family")->check(CLI::IsMember({"mh", "var1"}))->capture_default_str();
    cmd->add_option("--preset", args.preset, "VAR(1) preset: 1|mixed, 2|positive, ar1")->capture_default_str();
    cmd->add_option("--model-seed", args.model_seed, "Seed that fixes the MH target, kernel and g")
        ->capture_default_str();
    cmd->add_option("--states", args.states, "MH state count (default 100)");
    cmd->add_option("--dim", args.dim, "MH output dimension (default 4)");
    cmd->add_option("--rho", args.rho, "MH correlation of g (default 0.5)");
}

void write_text(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw Failure{kExitData, "cannot open '" + path + "' for writing"};
    out << text << '\n';
    if (!out) throw Failure{kExitData, "failed writing '" + path + "'"};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure{kExitData, "cannot open '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void progress_to_stderr(size_t done, size_t total, void*) {
    std::fprintf(stderr, "\r[%zu/%zu]", done, total);
    if (done == total) std::fputc('\n', stderr);
    std::fflush(stderr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic variance estimation for MCMC output"};
    app.set_version_flag("--version", std::string(mls_version()));
    app.require_subcommand(1);

    ModelArgs sim_model;
    uint64_t sim_seed = 1;
    size_t sim_length = 0;
    std::string sim_out;
    std::string sim_model_json;
    auto* simulate = app.add_subcommand("simulate", "Simulate a chain and write it with its model description");
    add_model_options(simulate, sim_model);
    simulate->add_option("--seed", sim_seed, "Chain seed")->capture_default_str();
    simulate->add_option("--length", sim_length, "Chain length M")->required()->check(CLI::Range(size_t{2}, SIZE_MAX));
    simulate->add_option("--out", sim_out, "Chain CSV path")->required();
    simulate->add_option("--model-json", sim_model_json, "Model JSON path (default <out stem>.model.json)");

    std::string est_chain;
    std::string est_method = "mtv-mlse";
    mls_estimate_options est_opts = mls_estimate_options_default();
    std::string est_json_out;
    auto* estimate = app.add_subcommand("estimate", "Estimate the asymptotic variance matrix of a chain CSV");
    estimate->add_option("chain", est_chain, "Chain CSV (header g1..gd)")->required();
    estimate->add_option("--method", est_method, "sv-bartlett, bm, obm, mtv-init, mtv-mlse")->capture_default_str();
    estimate->add_option("--delta-L", est_opts.delta_splits, "Splits used to tune delta")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    estimate->add_option("--grid-size", est_opts.grid_size, "Support grid points s0")
        ->check(CLI::Range(size_t{3}, SIZE_MAX))
        ->capture_default_str();
    estimate->add_option("--batch-size", est_opts.batch_size, "Batch size or truncation (default floor(sqrt(M)))")
        ->check(CLI::Range(size_t{1}, SIZE_MAX));
    estimate->add_option("--alpha", est_opts.alpha, "Confidence region level")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    estimate->add_option("--json-out", est_json_out, "Write JSON here instead of stdout");

    ModelArgs truth_model;
    auto* truth = app.add_subcommand("truth", "Print the exact Sigma and mean of a model");
    add_model_options(truth, truth_model);

    std::string bench_config;
    std::string bench_out;
    size_t bench_workers = 0;
    auto* benchmark = app.add_subcommand("benchmark", "Run a replication benchmark from a JSON config");
    benchmark->add_option("--config", bench_config, "Benchmark config JSON")->required();
    benchmark->add_option("--out", bench_out, "Result CSV path")->required();
    benchmark->add_option("--workers", bench_workers, "Worker threads (default: from config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) {
            auto model = make_model(sim_model);
            mls_chain* raw = nullptr;
            check(mls_model_simulate(model.get(), sim_length, sim_seed, &raw), "simulate");
            std::unique_ptr<mls_chain, ChainDeleter> chain(raw);
            check(mls_chain_write_csv(chain.get(), sim_out.c_str()), "simulate");
            char* json = nullptr;
            check(mls_model_to_json(model.get(), &json), "simulate");
            OwnedString owned(json);
            std::string sidecar = sim_model_json;
            if (sidecar.empty()) {
                std::filesystem::path p(sim_out);
                sidecar = (p.parent_path() / (p.stem().string() + ".model.json")).string();
            }
            write_text(owned.get(), sidecar);
        } else if (*estimate) {
            check(mls_method_parse(est_method.c_str(), &est_opts.method), "estimate");
            mls_chain* raw = nullptr;
            check(mls_chain_read_csv(est_chain.c_str(), &raw), "estimate");
            std::unique_ptr<mls_chain, ChainDeleter> chain(raw);
            mls_estimate* est_raw = nullptr;
            check(mls_estimate_run(chain.get(), &est_opts, &est_raw), "estimate");
            std::unique_ptr<mls_estimate, EstimateDeleter> est(est_raw);
            char* json = nullptr;
            check(mls_estimate_to_json(est.get(), chain.get(), &json), "estimate");
            OwnedString owned(json);
            write_text(owned.get(), est_json_out);
        } else if (*truth) {
            auto model = make_model(truth_model);
            char* json = nullptr;
            check(mls_model_truth_json(model.get(), &json), "truth");
            OwnedString owned(json);
            write_text(owned.get(), "");
        } else if (*benchmark) {
            const std::string config = read_file(bench_config);
            check(mls_benchmark_run(config.c_str(), bench_workers, bench_out.c_str(), progress_to_stderr, nullptr),
                  "benchmark");
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    }
    return 0;
}
