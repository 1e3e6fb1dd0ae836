#include "momentls/estimator.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "momentls/baselines.hpp"
#include "momentls/error.hpp"
#include "momentls/multivar.hpp"

namespace mls {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kNames{{
    {Method::SvBartlett, "sv-bartlett"},
    {Method::BatchMeans, "bm"},
    {Method::OverlappingBatchMeans, "obm"},
    {Method::MtvInit, "mtv-init"},
    {Method::MtvMlse, "mtv-mlse"},
}};

}  // namespace

std::string_view method_name(Method method) noexcept {
    for (const auto& [m, name] : kNames)
        if (m == method) return name;
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    std::string norm(name);
    for (auto& c : norm) c = c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& [m, n] : kNames)
        if (n == norm) return m;
    return std::nullopt;
}

bool uses_batch_size(Method method) noexcept {
    return method == Method::SvBartlett || method == Method::BatchMeans || method == Method::OverlappingBatchMeans;
}

Estimate estimate_avar(const Chain& chain, const EstimatorConfig& config) {
    Estimate out;
    out.method = config.method;
    if (uses_batch_size(config.method)) {
        const std::size_t b = config.batch_or_truncation.value_or(default_batch_size(chain.length(), chain.dim()));
        if (b < 1 || b > chain.length() - 1) {
            throw InvalidArgument("batch size/truncation " + std::to_string(b) + " outside [1, " +
                                  std::to_string(chain.length() - 1) + "]");
        }
        out.batch_size = b;
    }
    switch (config.method) {
        case Method::SvBartlett: out.sigma = sv_bartlett(chain, *out.batch_size); break;
        case Method::BatchMeans: out.sigma = batch_means(chain, *out.batch_size); break;
        case Method::OverlappingBatchMeans: out.sigma = overlapping_batch_means(chain, *out.batch_size); break;
        case Method::MtvInit: out.sigma = mtv_initial_seq(chain); break;
        case Method::MtvMlse: {
            AvarMatrix avar = mtv_mlse(chain, MomentLSOptions{config.grid_size, config.delta_splits});
            out.sigma = std::move(avar.sigma);
            out.delta = std::move(avar.delta);
            out.refined = avar.refined;
            break;
        }
    }
    return out;
}

}  // namespace mls
