#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "momentls/autocov.hpp"
#include "momentls/linalg.hpp"
#include "momentls/moment_ls.hpp"

namespace mls {

enum class Method { SvBartlett, BatchMeans, OverlappingBatchMeans, MtvInit, MtvMlse };

/// "sv-bartlett", "bm", "obm", "mtv-init", "mtv-mlse".
[[nodiscard]] std::string_view method_name(Method method) noexcept;
/// Case-insensitive; accepts '_' for '-'.
[[nodiscard]] std::optional<Method> parse_method(std::string_view name);
[[nodiscard]] bool uses_batch_size(Method method) noexcept;

struct EstimatorConfig {
    Method method = Method::MtvMlse;
    /// Batch size (BM, OBM) or truncation point (SV); defaults to default_batch_size.
    std::optional<std::size_t> batch_or_truncation;
    std::size_t delta_splits = kDefaultDeltaSplits;
    std::size_t grid_size = kDefaultGridSize;
};

struct Estimate {
    Method method = Method::MtvMlse;
    Matrix sigma;
    std::optional<std::size_t> batch_size;
    std::vector<double> delta;
    bool refined = false;
};

[[nodiscard]] Estimate estimate_avar(const Chain& chain, const EstimatorConfig& config);

}  // namespace mls
