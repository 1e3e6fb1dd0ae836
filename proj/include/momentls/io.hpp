#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "momentls/autocov.hpp"
#include "momentls/estimator.hpp"
#include "momentls/simulate.hpp"

namespace mls {

/// Chain CSV: one header line (g1,...,gd) then M rows of d decimal values.
/// Values are written with 17 significant digits so they read back exactly.
void write_chain_csv(const Chain& chain, const std::filesystem::path& path);
void write_chain_csv(const Chain& chain, std::ostream& out);

/// Throws DataError (naming the offending line) for ragged rows, non-numeric
/// cells, fewer than 2 data rows, or a missing file.
[[nodiscard]] Chain read_chain_csv(const std::filesystem::path& path);
[[nodiscard]] Chain parse_chain_csv(std::istream& in, const std::string& source = "<stream>");

/// %.17g
[[nodiscard]] std::string format_double(double value);

[[nodiscard]] nlohmann::json matrix_to_json(const Matrix& m);
[[nodiscard]] Matrix matrix_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json vector_to_json(const Vector& v);
[[nodiscard]] Vector vector_from_json(const nlohmann::json& j);

/// {"sigma": [[...]], "mean": [...]}
[[nodiscard]] nlohmann::json truth_to_json(const GroundTruth& truth);

/// Full model description (parameters, kernel or transition matrix, truth) for audits.
[[nodiscard]] nlohmann::json model_to_json(const Model& model);

/// Estimate report: method, d, M, sigma (row-major), delta, refined, batch_size,
/// avar_diagonal, mean; with alpha also the chi-squared threshold of the region.
[[nodiscard]] nlohmann::json estimate_to_json(const Estimate& estimate, const Chain& chain,
                                              std::optional<double> alpha = std::nullopt);

}  // namespace mls
