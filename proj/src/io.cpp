#include "momentls/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "momentls/error.hpp"
#include "momentls/numerics.hpp"

namespace mls {

std::string format_double(double value) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_chain_csv(const Chain& chain, std::ostream& out) {
    const auto& y = chain.values();
    for (Eigen::Index j = 0; j < y.cols(); ++j) out << (j ? "," : "") << 'g' << (j + 1);
    out << '\n';
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) out << (j ? "," : "") << format_double(y(t, j));
        out << '\n';
    }
}

void write_chain_csv(const Chain& chain, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    write_chain_csv(chain, out);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

Chain parse_chain_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw DataError(source + ": missing header line");
    dim = split_cells(trim(line)).size();

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto cells = split_cells(body);
        if (cells.size() != dim) {
            throw DataError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " columns, header declares " + std::to_string(dim));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto cell = cells[c];
            const auto* first = cell.data();
            const auto* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw DataError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                ": '" + std::string(cell) + "' is not a finite number");
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows < 2) throw DataError(source + ": need at least 2 data rows, found " + std::to_string(rows));

    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t j = 0; j < dim; ++j)
            m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = values[t * dim + j];
    return Chain(std::move(m));
}

Chain read_chain_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open chain file '" + path.string() + "'");
    return parse_chain_csv(in, path.string());
}

// ---------------------------------------------------------------------------

nlohmann::json matrix_to_json(const Matrix& m) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw DataError("expected a nonempty array of rows");
    const auto rows = j.size();
    const auto cols = j.front().size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw DataError("matrix rows have unequal lengths");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw DataError("matrix entries must be numbers");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DataError("expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw DataError("vector entries must be numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

nlohmann::json truth_to_json(const GroundTruth& truth) {
    return {{"sigma", matrix_to_json(truth.sigma)}, {"mean", vector_to_json(truth.mean)}};
}

nlohmann::json model_to_json(const Model& model) {
    nlohmann::json out;
    if (const auto* mh = std::get_if<DiscreteMHModel>(&model.spec())) {
        out["type"] = "mh";
        out["seed"] = mh->seed;
        out["states"] = mh->states;
        out["dim"] = mh->dim;
        out["rho"] = mh->rho;
        out["target"] = vector_to_json(mh->target);
        out["proposal"] = matrix_to_json(mh->proposal);
        out["kernel"] = matrix_to_json(mh->kernel);
        out["g"] = matrix_to_json(mh->g);
        out["eigenvalues"] = vector_to_json(model.truth().eigenvalues);
    } else {
        const auto& var = std::get<VAR1Model>(model.spec());
        out["type"] = "var1";
        out["preset"] = model.name().substr(model.name().find(':') + 1);
        out["transition"] = matrix_to_json(var.transition);
        out["noise_cov"] = matrix_to_json(var.noise_cov);
        out["stationary_cov"] = matrix_to_json(var.stationary_cov);
    }
    out["truth"] = truth_to_json(model.truth());
    return out;
}

nlohmann::json estimate_to_json(const Estimate& estimate, const Chain& chain, std::optional<double> alpha) {
    const auto d = estimate.sigma.rows();
    nlohmann::json out;
    out["method"] = std::string(method_name(estimate.method));
    out["d"] = chain.dim();
    out["M"] = chain.length();
    auto flat = nlohmann::json::array();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) flat.push_back(estimate.sigma(i, j));
    out["sigma"] = std::move(flat);
    out["avar_diagonal"] = vector_to_json(estimate.sigma.diagonal());
    out["mean"] = vector_to_json(chain.mean());
    out["refined"] = estimate.refined;
    out["batch_size"] = estimate.batch_size ? nlohmann::json(*estimate.batch_size) : nlohmann::json(nullptr);
    out["delta"] = estimate.delta.empty() ? nlohmann::json(nullptr) : nlohmann::json(estimate.delta);
    if (alpha) {
        out["alpha"] = *alpha;
        out["chi2_quantile"] = chi2_quantile(1.0 - *alpha, static_cast<int>(d));
    }
    return out;
}

}  // namespace mls
