#include "momentls/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "momentls/error.hpp"

namespace mls {

std::vector<Atom> GroundTruth::cross_atoms(std::size_t i, std::size_t j) const {
    const auto d = static_cast<std::size_t>(coefficients.rows());
    if (i >= d || j >= d) throw InvalidArgument("cross_atoms: index out of range");
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(eigenvalues.size()));
    for (Eigen::Index l = 0; l < eigenvalues.size(); ++l) {
        atoms.push_back({eigenvalues(l), coefficients(static_cast<Eigen::Index>(i), l) *
                                             coefficients(static_cast<Eigen::Index>(j), l)});
    }
    return atoms;
}

double GroundTruth::cross_cov(std::size_t i, std::size_t j, std::int64_t k) const {
    return eval_sequence(cross_atoms(i, j), k);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kModelStream = 0x6d682d6d6f64656cULL;  // "mh-model"

double positive_uniform(RngStream& rng) {
    double u = 0.0;
    while (u == 0.0) u = rng.draw_uniform();
    return u;
}

Matrix symmetric_sqrt(const Matrix& a) {
    return spectral_map(sym_eigen(a), [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

}  // namespace

DiscreteMHModel build_mh_model(std::uint64_t seed, std::size_t states, std::size_t dim, double rho) {
    if (states < 2) throw InvalidArgument("build_mh_model: need at least 2 states");
    if (dim < 1) throw InvalidArgument("build_mh_model: dimension must be positive");
    if (!(std::abs(rho) < 1.0)) throw InvalidArgument("build_mh_model: |rho| must be below 1");

    RngStream rng(seed, kModelStream);
    const auto s = static_cast<Eigen::Index>(states);
    const auto d = static_cast<Eigen::Index>(dim);

    DiscreteMHModel model;
    model.states = states;
    model.dim = dim;
    model.rho = rho;
    model.seed = seed;

    model.target.resize(s);
    for (Eigen::Index i = 0; i < s; ++i) model.target(i) = positive_uniform(rng);
    model.target /= model.target.sum();

    model.proposal.resize(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j < s; ++j) model.proposal(i, j) = positive_uniform(rng);
        model.proposal.row(i) /= model.proposal.row(i).sum();
    }

    // pi_i Q_ij = min(pi_i P_ij, pi_j P_ji) for i != j.
    const Vector& pi = model.target;
    const Matrix& p = model.proposal;
    model.kernel = Matrix::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < s; ++j) {
            if (j == i) continue;
            const double flow = std::min(pi(i) * p(i, j), pi(j) * p(j, i));
            model.kernel(i, j) = flow / pi(i);
            off += model.kernel(i, j);
        }
        model.kernel(i, i) = 1.0 - off;
    }

    Matrix cov_g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            cov_g(i, j) = static_cast<double>((i + 1) * (j + 1)) * std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    const Matrix root = symmetric_sqrt(cov_g);
    model.g.resize(s, d);
    Vector z(d);
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.draw_normal();
        model.g.row(i) = (root * z).transpose();
    }
    return model;
}

void validate_mh_model(const DiscreteMHModel& model) {
    const auto s = model.kernel.rows();
    if (model.kernel.cols() != s || model.target.size() != s || model.g.rows() != s) {
        throw DataError("MH model: inconsistent dimensions");
    }
    for (Eigen::Index i = 0; i < s; ++i) {
        if (!(model.target(i) > 0.0)) throw DataError("MH model: target probabilities must be positive");
        if (std::abs(model.kernel.row(i).sum() - 1.0) > 1e-12) {
            throw DataError("MH model: row " + std::to_string(i) + " of the kernel does not sum to 1");
        }
        for (Eigen::Index j = 0; j < s; ++j) {
            if (model.kernel(i, j) < 0.0) throw DataError("MH model: negative transition probability");
            const double lhs = model.target(i) * model.kernel(i, j);
            const double rhs = model.target(j) * model.kernel(j, i);
            if (std::abs(lhs - rhs) > 1e-12) {
                throw DataError("MH model: detailed balance fails at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
            }
        }
    }
}

GroundTruth mh_ground_truth(const DiscreteMHModel& model) {
    validate_mh_model(model);
    const auto s = model.kernel.rows();
    const auto d = model.g.cols();
    const Vector root_pi = model.target.cwiseSqrt();

    Matrix sym(s, s);
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index j = 0; j < s; ++j) sym(i, j) = root_pi(i) * model.kernel(i, j) / root_pi(j);
    sym = 0.5 * (sym + sym.transpose());

    const EigenDecomposition eig = sym_eigen(sym);
    if (std::abs(eig.values(0) - 1.0) > 1e-9) throw NumericalError("MH truth: leading eigenvalue is not 1");
    if (s > 1 && eig.values(1) > 1.0 - 1e-9) throw NumericalError("MH truth: unit eigenvalue is not simple");
    if (eig.values(s - 1) < -1.0 + 1e-9) throw NumericalError("MH truth: kernel is periodic");

    GroundTruth truth;
    truth.mean = model.g.transpose() * model.target;
    truth.eigenvalues = eig.values.tail(s - 1);
    // <g_i, phi_l>_pi with phi_l = D^{-1/2} u_l.
    const Matrix weighted = model.g.transpose() * root_pi.asDiagonal();  // d x s
    truth.coefficients = weighted * eig.vectors.rightCols(s - 1);

    truth.sigma = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            const auto atoms = truth.cross_atoms(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            truth.sigma(i, j) = truth.sigma(j, i) = avar_from_atoms(atoms);
        }
    }
    return truth;
}

Chain simulate_mh(const DiscreteMHModel& model, std::size_t length, RngStream& rng,
                  std::vector<std::size_t>* states) {
    if (length < 2) throw InvalidArgument("simulate_mh: length must be at least 2");
    const auto s = model.kernel.rows();
    std::vector<double> start_cdf(static_cast<std::size_t>(s));
    std::vector<std::vector<double>> row_cdf(static_cast<std::size_t>(s), std::vector<double>(start_cdf.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s; ++i) start_cdf[static_cast<std::size_t>(i)] = acc += model.target(i);
    start_cdf.back() = 1.0;
    for (Eigen::Index i = 0; i < s; ++i) {
        auto& cdf = row_cdf[static_cast<std::size_t>(i)];
        acc = 0.0;
        for (Eigen::Index j = 0; j < s; ++j) cdf[static_cast<std::size_t>(j)] = acc += model.kernel(i, j);
        cdf.back() = 1.0;
    }

    Matrix out(static_cast<Eigen::Index>(length), model.g.cols());
    if (states) states->assign(length, 0);
    std::size_t x = rng.draw_from_cdf(start_cdf);
    for (std::size_t t = 0; t < length; ++t) {
        if (t > 0) x = rng.draw_from_cdf(row_cdf[x]);
        if (states) (*states)[t] = x;
        out.row(static_cast<Eigen::Index>(t)) = model.g.row(static_cast<Eigen::Index>(x));
    }
    return Chain(std::move(out));
}

// ---------------------------------------------------------------------------

VAR1Model build_var1(std::span<const double> diagonal, double off, const Matrix& noise_cov) {
    const auto d = static_cast<Eigen::Index>(diagonal.size());
    if (d < 1) throw InvalidArgument("build_var1: empty diagonal");
    if (noise_cov.rows() != d || noise_cov.cols() != d) throw InvalidArgument("build_var1: noise covariance shape");
    VAR1Model model;
    model.transition = Matrix::Constant(d, d, off);
    for (Eigen::Index i = 0; i < d; ++i) model.transition(i, i) = diagonal[static_cast<std::size_t>(i)];
    model.noise_cov = noise_cov;

    const EigenDecomposition noise_eig = sym_eigen(noise_cov);
    if (!(noise_eig.values(d - 1) > 0.0)) throw InvalidArgument("build_var1: noise covariance must be positive definite");
    const EigenDecomposition eig = sym_eigen(model.transition);
    if (!(eig.values.cwiseAbs().maxCoeff() < 1.0)) throw InvalidArgument("build_var1: spectral radius of A must be < 1");
    const Matrix product = model.transition * noise_cov;
    if (asymmetry(product) > 1e-12 * std::max(1.0, product.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("build_var1: A Sigma_eps is not symmetric, so the process is not reversible");
    }
    const Matrix resolvent = spectral_map(eig, [](double v) { return 1.0 / (1.0 - v * v); });
    model.stationary_cov = resolvent * noise_cov;
    mirror_upper(model.stationary_cov);
    return model;
}

VAR1Model var1_preset(std::string_view name) {
    if (name == "1" || name == "mixed") {
        const double diag[] = {0.9, 0.9, -0.9, -0.9};
        return build_var1(diag, 0.01, Matrix::Identity(4, 4));
    }
    if (name == "2" || name == "positive") {
        const double diag[] = {0.9, 0.9, 0.9, 0.9};
        return build_var1(diag, 0.01, Matrix::Identity(4, 4));
    }
    if (name == "ar1") {
        const double diag[] = {0.5};
        return build_var1(diag, 0.0, Matrix::Identity(1, 1));
    }
    throw InvalidArgument("unknown VAR(1) preset '" + std::string(name) + "' (expected 1, 2 or ar1)");
}

Matrix var1_ground_truth(const VAR1Model& model) {
    const EigenDecomposition eig = sym_eigen(model.transition);
    const Matrix inverse = spectral_map(eig, [](double v) { return 1.0 / (1.0 - v); });
    Matrix sigma = 2.0 * inverse * model.stationary_cov - model.stationary_cov;
    mirror_upper(sigma);
    return sigma;
}

Chain simulate_var1(const VAR1Model& model, std::size_t length, RngStream& rng) {
    if (length < 2) throw InvalidArgument("simulate_var1: length must be at least 2");
    const auto d = model.transition.rows();
    const Matrix start_root = symmetric_sqrt(model.stationary_cov);
    const Matrix noise_root = symmetric_sqrt(model.noise_cov);
    Matrix out(static_cast<Eigen::Index>(length), d);
    Vector z(d);
    auto draw = [&]() -> const Vector& {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.draw_normal();
        return z;
    };
    Vector x = start_root * draw();
    out.row(0) = x.transpose();
    for (std::size_t t = 1; t < length; ++t) {
        x = model.transition * x + noise_root * draw();
        out.row(static_cast<Eigen::Index>(t)) = x.transpose();
    }
    return Chain(std::move(out));
}

// ---------------------------------------------------------------------------

Model Model::mh(std::uint64_t seed, std::size_t states, std::size_t dim, double rho) {
    DiscreteMHModel spec = build_mh_model(seed, states, dim, rho);
    GroundTruth truth = mh_ground_truth(spec);
    return Model("mh", std::move(spec), std::move(truth));
}

Model Model::var1(std::string_view preset) {
    VAR1Model spec = var1_preset(preset);
    GroundTruth truth;
    truth.sigma = var1_ground_truth(spec);
    truth.mean = Vector::Zero(spec.transition.rows());
    return Model("var1:" + std::string(preset), std::move(spec), std::move(truth));
}

Chain Model::simulate(std::size_t length, RngStream& rng) const {
    if (const auto* mh = std::get_if<DiscreteMHModel>(&spec_)) return simulate_mh(*mh, length, rng);
    return simulate_var1(std::get<VAR1Model>(spec_), length, rng);
}

}  // namespace mls
