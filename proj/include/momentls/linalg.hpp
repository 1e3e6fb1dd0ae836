#pragma once

#include <Eigen/Dense>

namespace mls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest absolute entry of A - A^T.
[[nodiscard]] inline double asymmetry(const Matrix& a) {
    return a.rows() == 0 ? 0.0 : (a - a.transpose()).cwiseAbs().maxCoeff();
}

[[nodiscard]] inline bool all_finite(const Matrix& a) { return a.allFinite(); }

/// Copies the upper triangle onto the lower one so the result is exactly symmetric.
inline void mirror_upper(Matrix& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < a.rows(); ++i) a(i, j) = a(j, i);
    }
}

}  // namespace mls
