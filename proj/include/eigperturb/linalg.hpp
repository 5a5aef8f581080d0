#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "errors.hpp"

namespace eigperturb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kRankTol = 1e-12;

inline void require_finite(const CMatrix& a, const char* op) {
    if (!a.allFinite()) throw NonFiniteError(std::string(op) + ": non-finite entry in input");
}

inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    require_finite(a, "matmul");
    require_finite(b, "matmul");
    return a * b;
}

// partial-pivot LU; a pivot under kRankTol*|a|_F is reported, not divided by
inline CMatrix solve(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != a.cols()) throw DimensionError("solve: matrix not square");
    if (b.rows() != a.rows()) throw DimensionError("solve: right-hand side row count mismatch");
    require_finite(a, "solve");
    require_finite(b, "solve");
    if (a.rows() == 0) return CMatrix(0, b.cols());
    Eigen::PartialPivLU<CMatrix> lu(a);
    const double scale = a.norm();
    double pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.rows(); ++i) pivot = std::min(pivot, std::abs(lu.matrixLU()(i, i)));
    if (!(pivot >= kRankTol * scale) || scale == 0.0)
        throw SingularMatrixError("solve: singular matrix, pivot " + std::to_string(pivot), pivot);
    return lu.solve(b);
}

struct EigenDecomposition {
    CVector values;
    CMatrix vectors;  // unit-norm columns
};

inline EigenDecomposition eig(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("eig: matrix not square");
    require_finite(a, "eig");
    EigenDecomposition out;
    if (a.rows() == 0) return out;
    Eigen::ComplexEigenSolver<CMatrix> solver(a, true);
    if (solver.info() != Eigen::Success) throw ConvergenceError("eig: QR iteration did not converge");
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
        double n = out.vectors.col(j).norm();
        if (n > 0) out.vectors.col(j) /= n;
    }
    return out;
}

inline std::vector<double> svd_values(const CMatrix& a) {
    require_finite(a, "svd_values");
    std::vector<double> out;
    if (a.size() == 0) return out;
    Eigen::JacobiSVD<CMatrix> svd(a);
    if (svd.info() != Eigen::Success) throw ConvergenceError("svd_values: no convergence");
    const auto& s = svd.singularValues();
    out.assign(s.data(), s.data() + s.size());
    return out;  // already descending
}

inline double condition_number(const CMatrix& a) {
    if (a.size() == 0) return 1.0;
    auto s = svd_values(a);
    if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
    return s.front() / s.back();
}

inline CMatrix orthonormalize(const CMatrix& a) {
    require_finite(a, "orthonormalize");
    if (a.cols() > a.rows()) throw RankDeficiencyError("orthonormalize: more columns than rows");
    if (a.cols() == 0) return CMatrix(a.rows(), 0);
    auto s = svd_values(a);
    if (s.front() == 0.0 || s.back() < kRankTol * s.front() * std::sqrt(double(a.cols())))
        throw RankDeficiencyError("orthonormalize: rank deficient input");
    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ() * CMatrix::Identity(a.rows(), a.cols());
    // fix column phases so that R has a positive real diagonal
    const CMatrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        Complex d = r(j, j);
        if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

inline CMatrix expm(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("expm: matrix not square");
    require_finite(a, "expm");
    return a.exp();
}

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

inline CMatrix block_diag(const std::vector<CMatrix>& blocks) {
    Eigen::Index r = 0, c = 0;
    for (const auto& b : blocks) {
        r += b.rows();
        c += b.cols();
    }
    CMatrix out = CMatrix::Zero(r, c);
    r = c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

inline double hermitian_defect(const CMatrix& a) { return (a - a.adjoint()).norm(); }

// J_n = [[0, I], [-I, 0]]
inline CMatrix symplectic_J(Eigen::Index n) {
    CMatrix j = CMatrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = identity(n);
    j.bottomLeftCorner(n, n) = -identity(n);
    return j;
}

}  // namespace eigperturb
