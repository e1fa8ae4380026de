#pragma once

// Spectral radius, norms adapted to a contraction factor, and the
// delay-independent stability index for multi-delay difference systems.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <vector>

#include "delaydiff/common.hpp"

namespace delaydiff {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

/// Largest eigenvalue modulus, computed through the QR iteration on the
/// Schur form (as implemented by Eigen's eigensolver).
inline double spectral_radius(const Mat& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw ConstructionError("spectral_radius: matrix must be square and nonempty");
    if (!A.allFinite()) throw ConstructionError("spectral_radius: matrix has non-finite entries");
    if (A.rows() == 1) return std::abs(A(0, 0));
    Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericError("spectral_radius: QR iteration did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double spectral_radius_complex(const CMat& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw ConstructionError("spectral_radius: matrix must be square and nonempty");
    if (A.rows() == 1) return std::abs(A(0, 0));
    Eigen::ComplexEigenSolver<CMat> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericError("spectral_radius: QR iteration did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Euclidean norm reweighted by an invertible matrix P: |x|_P = |P x|_2.
/// When built from adapted_norm(A, eps), the induced operator norm of A
/// satisfies |A|_P <= rho(A) + eps.
struct AdaptedNorm {
    Mat weight;                      ///< P, real invertible
    double achieved_operator_norm;   ///< sup over the probe set of |Ax|_P / |x|_P
    double exact_operator_norm;      ///< sigma_max(P A P^-1), an upper bound for every x
    double epsilon;                  ///< slack above rho(A) requested at construction
    double equiv_lower;              ///< sigma_min(P):  equiv_lower * |x|_2 <= |x|_P
    double equiv_upper;              ///< sigma_max(P):  |x|_P <= equiv_upper * |x|_2

    double vec_norm(const Vec& x) const { return (weight * x).norm(); }
};

/// Builds a norm in which A contracts at rate <= rho(A) + epsilon.
///
/// Construction: unitary (complex Schur) triangularization A = U T U*,
/// then a diagonal scaling D = diag(delta, delta^2, ...) shrinking the
/// strictly upper part of T until || D^-1 T D ||_2 <= rho(A) + epsilon.
/// The real weight P is the Cholesky factor of Re(U D^-2 U*), which
/// reproduces |D^-1 U* x|_2 on real vectors.
inline AdaptedNorm adapted_norm(const Mat& A, double epsilon) {
    if (!(epsilon > 0)) throw ConstructionError("adapted_norm: epsilon must be positive");
    if (!A.allFinite()) throw ConstructionError("adapted_norm: matrix has non-finite entries");
    const Eigen::Index d = A.rows();
    if (d != A.cols() || d == 0) throw ConstructionError("adapted_norm: matrix must be square and nonempty");

    const CMat Ac = A.cast<std::complex<double>>();
    CMat U = CMat::Identity(d, d);
    CMat T = Ac;
    if (d > 1) {
        Eigen::ComplexSchur<CMat> schur(Ac);
        if (schur.info() != Eigen::Success) throw NumericError("adapted_norm: Schur decomposition failed");
        U = schur.matrixU();
        T = schur.matrixT();
    }
    const double rho = T.diagonal().cwiseAbs().maxCoeff();
    const double target = rho + epsilon;

    double delta = 1.0;
    CMat Ts = T;
    double exact = 0.0;
    for (int iter = 0;; ++iter) {
        Ts = T;
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i + 1; j < d; ++j) Ts(i, j) *= std::pow(delta, static_cast<double>(j - i));
        exact = (d == 1) ? std::abs(Ts(0, 0))
                         : Eigen::JacobiSVD<CMat>(Ts).singularValues()(0);
        if (exact <= target) break;
        if (iter > 400) throw NumericError("adapted_norm: scaling iteration did not reach the target norm");
        delta *= 0.5;
    }

    // Gram matrix of x -> |D^-1 U* x|_2 restricted to real vectors,
    // with D = diag(delta^0, delta^1, ..., delta^(d-1)).
    Eigen::VectorXcd dinv(d);
    for (Eigen::Index i = 0; i < d; ++i) dinv(i) = std::pow(delta, -static_cast<double>(i));
    const CMat B = dinv.asDiagonal() * U.adjoint();
    const CMat G = B.adjoint() * B;
    const Mat realG = G.real();
    Eigen::LLT<Mat> llt(realG);
    if (llt.info() != Eigen::Success) throw NumericError("adapted_norm: Gram matrix not positive definite");
    const Mat P = Mat(llt.matrixU());  // upper factor: realG = P^T P, |x|_P = |P x|_2

    AdaptedNorm out;
    out.weight = P;
    out.epsilon = epsilon;
    out.exact_operator_norm = exact;

    Eigen::JacobiSVD<Mat> psvd(P);
    out.equiv_upper = psvd.singularValues()(0);
    out.equiv_lower = psvd.singularValues()(d - 1);

    // Dense probing of the achieved ratio; deterministic seed.
    auto rng = make_rng(0xad0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sup = 0.0;
    for (int k = 0; k < 10000; ++k) {
        Vec x(d);
        for (Eigen::Index i = 0; i < d; ++i) x(i) = gauss(rng);
        const double nx = (P * x).norm();
        if (nx == 0.0) continue;
        sup = std::max(sup, (P * (A * x)).norm() / nx);
    }
    out.achieved_operator_norm = sup;
    return out;
}

/// Delay-independent stability index for x(t) = sum_j A_j x(t - tau_j):
/// the maximum over an angle grid of rho(sum_j A_j e^{i theta_j}).
/// The grid value is a lower bound that increases under refinement.
inline double rho_hale_silkowski(const std::vector<Mat>& matrices, int grid_points_per_angle) {
    if (matrices.empty()) throw ConstructionError("rho_hale_silkowski: need at least one matrix");
    if (grid_points_per_angle < 8) throw ConstructionError("rho_hale_silkowski: need at least 8 grid points per angle");
    const Eigen::Index d = matrices.front().rows();
    for (const Mat& m : matrices)
        if (m.rows() != d || m.cols() != d) throw ConstructionError("rho_hale_silkowski: dimension mismatch among matrices");

    const std::size_t N = matrices.size();
    const int G = grid_points_per_angle;
    std::vector<int> idx(N, 0);
    const double step = 2.0 * M_PI / static_cast<double>(G);
    double best = 0.0;
    while (true) {
        CMat S = CMat::Zero(d, d);
        for (std::size_t j = 0; j < N; ++j) {
            const std::complex<double> phase = std::polar(1.0, step * idx[j]);
            S += matrices[j].cast<std::complex<double>>() * phase;
        }
        best = std::max(best, spectral_radius_complex(S));
        std::size_t carry = 0;
        while (carry < N) {
            if (++idx[carry] < G) break;
            idx[carry] = 0;
            ++carry;
        }
        if (carry == N) break;
    }
    return best;
}

}  // namespace delaydiff
