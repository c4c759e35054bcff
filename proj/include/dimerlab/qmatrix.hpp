// qmatrix.hpp — complex linear algebra kernel for 2- and 4-dimensional
// quantum operators: Hermitian eigensystems, state validation, entropy,
// fidelity.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace dimerlab {

using Complex = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;
using Vec2c = Eigen::Vector2cd;
using Vec4c = Eigen::Vector4cd;
using Vec4 = Eigen::Vector4d;

inline constexpr double kDefaultTol = 1e-9;

// ----------------------------- basis helpers --------------------------------

// Two-qubit product basis |q0 q1> with index 2*q0 + q1; qubit 0 is the
// leading bit.
inline Vec4c basis_ket(int index) {
    if (index < 0 || index > 3) throw std::out_of_range("basis_ket: index out of range");
    Vec4c v = Vec4c::Zero();
    v(index) = 1.0;
    return v;
}

inline Mat4c basis_projector(int index) {
    const Vec4c v = basis_ket(index);
    return v * v.adjoint();
}

// (|01> - |10>)/sqrt(2), the exchange-coupled ground state.
inline Vec4c singlet_ket() {
    Vec4c v = Vec4c::Zero();
    v(1) = 1.0 / std::sqrt(2.0);
    v(2) = -1.0 / std::sqrt(2.0);
    return v;
}

inline Mat4c kron2(const Mat2c& a, const Mat2c& b) {
    Mat4c k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

// ----------------------------- eigensystems ---------------------------------

// Hermitian eigensystem with eigenvalues ascending and orthonormal
// eigenvector columns.
template <int N>
struct EigenSystem {
    Eigen::Matrix<double, N, 1> values;
    Eigen::Matrix<Complex, N, N> vectors;
};

namespace detail {

template <int N>
void require_hermitian(const Eigen::Matrix<Complex, N, N>& m, double tol, const char* who) {
    for (int i = 0; i < N; ++i) {
        for (int j = i; j < N; ++j) {
            const double dev = std::abs(m(i, j) - std::conj(m(j, i)));
            if (dev > tol) {
                throw std::invalid_argument(std::string(who) + ": matrix not Hermitian at entry (" +
                                            std::to_string(i) + "," + std::to_string(j) +
                                            "), deviation " + std::to_string(dev));
            }
        }
    }
}

}  // namespace detail

template <int N>
EigenSystem<N> hermitian_eigen(const Eigen::Matrix<Complex, N, N>& m, double tol = kDefaultTol) {
    detail::require_hermitian<N>(m, tol, "hermitian_eigen");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eigen: eigensolver failed to converge");
    return EigenSystem<N>{solver.eigenvalues(), solver.eigenvectors()};
}

// ----------------------------- density matrices -----------------------------

// 4x4 Hermitian, unit-trace, positive-semidefinite operator. Validation runs
// once at construction; operations treat the contents as immutable.
class DensityMatrix {
public:
    explicit DensityMatrix(const Mat4c& m, double tol = kDefaultTol) : mat_(m), tol_(tol) {
        detail::require_hermitian<4>(m, tol, "DensityMatrix");
        const double trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
        if (trace_dev > tol)
            throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                        std::to_string(trace_dev));
        Eigen::SelfAdjointEigenSolver<Mat4c> solver(m);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("DensityMatrix: eigensolver failed");
        const double min_eig = solver.eigenvalues().minCoeff();
        if (min_eig < -tol)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        std::to_string(min_eig));
    }

    const Mat4c& matrix() const { return mat_; }
    double tol() const { return tol_; }

    Complex operator()(int i, int j) const { return mat_(i, j); }

private:
    Mat4c mat_;
    double tol_;
};

inline DensityMatrix pure_state(const Vec4c& psi, double tol = kDefaultTol) {
    Vec4c v = psi;
    const double n = v.norm();
    if (n <= 0.0) throw std::invalid_argument("pure_state: zero vector");
    v /= n;
    return DensityMatrix(v * v.adjoint(), tol);
}

inline DensityMatrix maximally_mixed() {
    return DensityMatrix(Mat4c::Identity() / 4.0);
}

// ----------------------------- functionals ----------------------------------

// S(rho) = -sum_k l_k ln l_k in nats, with 0 ln 0 = 0. Range [0, ln 4].
inline double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Mat4c> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double l = solver.eigenvalues()(k);
        if (l < -rho.tol())
            throw std::invalid_argument("von_neumann_entropy: negative eigenvalue " +
                                        std::to_string(l));
        if (l > 0.0) s -= l * std::log(l);
    }
    return std::max(s, 0.0);
}

// F = sqrt(<00|rho|00>), the overlap with the two-qubit ground level.
inline double ground_fidelity(const DensityMatrix& rho) {
    const double p = rho(0, 0).real();
    if (p < -rho.tol())
        throw std::invalid_argument("ground_fidelity: negative ground population " +
                                    std::to_string(p));
    return std::sqrt(std::min(std::max(p, 0.0), 1.0));
}

namespace detail {

inline Mat4c sqrt_psd(const Mat4c& m) {
    Eigen::SelfAdjointEigenSolver<Mat4c> solver(m);
    Vec4 d = solver.eigenvalues();
    for (int k = 0; k < 4; ++k) d(k) = d(k) > 0.0 ? std::sqrt(d(k)) : 0.0;
    return solver.eigenvectors() * d.asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace detail

// Uhlmann fidelity in the square-root convention, F = tr sqrt(sqrt(rho) sigma
// sqrt(rho)); reduces to ground_fidelity when sigma = |00><00|.
inline double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    const Mat4c sr = detail::sqrt_psd(rho.matrix());
    const double f = detail::sqrt_psd(sr * sigma.matrix() * sr).trace().real();
    return std::min(std::max(f, 0.0), 1.0);
}

inline double trace_real(const Mat4c& m) { return m.trace().real(); }

// tr(A rho) for Hermitian A; the imaginary part is discarded.
inline double expectation(const Mat4c& a, const DensityMatrix& rho) {
    return (a * rho.matrix()).trace().real();
}

}  // namespace dimerlab
