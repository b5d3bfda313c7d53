#pragma once

#include <utility>
#include <vector>

#include "reduced.hpp"
#include "types.hpp"

namespace oqnet {

/// Gaussian system state: mean(k) = <a_k> and the real symmetric covariance
/// of symmetric-ordered quadrature moments, ordered (x_1..x_M, p_1..p_M)
/// with x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)). The vacuum
/// covariance is identity/2.
struct GaussianState {
    ComplexVector mean;
    Matrix covariance;

    int n_modes() const { return static_cast<int>(mean.size()); }

    static GaussianState vacuum(int m) {
        return {ComplexVector::Zero(m), 0.5 * Matrix::Identity(2 * m, 2 * m)};
    }
};

/// Evolved-vacuum time series: the covariance of the state the vacuum is
/// mapped to, and whether a regular P-function description of it exists
/// (covariance - vacuum positive semidefinite) at each grid point.
struct VacuumDistortion {
    Vector time_grid;
    std::vector<Matrix> covariances;
    std::vector<bool> regular_p;
};

/// Standard symplectic form in the (x, p) block ordering.
inline Matrix symplectic_form(int m) {
    Matrix omega = Matrix::Zero(2 * m, 2 * m);
    omega.topRightCorner(m, m) = Matrix::Identity(m, m);
    omega.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
    return omega;
}

/// Quadrature covariance from mode moments: n_sym(k, j) = <a_k^dag a_j>_sym
/// (Hermitian, vacuum = identity/2) and anom(k, j) = <a_k a_j> (symmetric).
inline Matrix moments_to_covariance(const ComplexMatrix& n_sym,
                                    const ComplexMatrix& anom) {
    const int m = static_cast<int>(n_sym.rows());
    Matrix sigma(2 * m, 2 * m);
    sigma.topLeftCorner(m, m) = n_sym.real() + anom.real();
    sigma.bottomRightCorner(m, m) = n_sym.real() - anom.real();
    sigma.topRightCorner(m, m) = anom.imag() + n_sym.imag();
    sigma.bottomLeftCorner(m, m) = sigma.topRightCorner(m, m).transpose();
    return sigma;
}

/// Inverse of moments_to_covariance.
inline std::pair<ComplexMatrix, ComplexMatrix> covariance_to_moments(const Matrix& sigma) {
    const int m = static_cast<int>(sigma.rows()) / 2;
    const Matrix xx = sigma.topLeftCorner(m, m);
    const Matrix pp = sigma.bottomRightCorner(m, m);
    const Matrix xp = sigma.topRightCorner(m, m);
    ComplexMatrix n_sym = 0.5 * (xx + pp).cast<Complex>() +
                          0.5 * I * (xp - xp.transpose()).cast<Complex>();
    ComplexMatrix anom = 0.5 * (xx - pp).cast<Complex>() +
                         0.5 * I * (xp + xp.transpose()).cast<Complex>();
    return {std::move(n_sym), std::move(anom)};
}

/// Quadrature transfer matrix of the homogeneous map. The stored blocks give
/// Heisenberg amplitudes P = conj(U), Q = -conj(V); in quadratures the map is
/// T = [[Re(P+Q), -Im(P-Q)], [Im(P+Q), Re(P-Q)]].
inline Matrix transfer_matrix(const ComplexMatrix& u_sys, const ComplexMatrix& v_sys) {
    const int m = static_cast<int>(u_sys.rows());
    const ComplexMatrix p = u_sys.conjugate();
    const ComplexMatrix q = -v_sys.conjugate();
    Matrix t(2 * m, 2 * m);
    t.topLeftCorner(m, m) = (p + q).real();
    t.topRightCorner(m, m) = -(p - q).imag();
    t.bottomLeftCorner(m, m) = (p + q).imag();
    t.bottomRightCorner(m, m) = (p - q).real();
    return t;
}

/// Quadrature covariance added by the noise functions: the Gaussian
/// chi_in has symmetric-ordered moments n_sym = A, anom = -conj(B).
inline Matrix noise_covariance(const ComplexMatrix& a, const ComplexMatrix& b) {
    return moments_to_covariance(a, -b.conjugate());
}

/// Result of the Robertson-Schroedinger physicality test.
struct PhysicalityReport {
    bool physical = false;
    double margin = 0.0;  // smallest eigenvalue of sigma + i Omega / 2
};

inline PhysicalityReport physicality_check(const GaussianState& state) {
    const int m = state.n_modes();
    const ComplexMatrix test =
        state.covariance.cast<Complex>() + 0.5 * I * symplectic_form(m).cast<Complex>();
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(test);
    const double margin = eig.eigenvalues().minCoeff();
    return {margin >= -1e-10, margin};
}

/// Classical motion of the wavepacket center, independent of the reservoir
/// state: alpha_k(t) = sum_j (U_kj^* alpha_j - V_kj^* alpha_j^*).
inline ComplexVector evolve_center(const ComplexVector& mean0,
                                   const ComplexMatrix& u_sys,
                                   const ComplexMatrix& v_sys) {
    if (u_sys.rows() != mean0.size()) throw ShapeMismatch("mean size mismatch");
    return u_sys.conjugate() * mean0 - v_sys.conjugate() * mean0.conjugate();
}

/// Evolves a Gaussian state to grid point `time_index`: center via the
/// homogeneous map, covariance via sigma(t) = T sigma0 T^T + Sigma_noise(t).
inline GaussianState evolve_state(const GaussianState& state0, const UVTrajectory& uv,
                                  const NoiseKernels& kernels, int time_index) {
    const int m = uv.n_system;
    if (state0.n_modes() != m) throw ShapeMismatch("state size mismatch");
    if (!physicality_check(state0).physical)
        throw UnphysicalInput("initial covariance violates the uncertainty bound");
    const ComplexMatrix us = uv.u_blocks[time_index].topLeftCorner(m, m);
    const ComplexMatrix vs = uv.v_blocks[time_index].topLeftCorner(m, m);
    const Matrix t = transfer_matrix(us, vs);
    GaussianState out;
    out.mean = evolve_center(state0.mean, us, vs);
    out.covariance = t * state0.covariance * t.transpose() +
                     noise_covariance(kernels.a_total(time_index),
                                      kernels.b_total(time_index));
    return out;
}

/// Tracks the evolved vacuum over the whole grid and flags where its P
/// function remains a regular function (no sub-vacuum squeezing direction).
inline VacuumDistortion vacuum_distortion(const UVTrajectory& uv,
                                          const NoiseKernels& kernels) {
    const int m = uv.n_system;
    const GaussianState vac = GaussianState::vacuum(m);
    VacuumDistortion out;
    out.time_grid = uv.time_grid;
    out.covariances.reserve(uv.n_points());
    out.regular_p.reserve(uv.n_points());
    for (int i = 0; i < uv.n_points(); ++i) {
        const GaussianState evolved = evolve_state(vac, uv, kernels, i);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(
            evolved.covariance - 0.5 * Matrix::Identity(2 * m, 2 * m));
        out.regular_p.push_back(eig.eigenvalues().minCoeff() >= -1e-10);
        out.covariances.push_back(evolved.covariance);
    }
    return out;
}

}  // namespace oqnet
