#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "propagator.hpp"
#include "types.hpp"

namespace oqnet {

/// Second-order moments of the reservoir initial state: occupation(m, n) =
/// <a_m^dag a_n> (Hermitian) and anomalous(m, n) = <a_m a_n> (symmetric),
/// both over reservoir modes only. The state is Gaussian and unbiased.
struct ReservoirMoments {
    ComplexMatrix occupation;
    ComplexMatrix anomalous;

    int n_modes() const { return static_cast<int>(occupation.rows()); }

    bool is_zero() const {
        return occupation.cwiseAbs().maxCoeff() == 0.0 &&
               anomalous.cwiseAbs().maxCoeff() == 0.0;
    }

    static ReservoirMoments zero_temperature(int n) {
        return {ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
    }

    /// Per-mode mean occupations on the diagonal, no anomalous part.
    static ReservoirMoments thermal(const Vector& nbar) {
        const int n = static_cast<int>(nbar.size());
        ReservoirMoments m = zero_temperature(n);
        m.occupation.diagonal() = nbar.cast<Complex>();
        return m;
    }

    /// Bose-Einstein occupations at the given temperature (k_B = hbar = 1).
    static ReservoirMoments thermal(double temperature, const Vector& frequencies) {
        const int n = static_cast<int>(frequencies.size());
        Vector nbar = Vector::Zero(n);
        if (temperature > 0.0)
            for (int j = 0; j < n; ++j)
                nbar(j) = 1.0 / std::expm1(frequencies(j) / temperature);
        return thermal(nbar);
    }

    /// Independent squeezed vacua with per-mode squeeze parameter r_j and
    /// squeeze phase theta_j: <a^dag a> = sinh^2 r, <a a> = -e^{i theta} sinh r cosh r.
    static ReservoirMoments squeezed(const Vector& r, const Vector& theta) {
        const int n = static_cast<int>(r.size());
        if (theta.size() != n) throw ShapeMismatch("squeeze phases must match parameters");
        ReservoirMoments m = zero_temperature(n);
        for (int j = 0; j < n; ++j) {
            m.occupation(j, j) = std::sinh(r(j)) * std::sinh(r(j));
            m.anomalous(j, j) =
                -std::exp(I * theta(j)) * std::sinh(r(j)) * std::cosh(r(j));
        }
        return m;
    }

    /// Throws UnphysicalMoments unless the joint second-moment matrix
    /// satisfies the uncertainty bound [[nbar, s], [s^*, nbar^T + 1]] >= 0.
    void validate() const {
        const int n = n_modes();
        if (anomalous.rows() != n || anomalous.cols() != n)
            throw ShapeMismatch("occupation and anomalous blocks differ in size");
        if ((occupation - occupation.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw UnphysicalMoments("occupation matrix is not Hermitian");
        if ((anomalous - anomalous.transpose()).cwiseAbs().maxCoeff() > 1e-10)
            throw UnphysicalMoments("anomalous matrix is not symmetric");
        ComplexMatrix joint(2 * n, 2 * n);
        joint.topLeftCorner(n, n) = occupation;
        joint.topRightCorner(n, n) = anomalous;
        joint.bottomLeftCorner(n, n) = anomalous.conjugate();
        joint.bottomRightCorner(n, n) =
            occupation.transpose() + ComplexMatrix::Identity(n, n);
        const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(
            (joint + joint.adjoint()) / 2.0);
        const double scale = std::max(1.0, joint.cwiseAbs().maxCoeff());
        if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
            throw UnphysicalMoments("moments violate the uncertainty bound");
    }
};

/// Time series of the Gaussian noise functions of the reduced dynamics,
/// split into zero-point and thermal/squeezed parts. The inhomogeneous
/// factor of the reduced characteristic function is
///   chi_in(beta, t) = exp(- sum_kj A_kj beta_k beta_j^*
///                         - 1/2 sum_kj (B_kj beta_k beta_j + c.c.)),
/// with A = A0 + Ath Hermitian and B = B0 + Bth symmetric.
struct NoiseKernels {
    Vector time_grid;
    std::vector<ComplexMatrix> a_zero, b_zero;
    std::vector<ComplexMatrix> a_thermal, b_thermal;

    int n_points() const { return static_cast<int>(time_grid.size()); }
    ComplexMatrix a_total(int i) const { return a_zero[i] + a_thermal[i]; }
    ComplexMatrix b_total(int i) const { return b_zero[i] + b_thermal[i]; }
};

namespace detail {

inline void check_system_rows(const UVTrajectory& uv) {
    if (uv.rows_kept() < uv.n_system || uv.total_modes() <= uv.n_system)
        throw ShapeMismatch("trajectory lacks system rows or reservoir columns");
}

}  // namespace detail

/// Zero-point (reservoir vacuum) noise functions
///   A0_kj = 1/2 sum_m (U_km U_jm^* + V_km V_jm^*),
///   B0_kj = 1/2 sum_m (U_km V_jm + V_km U_jm),
/// summed over reservoir columns m only.
inline std::pair<std::vector<ComplexMatrix>, std::vector<ComplexMatrix>>
noise_zero_point(const UVTrajectory& uv) {
    detail::check_system_rows(uv);
    const int m_sys = uv.n_system;
    const int n_res = uv.total_modes() - m_sys;
    std::vector<ComplexMatrix> a(uv.n_points()), b(uv.n_points());
    for (int i = 0; i < uv.n_points(); ++i) {
        const auto ur = uv.u_blocks[i].topRightCorner(m_sys, n_res);
        const auto vr = uv.v_blocks[i].topRightCorner(m_sys, n_res);
        a[i] = 0.5 * (ur * ur.adjoint() + vr * vr.adjoint());
        const ComplexMatrix uvt = ur * vr.transpose();
        b[i] = 0.5 * (uvt + uvt.transpose());
    }
    return {std::move(a), std::move(b)};
}

/// Thermal/squeezed noise functions from the reservoir initial moments
/// nbar = occupation, s = anomalous (double sum over reservoir indices):
///   Ath = U nbar U^dag + V nbar^* V^dag - (U s^* V^dag + V s U^dag),
///   Bth = U nbar V^T + V nbar^T U^T - U s^* U^T - V s V^T.
/// Zero moments give identically zero output.
inline std::pair<std::vector<ComplexMatrix>, std::vector<ComplexMatrix>>
noise_thermal(const UVTrajectory& uv, const ReservoirMoments& moments) {
    detail::check_system_rows(uv);
    const int m_sys = uv.n_system;
    const int n_res = uv.total_modes() - m_sys;
    if (moments.n_modes() != n_res)
        throw ShapeMismatch("reservoir moments do not match trajectory columns");
    moments.validate();
    const ComplexMatrix& nb = moments.occupation;
    const ComplexMatrix& s = moments.anomalous;
    std::vector<ComplexMatrix> a(uv.n_points()), b(uv.n_points());
    for (int i = 0; i < uv.n_points(); ++i) {
        const ComplexMatrix ur = uv.u_blocks[i].topRightCorner(m_sys, n_res);
        const ComplexMatrix vr = uv.v_blocks[i].topRightCorner(m_sys, n_res);
        const ComplexMatrix cross = ur * s.conjugate() * vr.adjoint();
        a[i] = ur * nb * ur.adjoint() + vr * nb.conjugate() * vr.adjoint() -
               (cross + cross.adjoint());
        b[i] = ur * nb * vr.transpose() + vr * nb.transpose() * ur.transpose() -
               ur * s.conjugate() * ur.transpose() - vr * s * vr.transpose();
    }
    return {std::move(a), std::move(b)};
}

/// Builds the full noise-kernel time series for a trajectory and reservoir state.
inline NoiseKernels make_noise_kernels(const UVTrajectory& uv,
                                       const ReservoirMoments& moments) {
    NoiseKernels kernels;
    kernels.time_grid = uv.time_grid;
    std::tie(kernels.a_zero, kernels.b_zero) = noise_zero_point(uv);
    if (moments.is_zero()) {
        kernels.a_thermal.assign(uv.n_points(),
                                 ComplexMatrix::Zero(uv.n_system, uv.n_system));
        kernels.b_thermal = kernels.a_thermal;
    } else {
        std::tie(kernels.a_thermal, kernels.b_thermal) = noise_thermal(uv, moments);
    }
    return kernels;
}

/// Evaluates the reduced characteristic function at the query displacement:
/// chi_S(beta, t) = chi_S({beta_k(t)}, 0) * chi_in(beta, t), where the
/// homogeneous argument is beta_k(t) = sum_j (U_jk beta_j + V_jk^* beta_j^*)
/// over system rows j and system columns k.
inline Complex reduced_char_fn(const ComplexVector& beta, int time_index,
                               const std::function<Complex(const ComplexVector&)>& chi0,
                               const UVTrajectory& uv, const NoiseKernels& kernels) {
    const int m_sys = uv.n_system;
    if (beta.size() != m_sys) throw ShapeMismatch("query displacement has wrong size");
    const auto us = uv.u_blocks[time_index].topLeftCorner(m_sys, m_sys);
    const auto vs = uv.v_blocks[time_index].topLeftCorner(m_sys, m_sys);
    const ComplexVector mapped =
        us.transpose() * beta + vs.adjoint() * beta.conjugate();
    const ComplexMatrix a = kernels.a_total(time_index);
    const ComplexMatrix b = kernels.b_total(time_index);
    const Complex quad_a = beta.transpose() * a * beta.conjugate();
    const Complex quad_b = beta.transpose() * b * beta;
    return chi0(mapped) * std::exp(-quad_a - 0.5 * quad_b - 0.5 * std::conj(quad_b));
}

}  // namespace oqnet
