#pragma once

#include "oqnet/gaussian.hpp"
#include "oqnet/propagator.hpp"
#include "oqnet/reduced.hpp"
#include "oqnet/types.hpp"

namespace oqnet::testing {

/// Full-universe initial covariance for a factorized system (x) reservoir
/// Gaussian state, in the global (x_1..x_n, p_1..p_n) ordering.
inline Matrix universe_covariance(const GaussianState& sys0, const ReservoirMoments& res) {
    const int m = sys0.n_modes();
    const int n = m + res.n_modes();
    const auto [n_sys, s_sys] = covariance_to_moments(sys0.covariance);
    ComplexMatrix n_sym = ComplexMatrix::Zero(n, n);
    ComplexMatrix anom = ComplexMatrix::Zero(n, n);
    n_sym.topLeftCorner(m, m) = n_sys;
    anom.topLeftCorner(m, m) = s_sys;
    n_sym.bottomRightCorner(n - m, n - m) =
        res.occupation + 0.5 * ComplexMatrix::Identity(n - m, n - m);
    anom.bottomRightCorner(n - m, n - m) = res.anomalous;
    return moments_to_covariance(n_sym, anom);
}

/// Brute-force reduced covariance: propagate the full-universe covariance
/// with the normal-mode transfer matrix, then keep the system quadratures.
inline Matrix traced_universe_covariance(const NetworkSpec& spec, const GaussianState& sys0,
                                         const ReservoirMoments& res, double t) {
    const int m = sys0.n_modes();
    const int n = spec.n_system + spec.n_reservoir;
    const auto [u_full, v_full] = normal_mode_oracle(spec, t);
    const Matrix big = transfer_matrix(u_full, v_full) * universe_covariance(sys0, res) *
                       transfer_matrix(u_full, v_full).transpose();
    Matrix out(2 * m, 2 * m);
    out.topLeftCorner(m, m) = big.topLeftCorner(m, m);
    out.topRightCorner(m, m) = big.block(0, n, m, m);
    out.bottomLeftCorner(m, m) = big.block(n, 0, m, m);
    out.bottomRightCorner(m, m) = big.block(n, n, m, m);
    return out;
}

/// Symmetric-ordered characteristic function of a Gaussian state.
inline Complex gaussian_char_fn(const GaussianState& state, const ComplexVector& beta) {
    const auto [n_sym, anom] = covariance_to_moments(state.covariance);
    const Complex linear = beta.transpose() * state.mean.conjugate();
    const Complex bb = beta.transpose() * anom.conjugate() * beta;
    const Complex ba = beta.transpose() * n_sym * beta.conjugate();
    return std::exp(linear - std::conj(linear) + 0.5 * bb + 0.5 * std::conj(bb) - ba);
}

}  // namespace oqnet::testing
