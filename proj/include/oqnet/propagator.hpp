#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "network.hpp"
#include "ode.hpp"
#include "types.hpp"

namespace oqnet {

enum class RowSpan { SystemOnly, All };
enum class CouplingMode { Full, Rwa };

/// Time series of the Bogoliubov propagator blocks. Stored blocks relate to
/// the Heisenberg amplitudes a_k(t) = sum_j (P_kj a_j + Q_kj a_j^dag) by
/// U = conj(P), V = -conj(Q); rows are the evolved mode k, columns the source
/// mode j. The quadratic generator makes P symmetric and Q skew-adjoint, so
/// each row closes on itself and satisfies
///   dU_kj/dt =  i w_j U_kj + i sum_n (U_kn + V_kn) g_nj,
///   dV_kj/dt = -i w_j V_kj - i sum_n (U_kn + V_kn) g_nj,
/// with U(0) = identity, V(0) = 0. At full span these conserve
/// U U^dag - V V^dag = 1 and U V^T - V U^T = 0.
struct UVTrajectory {
    Vector time_grid;
    std::vector<ComplexMatrix> u_blocks;
    std::vector<ComplexMatrix> v_blocks;
    int n_system = 1;
    CouplingMode mode = CouplingMode::Full;

    int rows_kept() const { return u_blocks.empty() ? 0 : static_cast<int>(u_blocks[0].rows()); }
    int total_modes() const { return u_blocks.empty() ? 0 : static_cast<int>(u_blocks[0].cols()); }
    int n_points() const { return static_cast<int>(time_grid.size()); }
};

/// Row-wise RHS of the propagator equations; u, v are row vectors over all
/// source modes. In RWA mode v stays identically zero.
inline void uv_row_rhs(const RenormalizedNetwork& net, CouplingMode mode,
                       const Eigen::RowVectorXcd& u, const Eigen::RowVectorXcd& v,
                       Eigen::RowVectorXcd& du, Eigen::RowVectorXcd& dv) {
    const auto& w = net.frequencies;
    const auto& g = net.mode_couplings;
    if (mode == CouplingMode::Rwa) {
        du = I * u.cwiseProduct(w.transpose().cast<Complex>()) + I * (u * g);
        dv.setZero(u.size());
    } else {
        const Eigen::RowVectorXcd drive = I * ((u + v) * g);
        du = I * u.cwiseProduct(w.transpose().cast<Complex>()) + drive;
        dv = -I * v.cwiseProduct(w.transpose().cast<Complex>()) - drive;
    }
}

/// Integrates the Bogoliubov blocks over `time_grid` (increasing, starting at
/// zero). Rows are integrated independently; only the requested rows are kept.
inline UVTrajectory evolve_uv(const RenormalizedNetwork& net, const Vector& time_grid,
                              RowSpan rows = RowSpan::SystemOnly, int n_system = 1,
                              CouplingMode mode = CouplingMode::Full, double tol = 1e-10) {
    const int n = net.total_modes();
    const int n_rows = (rows == RowSpan::All) ? n : n_system;
    if (time_grid.size() < 1 || time_grid(0) != 0.0)
        throw NonUniformGrid("time grid must start at t = 0");
    for (int i = 1; i < time_grid.size(); ++i)
        if (time_grid(i) <= time_grid(i - 1))
            throw NonUniformGrid("time grid must be strictly increasing");

    UVTrajectory traj;
    traj.time_grid = time_grid;
    traj.n_system = n_system;
    traj.mode = mode;
    traj.u_blocks.assign(time_grid.size(), ComplexMatrix::Zero(n_rows, n));
    traj.v_blocks.assign(time_grid.size(), ComplexMatrix::Zero(n_rows, n));

    for (int k = 0; k < n_rows; ++k) {
        ComplexVector y = ComplexVector::Zero(2 * n);
        y(k) = 1.0;  // U(0) = identity row, V(0) = 0
        Eigen::RowVectorXcd du(n), dv(n);
        auto rhs = [&](double, const ComplexVector& state, ComplexVector& deriv) {
            const Eigen::RowVectorXcd u = state.head(n).transpose();
            const Eigen::RowVectorXcd v = state.tail(n).transpose();
            uv_row_rhs(net, mode, u, v, du, dv);
            deriv.head(n) = du.transpose();
            deriv.tail(n) = dv.transpose();
        };
        detail::integrate_rk45(rhs, std::move(y), time_grid, tol, tol,
                               [&](int idx, double, const ComplexVector& state) {
                                   traj.u_blocks[idx].row(k) = state.head(n).transpose();
                                   traj.v_blocks[idx].row(k) = state.tail(n).transpose();
                               });
    }
    return traj;
}

/// Exact full-universe propagator at a single time, by orthogonal
/// diagonalization of the mass-weighted potential. Independent of the ODE
/// path; used as a verification backend.
inline std::pair<ComplexMatrix, ComplexMatrix> normal_mode_oracle(const NetworkSpec& spec,
                                                                  double t) {
    const int n = spec.total_modes();
    const Matrix k_mw = mass_weighted_potential(spec);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k_mw);
    const Vector w_sq = eig.eigenvalues();
    const Matrix& o = eig.eigenvectors();
    const double tol = 1e-10 * std::max(1.0, k_mw.norm());
    if (w_sq.minCoeff() < -tol)
        throw NotPositiveSemidefinite("potential quadratic form has a negative normal frequency");

    // Normal quadrature pairs rotate exactly: x(t) = cos(Wt) x + W^-1 sin(Wt) y,
    // y(t) = -W sin(Wt) x + cos(Wt) y (mass-weighted x = sqrt(m) q, y = p / sqrt(m)).
    Vector cos_wt(n), sinc_wt(n), w_sin_wt(n);
    for (int i = 0; i < n; ++i) {
        const double w = std::sqrt(std::max(w_sq(i), 0.0));
        cos_wt(i) = std::cos(w * t);
        sinc_wt(i) = (w * t == 0.0 || w < 1e-150) ? t : std::sin(w * t) / w;
        w_sin_wt(i) = w * std::sin(w * t);
    }
    const Matrix s_xx = o * cos_wt.asDiagonal() * o.transpose();
    const Matrix s_xy = o * sinc_wt.asDiagonal() * o.transpose();
    const Matrix s_yx = -(o * w_sin_wt.asDiagonal() * o.transpose());
    const Matrix& s_yy = s_xx;

    // Mode operators use the renormalized frequencies: a = (C x + i C^-1 y)/sqrt(2),
    // C = diag(sqrt(omega_k)). Heisenberg blocks, then U = conj(P), V = -conj(Q).
    const RenormalizedNetwork net = renormalize(spec);
    const Vector c = net.frequencies.array().sqrt();
    const Vector c_inv = c.cwiseInverse();
    const Matrix cxc = c.asDiagonal() * s_xx * c_inv.asDiagonal();
    const Matrix cyc = c_inv.asDiagonal() * s_yx * c_inv.asDiagonal();
    const Matrix cxy = c.asDiagonal() * s_xy * c.asDiagonal();
    const Matrix cyy = c_inv.asDiagonal() * s_yy * c.asDiagonal();
    const ComplexMatrix p =
        0.5 * ((cxc + cyy).cast<Complex>() + I * (cyc - cxy).cast<Complex>());
    const ComplexMatrix q =
        0.5 * ((cxc - cyy).cast<Complex>() + I * (cyc + cxy).cast<Complex>());
    return {p.conjugate(), -q.conjugate()};
}

}  // namespace oqnet
