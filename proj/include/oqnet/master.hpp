#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "reduced.hpp"
#include "propagator.hpp"
#include "types.hpp"

namespace oqnet {

/// The seven real time-dependent parameters of the exact single-mode master
/// equation, written with Hamiltonian part omega a^dag a + xi a^dag^2 + xi^* a^2
/// and dissipator in Kossakowski form over (a, a^dag) with rate matrix
///   K = [[gamma1 + gamma2, -eta^*], [-eta, gamma2]].
/// Grid points where the homogeneous map degenerates (|U|^2 - |V|^2 below
/// threshold) are masked out via `valid` and carry NaN coefficients.
struct MasterCoefficients {
    Vector time_grid;
    Vector omega, gamma1, gamma2;
    ComplexVector xi, eta;
    std::vector<bool> valid;

    int n_points() const { return static_cast<int>(time_grid.size()); }
};

/// Diagonalized dissipator: rates lambda1/lambda2 with Lindblad operators
/// L_n = l(n,0) a + l(n,1) a^dag, so that the Kossakowski matrix is
/// lambda1 l1 l1^dag + lambda2 l2 l2^dag.
struct LindbladForm {
    Vector time_grid;
    Vector lambda1, lambda2;
    Vector theta;
    std::vector<Eigen::Vector2cd> l1, l2;

    int n_points() const { return static_cast<int>(time_grid.size()); }
};

enum class Markovianity { Markovian, TimeDependentMarkovian, NonMarkovian };

/// Per-grid-point divisibility data. ineq1/ineq2 are the two rate
/// inequalities (gamma1 + 2 gamma2 >= 0 and gamma1 gamma2 + gamma2^2 -
/// |eta|^2 >= 0; in RWA mode the second is gamma2 >= 0). `disagreements`
/// lists grid points where the inequality pair and the nonnegativity of the
/// Lindblad rates reach different verdicts.
struct MarkovianityReport {
    Vector time_grid;
    std::vector<bool> ineq1, ineq2;
    std::optional<double> first_violation;
    Markovianity classification = Markovianity::Markovian;
    std::vector<int> disagreements;
};

/// Extracts the master-equation coefficients from a solved single-mode
/// trajectory. Derivatives of U, V come from the propagator right-hand side
/// and derivatives of the noise functions from the product rule over
/// reservoir columns; nothing is finite-differenced. The round trip closes
/// because the coefficients are defined by time-local moment matching:
///   omega + i gamma1/2 = i (dU/dt^* U - dV/dt^* V) / (|U|^2 - |V|^2),
///   xi = (i/2) (dU/dt^* V^* - dV/dt^* U^*) / (|U|^2 - |V|^2),
///   gamma2 = dn_s/dt + gamma1 (n_s - 1/2) + 4 Im(xi^* s),
///   eta = ds/dt + (gamma1 + 2 i omega) s + 4 i xi n_s,
/// where n_s, s are the symmetric-ordered occupation and <a a> of the state
/// evolved from the vacuum.
inline MasterCoefficients extract_coefficients(const RenormalizedNetwork& net,
                                               const UVTrajectory& uv,
                                               const ReservoirMoments& moments,
                                               double eps_den = 1e-12) {
    if (uv.n_system != 1) throw ShapeMismatch("coefficient extraction requires M = 1");
    detail::check_system_rows(uv);
    const int n = uv.n_points();
    const int n_res = uv.total_modes() - 1;
    const NoiseKernels kernels = make_noise_kernels(uv, moments);
    const bool thermal = !moments.is_zero();

    MasterCoefficients out;
    out.time_grid = uv.time_grid;
    out.omega.resize(n);
    out.gamma1.resize(n);
    out.gamma2.resize(n);
    out.xi.resize(n);
    out.eta.resize(n);
    out.valid.assign(n, true);

    double max_u2 = 1.0;
    for (int i = 0; i < n; ++i)
        max_u2 = std::max(max_u2, std::norm(uv.u_blocks[i](0, 0)));
    const double threshold = eps_den * max_u2;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXcd u_row = uv.u_blocks[i].row(0);
        const Eigen::RowVectorXcd v_row = uv.v_blocks[i].row(0);
        Eigen::RowVectorXcd du_row, dv_row;
        uv_row_rhs(net, uv.mode, u_row, v_row, du_row, dv_row);

        const Complex u = u_row(0), v = v_row(0);
        const Complex du = du_row(0), dv = dv_row(0);
        const double den = std::norm(u) - std::norm(v);
        if (std::abs(den) < threshold) {
            out.valid[i] = false;
            out.omega(i) = out.gamma1(i) = out.gamma2(i) = nan;
            out.xi(i) = out.eta(i) = Complex{nan, nan};
            continue;
        }

        const Complex drift = (std::conj(du) * u - std::conj(dv) * v) / den;
        out.omega(i) = -drift.imag();
        out.gamma1(i) = -2.0 * drift.real();
        out.xi(i) = 0.5 * I *
                    (std::conj(du) * std::conj(v) - std::conj(dv) * std::conj(u)) / den;

        // Noise-function derivatives over reservoir columns.
        const auto ur = u_row.tail(n_res), vr = v_row.tail(n_res);
        const auto dur = du_row.tail(n_res), dvr = dv_row.tail(n_res);
        double da = (ur.conjugate().cwiseProduct(dur) + vr.conjugate().cwiseProduct(dvr))
                        .sum()
                        .real();
        Complex db = (dur.cwiseProduct(vr) + ur.cwiseProduct(dvr)).sum();
        if (thermal) {
            const ComplexMatrix& nb = moments.occupation;
            const ComplexMatrix& sq = moments.anomalous;
            const ComplexVector uc = ur.transpose(), vc = vr.transpose();
            const ComplexVector duc = dur.transpose(), dvc = dvr.transpose();
            const Complex a_dot =
                2.0 * (duc.adjoint() * nb.transpose() * uc)(0).real() +
                2.0 * (dvc.adjoint() * nb.conjugate().transpose() * vc)(0).real() -
                2.0 * Complex((duc.transpose() * sq.conjugate() * vc.conjugate())(0) +
                              (uc.transpose() * sq.conjugate() * dvc.conjugate())(0))
                          .real();
            da += a_dot.real();
            db += (duc.transpose() * nb * vc)(0) + (uc.transpose() * nb * dvc)(0) +
                  (dvc.transpose() * nb.transpose() * uc)(0) +
                  (vc.transpose() * nb.transpose() * duc)(0) -
                  2.0 * (duc.transpose() * sq.conjugate() * uc)(0) -
                  2.0 * (dvc.transpose() * sq * vc)(0);
        }

        const double a_val = kernels.a_total(i)(0, 0).real();
        const Complex b_val = kernels.b_total(i)(0, 0);
        const double n_s = 0.5 * (std::norm(u) + std::norm(v)) + a_val;
        const Complex s = -std::conj(u) * std::conj(v) - std::conj(b_val);
        const double dn_s = (std::conj(u) * du + std::conj(v) * dv).real() + da;
        const Complex ds =
            -(std::conj(du) * std::conj(v) + std::conj(u) * std::conj(dv)) - std::conj(db);

        out.gamma2(i) = dn_s + out.gamma1(i) * (n_s - 0.5) +
                        4.0 * (std::conj(out.xi(i)) * s).imag();
        out.eta(i) = ds + (out.gamma1(i) + 2.0 * I * out.omega(i)) * s +
                     4.0 * I * out.xi(i) * n_s;
    }
    return out;
}

/// Diagonalizes the Kossakowski matrix per grid point:
///   lambda_{1,2} = gamma1/2 + gamma2 +- s sqrt(gamma1^2/4 + |eta|^2),
/// s = sign(gamma1) (taken +1 when |gamma1| < 1e-13), theta = arctan(2|eta|/gamma1)
/// (pi/2 at gamma1 = 0), L1 = cos(theta/2) a - sin(theta/2) p a^dag and
/// L2 = sin(theta/2) p^* a + cos(theta/2) a^dag with p the phase of eta,
/// frozen at its last nonzero value (1 if eta never nonzero) so the operator
/// mixing stays continuous through eta = 0.
inline LindbladForm lindblad_diagonalize(const MasterCoefficients& coeffs) {
    const int n = coeffs.n_points();
    LindbladForm out;
    out.time_grid = coeffs.time_grid;
    out.lambda1.resize(n);
    out.lambda2.resize(n);
    out.theta.resize(n);
    out.l1.resize(n);
    out.l2.resize(n);

    Complex phase{1.0, 0.0};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < n; ++i) {
        if (!coeffs.valid[i]) {
            out.lambda1(i) = out.lambda2(i) = out.theta(i) = nan;
            out.l1[i].setConstant(Complex{nan, nan});
            out.l2[i].setConstant(Complex{nan, nan});
            continue;
        }
        const double g1 = coeffs.gamma1(i);
        const double g2 = coeffs.gamma2(i);
        const double mag = std::abs(coeffs.eta(i));
        if (mag > 0.0) phase = coeffs.eta(i) / mag;
        const double root = std::sqrt(0.25 * g1 * g1 + mag * mag);
        const double sign = (std::abs(g1) < 1e-13 || g1 > 0.0) ? 1.0 : -1.0;
        out.lambda1(i) = 0.5 * g1 + g2 + sign * root;
        out.lambda2(i) = 0.5 * g1 + g2 - sign * root;
        out.theta(i) = (std::abs(g1) < 1e-13) ? 0.5 * EIGEN_PI
                                              : std::atan(2.0 * mag / g1);
        const double half = 0.5 * out.theta(i);
        out.l1[i] << std::cos(half), -std::sin(half) * phase;
        out.l2[i] << std::sin(half) * std::conj(phase), std::cos(half);
    }
    return out;
}

/// Evaluates the divisibility inequalities and classifies the dynamics.
/// Classification: any violation makes the process non-Markovian; otherwise
/// it is Markovian when the rates are constant over the grid and
/// time-dependent Markovian when they vary.
inline MarkovianityReport markovianity_report(const MasterCoefficients& coeffs,
                                              bool rwa = false, double tol = 1e-10) {
    const int n = coeffs.n_points();
    const LindbladForm lind = lindblad_diagonalize(coeffs);
    MarkovianityReport report;
    report.time_grid = coeffs.time_grid;
    report.ineq1.assign(n, true);
    report.ineq2.assign(n, true);

    double g1_min = std::numeric_limits<double>::infinity(), g1_max = -g1_min;
    double g2_min = g1_min, g2_max = g1_max, eta_max = 0.0;
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        if (coeffs.valid[i])
            scale = std::max({scale, std::abs(coeffs.gamma1(i)),
                              std::abs(coeffs.gamma2(i)), std::abs(coeffs.eta(i))});
    const double slack = tol * std::max(1.0, scale);

    for (int i = 0; i < n; ++i) {
        if (!coeffs.valid[i]) continue;
        const double g1 = coeffs.gamma1(i);
        const double g2 = coeffs.gamma2(i);
        const double eta2 = std::norm(coeffs.eta(i));
        report.ineq1[i] = g1 + 2.0 * g2 >= -slack;
        report.ineq2[i] = rwa ? (g2 >= -slack)
                              : (g1 * g2 + g2 * g2 - eta2 >= -slack * slack);
        const bool pair_ok = report.ineq1[i] && report.ineq2[i];
        // Only count a disagreement when the two criteria reach strictly
        // different verdicts beyond the tolerance band; near a violation
        // crossing both hover at zero and rounding alone can flip them.
        const bool pair_strict = g1 + 2.0 * g2 > slack &&
                                 (rwa ? g2 > slack
                                      : g1 * g2 + g2 * g2 - eta2 > slack * slack);
        const bool pair_bad = !report.ineq1[i] || !report.ineq2[i];
        const double lam_min = std::min(lind.lambda1(i), lind.lambda2(i));
        const bool rates_strict = lam_min > slack;
        const bool rates_bad = lam_min < -slack;
        if (!rwa && ((pair_strict && rates_bad) || (rates_strict && pair_bad)))
            report.disagreements.push_back(i);
        if (!pair_ok && !report.first_violation)
            report.first_violation = coeffs.time_grid(i);
        g1_min = std::min(g1_min, g1);
        g1_max = std::max(g1_max, g1);
        g2_min = std::min(g2_min, g2);
        g2_max = std::max(g2_max, g2);
        eta_max = std::max(eta_max, std::abs(coeffs.eta(i)));
    }

    if (report.first_violation) {
        report.classification = Markovianity::NonMarkovian;
    } else {
        const double wiggle =
            std::max(g1_max - g1_min, g2_max - g2_min) + (rwa ? 0.0 : eta_max);
        report.classification = wiggle <= 1e-8 * std::max(1.0, scale)
                                    ? Markovianity::Markovian
                                    : Markovianity::TimeDependentMarkovian;
    }
    return report;
}

}  // namespace oqnet
