#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "network.hpp"
#include "propagator.hpp"
#include "types.hpp"

namespace oqnet {

/// Star-topology reservoir data for the single-mode memory-kernel path:
/// one system oscillator at system_frequency coupled with real strengths
/// reservoir_couplings(j) to reservoir modes at reservoir_frequencies(j).
struct KernelSpec {
    double system_frequency = 1.0;
    Vector reservoir_frequencies;
    Vector reservoir_couplings;

    int n_reservoir() const { return static_cast<int>(reservoir_frequencies.size()); }

    /// Extracts the star data from a renormalized network whose first mode is
    /// the system. Throws NonStarTopology if any reservoir pair couples.
    static KernelSpec from_network(const RenormalizedNetwork& net) {
        const int total = static_cast<int>(net.frequencies.size());
        KernelSpec spec;
        spec.system_frequency = net.frequencies(0);
        spec.reservoir_frequencies = net.frequencies.tail(total - 1);
        spec.reservoir_couplings = net.mode_couplings.row(0).tail(total - 1);
        for (int i = 1; i < total; ++i)
            for (int j = i + 1; j < total; ++j)
                if (net.mode_couplings(i, j) != 0.0)
                    throw NonStarTopology("reservoir modes couple to each other");
        return spec;
    }
};

/// Memory kernel h(t) = sum_j g_j^2 sin(w_j t).
inline double memory_kernel(const KernelSpec& kernel, double t) {
    double acc = 0.0;
    for (int j = 0; j < kernel.n_reservoir(); ++j) {
        const double g = kernel.reservoir_couplings(j);
        acc += g * g * std::sin(kernel.reservoir_frequencies(j) * t);
    }
    return acc;
}

/// Continuum memory kernel: integral of J(w) sin(w t) over [w_min, w_max] by
/// composite Simpson quadrature with n_panels panels.
inline double memory_kernel(const std::function<double(double)>& spectral_density,
                            double omega_min, double omega_max, double t,
                            int n_panels = 2048) {
    const double h = (omega_max - omega_min) / (2 * n_panels);
    double acc = spectral_density(omega_min) * std::sin(omega_min * t) +
                 spectral_density(omega_max) * std::sin(omega_max * t);
    for (int i = 1; i < 2 * n_panels; ++i) {
        const double w = omega_min + i * h;
        acc += (i % 2 ? 4.0 : 2.0) * spectral_density(w) * std::sin(w * t);
    }
    return acc * h / 3.0;
}

namespace detail {

/// One pass of the product-integration scheme on a uniform substep grid with
/// `substeps` steps per output interval. Eliminating the reservoir rows of
/// the propagator equations leaves the Volterra pair
///   dU1/dt =  i w1 U1 - 2i Int_0^t h(t-tau) S(tau) dtau,
///   dV1/dt = -i w1 V1 + 2i Int_0^t h(t-tau) S(tau) dtau,   S = U1 + V1,
/// and the reservoir-row entries follow by quadrature of their driven ODEs:
///   U_j(t) =  i g_j Int_0^t e^{+i w_j (t-tau)} S(tau) dtau,
///   V_j(t) = -i g_j Int_0^t e^{-i w_j (t-tau)} S(tau) dtau.
/// The memory integral is advanced by the trapezoidal rule; h(0) = 0 makes
/// the new endpoint weightless, so each step is explicit (Heun update for the
/// local terms). Samples are written at every output grid point.
inline void kernel_volterra_pass(const KernelSpec& kernel, const Vector& time_grid,
                                 int substeps, UVTrajectory& out) {
    const int n_out = static_cast<int>(time_grid.size());
    const int n_res = kernel.n_reservoir();
    const double dt = (time_grid(n_out - 1) - time_grid(0)) / ((n_out - 1) * substeps);
    const int n_steps = (n_out - 1) * substeps;
    const double w1 = kernel.system_frequency;

    // Kernel values on the substep grid, shared by every memory sum.
    std::vector<double> h_vals(n_steps + 1);
    for (int m = 0; m <= n_steps; ++m) h_vals[m] = memory_kernel(kernel, m * dt);

    std::vector<Complex> s_hist(n_steps + 1);
    Complex u1{1.0, 0.0};
    Complex v1{0.0, 0.0};
    s_hist[0] = u1 + v1;

    // One-step phase factors and running reservoir integrals I_j.
    ComplexVector phase(n_res), phase_conj(n_res);
    for (int j = 0; j < n_res; ++j) {
        phase(j) = std::exp(I * kernel.reservoir_frequencies(j) * dt);
        phase_conj(j) = std::conj(phase(j));
    }
    ComplexVector int_pos = ComplexVector::Zero(n_res);
    ComplexVector int_neg = ComplexVector::Zero(n_res);

    auto write_sample = [&](int out_idx) {
        ComplexMatrix u(1, 1 + n_res), v(1, 1 + n_res);
        u(0, 0) = u1;
        v(0, 0) = v1;
        for (int j = 0; j < n_res; ++j) {
            const double g = kernel.reservoir_couplings(j);
            u(0, 1 + j) = I * g * int_pos(j);
            v(0, 1 + j) = -I * g * int_neg(j);
        }
        out.u_blocks[out_idx] = u;
        out.v_blocks[out_idx] = v;
    };
    write_sample(0);

    // Trapezoidal memory integral at substep n (endpoint drops: h_vals[0]=0).
    auto memory_at = [&](int n) {
        Complex acc = 0.5 * h_vals[n] * s_hist[0];
        for (int m = 1; m < n; ++m) acc += h_vals[n - m] * s_hist[m];
        return dt * acc;
    };

    // The memory term never references the current-step unknowns (h(0) = 0),
    // so the free phase can be peeled off exactly with an integrating factor
    // and the driven part advanced by a trapezoid; the decoupled limit is
    // then exact to rounding.
    const Complex rot = std::exp(I * w1 * dt);
    for (int n = 0; n < n_steps; ++n) {
        const Complex drive_now = -2.0 * I * memory_at(n);
        const Complex drive_next = -2.0 * I * memory_at(n + 1);
        u1 = rot * u1 + 0.5 * dt * (rot * drive_now + drive_next);
        v1 = std::conj(rot) * v1 -
             0.5 * dt * (std::conj(rot) * drive_now + drive_next);
        s_hist[n + 1] = u1 + v1;

        // I_j(t+dt) = e^{+i w_j dt} I_j(t) + trapezoid over the new interval.
        for (int j = 0; j < n_res; ++j) {
            int_pos(j) = phase(j) * int_pos(j) +
                         0.5 * dt * (phase(j) * s_hist[n] + s_hist[n + 1]);
            int_neg(j) = phase_conj(j) * int_neg(j) +
                         0.5 * dt * (phase_conj(j) * s_hist[n] + s_hist[n + 1]);
        }
        if ((n + 1) % substeps == 0) write_sample((n + 1) / substeps);
    }
}

}  // namespace detail

/// Solves the single-mode Volterra pair on a uniform time grid and
/// reconstructs the reservoir-row entries, returning a system-row trajectory
/// over all 1 + N source modes. The product-integration step is
/// min(0.01 / w_max, grid spacing), rounded down to divide the grid spacing;
/// a second pass at half the step feeds a Richardson extrapolation, lifting
/// the scheme to fourth-order accuracy on the output grid.
inline UVTrajectory evolve_single_mode_kernel(const KernelSpec& kernel,
                                              const Vector& time_grid,
                                              double tol = 1e-8) {
    const int n_out = static_cast<int>(time_grid.size());
    if (n_out < 2 || time_grid(0) != 0.0)
        throw NonUniformGrid("time grid must start at 0 with at least two points");
    const double spacing = time_grid(1) - time_grid(0);
    if (spacing <= 0.0) throw NonUniformGrid("time grid must be increasing");
    for (int i = 1; i + 1 < n_out; ++i)
        if (std::abs((time_grid(i + 1) - time_grid(i)) - spacing) > 1e-9 * spacing)
            throw NonUniformGrid("Volterra discretization requires a uniform grid");
    (void)tol;

    double w_max = kernel.system_frequency;
    for (int j = 0; j < kernel.n_reservoir(); ++j)
        w_max = std::max(w_max, kernel.reservoir_frequencies(j));
    const double target = std::min(0.01 / w_max, spacing);
    const int substeps = static_cast<int>(std::ceil(spacing / target));

    UVTrajectory coarse, fine;
    coarse.time_grid = fine.time_grid = time_grid;
    coarse.n_system = fine.n_system = 1;
    coarse.u_blocks.resize(n_out);
    coarse.v_blocks.resize(n_out);
    fine.u_blocks.resize(n_out);
    fine.v_blocks.resize(n_out);
    detail::kernel_volterra_pass(kernel, time_grid, substeps, coarse);
    detail::kernel_volterra_pass(kernel, time_grid, 2 * substeps, fine);

    UVTrajectory out = fine;
    for (int i = 0; i < n_out; ++i) {
        out.u_blocks[i] = (4.0 * fine.u_blocks[i] - coarse.u_blocks[i]) / 3.0;
        out.v_blocks[i] = (4.0 * fine.v_blocks[i] - coarse.v_blocks[i]) / 3.0;
    }
    return out;
}

}  // namespace oqnet
