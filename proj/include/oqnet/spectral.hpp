#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "kernel.hpp"
#include "network.hpp"
#include "types.hpp"

namespace oqnet {

enum class SpectralFamily { Ohmic, Lorentzian, Flat, SingleMode };
enum class BinScheme { Linear, Log };

/// Parametric reservoir spectral density J(w) plus the discretization recipe
/// used to turn it into a finite star network:
///   ohmic:       J(w) = coupling_scale * w * exp(-w / cutoff)
///   lorentzian:  J(w) = coupling_scale * width^2 / ((w - center)^2 + width^2)
///   flat:        J(w) = coupling_scale
///   single_mode: one reservoir mode at mode_frequency with coupling
///                coupling_scale, exactly (no quadrature).
/// Discretization covers [omega_min, omega_max] with n_modes bins, linear or
/// logarithmic in w. Each bin contributes one mode with g_j^2 = int_bin J dw
/// at the J-weighted mean frequency of the bin.
struct SpectralPreset {
    SpectralFamily family = SpectralFamily::Ohmic;
    double coupling_scale = 0.01;
    double cutoff = 1.0;     // ohmic
    double center = 1.0;     // lorentzian
    double width = 0.1;      // lorentzian
    double mode_frequency = 1.0;  // single_mode
    int n_modes = 200;
    BinScheme scheme = BinScheme::Linear;
    double omega_min = 1e-3;
    double omega_max = 10.0;
};

/// Ohmic preset with the library defaults: 200 linear bins on
/// [1e-3 * omega_c, 10 * omega_c].
inline SpectralPreset ohmic_preset(double kappa, double omega_c) {
    SpectralPreset p;
    p.family = SpectralFamily::Ohmic;
    p.coupling_scale = kappa;
    p.cutoff = omega_c;
    p.omega_min = 1e-3 * omega_c;
    p.omega_max = 10.0 * omega_c;
    return p;
}

/// Pointwise J(w) for the continuous families.
inline double spectral_density(const SpectralPreset& preset, double w) {
    switch (preset.family) {
        case SpectralFamily::Ohmic:
            return preset.coupling_scale * w * std::exp(-w / preset.cutoff);
        case SpectralFamily::Lorentzian: {
            const double d = w - preset.center;
            return preset.coupling_scale * preset.width * preset.width /
                   (d * d + preset.width * preset.width);
        }
        case SpectralFamily::Flat:
            return preset.coupling_scale;
        case SpectralFamily::SingleMode:
            throw ConfigError("single_mode presets have no continuous spectral density");
    }
    return 0.0;
}

/// Longest time for which the n_modes discretization resolves the continuum:
/// 2 pi n_modes / (omega_max - omega_min), after which Poincare recurrences
/// of the finite mode comb appear in the memory kernel.
inline double recurrence_horizon(const SpectralPreset& preset) {
    if (preset.family == SpectralFamily::SingleMode)
        return std::numeric_limits<double>::infinity();
    return 2.0 * M_PI * preset.n_modes / (preset.omega_max - preset.omega_min);
}

/// Star reservoir produced by discretization, in both representations: the
/// kernel form (frequencies and couplings of the renormalized picture) and an
/// equivalent position-coupled network whose renormalize() reproduces the
/// kernel exactly.
struct DiscretizedReservoir {
    KernelSpec kernel;
    NetworkSpec network;
};

namespace detail {

/// Composite-Simpson int_a^b f dw with n panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / (2 * n);
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

}  // namespace detail

/// Discretizes the preset's spectral density into a star reservoir around a
/// system mode of renormalized frequency `system_frequency` and mass
/// `system_mass` (reservoir masses are 1). The network inversion solves
///   lambda_1j = -2 g_j sqrt(system_mass * w1 * w_j),
///   bare_j^2 = w_j^2 - lambda_1j,    bare_1^2 = w1^2 - sum_j lambda_1j / mu,
/// so that renormalizing the returned network reproduces the kernel data.
inline DiscretizedReservoir discretize_spectral_density(const SpectralPreset& preset,
                                                        double system_frequency = 1.0,
                                                        double system_mass = 1.0) {
    if (preset.n_modes < 1) throw ConfigError("discretization needs n_modes >= 1");
    if (system_frequency <= 0.0 || system_mass <= 0.0)
        throw ConfigError("system frequency and mass must be positive");

    Vector freqs, gs;
    if (preset.family == SpectralFamily::SingleMode) {
        freqs = Vector::Constant(1, preset.mode_frequency);
        gs = Vector::Constant(1, preset.coupling_scale);
        if (preset.mode_frequency <= 0.0)
            throw ConfigError("single_mode frequency must be positive");
    } else {
        if (preset.omega_min >= preset.omega_max)
            throw EmptyBand("spectral band is empty: omega_min >= omega_max");
        if (preset.omega_min <= 0.0) throw ConfigError("omega_min must be positive");

        const int n = preset.n_modes;
        freqs.resize(n);
        gs.resize(n);
        auto j_fn = [&](double w) { return spectral_density(preset, w); };
        auto wj_fn = [&](double w) { return w * spectral_density(preset, w); };
        // Bin edges in the chosen coordinate (w or log w).
        auto edge = [&](int i) {
            const double s = static_cast<double>(i) / n;
            if (preset.scheme == BinScheme::Log)
                return preset.omega_min *
                       std::pow(preset.omega_max / preset.omega_min, s);
            return preset.omega_min + s * (preset.omega_max - preset.omega_min);
        };
        for (int j = 0; j < n; ++j) {
            const double a = edge(j), b = edge(j + 1);
            const double weight = detail::simpson(j_fn, a, b, 8);
            const double first = detail::simpson(wj_fn, a, b, 8);
            gs(j) = std::sqrt(std::max(weight, 0.0));
            freqs(j) = weight > 0.0 ? first / weight : 0.5 * (a + b);
        }
    }

    DiscretizedReservoir out;
    out.kernel.system_frequency = system_frequency;
    out.kernel.reservoir_frequencies = freqs;
    out.kernel.reservoir_couplings = gs;

    const int n_res = static_cast<int>(freqs.size());
    const Vector lambda =
        (-2.0 * gs.array() *
         (system_mass * system_frequency * freqs.array()).sqrt())
            .matrix();
    Vector bare_res(n_res);
    for (int j = 0; j < n_res; ++j) {
        const double radicand = freqs(j) * freqs(j) - lambda(j);
        if (radicand <= 0.0)
            throw NonPositiveRadicand("bare reservoir frequency is not positive for mode " +
                                      std::to_string(j));
        bare_res(j) = std::sqrt(radicand);
    }
    const double bare1_sq =
        system_frequency * system_frequency - lambda.sum() / system_mass;
    if (bare1_sq <= 0.0)
        throw NonPositiveRadicand("bare system frequency is not positive");

    out.network = star_network_spec(system_mass, 1.0, std::sqrt(bare1_sq), bare_res, lambda);
    return out;
}

}  // namespace oqnet
