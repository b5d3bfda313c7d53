#pragma once

#include <random>

#include "oqnet/network.hpp"
#include "oqnet/types.hpp"

namespace oqnet::testing {

/// Random connected network with couplings weak enough to stay physical.
inline NetworkSpec random_network(std::mt19937_64& rng, int n_system, int n_reservoir,
                                  double coupling_scale = 0.2) {
    std::uniform_real_distribution<double> freq(0.8, 3.0);
    std::uniform_real_distribution<double> mass(0.5, 2.0);
    std::uniform_real_distribution<double> coup(-coupling_scale, coupling_scale);
    const int n = n_system + n_reservoir;
    NetworkSpec spec;
    spec.n_system = n_system;
    spec.n_reservoir = n_reservoir;
    spec.masses.resize(n);
    spec.bare_frequencies.resize(n);
    spec.couplings = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        spec.masses(i) = mass(rng);
        spec.bare_frequencies(i) = freq(rng);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double lam = coup(rng) * spec.masses(i) * spec.bare_frequencies(i) *
                               spec.masses(j) * spec.bare_frequencies(j);
            spec.couplings(i, j) = lam;
            spec.couplings(j, i) = lam;
        }
    return spec;
}

/// Random star network around a single system mode.
inline NetworkSpec random_star(std::mt19937_64& rng, int n_reservoir, double g_over_w1 = 0.3) {
    std::uniform_real_distribution<double> freq(0.7, 2.5);
    std::uniform_real_distribution<double> coup(0.1, 1.0);
    Vector res_freq(n_reservoir), lam(n_reservoir);
    const double w1_bare = 1.0;
    for (int j = 0; j < n_reservoir; ++j) {
        res_freq(j) = freq(rng);
        // lambda sized so g_j / omega_1 stays below g_over_w1
        lam(j) = coup(rng) * 2.0 * g_over_w1 * w1_bare * res_freq(j);
    }
    return star_network_spec(1.0, 1.0, w1_bare, res_freq, lam);
}

}  // namespace oqnet::testing
