#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "types.hpp"

namespace oqnet {

/// Oscillator network in the position-coupled picture: masses m_k, bare
/// frequencies varpi_k and a symmetric coupling matrix lambda_kj acting on
/// (q_k - q_j)^2. The first n_system modes form the system of interest.
struct NetworkSpec {
    int n_system = 1;
    int n_reservoir = 0;
    Vector masses;
    Vector bare_frequencies;
    Matrix couplings;

    int total_modes() const { return n_system + n_reservoir; }
};

/// Same network after absorbing the diagonal coupling shifts into the mode
/// frequencies omega_k; g_kj couples the quadratures (a_k + a_k^dag).
struct RenormalizedNetwork {
    Vector frequencies;
    Matrix mode_couplings;

    int total_modes() const { return static_cast<int>(frequencies.size()); }
};

enum class SpecIssue {
    BadDimensions,
    NonPositiveMass,
    NonPositiveFrequency,
    AsymmetricCoupling,
    NonzeroDiagonal,
    NotPositiveSemidefinite,
};

struct ValidationReport {
    std::vector<std::pair<SpecIssue, std::string>> issues;

    bool ok() const { return issues.empty(); }
    bool has(SpecIssue which) const {
        for (const auto& [issue, msg] : issues)
            if (issue == which) return true;
        return false;
    }
};

/// Position-position quadratic form of the network Hamiltonian:
/// K_kk = m_k varpi_k^2 + sum_j lambda_kj, K_kj = -lambda_kj.
inline Matrix potential_matrix(const NetworkSpec& spec) {
    const int n = spec.total_modes();
    Matrix k = -spec.couplings;
    for (int i = 0; i < n; ++i) {
        k(i, i) = spec.masses(i) * spec.bare_frequencies(i) * spec.bare_frequencies(i) +
                  spec.couplings.row(i).sum();
    }
    return k;
}

/// Mass-weighted form M^{-1/2} K M^{-1/2}; its eigenvalues are the squared
/// normal-mode frequencies.
inline Matrix mass_weighted_potential(const NetworkSpec& spec) {
    const Vector inv_sqrt_m = spec.masses.array().rsqrt();
    return inv_sqrt_m.asDiagonal() * potential_matrix(spec) * inv_sqrt_m.asDiagonal();
}

inline ValidationReport validate(const NetworkSpec& spec) {
    ValidationReport report;
    const int n = spec.total_modes();
    auto flag = [&](SpecIssue issue, std::string msg) {
        report.issues.emplace_back(issue, std::move(msg));
    };

    if (spec.n_system < 1 || spec.n_reservoir < 0) {
        flag(SpecIssue::BadDimensions, "need n_system >= 1 and n_reservoir >= 0");
        return report;
    }
    if (spec.masses.size() != n || spec.bare_frequencies.size() != n ||
        spec.couplings.rows() != n || spec.couplings.cols() != n) {
        flag(SpecIssue::BadDimensions, "field sizes inconsistent with n_system + n_reservoir");
        return report;
    }
    if ((spec.masses.array() <= 0.0).any())
        flag(SpecIssue::NonPositiveMass, "all masses must be strictly positive");
    if ((spec.bare_frequencies.array() <= 0.0).any())
        flag(SpecIssue::NonPositiveFrequency, "all bare frequencies must be strictly positive");
    if (!spec.couplings.isApprox(spec.couplings.transpose(), 0.0))
        flag(SpecIssue::AsymmetricCoupling, "coupling matrix must be exactly symmetric");
    if (spec.couplings.diagonal().cwiseAbs().maxCoeff() != 0.0)
        flag(SpecIssue::NonzeroDiagonal, "coupling matrix must have zero diagonal");

    if (report.ok()) {
        const Matrix k = mass_weighted_potential(spec);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);
        const double tol = 1e-10 * k.norm();
        if (eig.eigenvalues().minCoeff() < -tol)
            flag(SpecIssue::NotPositiveSemidefinite,
                 "potential quadratic form has a negative eigenvalue");
    }
    return report;
}

/// omega_k = sqrt(varpi_k^2 + (1/m_k) sum_{j != k} lambda_kj),
/// g_kj = -lambda_kj / (2 sqrt(m_k m_j omega_k omega_j)); the sign carries the
/// attractive q_k q_j cross term of the position coupling.
inline RenormalizedNetwork renormalize(const NetworkSpec& spec) {
    const int n = spec.total_modes();
    if (spec.couplings.rows() != n || spec.couplings.cols() != n)
        throw ShapeMismatch("coupling matrix shape does not match mode count");
    if (!spec.couplings.isApprox(spec.couplings.transpose(), 0.0))
        throw AsymmetricCoupling("coupling matrix must be symmetric");

    RenormalizedNetwork net;
    net.frequencies.resize(n);
    for (int k = 0; k < n; ++k) {
        const double radicand =
            spec.bare_frequencies(k) * spec.bare_frequencies(k) +
            spec.couplings.row(k).sum() / spec.masses(k);
        if (radicand <= 0.0)
            throw NonPositiveRadicand("renormalized frequency squared is not positive for mode " +
                                      std::to_string(k));
        net.frequencies(k) = std::sqrt(radicand);
    }
    const Vector scale = (spec.masses.array() * net.frequencies.array()).sqrt().inverse();
    net.mode_couplings = -0.5 * scale.asDiagonal() * spec.couplings * scale.asDiagonal();
    return net;
}

/// Star-network constructor with a heavy central oscillator (mass `central_mass`)
/// and light reservoir modes (mass `reservoir_mass`), applying the mass-scaled
/// renormalization directly.
inline RenormalizedNetwork single_mode_scaled(double central_mass, double reservoir_mass,
                                              double system_bare_frequency,
                                              const Vector& reservoir_bare_frequencies,
                                              const Vector& star_couplings) {
    const int n_res = static_cast<int>(reservoir_bare_frequencies.size());
    if (star_couplings.size() != n_res)
        throw ShapeMismatch("star coupling vector must match reservoir frequency count");

    RenormalizedNetwork net;
    net.frequencies.resize(n_res + 1);
    net.mode_couplings = Matrix::Zero(n_res + 1, n_res + 1);

    const double w1_sq = system_bare_frequency * system_bare_frequency +
                         star_couplings.sum() / central_mass;
    if (w1_sq <= 0.0) throw NonPositiveRadicand("central renormalized frequency is not positive");
    net.frequencies(0) = std::sqrt(w1_sq);

    for (int j = 0; j < n_res; ++j) {
        const double wj_sq = reservoir_bare_frequencies(j) * reservoir_bare_frequencies(j) +
                             star_couplings(j) / reservoir_mass;
        if (wj_sq <= 0.0)
            throw NonPositiveRadicand("reservoir renormalized frequency is not positive for mode " +
                                      std::to_string(j));
        net.frequencies(j + 1) = std::sqrt(wj_sq);
        const double g = -star_couplings(j) /
                         (2.0 * std::sqrt(central_mass * reservoir_mass * net.frequencies(0) *
                                          net.frequencies(j + 1)));
        net.mode_couplings(0, j + 1) = g;
        net.mode_couplings(j + 1, 0) = g;
    }
    return net;
}

/// Overload taking a full coupling matrix; rejects any coupling off the star.
inline RenormalizedNetwork single_mode_scaled(double central_mass, double reservoir_mass,
                                              double system_bare_frequency,
                                              const Vector& reservoir_bare_frequencies,
                                              const Matrix& couplings) {
    const int n = static_cast<int>(reservoir_bare_frequencies.size()) + 1;
    if (couplings.rows() != n || couplings.cols() != n)
        throw ShapeMismatch("coupling matrix shape does not match mode count");
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j)
            if (couplings(i, j) != 0.0)
                throw NonStarTopology("coupling outside the first row/column");
    return single_mode_scaled(central_mass, reservoir_mass, system_bare_frequency,
                              reservoir_bare_frequencies, Vector(couplings.row(0).tail(n - 1)));
}

/// Equivalent NetworkSpec for a star network, for oracle-path consumption.
inline NetworkSpec star_network_spec(double central_mass, double reservoir_mass,
                                     double system_bare_frequency,
                                     const Vector& reservoir_bare_frequencies,
                                     const Vector& star_couplings) {
    const int n_res = static_cast<int>(reservoir_bare_frequencies.size());
    NetworkSpec spec;
    spec.n_system = 1;
    spec.n_reservoir = n_res;
    spec.masses.resize(n_res + 1);
    spec.masses(0) = central_mass;
    spec.masses.tail(n_res).setConstant(reservoir_mass);
    spec.bare_frequencies.resize(n_res + 1);
    spec.bare_frequencies(0) = system_bare_frequency;
    spec.bare_frequencies.tail(n_res) = reservoir_bare_frequencies;
    spec.couplings = Matrix::Zero(n_res + 1, n_res + 1);
    spec.couplings.row(0).tail(n_res) = star_couplings;
    spec.couplings.col(0).tail(n_res) = star_couplings;
    return spec;
}

}  // namespace oqnet
