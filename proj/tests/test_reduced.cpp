#include <cmath>
#include <random>

#include "doctest.h"
#include "oqnet/gaussian.hpp"
#include "oqnet/reduced.hpp"
#include "oracle_helpers.hpp"
#include "test_helpers.hpp"

using namespace oqnet;

namespace {

Vector short_grid(double t_max = 6.0, int n = 25) {
    return Vector::LinSpaced(n, 0.0, t_max);
}

}  // namespace

TEST_CASE("noise functions vanish at t = 0 and keep their symmetries") {
    std::mt19937_64 rng(11);
    const NetworkSpec spec = testing::random_network(rng, 2, 5);
    const UVTrajectory uv = evolve_uv(renormalize(spec), short_grid(), RowSpan::SystemOnly, 2);
    const auto [a0, b0] = noise_zero_point(uv);
    CHECK(a0[0].cwiseAbs().maxCoeff() < 1e-14);
    CHECK(b0[0].cwiseAbs().maxCoeff() < 1e-14);
    for (size_t i = 0; i < a0.size(); ++i) {
        CHECK((a0[i] - a0[i].adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((b0[i] - b0[i].transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const ReservoirMoments res = ReservoirMoments::thermal(Vector::Constant(5, 1.5));
    const auto [ath, bth] = noise_thermal(uv, res);
    CHECK(ath[0].cwiseAbs().maxCoeff() < 1e-14);
    for (size_t i = 0; i < ath.size(); ++i) {
        CHECK((ath[i] - ath[i].adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((bth[i] - bth[i].transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("RWA trajectories have no anomalous noise and keep the vacuum fixed") {
    std::mt19937_64 rng(12);
    const NetworkSpec spec = testing::random_star(rng, 6);
    const UVTrajectory uv = evolve_uv(renormalize(spec), short_grid(10.0, 41),
                                      RowSpan::SystemOnly, 1, CouplingMode::Rwa);
    const auto [a0, b0] = noise_zero_point(uv);
    for (int i = 0; i < uv.n_points(); ++i) {
        CHECK(b0[i].cwiseAbs().maxCoeff() < 1e-12);
        const double fixed_point = std::norm(uv.u_blocks[i](0, 0)) + 2.0 * a0[i](0, 0).real();
        CHECK(fixed_point == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("zero-temperature moments give zero thermal noise") {
    std::mt19937_64 rng(13);
    const NetworkSpec spec = testing::random_star(rng, 4);
    const UVTrajectory uv = evolve_uv(renormalize(spec), short_grid());
    const auto [ath, bth] = noise_thermal(uv, ReservoirMoments::zero_temperature(4));
    for (int i = 0; i < uv.n_points(); ++i) {
        CHECK(ath[i].cwiseAbs().maxCoeff() == 0.0);
        CHECK(bth[i].cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("zero-point noise matches the traced full-universe covariance") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 4; ++trial) {
        const int m_sys = 1 + trial % 2;
        const NetworkSpec spec = testing::random_network(rng, m_sys, 4);
        const Vector grid = short_grid(5.0, 11);
        const UVTrajectory uv =
            evolve_uv(renormalize(spec), grid, RowSpan::SystemOnly, m_sys);
        const NoiseKernels kernels =
            make_noise_kernels(uv, ReservoirMoments::zero_temperature(4));
        const GaussianState vac = GaussianState::vacuum(m_sys);
        for (int i : {3, 7, 10}) {
            const GaussianState reduced = evolve_state(vac, uv, kernels, i);
            const Matrix oracle = testing::traced_universe_covariance(
                spec, vac, ReservoirMoments::zero_temperature(4), grid(i));
            CHECK((reduced.covariance - oracle).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("thermal and squeezed noise match the traced full-universe covariance") {
    std::mt19937_64 rng(15);
    const NetworkSpec spec = testing::random_network(rng, 1, 5);
    const Vector grid = short_grid(4.0, 9);
    const UVTrajectory uv = evolve_uv(renormalize(spec), grid, RowSpan::SystemOnly, 1);
    const GaussianState vac = GaussianState::vacuum(1);

    std::vector<ReservoirMoments> states;
    states.push_back(ReservoirMoments::thermal(Vector::Constant(5, 1.5)));
    states.push_back(ReservoirMoments::thermal(2.3, Vector::LinSpaced(5, 0.8, 2.0)));
    states.push_back(
        ReservoirMoments::squeezed(Vector::Constant(5, 0.4), Vector::LinSpaced(5, 0.0, 2.0)));
    // Correlated occupations: rotate a thermal spectrum by a random unitary.
    ComplexMatrix rot = ComplexMatrix::Random(5, 5);
    const Eigen::HouseholderQR<ComplexMatrix> qr(rot);
    const ComplexMatrix q = qr.householderQ();
    ReservoirMoments correlated = ReservoirMoments::zero_temperature(5);
    correlated.occupation =
        q * Vector::LinSpaced(5, 0.1, 2.0).cast<Complex>().asDiagonal() * q.adjoint();
    states.push_back(correlated);

    for (const auto& res : states) {
        const NoiseKernels kernels = make_noise_kernels(uv, res);
        for (int i : {4, 8}) {
            const GaussianState reduced = evolve_state(vac, uv, kernels, i);
            const Matrix oracle =
                testing::traced_universe_covariance(spec, vac, res, grid(i));
            CHECK((reduced.covariance - oracle).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("reduced characteristic function is normalized and matches Gaussian data") {
    std::mt19937_64 rng(16);
    const NetworkSpec spec = testing::random_star(rng, 5);
    const Vector grid = short_grid(5.0, 11);
    const UVTrajectory uv = evolve_uv(renormalize(spec), grid, RowSpan::SystemOnly, 1);
    const ReservoirMoments res = ReservoirMoments::thermal(Vector::Constant(5, 0.7));
    const NoiseKernels kernels = make_noise_kernels(uv, res);

    GaussianState initial = GaussianState::vacuum(1);
    initial.mean(0) = Complex{0.8, -0.3};
    auto chi0 = [&](const ComplexVector& beta) {
        return testing::gaussian_char_fn(initial, beta);
    };

    ComplexVector zero = ComplexVector::Zero(1);
    CHECK(reduced_char_fn(zero, 7, chi0, uv, kernels) == Complex{1.0, 0.0});

    ComplexVector probe(1);
    probe(0) = Complex{0.5, 0.2};
    CHECK(std::abs(reduced_char_fn(probe, 0, chi0, uv, kernels) - chi0(probe)) < 1e-14);

    for (int i : {3, 7, 10}) {
        const GaussianState evolved = evolve_state(initial, uv, kernels, i);
        for (Complex b : {Complex{0.3, 0.0}, Complex{-0.2, 0.6}, Complex{1.1, -0.4}}) {
            probe(0) = b;
            const Complex via_map = reduced_char_fn(probe, i, chi0, uv, kernels);
            const Complex via_state = testing::gaussian_char_fn(evolved, probe);
            CHECK(std::abs(via_map - via_state) < 1e-10);
        }
    }
}

TEST_CASE("reduced covariances stay physical at every grid point") {
    std::mt19937_64 rng(17);
    const NetworkSpec spec = testing::random_star(rng, 7, 0.45);
    const UVTrajectory uv =
        evolve_uv(renormalize(spec), short_grid(15.0, 61), RowSpan::SystemOnly, 1);
    const NoiseKernels kernels =
        make_noise_kernels(uv, ReservoirMoments::squeezed(Vector::Constant(7, 0.3),
                                                          Vector::Constant(7, 1.2)));
    GaussianState squeezed = GaussianState::vacuum(1);
    squeezed.covariance(0, 0) = 0.5 * std::exp(1.0);
    squeezed.covariance(1, 1) = 0.5 * std::exp(-1.0);
    for (int i = 0; i < uv.n_points(); ++i) {
        const auto report = physicality_check(evolve_state(squeezed, uv, kernels, i));
        CHECK(report.margin >= -1e-8);
    }
}

TEST_CASE("unphysical or mismatched moments are rejected") {
    std::mt19937_64 rng(18);
    const NetworkSpec spec = testing::random_star(rng, 3);
    const UVTrajectory uv = evolve_uv(renormalize(spec), short_grid());

    ReservoirMoments bad = ReservoirMoments::zero_temperature(3);
    bad.anomalous(0, 0) = Complex{2.0, 0.0};  // |<aa>| above the n = 0 bound
    CHECK_THROWS_AS(noise_thermal(uv, bad), UnphysicalMoments);

    ReservoirMoments wrong_size = ReservoirMoments::thermal(Vector::Constant(2, 1.0));
    CHECK_THROWS_AS(noise_thermal(uv, wrong_size), ShapeMismatch);
}
