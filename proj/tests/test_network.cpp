#include <random>

#include "doctest.h"
#include "oqnet/network.hpp"
#include "test_helpers.hpp"

using namespace oqnet;

TEST_CASE("uncoupled network keeps its bare frequencies") {
    NetworkSpec spec;
    spec.n_system = 1;
    spec.n_reservoir = 1;
    spec.masses = Vector::Ones(2);
    spec.bare_frequencies = Vector{{1.0, 2.0}};
    spec.couplings = Matrix::Zero(2, 2);

    const auto net = renormalize(spec);
    CHECK(net.frequencies(0) == doctest::Approx(1.0));
    CHECK(net.frequencies(1) == doctest::Approx(2.0));
    CHECK(net.mode_couplings.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-mode renormalization by direct substitution") {
    NetworkSpec spec;
    spec.n_system = 1;
    spec.n_reservoir = 1;
    spec.masses = Vector::Ones(2);
    spec.bare_frequencies = Vector::Ones(2);
    spec.couplings = Matrix{{0.0, 3.0}, {3.0, 0.0}};

    const auto net = renormalize(spec);
    CHECK(net.frequencies(0) == doctest::Approx(2.0));
    CHECK(net.frequencies(1) == doctest::Approx(2.0));
    CHECK(net.mode_couplings(0, 1) == doctest::Approx(-3.0 / 4.0));
    CHECK(net.mode_couplings(1, 0) == doctest::Approx(-3.0 / 4.0));
}

TEST_CASE("validate flags asymmetric couplings") {
    NetworkSpec spec;
    spec.n_system = 1;
    spec.n_reservoir = 1;
    spec.masses = Vector::Ones(2);
    spec.bare_frequencies = Vector::Ones(2);
    spec.couplings = Matrix{{0.0, 0.5}, {-0.5, 0.0}};
    CHECK(validate(spec).has(SpecIssue::AsymmetricCoupling));
}

TEST_CASE("validate flags an indefinite potential") {
    // Strong negative coupling drives the lowest normal frequency negative.
    NetworkSpec spec;
    spec.n_system = 1;
    spec.n_reservoir = 1;
    spec.masses = Vector::Ones(2);
    spec.bare_frequencies = Vector{{0.1, 0.1}};
    spec.couplings = Matrix{{0.0, -3.0}, {-3.0, 0.0}};

    Eigen::SelfAdjointEigenSolver<Matrix> eig(mass_weighted_potential(spec));
    REQUIRE(eig.eigenvalues().minCoeff() < 0.0);
    CHECK(validate(spec).has(SpecIssue::NotPositiveSemidefinite));
}

TEST_CASE("validate accepts any uncoupled positive network") {
    NetworkSpec spec;
    spec.n_system = 2;
    spec.n_reservoir = 3;
    spec.masses = Vector{{1.0, 2.0, 0.3, 0.7, 1.5}};
    spec.bare_frequencies = Vector{{0.5, 1.0, 2.0, 3.0, 4.0}};
    spec.couplings = Matrix::Zero(5, 5);
    CHECK(validate(spec).ok());
}

TEST_CASE("coupling round-trip recovers lambda from g") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = testing::random_network(rng, 2, 4);
        if (!validate(spec).ok()) continue;
        const auto net = renormalize(spec);
        const int n = spec.total_modes();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double lam = -net.mode_couplings(i, j) * 2.0 *
                                   std::sqrt(spec.masses(i) * spec.masses(j) *
                                             net.frequencies(i) * net.frequencies(j));
                CHECK(lam == doctest::Approx(spec.couplings(i, j)).epsilon(1e-12));
            }
    }
}

TEST_CASE("mode-operator and position pictures share normal frequencies") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = testing::random_network(rng, 3, 3);
        if (!validate(spec).ok()) continue;
        const auto net = renormalize(spec);
        const Vector sqrt_w = net.frequencies.array().sqrt();
        const Matrix quad =
            sqrt_w.asDiagonal() *
            (Matrix(net.frequencies.asDiagonal()) + 2.0 * net.mode_couplings) *
            sqrt_w.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> mode_eig(quad, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Matrix> pos_eig(mass_weighted_potential(spec),
                                                      Eigen::EigenvaluesOnly);
        CHECK((mode_eig.eigenvalues() - pos_eig.eigenvalues()).cwiseAbs().maxCoeff() <
              1e-10 * pos_eig.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("single_mode_scaled: decoupled and two-mode limits") {
    Vector res_freq = Vector::Ones(3) * 1.7;
    const auto uncoupled = single_mode_scaled(1.0, 1.0, 1.3, res_freq, Vector(Vector::Zero(3)));
    CHECK(uncoupled.frequencies(0) == doctest::Approx(1.3));
    CHECK(uncoupled.mode_couplings.cwiseAbs().maxCoeff() == 0.0);

    const auto two = single_mode_scaled(1.0, 1.0, 1.0, Vector(Vector::Ones(1)), Vector(Vector::Ones(1) * 3.0));
    CHECK(two.frequencies(0) == doctest::Approx(2.0));
    CHECK(two.frequencies(1) == doctest::Approx(2.0));
    CHECK(two.mode_couplings(0, 1) == doctest::Approx(-3.0 / 4.0));
}

TEST_CASE("single_mode_scaled agrees with generic renormalize on the star spec") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> freq(0.5, 2.0);
    Vector res_freq(6), lam(6);
    for (int j = 0; j < 6; ++j) {
        res_freq(j) = freq(rng);
        lam(j) = 0.05 * freq(rng);
    }
    const double central_mass = 100.0, reservoir_mass = 1.0;
    const auto direct = single_mode_scaled(central_mass, reservoir_mass, 1.0, res_freq, lam);
    const auto via_spec =
        renormalize(star_network_spec(central_mass, reservoir_mass, 1.0, res_freq, lam));
    CHECK((direct.frequencies - via_spec.frequencies).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((direct.mode_couplings - via_spec.mode_couplings).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single_mode_scaled rejects off-star couplings") {
    Matrix couplings = Matrix::Zero(3, 3);
    couplings(1, 2) = couplings(2, 1) = 0.1;
    CHECK_THROWS_AS(single_mode_scaled(1.0, 1.0, 1.0, Vector(Vector::Ones(2)), couplings),
                    NonStarTopology);
}
