#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace oqnet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex I{0.0, 1.0};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AsymmetricCoupling : Error {
    using Error::Error;
};
struct NonPositiveRadicand : Error {
    using Error::Error;
};
struct NotPositiveSemidefinite : Error {
    using Error::Error;
};
struct NonStarTopology : Error {
    using Error::Error;
};
struct IntegratorFailure : Error {
    using Error::Error;
};
struct NonUniformGrid : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct UnphysicalMoments : Error {
    using Error::Error;
};
struct UnphysicalInput : Error {
    using Error::Error;
};
struct DegenerateMap : Error {
    using Error::Error;
};
struct EmptyBand : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace oqnet
