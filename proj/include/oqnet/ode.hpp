#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "types.hpp"

namespace oqnet::detail {

/// Adaptive Dormand-Prince 5(4) for complex vector states. Steps are clamped
/// so every requested output time is hit exactly; `on_sample(i, t, y)` fires
/// once per output time, in order.
inline void integrate_rk45(
    const std::function<void(double, const ComplexVector&, ComplexVector&)>& rhs,
    ComplexVector y, const Vector& times, double abs_tol, double rel_tol,
    const std::function<void(int, double, const ComplexVector&)>& on_sample) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat, for the embedded 4th-order error estimate
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const int n = static_cast<int>(y.size());
    ComplexVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_try(n), err(n);

    double t = times(0);
    on_sample(0, t, y);
    rhs(t, y, k1);

    const double t_end = times(times.size() - 1);
    double h = std::min(1e-3, (t_end - t) / 10.0);
    int next_output = 1;
    int rejected_in_a_row = 0;

    while (next_output < times.size()) {
        const double t_target = times(next_output);
        bool clamped = false;
        if (t + h >= t_target) {
            h = t_target - t;
            clamped = true;
        }
        if (h <= std::abs(t) * 1e-15 + 1e-300)
            throw IntegratorFailure("step size underflow at t = " + std::to_string(t));

        y_try = y + h * a21 * k1;
        rhs(t + h / 5.0, y_try, k2);
        y_try = y + h * (a31 * k1 + a32 * k2);
        rhs(t + 3.0 * h / 10.0, y_try, k3);
        y_try = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + 4.0 * h / 5.0, y_try, k4);
        y_try = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + 8.0 * h / 9.0, y_try, k5);
        y_try = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, y_try, k6);
        y_try = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, y_try, k7);

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double scale = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y_try(i)));
            err_norm = std::max(err_norm, std::abs(err(i)) / scale);
        }
        // error-per-unit-time control, so accumulated drift stays ~ tol * t_end
        err_norm /= std::max(h, 1e-300);

        if (err_norm <= 1.0) {
            t += h;
            y.swap(y_try);
            k1.swap(k7);  // FSAL
            rejected_in_a_row = 0;
            if (clamped) {
                on_sample(next_output, t, y);
                ++next_output;
            }
        } else if (++rejected_in_a_row > 60) {
            throw IntegratorFailure("too many rejected steps at t = " + std::to_string(t));
        }

        const double factor =
            std::clamp(0.9 * std::pow(std::max(err_norm, 1e-10), -0.25), 0.2, 5.0);
        h = std::min(h * factor, t_end - t + 1e-12);
        if (!(h > 0.0)) h = 1e-12;
    }
}

}  // namespace oqnet::detail
