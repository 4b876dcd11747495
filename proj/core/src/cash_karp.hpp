#pragma once

#include <cstddef>

// Cash-Karp coefficients and the per-element stage combinations, shared by the
// generic stepper and the row-pipelined field stepper so both round alike.

namespace nanorod::cash_karp {

inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 3.0 / 10.0, a42 = -9.0 / 10.0, a43 = 6.0 / 5.0;
inline constexpr double a51 = -11.0 / 54.0, a52 = 5.0 / 2.0, a53 = -70.0 / 27.0,
                        a54 = 35.0 / 27.0;
inline constexpr double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0, a63 = 575.0 / 13824.0,
                        a64 = 44275.0 / 110592.0, a65 = 253.0 / 4096.0;
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 3.0 / 5.0, c5 = 1.0, c6 = 7.0 / 8.0;
inline constexpr double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0, b4 = 125.0 / 594.0,
                        b6 = 512.0 / 1771.0;
// Fifth- minus fourth-order weights.
inline constexpr double e1 = b1 - 2825.0 / 27648.0, e3 = b3 - 18575.0 / 48384.0,
                        e4 = b4 - 13525.0 / 55296.0, e5 = -277.0 / 14336.0, e6 = b6 - 0.25;

// Input of stage S + 1 from the first S slopes, elementwise.
template <int S>
inline double stage_input(double y, double dt, const double* const k[6], std::size_t x) {
    if constexpr (S == 1) {
        return y + dt * (a21 * k[0][x]);
    } else if constexpr (S == 2) {
        return y + dt * (a31 * k[0][x] + a32 * k[1][x]);
    } else if constexpr (S == 3) {
        return y + dt * (a41 * k[0][x] + a42 * k[1][x] + a43 * k[2][x]);
    } else if constexpr (S == 4) {
        return y + dt * (a51 * k[0][x] + a52 * k[1][x] + a53 * k[2][x] + a54 * k[3][x]);
    } else {
        static_assert(S == 5);
        return y + dt * (a61 * k[0][x] + a62 * k[1][x] + a63 * k[2][x] + a64 * k[3][x] +
                         a65 * k[4][x]);
    }
}

inline double solution(double y, double dt, const double* const k[6], std::size_t x) {
    return y + dt * (b1 * k[0][x] + b3 * k[2][x] + b4 * k[3][x] + b6 * k[5][x]);
}

inline double error(double dt, const double* const k[6], std::size_t x) {
    return dt * (e1 * k[0][x] + e3 * k[2][x] + e4 * k[3][x] + e5 * k[4][x] + e6 * k[5][x]);
}

}  // namespace nanorod::cash_karp
