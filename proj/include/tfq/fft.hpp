#pragma once

#include <unsupported/Eigen/FFT>

#include "tfq/core.hpp"

namespace tfq {

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}
}  // namespace detail

/// X_k = sum_j x_j e^{-2 pi i jk/n}.
inline std::vector<cplx> dft(const std::vector<cplx>& x) {
    std::vector<cplx> out;
    detail::fft_engine().fwd(out, x);
    return out;
}

/// x_j = (1/n) sum_k X_k e^{2 pi i jk/n}.
inline std::vector<cplx> idft(const std::vector<cplx>& x) {
    std::vector<cplx> out;
    detail::fft_engine().inv(out, x);
    return out;
}

/// Samples on t_j = origin + (j - n/2) dt and frequencies w_k = (k - n/2)/(n dt).
/// Returns F(w_k) = dt sum_j f_j e^{-2 pi i t_j w_k}.
inline std::vector<cplx> centered_dft(const std::vector<cplx>& f, double dt, double origin = 0.0) {
    const std::size_t n = f.size();
    require(n % 2 == 0, "centered_dft needs an even length");
    std::vector<cplx> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = (j % 2 ? -f[j] : f[j]);
    auto X = dft(x);
    const double sign = ((n / 2) % 2) ? -1.0 : 1.0;
    const double dw = 1.0 / (static_cast<double>(n) * dt);
    for (std::size_t k = 0; k < n; ++k) {
        double s = sign * dt * (k % 2 ? -1.0 : 1.0);
        cplx v = X[k] * s;
        if (origin != 0.0) {
            double w = (static_cast<double>(k) - static_cast<double>(n / 2)) * dw;
            v *= std::polar(1.0, -2.0 * pi * origin * w);
        }
        X[k] = v;
    }
    return X;
}

/// Inverse of centered_dft: f_j = dw sum_k F_k e^{2 pi i t_j w_k}.
inline std::vector<cplx> centered_idft(const std::vector<cplx>& F, double dt, double origin = 0.0) {
    const std::size_t n = F.size();
    require(n % 2 == 0, "centered_idft needs an even length");
    const double dw = 1.0 / (static_cast<double>(n) * dt);
    std::vector<cplx> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx v = F[k];
        if (origin != 0.0) {
            double w = (static_cast<double>(k) - static_cast<double>(n / 2)) * dw;
            v *= std::polar(1.0, 2.0 * pi * origin * w);
        }
        x[k] = (k % 2 ? -v : v);
    }
    auto y = idft(x);
    const double sign = ((n / 2) % 2) ? -1.0 : 1.0;
    // idft carries 1/n; dw * n = 1/dt
    for (std::size_t j = 0; j < n; ++j) y[j] *= sign * (j % 2 ? -1.0 : 1.0) / dt;
    return y;
}

}  // namespace tfq
