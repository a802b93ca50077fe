#pragma once

#include <map>

#include "tfq/stft.hpp"

namespace tfq {

/// Gauss-Legendre rule on [0, 1].
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    void validate() const {
        require(!nodes.empty() && nodes.size() == weights.size(), "quadrature: nodes and weights must match");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            require(nodes[i] >= 0.0 && nodes[i] <= 1.0, "quadrature: node outside [0, 1]");
            require(weights[i] > 0.0, "quadrature: weights must be positive");
        }
    }
};

inline Quadrature gauss_legendre(int M) {
    require(M >= 1 && M <= 64, "quadrature: node count must be in [1, 64]");
    Quadrature q;
    q.nodes.resize(static_cast<std::size_t>(M));
    q.weights.resize(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        double x = std::cos(pi * (i + 0.75) / (M + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= M; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = M * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= M; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = M * (x * p1 - p0) / (x * x - 1.0);
        // ascending nodes on [0, 1]
        std::size_t idx = static_cast<std::size_t>(i);
        q.nodes[idx] = 0.5 * (1.0 - x);
        q.weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

namespace detail {

/// Samples s(t_j + a (k - n) dt) for lags k = 0 .. 2n-1, band-limited interpolation,
/// zero outside a 2n-sample zero-padded copy of the signal.
class LagTable {
public:
    LagTable(const std::vector<cplx>& values, double a) : n_(static_cast<long>(values.size())) {
        const long len = 2 * n_;
        std::vector<cplx> padded(static_cast<std::size_t>(len), cplx{});
        for (long j = 0; j < n_; ++j) padded[static_cast<std::size_t>(j + n_ / 2)] = values[static_cast<std::size_t>(j)];
        offset_.resize(static_cast<std::size_t>(len));
        which_.resize(static_cast<std::size_t>(len));
        constexpr double scale = 1099511627776.0;  // 2^40
        std::map<long long, std::size_t> slot;
        std::vector<cplx> spectrum;
        for (long k = 0; k < len; ++k) {
            double pos = a * static_cast<double>(k - n_);
            double fl = std::floor(pos);
            long long key = std::llround((pos - fl) * scale);
            long o = static_cast<long>(fl);
            if (key >= static_cast<long long>(scale)) {
                key = 0;
                ++o;
            }
            offset_[static_cast<std::size_t>(k)] = o;
            auto it = slot.find(key);
            if (it == slot.end()) {
                double delta = static_cast<double>(key) / scale;
                if (key == 0) {
                    shifted_.push_back(padded);
                } else {
                    if (spectrum.empty()) spectrum = dft(padded);
                    std::vector<cplx> spec(spectrum.size());
                    for (long p = 0; p < len; ++p) {
                        cplx factor;
                        if (p == n_) {
                            factor = std::cos(pi * delta);
                        } else {
                            double nu = static_cast<double>(p < n_ ? p : p - len) / static_cast<double>(len);
                            factor = std::polar(1.0, 2.0 * pi * nu * delta);
                        }
                        spec[static_cast<std::size_t>(p)] = spectrum[static_cast<std::size_t>(p)] * factor;
                    }
                    shifted_.push_back(idft(spec));
                }
                it = slot.emplace(key, shifted_.size() - 1).first;
            }
            which_[static_cast<std::size_t>(k)] = it->second;
        }
    }

    /// s(t_j + a (k - n) dt), j may lie outside [0, n).
    cplx at(long j, std::size_t k) const {
        long p = j + offset_[k] + n_ / 2;
        if (p < 0 || p >= 2 * n_) return {};
        return shifted_[which_[k]][static_cast<std::size_t>(p)];
    }

    std::size_t lags() const { return offset_.size(); }

private:
    long n_;
    std::vector<long> offset_;
    std::vector<std::size_t> which_;
    std::vector<std::vector<cplx>> shifted_;
};

}  // namespace detail

/// W_tau(f, g)(x, w) = integral e^{-2 pi i y w} f(x + tau y) conj(g(x - (1 - tau) y)) dy.
inline PhaseSpaceArray tau_wigner(const SampledSignal& f, const SampledSignal& g, double tau) {
    require_tau(tau);
    require_same_grid(f, g);
    const Grid& grid = f.grid;
    const long n = static_cast<long>(grid.n_samples);
    detail::LagTable A(f.values, tau);
    detail::LagTable B(g.values, -(1.0 - tau));
    PhaseSpaceArray out(grid, grid.frequency_grid());
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
        std::vector<cplx> h(static_cast<std::size_t>(2 * n));
        for (std::size_t k = 0; k < h.size(); ++k) h[k] = A.at(static_cast<long>(j), k) * std::conj(B.at(static_cast<long>(j), k));
        auto H = centered_dft(h, grid.spacing, 0.0);
        for (long m = 0; m < n; ++m) out.values(static_cast<Eigen::Index>(j), m) = H[static_cast<std::size_t>(2 * m)];
    });
    return out;
}

/// sum_i w_i W_{tau_i}(f, g).
inline PhaseSpaceArray born_jordan_dist(const SampledSignal& f, const SampledSignal& g, const Quadrature& quad) {
    quad.validate();
    PhaseSpaceArray out = tau_wigner(f, g, quad.nodes[0]);
    out.values *= quad.weights[0];
    for (std::size_t i = 1; i < quad.size(); ++i) out.values += quad.weights[i] * tau_wigner(f, g, quad.nodes[i]).values;
    return out;
}

/// dw sum_w W(x, w) for each x.
inline std::vector<cplx> time_marginal(const PhaseSpaceArray& W) {
    std::vector<cplx> out(static_cast<std::size_t>(W.rows()));
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        KahanSum<cplx> s;
        for (Eigen::Index k = 0; k < W.cols(); ++k) s.add(W.values(i, k));
        out[static_cast<std::size_t>(i)] = s.value() * W.omega_grid.spacing;
    }
    return out;
}

/// dx sum_x W(x, w) for each w.
inline std::vector<cplx> frequency_marginal(const PhaseSpaceArray& W) {
    std::vector<cplx> out(static_cast<std::size_t>(W.cols()));
    for (Eigen::Index k = 0; k < W.cols(); ++k) {
        KahanSum<cplx> s;
        for (Eigen::Index i = 0; i < W.rows(); ++i) s.add(W.values(i, k));
        out[static_cast<std::size_t>(k)] = s.value() * W.x_grid.spacing;
    }
    return out;
}

/// max over z of | |W_tau(pi(w)f)|(z) - |W_tau f|(z - w) |; w must lie on the phase-space grid.
inline double wigner_covariance_check(const SampledSignal& f, const PhaseSpacePoint& w, double tau) {
    const Grid& grid = f.grid;
    double sx = w.x / grid.spacing, sw = w.omega / grid.freq_spacing();
    long s = std::lround(sx), r = std::lround(sw);
    require(std::abs(sx - static_cast<double>(s)) < 1e-9 && std::abs(sw - static_cast<double>(r)) < 1e-9,
            "wigner_covariance_check: shift must lie on the phase-space grid");
    auto W0 = tau_wigner(f, f, tau);
    auto fs = tf_shift(f, w);
    auto W1 = tau_wigner(fs, fs, tau);
    const long n = static_cast<long>(grid.n_samples);
    double dev = 0.0;
    for (long j = 0; j < n; ++j)
        for (long m = 0; m < n; ++m) {
            long j0 = j - s, m0 = m - r;
            if (j0 < 0 || j0 >= n || m0 < 0 || m0 >= n) continue;
            dev = std::max(dev, std::abs(std::abs(W1.values(j, m)) - std::abs(W0.values(j0, m0))));
        }
    return dev;
}

}  // namespace tfq
