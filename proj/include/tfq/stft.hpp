#pragma once

#include <Eigen/Dense>

#include "tfq/fft.hpp"
#include "tfq/phase_space.hpp"

namespace tfq {

/// Complex values on an (x, omega) grid; values(i, k) sits at (x_grid.t(i), omega_grid.t(k)).
struct PhaseSpaceArray {
    Grid x_grid;
    Grid omega_grid;
    Eigen::MatrixXcd values;

    PhaseSpaceArray() = default;
    PhaseSpaceArray(const Grid& xg, const Grid& wg)
        : x_grid(xg), omega_grid(wg),
          values(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(xg.n_samples), static_cast<Eigen::Index>(wg.n_samples))) {}

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    double x(Eigen::Index i) const { return x_grid.t(i); }
    double omega(Eigen::Index k) const { return omega_grid.t(k); }
    double cell() const { return x_grid.spacing * omega_grid.spacing; }

    void validate() const {
        require(values.rows() == static_cast<Eigen::Index>(x_grid.n_samples) &&
                    values.cols() == static_cast<Eigen::Index>(omega_grid.n_samples),
                "phase-space array: dimensions do not match grids");
        for (Eigen::Index i = 0; i < values.size(); ++i) require(is_finite(values.data()[i]), "phase-space array: non-finite entry");
    }
};

/// dx dw sum F conj(G) on a shared grid.
inline cplx inner_product(const PhaseSpaceArray& F, const PhaseSpaceArray& G) {
    require(F.x_grid == G.x_grid && F.omega_grid == G.omega_grid, "phase-space arrays live on different grids");
    KahanSum<cplx> s;
    for (Eigen::Index i = 0; i < F.values.size(); ++i) s.add(F.values.data()[i] * std::conj(G.values.data()[i]));
    return s.value() * F.cell();
}

/// max |F - G| / max |G|.
inline double max_relative_deviation(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G) {
    require(F.rows() == G.rows() && F.cols() == G.cols(), "shape mismatch");
    double num = (F - G).cwiseAbs().maxCoeff();
    double den = G.cwiseAbs().maxCoeff();
    return den > 0.0 ? num / den : num;
}

/// (2/w^2)^{1/4} e^{-pi t^2/w^2}, renormalized to unit l2 norm on the grid.
inline SampledSignal gaussian_window(const Grid& grid, double width) {
    require(std::isfinite(width) && width > 0.0, "gaussian_window: width must be positive");
    grid.validate();
    const double amp = std::pow(2.0 / (width * width), 0.25);
    auto g = sample_function(grid, [&](double t) { return amp * std::exp(-pi * t * t / (width * width)); });
    double peak = 0.0;
    for (auto v : g.values) peak = std::max(peak, std::abs(v));
    std::size_t above = 0;
    for (auto v : g.values)
        if (std::abs(v) > 1e-12 * peak) ++above;
    require(above >= 8, "gaussian_window: width under-resolved by the grid");
    const double nrm = l2_norm(g);
    for (auto& v : g.values) v /= nrm;
    return g;
}

/// Smallest radius c such that |g(t)| <= rel * max|g| for |t| > c.
inline double support_radius(const SampledSignal& g, double rel = 1e-16) {
    double peak = 0.0;
    for (auto v : g.values) peak = std::max(peak, std::abs(v));
    double c = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(g[j]) > rel * peak) c = std::max(c, std::abs(g.grid.t(static_cast<std::ptrdiff_t>(j))));
    return c;
}

/// Fourier transform on the implied frequency grid.
inline SampledSignal fourier_transform(const SampledSignal& f) {
    return SampledSignal(f.grid.frequency_grid(), centered_dft(f.values, f.grid.spacing, f.grid.origin));
}

inline SampledSignal inverse_fourier_transform(const SampledSignal& F, const Grid& time_grid) {
    require(F.grid == time_grid.frequency_grid(), "inverse_fourier_transform: grid mismatch");
    return SampledSignal(time_grid, centered_idft(F.values, time_grid.spacing, time_grid.origin));
}

namespace detail {
inline void check_stft_args(const SampledSignal& f, const SampledSignal& g, int x_step, int padding) {
    require_same_grid(f, g);
    require(x_step >= 1 && is_power_of_two(static_cast<std::size_t>(x_step)) &&
                f.grid.n_samples / static_cast<std::size_t>(x_step) >= 8,
            "stft: x_step must be a power of two leaving at least 8 columns");
    require(padding >= 1 && is_power_of_two(static_cast<std::size_t>(padding)), "stft: padding must be a power of two");
}
}  // namespace detail

/// V_g f(x, w) = integral f(y) conj(g(y - x)) e^{-2 pi i w y} dy on x = multiples of x_step*dt
/// (centered at 0) and the frequency grid refined by the zero-padding factor.
inline PhaseSpaceArray stft(const SampledSignal& f, const SampledSignal& g, int x_step = 1, int padding = 1) {
    detail::check_stft_args(f, g, x_step, padding);
    const std::size_t n = f.grid.n_samples;
    const std::size_t nx = n / static_cast<std::size_t>(x_step);
    const std::size_t np = n * static_cast<std::size_t>(padding);
    const std::size_t offset = (np - n) / 2;
    const double dt = f.grid.spacing;
    Grid xg(nx, dt * x_step, 0.0);
    Grid wg(np, 1.0 / (static_cast<double>(np) * dt), 0.0);
    PhaseSpaceArray out(xg, wg);
    parallel_for(nx, [&](std::size_t i) {
        const long s = (static_cast<long>(i) - static_cast<long>(nx / 2)) * x_step;
        std::vector<cplx> prod(np, cplx{});
        for (std::size_t j = 0; j < n; ++j) {
            long src = ((static_cast<long>(j) - s) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
            prod[j + offset] = f[j] * std::conj(g[static_cast<std::size_t>(src)]);
        }
        auto col = centered_dft(prod, dt, f.grid.origin);
        for (std::size_t k = 0; k < np; ++k) out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[k];
    });
    return out;
}

/// V_g^* F(t) = integral F(z) pi(z) g(t) dz as a Riemann sum with cell dx*dw.
inline SampledSignal adjoint_stft(const PhaseSpaceArray& F, const SampledSignal& g) {
    const Grid& grid = g.grid;
    const std::size_t n = grid.n_samples;
    const std::size_t nx = F.x_grid.n_samples;
    const std::size_t np = F.omega_grid.n_samples;
    require(nx >= 1 && n % nx == 0, "adjoint_stft: x grid incompatible with window grid");
    const long x_step = static_cast<long>(n / nx);
    require(F.x_grid.spacing == grid.spacing * static_cast<double>(x_step) && F.x_grid.origin == 0.0,
            "adjoint_stft: x grid incompatible with window grid");
    require(np >= n && np % n == 0 && F.omega_grid.spacing == 1.0 / (static_cast<double>(np) * grid.spacing),
            "adjoint_stft: frequency grid incompatible with window grid");
    const std::size_t offset = (np - n) / 2;
    std::vector<std::vector<cplx>> cols(nx);
    parallel_for(nx, [&](std::size_t i) {
        std::vector<cplx> col(np);
        for (std::size_t k = 0; k < np; ++k) col[k] = F.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        cols[i] = centered_idft(col, grid.spacing, grid.origin);
    });
    SampledSignal out(grid);
    parallel_for(n, [&](std::size_t j) {
        KahanSum<cplx> acc;
        for (std::size_t i = 0; i < nx; ++i) {
            const long s = (static_cast<long>(i) - static_cast<long>(nx / 2)) * x_step;
            long src = ((static_cast<long>(j) - s) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
            acc.add(g[static_cast<std::size_t>(src)] * cols[i][j + offset]);
        }
        out.values[j] = acc.value() * F.x_grid.spacing;
    });
    return out;
}

struct Reconstruction {
    SampledSignal signal;
    double rel_error = 0.0;
};

/// f = ||g||^{-2} V_g^* V_g f.
inline Reconstruction reconstruct(const SampledSignal& f, const SampledSignal& g) {
    const double gn = l2_norm(g);
    require(gn > 0.0, "reconstruct: zero window");
    auto rec = adjoint_stft(stft(f, g, 1, 1), g);
    for (auto& v : rec.values) v /= gn * gn;
    double err = relative_l2_error(rec, f);
    return {std::move(rec), err};
}

struct FrameReport {
    double lower_bound_estimate = 0.0;
    double upper_bound_estimate = 0.0;
    int gram_truncation_radius = 0;
    double condition() const { return upper_bound_estimate / lower_bound_estimate; }
};

namespace detail {
struct FrameSetup {
    long a = 0;          // alpha in samples
    long period = 0;     // 1/(beta dt)
    int kmax = 0;        // retained time-lattice radius
    long lo = 0, hi = 0; // central-half sample range [lo, hi)
};

inline FrameSetup frame_setup(const SampledSignal& g, const Lattice& lattice) {
    lattice.validate();
    const Grid& grid = g.grid;
    const double dt = grid.spacing;
    FrameSetup s;
    double a = lattice.alpha / dt;
    s.a = std::lround(a);
    require(s.a >= 1 && std::abs(a - static_cast<double>(s.a)) < 1e-9 * a, "frame_bounds: alpha must be a multiple of the grid spacing");
    double p = 1.0 / (lattice.beta * dt);
    s.period = std::lround(p);
    require(s.period >= 1 && std::abs(p - static_cast<double>(s.period)) < 1e-9 * p,
            "frame_bounds: 1/(beta*dt) must be an integer (frequency-periodic lattice)");
    const double E = grid.half_extent();
    const double c = support_radius(g, 1e-12);
    int allowed = static_cast<int>(std::floor((E - c) / lattice.alpha + 1e-12));
    require(allowed >= 0, "frame_bounds: window does not fit on the grid");
    s.kmax = std::min(lattice.radius, allowed);
    require(s.kmax * lattice.alpha - c >= 0.5 * E,
            "frame_bounds: lattice radius too small to cover the central half of the grid");
    const long n = static_cast<long>(grid.n_samples);
    s.lo = n / 4;
    s.hi = n - n / 4;
    return s;
}
}  // namespace detail

/// Extreme eigenvalues of the truncated frame operator compressed to the central half of the grid.
inline FrameReport frame_bounds(const SampledSignal& g, const Lattice& lattice) {
    auto s = detail::frame_setup(g, lattice);
    const long n = static_cast<long>(g.grid.n_samples);
    // S_jk = (1/beta) [j = k mod P] sum_k1 g(t_j - k1 alpha) conj g(t_k - k1 alpha)
    auto gval = [&](long j) -> cplx {
        return (j >= 0 && j < n) ? g[static_cast<std::size_t>(j)] : cplx{};
    };
    std::vector<std::vector<long>> classes(static_cast<std::size_t>(s.period));
    for (long j = s.lo; j < s.hi; ++j) classes[static_cast<std::size_t>(((j % s.period) + s.period) % s.period)].push_back(j);
    std::vector<double> mins(classes.size(), 0.0), maxs(classes.size(), 0.0);
    parallel_for(classes.size(), [&](std::size_t c) {
        const auto& idx = classes[c];
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(m, m);
        for (Eigen::Index p = 0; p < m; ++p)
            for (Eigen::Index q = p; q < m; ++q) {
                KahanSum<cplx> acc;
                for (int k1 = -s.kmax; k1 <= s.kmax; ++k1) {
                    long sh = static_cast<long>(k1) * s.a;
                    acc.add(gval(idx[static_cast<std::size_t>(p)] - sh) * std::conj(gval(idx[static_cast<std::size_t>(q)] - sh)));
                }
                cplx v = acc.value() / lattice.beta;
                S(p, q) = v;
                S(q, p) = std::conj(v);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S, Eigen::EigenvaluesOnly);
        mins[c] = es.eigenvalues().minCoeff();
        maxs[c] = es.eigenvalues().maxCoeff();
    });
    FrameReport r;
    r.lower_bound_estimate = std::max(0.0, *std::min_element(mins.begin(), mins.end()));
    r.upper_bound_estimate = *std::max_element(maxs.begin(), maxs.end());
    r.gram_truncation_radius = s.kmax;
    return r;
}

/// sum over the truncated lattice of |<f, pi(lambda) g>|^2 / ||f||^2 for f supported in the central half.
inline double frame_quadratic_form(const SampledSignal& f, const SampledSignal& g, const Lattice& lattice) {
    require_same_grid(f, g);
    auto s = detail::frame_setup(g, lattice);
    const long n = static_cast<long>(g.grid.n_samples);
    const double dt = g.grid.spacing;
    KahanSum<double> total;
    for (int k1 = -s.kmax; k1 <= s.kmax; ++k1) {
        const long sh = static_cast<long>(k1) * s.a;
        for (long l = 0; l < s.period; ++l) {
            KahanSum<cplx> acc;
            for (long j = s.lo; j < s.hi; ++j) {
                long src = j - sh;
                if (src < 0 || src >= n) continue;
                double t = g.grid.t(j);
                acc.add(f[static_cast<std::size_t>(j)] * std::conj(g[static_cast<std::size_t>(src)]) *
                        std::polar(1.0, -2.0 * pi * static_cast<double>(l) * lattice.beta * t));
            }
            total.add(std::norm(acc.value() * dt));
        }
    }
    KahanSum<double> nf;
    for (long j = s.lo; j < s.hi; ++j) nf.add(std::norm(f[static_cast<std::size_t>(j)]));
    return total.value() / (nf.value() * dt);
}

}  // namespace tfq
