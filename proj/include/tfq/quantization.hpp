#pragma once

#include <map>
#include <random>

#include "tfq/symbols.hpp"
#include "tfq/wigner.hpp"

namespace tfq {

/// Entries <Op_tau(sigma) pi(mu) g, pi(lambda) g>, rows lambda and columns mu in lattice order.
struct GaborMatrix {
    Lattice lattice;
    double tau = 0.5;
    bool born_jordan = false;
    bool magnitude_only = false;
    std::string window_id;
    Eigen::MatrixXcd entries;

    cplx operator()(std::size_t lambda, std::size_t mu) const {
        return entries(static_cast<Eigen::Index>(lambda), static_cast<Eigen::Index>(mu));
    }
};

/// Window descriptor recorded in matrices: grid and l2 norm.
inline std::string window_descriptor(const SampledSignal& g) {
    return "grid(n=" + std::to_string(g.grid.n_samples) + ",dt=" + format_number(g.grid.spacing) +
           ",origin=" + format_number(g.grid.origin) + "),norm=" + format_number(l2_norm(g));
}

namespace detail {

/// Sample-index range [lo, hi] where |g| exceeds rel * max|g|.
inline std::pair<long, long> support_indices(const SampledSignal& g, double rel = 1e-16) {
    double peak = 0.0;
    for (auto v : g.values) peak = std::max(peak, std::abs(v));
    long lo = static_cast<long>(g.size()), hi = -1;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(g[j]) > rel * peak) {
            lo = std::min(lo, static_cast<long>(j));
            hi = std::max(hi, static_cast<long>(j));
        }
    return {lo, hi};
}

/// Lattice shifts must be whole samples and windows shifted across the lattice must stay on the grid.
inline long check_lattice_grid(const SampledSignal& g, const Lattice& lattice) {
    lattice.validate();
    const Grid& grid = g.grid;
    double a = lattice.alpha / grid.spacing;
    long as = std::lround(a);
    require(as >= 1 && std::abs(a - static_cast<double>(as)) < 1e-9 * a,
            "lattice: alpha must be a multiple of the grid spacing");
    const double c = support_radius(g, 1e-12);
    const double extent = lattice.radius * lattice.alpha;
    require(extent + c <= grid.half_extent() + 1e-12, "lattice: time extent plus window support exceeds the grid");
    const double cw = support_radius(fourier_transform(g), 1e-12);
    require(lattice.radius * lattice.beta + cw <= 0.5 / grid.spacing + 1e-12,
            "lattice: frequency extent plus window bandwidth exceeds the Nyquist band");
    return as;
}

/// sigma_check(j, y) = dw sum_w sigma(x_j, w) e^{2 pi i y w}; stored per y-index as a row of length n.
inline std::vector<std::vector<cplx>> symbol_lag_transform(const SymbolSpec& s, const Grid& grid) {
    const std::size_t n = grid.n_samples;
    std::vector<std::vector<cplx>> byrow(n);
    parallel_for(n, [&](std::size_t j) {
        std::vector<cplx> row(n);
        const double x = grid.t(static_cast<std::ptrdiff_t>(j));
        for (std::size_t m = 0; m < n; ++m) row[m] = detail::eval_node(s, x, grid.omega(static_cast<std::ptrdiff_t>(m)), 0, 0);
        byrow[j] = centered_idft(row, grid.spacing, 0.0);
    });
    std::vector<std::vector<cplx>> bylag(n, std::vector<cplx>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) bylag[k][j] = byrow[j][k];
    return bylag;
}

inline void check_symbol_finite_on_grid(const SymbolSpec& s, const Grid& grid) {
    for (std::size_t j = 0; j < grid.n_samples; j += grid.n_samples / 8)
        for (std::size_t m = 0; m < grid.n_samples; m += grid.n_samples / 8)
            require(is_finite(detail::eval_node(s, grid.t(static_cast<std::ptrdiff_t>(j)), grid.omega(static_cast<std::ptrdiff_t>(m)), 0, 0)),
                    "symbol is not finite on the phase-space grid");
}

}  // namespace detail

/// Gabor matrix through the weak pairing dx dw sum sigma conj(W_tau(pi(lambda)g, pi(mu)g)),
/// evaluated in the lag domain and restricted to the window support.
inline GaborMatrix gabor_matrix_direct(const SymbolSpec& s, const SampledSignal& g, const Lattice& lattice, double tau) {
    require_tau(tau);
    const long a = detail::check_lattice_grid(g, lattice);
    const Grid& grid = g.grid;
    detail::check_symbol_finite_on_grid(s, grid);
    const long n = static_cast<long>(grid.n_samples);
    const double dt = grid.spacing;
    const auto sig = detail::symbol_lag_transform(s, grid);
    const detail::LagTable Gp(g.values, tau);
    const detail::LagTable Gm(g.values, -(1.0 - tau));
    auto [ilo, ihi] = detail::support_indices(g);
    const long margin = 2;
    ilo -= margin;
    ihi += margin;
    const long width = ihi - ilo;
    const int R = lattice.radius;
    // e^{2 pi i d beta x_j} for d in [-2R, 2R]
    std::vector<std::vector<cplx>> mod(static_cast<std::size_t>(4 * R + 1), std::vector<cplx>(static_cast<std::size_t>(n)));
    for (int d = -2 * R; d <= 2 * R; ++d)
        for (long j = 0; j < n; ++j)
            mod[static_cast<std::size_t>(d + 2 * R)][static_cast<std::size_t>(j)] = std::polar(1.0, 2.0 * pi * d * lattice.beta * grid.t(j));

    const std::size_t N = lattice.count();
    GaborMatrix M;
    M.lattice = lattice;
    M.tau = tau;
    M.window_id = window_descriptor(g);
    M.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    parallel_for(N, [&](std::size_t li) {
        auto [lk, ll] = lattice.indices(li);
        const long l1 = lk * a;
        const double lam2 = ll * lattice.beta;
        for (std::size_t mi = 0; mi < N; ++mi) {
            auto [mk, ml] = lattice.indices(mi);
            const long m1 = mk * a;
            const double mu2 = ml * lattice.beta;
            const auto& phase_x = mod[static_cast<std::size_t>(ml - ll + 2 * R)];
            const double c = tau * lam2 + (1.0 - tau) * mu2;
            const long klo = std::max<long>(0, n + l1 - m1 - width - 1);
            const long khi = std::min<long>(2 * n - 1, n + l1 - m1 + width + 1);
            KahanSum<cplx> outer;
            for (long k = klo; k <= khi; ++k) {
                const double lag = static_cast<double>(k - n);
                // positions j - l1 + tau*lag and j - m1 - (1-tau)*lag must fall in [ilo, ihi]
                const double sp = static_cast<double>(l1) - tau * lag;
                const double sm = static_cast<double>(m1) + (1.0 - tau) * lag;
                long jlo = static_cast<long>(std::ceil(std::max(ilo + sp, ilo + sm)));
                long jhi = static_cast<long>(std::floor(std::min(ihi + sp, ihi + sm)));
                jlo = std::max<long>(jlo, 0);
                jhi = std::min<long>(jhi, n - 1);
                if (jlo > jhi) continue;
                const auto& srow = sig[static_cast<std::size_t>(((k - n + n / 2) % n + n) % n)];
                KahanSum<cplx> inner;
                for (long j = jlo; j <= jhi; ++j) {
                    const auto ju = static_cast<std::size_t>(j);
                    inner.add(srow[ju] * phase_x[ju] * std::conj(Gp.at(j - l1, static_cast<std::size_t>(k))) *
                              Gm.at(j - m1, static_cast<std::size_t>(k)));
                }
                outer.add(inner.value() * std::polar(1.0, -2.0 * pi * c * lag * dt));
            }
            M.entries(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(mi)) = outer.value() * dt * dt;
        }
    });
    return M;
}

/// Single entry from an explicitly assembled W_tau(pi(lambda)g, pi(mu)g); reference for the lag-domain route.
inline cplx gabor_entry_via_wigner(const SymbolSpec& s, const SampledSignal& g, const PhaseSpacePoint& lambda,
                                   const PhaseSpacePoint& mu, double tau) {
    auto W = tau_wigner(tf_shift(g, lambda), tf_shift(g, mu), tau);
    KahanSum<cplx> acc;
    for (Eigen::Index j = 0; j < W.rows(); ++j)
        for (Eigen::Index m = 0; m < W.cols(); ++m)
            acc.add(detail::eval_node(s, W.x(j), W.omega(m), 0, 0) * std::conj(W.values(j, m)));
    return acc.value() * W.cell();
}

/// Magnitudes |V_{Phi_tau} sigma(T_tau(lambda, mu), J(lambda - mu))| with Phi_tau = W_tau(g, g).
inline GaborMatrix gabor_matrix_stft(const SymbolSpec& s, const SampledSignal& g, const Lattice& lattice, double tau) {
    require_tau(tau);
    detail::check_lattice_grid(g, lattice);
    detail::check_symbol_finite_on_grid(s, g.grid);
    const auto Phi = tau_wigner(g, g, tau);
    const double peak = Phi.values.cwiseAbs().maxCoeff();
    Eigen::Index j0 = Phi.rows(), j1 = -1, m0 = Phi.cols(), m1 = -1;
    for (Eigen::Index j = 0; j < Phi.rows(); ++j)
        for (Eigen::Index m = 0; m < Phi.cols(); ++m)
            if (std::abs(Phi.values(j, m)) > 1e-16 * peak) {
                j0 = std::min(j0, j);
                j1 = std::max(j1, j);
                m0 = std::min(m0, m);
                m1 = std::max(m1, m);
            }
    const Eigen::Index bj = j1 - j0 + 1, bm = m1 - m0 + 1;
    Eigen::MatrixXcd phic = Phi.values.block(j0, m0, bj, bm).conjugate();
    std::vector<double> xs(static_cast<std::size_t>(bj)), ws(static_cast<std::size_t>(bm));
    for (Eigen::Index j = 0; j < bj; ++j) xs[static_cast<std::size_t>(j)] = Phi.x(j0 + j);
    for (Eigen::Index m = 0; m < bm; ++m) ws[static_cast<std::size_t>(m)] = Phi.omega(m0 + m);

    const int R = lattice.radius;
    // e^{-2 pi i T1 x_j}, T1 = d beta; e^{-2 pi i T2 w_m}, T2 = -d alpha
    std::vector<std::vector<cplx>> ax(static_cast<std::size_t>(4 * R + 1)), bw(static_cast<std::size_t>(4 * R + 1));
    for (int d = -2 * R; d <= 2 * R; ++d) {
        auto& A = ax[static_cast<std::size_t>(d + 2 * R)];
        auto& B = bw[static_cast<std::size_t>(d + 2 * R)];
        for (double x : xs) A.push_back(std::polar(1.0, -2.0 * pi * d * lattice.beta * x));
        for (double w : ws) B.push_back(std::polar(1.0, 2.0 * pi * d * lattice.alpha * w));
    }

    const std::size_t N = lattice.count();
    std::map<std::pair<long long, long long>, std::vector<std::pair<std::size_t, std::size_t>>> groups;
    for (std::size_t li = 0; li < N; ++li)
        for (std::size_t mi = 0; mi < N; ++mi) {
            auto Y = gabor_center(lattice.point(li), lattice.point(mi), tau);
            groups[{std::llround(Y.x * 4294967296.0), std::llround(Y.omega * 4294967296.0)}].push_back({li, mi});
        }
    std::vector<const std::vector<std::pair<std::size_t, std::size_t>>*> glist;
    for (const auto& [key, v] : groups) glist.push_back(&v);

    GaborMatrix M;
    M.lattice = lattice;
    M.tau = tau;
    M.magnitude_only = true;
    M.window_id = window_descriptor(g);
    M.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    const double cell = Phi.cell();
    parallel_for(glist.size(), [&](std::size_t gi) {
        const auto& members = *glist[gi];
        auto [lf, mf] = members.front();
        const auto Y = gabor_center(lattice.point(lf), lattice.point(mf), tau);
        Eigen::MatrixXcd Q(bj, bm);
        for (Eigen::Index j = 0; j < bj; ++j)
            for (Eigen::Index m = 0; m < bm; ++m)
                Q(j, m) = detail::eval_node(s, Y.x + xs[static_cast<std::size_t>(j)], Y.omega + ws[static_cast<std::size_t>(m)], 0, 0) * phic(j, m);
        std::vector<cplx> r(static_cast<std::size_t>(bm));
        for (auto [li, mi] : members) {
            auto [lk, ll] = lattice.indices(li);
            auto [mk, ml] = lattice.indices(mi);
            const auto& A = ax[static_cast<std::size_t>(ll - ml + 2 * R)];
            const auto& B = bw[static_cast<std::size_t>(lk - mk + 2 * R)];
            KahanSum<cplx> total;
            for (Eigen::Index m = 0; m < bm; ++m) {
                KahanSum<cplx> col;
                for (Eigen::Index j = 0; j < bj; ++j) col.add(Q(j, m) * A[static_cast<std::size_t>(j)]);
                total.add(col.value() * B[static_cast<std::size_t>(m)]);
            }
            M.entries(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(mi)) = std::abs(total.value()) * cell;
        }
    });
    return M;
}

/// max | |A| - |B| | / max |B| over all entries.
inline double route_deviation(const GaborMatrix& stft_route, const GaborMatrix& direct) {
    require(stft_route.entries.rows() == direct.entries.rows() && stft_route.entries.cols() == direct.entries.cols(),
            "route_deviation: shape mismatch");
    double den = direct.entries.cwiseAbs().maxCoeff();
    double num = (stft_route.entries.cwiseAbs() - direct.entries.cwiseAbs()).cwiseAbs().maxCoeff();
    return den > 0.0 ? num / den : num;
}

/// Magnitudes from the STFT route with phases from the direct route.
inline GaborMatrix combine_routes(const GaborMatrix& stft_route, const GaborMatrix& direct) {
    GaborMatrix M = direct;
    for (Eigen::Index i = 0; i < M.entries.size(); ++i) {
        cplx d = direct.entries.data()[i];
        double mag = std::abs(stft_route.entries.data()[i]);
        M.entries.data()[i] = std::abs(d) > 0.0 ? mag * d / std::abs(d) : cplx(mag);
    }
    return M;
}

/// Per-node matrices of the Born-Jordan quadrature.
inline std::vector<GaborMatrix> born_jordan_components(const SymbolSpec& s, const SampledSignal& g,
                                                       const Lattice& lattice, const Quadrature& quad) {
    quad.validate();
    std::vector<GaborMatrix> out;
    for (double t : quad.nodes) out.push_back(gabor_matrix_direct(s, g, lattice, t));
    return out;
}

inline GaborMatrix born_jordan_combine(const std::vector<GaborMatrix>& parts, const Quadrature& quad) {
    require(parts.size() == quad.size() && !parts.empty(), "born_jordan_combine: one matrix per node required");
    GaborMatrix M = parts.front();
    M.entries = quad.weights[0] * parts[0].entries;
    for (std::size_t i = 1; i < parts.size(); ++i) M.entries += quad.weights[i] * parts[i].entries;
    M.born_jordan = true;
    M.tau = 0.5;
    return M;
}

/// Entrywise Gauss-Legendre average over tau of the Gabor matrices.
inline GaborMatrix born_jordan_matrix(const SymbolSpec& s, const SampledSignal& g, const Lattice& lattice,
                                      const Quadrature& quad) {
    return born_jordan_combine(born_jordan_components(s, g, lattice, quad), quad);
}

/// T f = V_g^*(K_T V_g f) with the kernel sampled on the lattice and cell weight alpha*beta.
inline SampledSignal apply_operator(const GaborMatrix& M, const SampledSignal& f, const SampledSignal& g) {
    require(!M.magnitude_only, "apply_operator: needs a complex matrix, not magnitudes only");
    require_same_grid(f, g);
    require(std::abs(l2_norm(g) - 1.0) < 1e-10, "apply_operator: window must be l2-normalized");
    const Lattice& L = M.lattice;
    const std::size_t N = L.count();
    require(static_cast<std::size_t>(M.entries.rows()) == N, "apply_operator: matrix does not match its lattice");
    std::vector<SampledSignal> atoms(N);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(N));
    parallel_for(N, [&](std::size_t i) {
        atoms[i] = tf_shift(g, L.point(i));
        v(static_cast<Eigen::Index>(i)) = inner_product(f, atoms[i]);
    });
    const double cellw = L.alpha * L.beta;
    Eigen::VectorXcd c = (M.entries * v) * (cellw * cellw);
    SampledSignal out(f.grid);
    parallel_for(f.size(), [&](std::size_t j) {
        KahanSum<cplx> acc;
        for (std::size_t i = 0; i < N; ++i) acc.add(c(static_cast<Eigen::Index>(i)) * atoms[i][j]);
        out.values[j] = acc.value();
    });
    return out;
}

/// Random unit-norm test signal built from atoms pi(lambda)g with |k|, |l| <= radius/2.
inline SampledSignal random_atom_signal(const SampledSignal& g, const Lattice& L, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    const int r = std::max(1, L.radius / 2);
    SampledSignal f(g.grid);
    for (int k = -r; k <= r; ++k)
        for (int l = -r; l <= r; ++l) {
            cplx c(nd(rng), nd(rng));
            auto a = tf_shift(g, L.point(k, l));
            for (std::size_t j = 0; j < f.size(); ++j) f.values[j] += c * a[j];
        }
    const double nrm = l2_norm(f);
    for (auto& v : f.values) v /= nrm;
    return f;
}

/// max over random unit f of ||apply_operator(M, f)||.
inline double operator_norm_estimate(const GaborMatrix& M, const SampledSignal& g, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto f = random_atom_signal(g, M.lattice, rng);
        best = std::max(best, l2_norm(apply_operator(M, f, g)));
    }
    return best;
}

}  // namespace tfq
