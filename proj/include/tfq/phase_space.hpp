#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tfq/core.hpp"

namespace tfq {

/// Centered uniform grid t_j = origin + (j - n/2) dt, j = 0 .. n-1.
struct Grid {
    std::size_t n_samples = 256;
    double spacing = 1.0 / 16.0;
    double origin = 0.0;

    Grid() = default;
    Grid(std::size_t n, double dt, double o = 0.0) : n_samples(n), spacing(dt), origin(o) { validate(); }

    void validate() const {
        require(n_samples >= 8 && is_power_of_two(n_samples), "grid: n_samples must be a power of two >= 8");
        require(std::isfinite(spacing) && spacing > 0.0, "grid: spacing must be positive and finite");
        require(std::isfinite(origin), "grid: origin must be finite");
    }

    double t(std::ptrdiff_t j) const {
        return origin + (static_cast<double>(j) - static_cast<double>(n_samples / 2)) * spacing;
    }
    double freq_spacing() const { return 1.0 / (static_cast<double>(n_samples) * spacing); }
    double omega(std::ptrdiff_t k) const {
        return (static_cast<double>(k) - static_cast<double>(n_samples / 2)) * freq_spacing();
    }
    /// Half of the time extent n dt.
    double half_extent() const { return 0.5 * static_cast<double>(n_samples) * spacing; }
    /// Grid describing the implied frequency axis.
    Grid frequency_grid() const { return Grid(n_samples, freq_spacing(), 0.0); }

    bool operator==(const Grid& o) const {
        return n_samples == o.n_samples && spacing == o.spacing && origin == o.origin;
    }
};

/// Complex samples of a function on a Grid.
struct SampledSignal {
    Grid grid;
    std::vector<cplx> values;

    SampledSignal() = default;
    explicit SampledSignal(const Grid& g) : grid(g), values(g.n_samples, cplx{}) {}
    SampledSignal(const Grid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) { validate(); }

    void validate() const {
        grid.validate();
        require(values.size() == grid.n_samples, "signal: length does not match grid");
        for (auto v : values) require(is_finite(v), "signal: non-finite sample");
    }

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t j) { return values[j]; }
    const cplx& operator[](std::size_t j) const { return values[j]; }
};

template <typename F>
SampledSignal sample_function(const Grid& grid, F&& fn) {
    SampledSignal s(grid);
    for (std::size_t j = 0; j < grid.n_samples; ++j) s.values[j] = cplx(fn(grid.t(static_cast<std::ptrdiff_t>(j))));
    s.validate();
    return s;
}

inline void require_same_grid(const SampledSignal& f, const SampledSignal& g) {
    require(f.grid == g.grid, "signals live on different grids");
}

/// <f, g> = dt sum_j f_j conj(g_j).
inline cplx inner_product(const SampledSignal& f, const SampledSignal& g) {
    require_same_grid(f, g);
    KahanSum<cplx> s;
    for (std::size_t j = 0; j < f.size(); ++j) s.add(f[j] * std::conj(g[j]));
    return s.value() * f.grid.spacing;
}

inline double l2_norm(const SampledSignal& f) {
    KahanSum<double> s;
    for (auto v : f.values) s.add(std::norm(v));
    return std::sqrt(s.value() * f.grid.spacing);
}

/// ||f - g|| / ||g||.
inline double relative_l2_error(const SampledSignal& f, const SampledSignal& ref) {
    require_same_grid(f, ref);
    KahanSum<double> num, den;
    for (std::size_t j = 0; j < f.size(); ++j) {
        num.add(std::norm(f[j] - ref[j]));
        den.add(std::norm(ref[j]));
    }
    return std::sqrt(num.value() / den.value());
}

struct PhaseSpacePoint {
    double x = 0.0;
    double omega = 0.0;

    PhaseSpacePoint operator+(const PhaseSpacePoint& o) const { return {x + o.x, omega + o.omega}; }
    PhaseSpacePoint operator-(const PhaseSpacePoint& o) const { return {x - o.x, omega - o.omega}; }
    PhaseSpacePoint operator*(double s) const { return {x * s, omega * s}; }
    bool operator==(const PhaseSpacePoint&) const = default;
    double norm() const { return std::hypot(x, omega); }
};

inline double bracket(const PhaseSpacePoint& z) { return bracket(z.x, z.omega); }

inline void require_finite(const PhaseSpacePoint& z) {
    require(std::isfinite(z.x) && std::isfinite(z.omega), "phase-space point must be finite");
}

/// Lattice alpha Z x beta Z truncated to |k|, |l| <= radius, enumerated lexicographically in (k, l).
struct Lattice {
    double alpha = 0.5;
    double beta = 0.5;
    int radius = 6;

    Lattice() = default;
    Lattice(double a, double b, int r) : alpha(a), beta(b), radius(r) { validate(); }

    void validate() const {
        require(std::isfinite(alpha) && alpha > 0.0, "lattice: alpha must be positive");
        require(std::isfinite(beta) && beta > 0.0, "lattice: beta must be positive");
        require(radius >= 0, "lattice: radius must be nonnegative");
    }

    std::size_t side() const { return static_cast<std::size_t>(2 * radius + 1); }
    std::size_t count() const { return side() * side(); }
    std::size_t index(int k, int l) const {
        return static_cast<std::size_t>(k + radius) * side() + static_cast<std::size_t>(l + radius);
    }
    std::pair<int, int> indices(std::size_t idx) const {
        return {static_cast<int>(idx / side()) - radius, static_cast<int>(idx % side()) - radius};
    }
    bool contains(int k, int l) const { return std::abs(k) <= radius && std::abs(l) <= radius; }
    PhaseSpacePoint point(int k, int l) const { return {k * alpha, l * beta}; }
    PhaseSpacePoint point(std::size_t idx) const {
        auto [k, l] = indices(idx);
        return point(k, l);
    }
    bool operator==(const Lattice&) const = default;
};

/// polynomial(s): <z>^s. tensor(m, s): <z>^m <zeta>^s.
struct WeightSpec {
    enum class Kind { polynomial, tensor };
    Kind kind = Kind::polynomial;
    double m = 0.0;
    double s = 0.0;

    static WeightSpec polynomial(double s) { return {Kind::polynomial, 0.0, s}; }
    static WeightSpec tensor(double m, double s) { return {Kind::tensor, m, s}; }
};

inline void validate(const WeightSpec& w) {
    require(std::isfinite(w.m) && std::isfinite(w.s), "weight: parameters must be finite");
}

/// polynomial: <z>^s. tensor on a single phase-space point (d = 1 split): <x>^m <omega>^s.
inline double weight_eval(const WeightSpec& w, const PhaseSpacePoint& z) {
    validate(w);
    require_finite(z);
    if (w.kind == WeightSpec::Kind::polynomial) return std::pow(bracket(z), w.s);
    return std::pow(bracket(z.x), w.m) * std::pow(bracket(z.omega), w.s);
}

/// tensor weight on R^2 x R^2: <z>^m <zeta>^s. A polynomial weight ignores zeta.
inline double weight_eval(const WeightSpec& w, const PhaseSpacePoint& z, const PhaseSpacePoint& zeta) {
    validate(w);
    require_finite(z);
    require_finite(zeta);
    if (w.kind == WeightSpec::Kind::polynomial) return std::pow(bracket(z), w.s);
    return std::pow(bracket(z), w.m) * std::pow(bracket(zeta), w.s);
}

struct ModerationReport {
    double max_ratio = 0.0;
};

/// sup over pairs of w(z1 + z2) / (v(z1) w(z2)).
inline ModerationReport check_moderate(const WeightSpec& w, const WeightSpec& v,
                                       const std::vector<std::pair<PhaseSpacePoint, PhaseSpacePoint>>& pairs) {
    require(!pairs.empty(), "check_moderate: no sample pairs");
    ModerationReport r;
    for (const auto& [z1, z2] : pairs) {
        double ratio = weight_eval(w, z1 + z2) / (weight_eval(v, z1) * weight_eval(w, z2));
        r.max_ratio = std::max(r.max_ratio, ratio);
    }
    return r;
}

/// Grid shift (in samples) used for a time shift x, and the rounding residual x - shift*dt.
inline std::pair<long, double> grid_shift(const Grid& grid, double x) {
    long s = std::lround(x / grid.spacing);
    return {s, x - static_cast<double>(s) * grid.spacing};
}

/// pi(z) f(t) = e^{2 pi i omega t} f(t - x), x rounded to the grid, rotation is circular.
inline SampledSignal tf_shift(const SampledSignal& f, const PhaseSpacePoint& z) {
    require_finite(z);
    const auto n = static_cast<long>(f.grid.n_samples);
    auto [s, residual] = grid_shift(f.grid, z.x);
    (void)residual;
    require(std::abs(s) < n / 2, "tf_shift: time shift exceeds half the grid extent");
    SampledSignal out(f.grid);
    for (long j = 0; j < n; ++j) {
        long src = ((j - s) % n + n) % n;
        double t = f.grid.t(j);
        cplx phase = z.omega == 0.0 ? cplx(1.0) : std::polar(1.0, 2.0 * pi * z.omega * t);
        out.values[static_cast<std::size_t>(j)] = phase * f.values[static_cast<std::size_t>(src)];
    }
    return out;
}

inline void require_tau(double tau) {
    require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
}

/// T_tau(z, u) = ((1-tau) z1 + tau u1, tau z2 + (1-tau) u2).
inline PhaseSpacePoint t_tau(const PhaseSpacePoint& z, const PhaseSpacePoint& u, double tau) {
    require_tau(tau);
    return {(1.0 - tau) * z.x + tau * u.x, tau * z.omega + (1.0 - tau) * u.omega};
}

/// J(z1, z2) = (z2, -z1).
inline PhaseSpacePoint j_rot(const PhaseSpacePoint& z) { return {z.omega, -z.x}; }
inline PhaseSpacePoint j_rot_inv(const PhaseSpacePoint& z) { return {-z.omega, z.x}; }

/// Solves t_tau(z, u) = y and J(u - z) = t for (z, u).
inline std::pair<PhaseSpacePoint, PhaseSpacePoint> invert_change_of_variables(const PhaseSpacePoint& y,
                                                                              const PhaseSpacePoint& t,
                                                                              double tau) {
    require_tau(tau);
    PhaseSpacePoint jt = j_rot_inv(t);
    PhaseSpacePoint ujt{tau * jt.x, (1.0 - tau) * jt.omega};
    PhaseSpacePoint z = y - ujt;
    PhaseSpacePoint u = y + (jt - ujt);
    return {z, u};
}

/// Phase-space point controlling the Gabor-matrix entry between output lambda and input mu.
inline PhaseSpacePoint gabor_center(const PhaseSpacePoint& lambda, const PhaseSpacePoint& mu, double tau) {
    return t_tau(lambda, mu, tau);
}

}  // namespace tfq
