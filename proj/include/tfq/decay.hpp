#pragma once

#include "tfq/norms.hpp"
#include "tfq/quantization.hpp"

namespace tfq {

/// Point controlling an entry's weight: T_tau(lambda, mu), or mu for Born-Jordan matrices.
inline PhaseSpacePoint weight_center(const GaborMatrix& M, const PhaseSpacePoint& lambda, const PhaseSpacePoint& mu) {
    return M.born_jordan ? mu : gabor_center(lambda, mu, M.tau);
}

/// h(k) = max over mu with mu, mu + k in the lattice of |entry(mu + k, mu)| <center>^{-m}.
/// Indexed by difference vectors on a lattice of twice the radius.
inline LatticeArray envelope(const GaborMatrix& M, double m) {
    const Lattice& L = M.lattice;
    require(static_cast<std::size_t>(M.entries.rows()) == L.count() && static_cast<std::size_t>(M.entries.cols()) == L.count(),
            "envelope: matrix does not match its lattice");
    LatticeArray h(Lattice(L.alpha, L.beta, 2 * L.radius));
    const std::size_t N = L.count();
    for (std::size_t li = 0; li < N; ++li) {
        auto [lk, ll] = L.indices(li);
        for (std::size_t mi = 0; mi < N; ++mi) {
            auto [mk, ml] = L.indices(mi);
            cplx v = M(li, mi);
            require(is_finite(v), "envelope: non-finite matrix entry");
            double w = std::pow(bracket(weight_center(M, L.point(li), L.point(mi))), -m);
            double val = std::abs(v) * w;
            auto& slot = h.at(lk - mk, ll - ml);
            if (val > slot.real()) slot = val;
        }
    }
    return h;
}

inline double envelope_norm(const LatticeArray& h, double q, double s) { return weighted_seq_norm(h, q, s); }

/// Least-squares decay order: minus the slope of log h(k) against log<lambda_k>, over points with
/// Euclidean index norm >= 2, max-norm index <= fit_radius (default: the array radius) and
/// h above 1e-12 of its maximum.
inline double decay_order_fit(const LatticeArray& h, int fit_radius = -1) {
    h.validate();
    const Lattice& L = h.lattice;
    if (fit_radius < 0) fit_radius = L.radius;
    double hmax = 0.0;
    for (auto v : h.values) hmax = std::max(hmax, std::abs(v));
    std::vector<double> xs, ys;
    std::vector<long long> radii;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        auto [k, l] = L.indices(i);
        double r = std::hypot(k, l);
        double v = std::abs(h.values[i]);
        if (r < 2.0 || std::max(std::abs(k), std::abs(l)) > fit_radius || !(v > 1e-12 * hmax)) continue;
        xs.push_back(std::log(bracket(L.point(i))));
        ys.push_back(std::log(v));
        radii.push_back(std::llround(r * 1e6));
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    require(radii.size() >= 4, "decay_order_fit: fewer than 4 usable radii with |k| >= 2");
    const double n = static_cast<double>(xs.size());
    KahanSum<double> sx, sy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx.add(xs[i]);
        sy.add(ys[i]);
    }
    const double mx = sx.value() / n, my = sy.value() / n;
    KahanSum<double> sxy, sxx;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy.add((xs[i] - mx) * (ys[i] - my));
        sxx.add((xs[i] - mx) * (xs[i] - mx));
    }
    require(sxx.value() > 0.0, "decay_order_fit: degenerate abscissae");
    return -sxy.value() / sxx.value();
}

/// max over lattice pairs of |entry| <lambda - mu>^s / (seminorm <center>^m).
inline double bound_constant(const GaborMatrix& M, double s, double m, double seminorm_value) {
    require(seminorm_value > 0.0 && std::isfinite(seminorm_value), "bound_constant: seminorm must be positive and finite");
    const Lattice& L = M.lattice;
    double best = 0.0;
    for (std::size_t li = 0; li < L.count(); ++li)
        for (std::size_t mi = 0; mi < L.count(); ++mi) {
            auto lam = L.point(li), mu = L.point(mi);
            double v = std::abs(M(li, mi)) * std::pow(bracket(lam - mu), s) /
                       (seminorm_value * std::pow(bracket(weight_center(M, lam, mu)), m));
            best = std::max(best, v);
        }
    return best;
}

struct EnvelopeNorm {
    double q = 1.0;
    double s = 0.0;
    double value = 0.0;
};

struct DecayReport {
    double tau = 0.5;
    bool born_jordan = false;
    double m = 0.0;
    int n = 0;
    int radius = 0;
    LatticeArray envelope;
    std::vector<EnvelopeNorm> envelope_norms;
    double fitted_order = 0.0;
    double seminorm_used = 0.0;
    double bound_constant = 0.0;
    // variant with s in (n, n+1) controlled by |sigma|_{n+1,m}
    double fractional_s = 0.0;
    double fractional_seminorm = 0.0;
    double fractional_bound_constant = 0.0;
    bool fractional_available = false;
};

inline std::vector<std::pair<double, double>> default_envelope_norms() { return {{1.0, 3.0}, {2.0, 0.0}, {inf, 0.0}}; }

/// Region over which seminorms are sampled for a lattice experiment.
inline double seminorm_region(const Lattice& L) { return std::max(L.radius * L.alpha, L.radius * L.beta); }

inline SeminormReport checked_seminorm(const SymbolSpec& s, int n, double m, double region) {
    auto r = seminorm(s, n, m, region);
    if (r.divergence_flag)
        throw InvalidArgument("seminorm |sigma|_{" + std::to_string(n) + "," + format_number(m) +
                              "} diverges (growth exponent " + format_number(r.growth_exponent) + " between radii " +
                              format_number(region) + " and " + format_number(2.0 * region) + ")");
    return r;
}

/// Decay report for a precomputed matrix of the symbol.
inline DecayReport verify_th34(const GaborMatrix& M, const SymbolSpec& s, int n, double m,
                               const std::vector<std::pair<double, double>>& norms = default_envelope_norms()) {
    require(n >= 0 && n <= 6, "verify_th34: n must be in [0, 6]");
    const double region = seminorm_region(M.lattice);
    auto sn = checked_seminorm(s, n, m, region);
    DecayReport r;
    r.tau = M.tau;
    r.born_jordan = M.born_jordan;
    r.m = m;
    r.n = n;
    r.radius = M.lattice.radius;
    r.envelope = envelope(M, m);
    for (auto [q, sw] : norms) r.envelope_norms.push_back({q, sw, envelope_norm(r.envelope, q, sw)});
    r.fitted_order = decay_order_fit(r.envelope, M.lattice.radius);
    r.seminorm_used = sn.value;
    r.bound_constant = bound_constant(M, n, m, sn.value);
    auto sf = seminorm(s, n + 1, m, region);
    r.fractional_s = n + 0.5;
    if (!sf.divergence_flag && sf.value > 0.0) {
        r.fractional_available = true;
        r.fractional_seminorm = sf.value;
        r.fractional_bound_constant = bound_constant(M, r.fractional_s, m, sf.value);
    }
    return r;
}

inline DecayReport verify_th34(const SymbolSpec& s, const SampledSignal& g, const Lattice& lattice, double tau, int n,
                               double m, const std::vector<std::pair<double, double>>& norms = default_envelope_norms()) {
    require(n >= 0 && n <= 6, "verify_th34: n must be in [0, 6]");
    checked_seminorm(s, n, m, seminorm_region(lattice));
    return verify_th34(gabor_matrix_direct(s, g, lattice, tau), s, n, m, norms);
}

struct TauSweepReport {
    std::vector<double> taus;
    std::vector<double> norms;
    double max_over_tau = 0.0;
    double min_over_tau = 0.0;
    double ratio() const { return max_over_tau / min_over_tau; }
};

inline TauSweepReport tau_sweep(const std::vector<GaborMatrix>& matrices, double m, double q, double s) {
    require(!matrices.empty(), "tau_sweep: no tau values");
    TauSweepReport r;
    for (const auto& M : matrices) {
        r.taus.push_back(M.tau);
        r.norms.push_back(envelope_norm(envelope(M, m), q, s));
    }
    r.max_over_tau = *std::max_element(r.norms.begin(), r.norms.end());
    r.min_over_tau = *std::min_element(r.norms.begin(), r.norms.end());
    return r;
}

inline TauSweepReport tau_sweep(const SymbolSpec& sym, const SampledSignal& g, const Lattice& lattice,
                                const std::vector<double>& taus, double m, double q, double s) {
    require(!taus.empty(), "tau_sweep: no tau values");
    std::vector<GaborMatrix> ms;
    for (double t : taus) ms.push_back(gabor_matrix_direct(sym, g, lattice, t));
    return tau_sweep(ms, m, q, s);
}

struct BjDecayReport {
    GaborMatrix matrix;
    LatticeArray bj_envelope;
    double bj_norm = 0.0;
    std::vector<double> node_norms;   // ||h_tau_i <.>^{|m|}||, Peetre-corrected per node
    double averaged_norm = 0.0;       // 2^{|m|/2} sum_i w_i node_norms[i]
    double domination_ratio = 0.0;    // max_k h_BJ(k) / (2^{|m|/2} <k>^{|m|} sum_i w_i h_tau_i(k))
    double raw_domination_ratio = 0.0;  // same without the Peetre constant 2^{|m|/2}
    bool dominated = false;
};

/// Tolerance for the Born-Jordan domination check.
inline constexpr double bj_domination_tol = 1e-6;

inline BjDecayReport bj_decay_check(const std::vector<GaborMatrix>& parts, const Quadrature& quad, double m, double q, double s) {
    BjDecayReport r;
    r.matrix = born_jordan_combine(parts, quad);
    r.bj_envelope = envelope(r.matrix, m);
    r.bj_norm = envelope_norm(r.bj_envelope, q, s);
    const Lattice& D = r.bj_envelope.lattice;
    const double peetre = std::pow(2.0, std::abs(m) / 2.0);
    std::vector<double> avg(D.count(), 0.0);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto h = envelope(parts[i], m);
        LatticeArray corrected(D);
        for (std::size_t k = 0; k < D.count(); ++k) {
            double w = std::pow(bracket(D.point(k)), std::abs(m));
            corrected.values[k] = std::abs(h.values[k]) * w;
            avg[k] += quad.weights[i] * std::abs(h.values[k]) * w;
        }
        r.node_norms.push_back(envelope_norm(corrected, q, s));
        r.averaged_norm += quad.weights[i] * r.node_norms.back();
    }
    r.averaged_norm *= peetre;
    for (std::size_t k = 0; k < D.count(); ++k) {
        double hb = std::abs(r.bj_envelope.values[k]);
        if (hb == 0.0) continue;
        r.raw_domination_ratio = std::max(r.raw_domination_ratio, avg[k] > 0.0 ? hb / avg[k] : inf);
        r.domination_ratio = std::max(r.domination_ratio, avg[k] > 0.0 ? hb / (peetre * avg[k]) : inf);
    }
    r.dominated = r.domination_ratio <= 1.0 + bj_domination_tol;
    return r;
}

inline BjDecayReport bj_decay_check(const SymbolSpec& sym, const SampledSignal& g, const Lattice& lattice,
                                    const Quadrature& quad, double m, double q, double s) {
    return bj_decay_check(born_jordan_components(sym, g, lattice, quad), quad, m, q, s);
}

}  // namespace tfq
