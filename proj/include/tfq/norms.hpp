#pragma once

#include <random>

#include "tfq/stft.hpp"

namespace tfq {

/// Sequence indexed by a truncated lattice, in lattice order.
struct LatticeArray {
    Lattice lattice;
    std::vector<cplx> values;

    LatticeArray() = default;
    explicit LatticeArray(const Lattice& L) : lattice(L), values(L.count(), cplx{}) {}

    cplx& at(int k, int l) { return values[lattice.index(k, l)]; }
    const cplx& at(int k, int l) const { return values[lattice.index(k, l)]; }

    void validate() const {
        lattice.validate();
        require(values.size() == lattice.count(), "lattice array: length does not match lattice");
        for (auto v : values) require(is_finite(v), "lattice array: non-finite entry");
    }
};

inline void require_exponent(double p, const char* name) {
    require(p > 0.0 && !std::isnan(p), std::string(name) + " must be > 0 (use infinity for the sup norm)");
}

/// l^q norm of a nonnegative sequence; quasi-norm for 0 < q < 1.
template <typename It>
double lq_sum(It first, It last, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (; first != last; ++first) m = std::max(m, *first);
        return m;
    }
    KahanSum<double> s;
    for (; first != last; ++first) s.add(std::pow(*first, q));
    return std::pow(s.value(), 1.0 / q);
}

/// (sum_k |a_k|^q <lambda_k>^{sq})^{1/q} with lambda_k the lattice point of index k.
inline double weighted_seq_norm(const LatticeArray& a, double q, double s) {
    require_exponent(q, "q");
    a.validate();
    std::vector<double> t(a.values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::abs(a.values[i]) * std::pow(bracket(a.lattice.point(i)), s);
    return lq_sum(t.begin(), t.end(), q);
}

/// Correct inclusion relation l^{q_src}_{s_src} -> l^{q_tgt}_{s_tgt} on a dim-dimensional index set.
inline bool seq_inclusion_holds(double q_src, double s_src, double q_tgt, double s_tgt, int dim) {
    const double iq_src = std::isinf(q_src) ? 0.0 : 1.0 / q_src;
    const double iq_tgt = std::isinf(q_tgt) ? 0.0 : 1.0 / q_tgt;
    if (q_src <= q_tgt) return s_src >= s_tgt;
    return s_src >= s_tgt && iq_src + s_src / dim > iq_tgt + s_tgt / dim;
}

/// Degree-7 smoothstep on [0, 1], clamped outside.
inline double smoothstep7(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * u * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u);
}

/// cube: sigma_k(xi) = rho(xi - k) / sum_l rho(xi - l), rho = 1 on |xi| <= 1/2, 0 on |xi| >= 3/4.
/// dyadic: psi_0 = phi, psi_j = psi(2^{-j} .) with psi = phi - phi(2 .), phi = 1 on |w| <= 1, 0 on |w| >= 2,
/// so supp psi lies in 1/2 <= |w| <= 2.
struct PartitionOfUnity {
    enum class Kind { cube, dyadic };
    Kind kind = Kind::cube;

    static double rho(double xi) { return 1.0 - smoothstep7((std::abs(xi) - 0.5) / 0.25); }
    static double phi(double w) { return 1.0 - smoothstep7(std::abs(w) - 1.0); }

    double eval(int k, double xi) const {
        if (kind == Kind::cube) {
            double r = rho(xi - k);
            if (r == 0.0) return 0.0;
            const int base = static_cast<int>(std::floor(xi));
            double total = 0.0;
            for (int l = base - 1; l <= base + 2; ++l) total += rho(xi - l);
            return r / total;
        }
        if (k == 0) return phi(xi);
        return phi(std::ldexp(xi, -k)) - phi(std::ldexp(xi, 1 - k));
    }

    /// Indices whose pieces meet the frequency band [-1/(2dt), 1/(2dt)).
    std::vector<int> indices(const Grid& grid) const {
        const double B = 0.5 / grid.spacing;
        std::vector<int> out;
        if (kind == Kind::cube) {
            for (int k = static_cast<int>(std::ceil(-B - 0.75)); k <= static_cast<int>(std::floor(B + 0.75)); ++k)
                if (k - 0.75 < B && k + 0.75 > -B) out.push_back(k);
        } else {
            const int J = static_cast<int>(std::ceil(std::log2(B)));
            for (int j = 0; j <= J; ++j) out.push_back(j);
        }
        return out;
    }
};

namespace detail {
inline SampledSignal fourier_multiplier(const SampledSignal& f, const PartitionOfUnity& pu, int k) {
    auto F = centered_dft(f.values, f.grid.spacing, f.grid.origin);
    for (std::size_t m = 0; m < F.size(); ++m) F[m] *= pu.eval(k, f.grid.omega(static_cast<std::ptrdiff_t>(m)));
    return SampledSignal(f.grid, centered_idft(F, f.grid.spacing, f.grid.origin));
}

inline bool contains(const std::vector<int>& v, int k) { return std::find(v.begin(), v.end(), k) != v.end(); }
}  // namespace detail

/// Box_k f = F^{-1} sigma_k F f.
inline SampledSignal freq_uniform_decomp(const SampledSignal& f, int k) {
    PartitionOfUnity pu{PartitionOfUnity::Kind::cube};
    require(detail::contains(pu.indices(f.grid), k), "freq_uniform_decomp: k outside the frequency band");
    return detail::fourier_multiplier(f, pu, k);
}

/// F^{-1} psi_j F f.
inline SampledSignal dyadic_block(const SampledSignal& f, int j) {
    PartitionOfUnity pu{PartitionOfUnity::Kind::dyadic};
    require(detail::contains(pu.indices(f.grid), j), "dyadic_block: j outside the frequency band");
    return detail::fourier_multiplier(f, pu, j);
}

/// L^p norm on the grid with weight h evaluated at (t, 0).
inline double weighted_lp_norm(const SampledSignal& f, double p, const WeightSpec& h) {
    require_exponent(p, "p");
    std::vector<double> t(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        t[j] = std::abs(f[j]) * weight_eval(h, PhaseSpacePoint{f.grid.t(static_cast<std::ptrdiff_t>(j)), 0.0});
    double v = lq_sum(t.begin(), t.end(), p);
    return std::isinf(p) ? v : v * std::pow(f.grid.spacing, 1.0 / p);
}

/// Mixed norm: inner L^p over x with weight w(x, omega), outer L^q over omega.
inline double mixed_norm(const PhaseSpaceArray& V, double p, double q, const WeightSpec& w) {
    require_exponent(p, "p");
    require_exponent(q, "q");
    std::vector<double> inner(static_cast<std::size_t>(V.cols()));
    for (Eigen::Index k = 0; k < V.cols(); ++k) {
        std::vector<double> t(static_cast<std::size_t>(V.rows()));
        for (Eigen::Index i = 0; i < V.rows(); ++i)
            t[static_cast<std::size_t>(i)] = std::abs(V.values(i, k)) * weight_eval(w, PhaseSpacePoint{V.x(i), V.omega(k)});
        double v = lq_sum(t.begin(), t.end(), p);
        inner[static_cast<std::size_t>(k)] = std::isinf(p) ? v : v * std::pow(V.x_grid.spacing, 1.0 / p);
    }
    double v = lq_sum(inner.begin(), inner.end(), q);
    return std::isinf(q) ? v : v * std::pow(V.omega_grid.spacing, 1.0 / q);
}

/// ||V_g f||_{L^{p,q}_w}.
inline double modulation_norm_stft(const SampledSignal& f, const SampledSignal& g, double p, double q, const WeightSpec& w) {
    require_exponent(p, "p");
    require_exponent(q, "q");
    return mixed_norm(stft(f, g, 1, 1), p, q, w);
}

/// (sum_k ||Box_k f||^q_{L^p_h} w_seq(k)^q)^{1/q}; w_seq is evaluated at (0, k).
inline double modulation_norm_decomp(const SampledSignal& f, double p, double q, const WeightSpec& h, const WeightSpec& w_seq) {
    require_exponent(p, "p");
    require_exponent(q, "q");
    PartitionOfUnity pu{PartitionOfUnity::Kind::cube};
    auto ks = pu.indices(f.grid);
    std::vector<double> t(ks.size());
    parallel_for(ks.size(), [&](std::size_t i) {
        t[i] = weighted_lp_norm(detail::fourier_multiplier(f, pu, ks[i]), p, h) *
               weight_eval(w_seq, PhaseSpacePoint{0.0, static_cast<double>(ks[i])});
    });
    return lq_sum(t.begin(), t.end(), q);
}

/// (sum_j 2^{jsq} ||F^{-1} psi_j F f||_p^q)^{1/q}, j capped by the Nyquist band.
inline double besov_norm(const SampledSignal& f, double p, double q, double s) {
    require_exponent(p, "p");
    require_exponent(q, "q");
    PartitionOfUnity pu{PartitionOfUnity::Kind::dyadic};
    auto js = pu.indices(f.grid);
    std::vector<double> t(js.size());
    parallel_for(js.size(), [&](std::size_t i) {
        t[i] = weighted_lp_norm(detail::fourier_multiplier(f, pu, js[i]), p, WeightSpec::polynomial(0.0)) *
               std::pow(2.0, js[i] * s);
    });
    return lq_sum(t.begin(), t.end(), q);
}

/// theta(q) = min{0, 1/q - 1}.
inline double besov_theta(double q) { return std::min(0.0, (std::isinf(q) ? 0.0 : 1.0 / q) - 1.0); }

struct EmbeddingReport {
    std::vector<double> ratios;  // b_i / a_i
    double max_ratio = 0.0;
    double growth = 1.0;         // max_{i<j} r_j / r_i along the family order
    bool violated = false;
};

/// Ratio factor along a scale-ordered family above which an embedding A -> B counts as violated.
inline constexpr double embedding_growth_limit = 4.0;

/// Tests ||f_i||_B <= C ||f_i||_A on a family ordered by scale.
inline EmbeddingReport check_embedding(const std::vector<double>& norm_a, const std::vector<double>& norm_b) {
    require(!norm_a.empty() && norm_a.size() == norm_b.size(), "check_embedding: families must match and be nonempty");
    EmbeddingReport r;
    for (std::size_t i = 0; i < norm_a.size(); ++i) {
        require(norm_a[i] > 0.0 && std::isfinite(norm_a[i]) && std::isfinite(norm_b[i]), "check_embedding: norms must be finite and positive");
        r.ratios.push_back(norm_b[i] / norm_a[i]);
    }
    r.max_ratio = *std::max_element(r.ratios.begin(), r.ratios.end());
    double running_min = r.ratios.front();
    for (std::size_t j = 1; j < r.ratios.size(); ++j) {
        r.growth = std::max(r.growth, r.ratios[j] / running_min);
        running_min = std::min(running_min, r.ratios[j]);
    }
    r.violated = r.growth > embedding_growth_limit;
    return r;
}

struct NamedSignal {
    std::string id;
    SampledSignal signal;
};

/// Default grid for norm experiments.
inline Grid norm_grid() { return Grid(512, 1.0 / 32.0); }

/// Ten Schwartz-type test signals: Gaussians, Hermite-type, modulated and chirped Gaussians.
inline std::vector<NamedSignal> norm_signal_family(const Grid& grid) {
    auto gw = [](double w) { return [w](double t) { return cplx(std::exp(-pi * t * t / (w * w))); }; };
    std::vector<NamedSignal> out;
    out.push_back({"gauss_w0.5", sample_function(grid, gw(0.5))});
    out.push_back({"gauss_w1", sample_function(grid, gw(1.0))});
    out.push_back({"gauss_w2", sample_function(grid, gw(2.0))});
    out.push_back({"hermite1", sample_function(grid, [](double t) { return cplx(t * std::exp(-pi * t * t)); })});
    out.push_back({"hermite2", sample_function(grid, [](double t) { return cplx((4.0 * pi * t * t - 1.0) * std::exp(-pi * t * t)); })});
    out.push_back({"shifted_gauss", sample_function(grid, [](double t) { return cplx(std::exp(-pi * (t - 1.5) * (t - 1.5))); })});
    out.push_back({"modulated_w3", sample_function(grid, [](double t) { return std::polar(std::exp(-pi * t * t), 2.0 * pi * 3.0 * t); })});
    out.push_back({"modulated_w6", sample_function(grid, [](double t) { return std::polar(std::exp(-pi * t * t / 2.25), 2.0 * pi * 6.0 * t); })});
    out.push_back({"chirp_c1", sample_function(grid, [](double t) { return std::polar(std::exp(-pi * t * t), pi * t * t); })});
    out.push_back({"chirp_c3", sample_function(grid, [](double t) { return std::polar(std::exp(-pi * t * t / 4.0), 3.0 * pi * t * t); })});
    return out;
}

/// Gaussians of shrinking width (growing bandwidth), ordered by scale.
inline std::vector<NamedSignal> dilation_family(const Grid& grid) {
    std::vector<NamedSignal> out;
    for (double w : {2.0, 1.4, 1.0, 0.7, 0.5, 0.35, 0.25, 0.18}) {
        out.push_back({"dilation_w" + format_number(w),
                       sample_function(grid, [w](double t) { return cplx(std::exp(-pi * t * t / (w * w))); })});
    }
    return out;
}

/// Gaussians modulated to growing frequencies, ordered by scale.
inline std::vector<NamedSignal> modulation_family(const Grid& grid) {
    std::vector<NamedSignal> out;
    for (double w0 : {0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0}) {
        out.push_back({"modulation_" + format_number(w0),
                       sample_function(grid, [w0](double t) { return std::polar(std::exp(-pi * t * t), 2.0 * pi * w0 * t); })});
    }
    return out;
}

struct EmbeddingCase {
    std::string name;
    std::string family;
    bool predicted = true;  // false for deliberately reversed controls
    EmbeddingReport report;
};

/// Scale-ordered experiments for the sequence inclusions, the modulation-space chain and the
/// Besov sandwich, plus reversed controls expected to report violated = true.
inline std::vector<EmbeddingCase> embedding_suite(const Grid& grid = norm_grid()) {
    std::vector<EmbeddingCase> out;
    auto mod = [](double q, double s) {
        return [q, s](const SampledSignal& f) {
            return modulation_norm_decomp(f, inf, q, WeightSpec::polynomial(0), WeightSpec::polynomial(s));
        };
    };
    auto bes = [](double q, double s) { return [q, s](const SampledSignal& f) { return besov_norm(f, inf, q, s); }; };
    auto run = [&](const std::string& name, const std::string& fam_name, const std::vector<NamedSignal>& fam, bool predicted,
                   auto norm_a, auto norm_b) {
        std::vector<double> a, b;
        for (const auto& f : fam) {
            a.push_back(norm_a(f.signal));
            b.push_back(norm_b(f.signal));
        }
        out.push_back({name, fam_name, predicted, check_embedding(a, b)});
    };

    // sequence spaces on deltas moving outwards along the first index
    const Lattice idx(1.0, 1.0, 8);
    auto seq_case = [&](double q1, double s1, double q2, double s2) {
        std::vector<double> a, b;
        for (int r : {0, 1, 2, 4, 6, 8}) {
            LatticeArray d(idx);
            d.at(r, 0) = 1.0;
            a.push_back(weighted_seq_norm(d, q1, s1));
            b.push_back(weighted_seq_norm(d, q2, s2));
        }
        const std::string name = "l^" + format_number(q1) + "_" + format_number(s1) + " -> l^" + format_number(q2) + "_" +
                                 format_number(s2);
        out.push_back({name, "deltas", seq_inclusion_holds(q1, s1, q2, s2, 2), check_embedding(a, b)});
    };
    seq_case(1, 1, 2, 0);
    seq_case(2, 2, 1, 0);
    seq_case(inf, 3, 1, 0);
    seq_case(2, 0, 2, 1);

    const std::vector<std::pair<std::string, std::vector<NamedSignal>>> families{{"dilation", dilation_family(grid)},
                                                                                 {"modulation", modulation_family(grid)}};
    for (const auto& [fam_name, fam] : families) {
        run("M^{inf,1}_2 -> M^{inf,2}_2", fam_name, fam, true, mod(1, 2), mod(2, 2));
        run("M^{inf,2}_2 -> M^{inf,1}_0", fam_name, fam, true, mod(2, 2), mod(1, 0));
        for (double q : {1.0, 2.0, inf})
            for (double s : {0.0, 1.0}) {
                const double lower = s + (std::isinf(q) ? 0.0 : 1.0 / q);
                const double upper = s + besov_theta(q);
                const std::string qs = format_number(q), ss = format_number(s);
                run("B^{inf," + qs + "}_" + format_number(lower) + " -> M^{inf," + qs + "}_" + ss, fam_name, fam, true,
                    bes(q, lower), mod(q, s));
                run("M^{inf," + qs + "}_" + ss + " -> B^{inf," + qs + "}_" + format_number(upper), fam_name, fam, true,
                    mod(q, s), bes(q, upper));
            }
        run("M^{inf,1}_0 -> M^{inf,1}_2", fam_name, fam, false, mod(1, 0), mod(1, 2));
    }
    return out;
}

}  // namespace tfq
