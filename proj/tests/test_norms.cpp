#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tfq/norms.hpp"

using namespace tfq;
using Catch::Approx;

namespace {

const Lattice index_lattice(1.0, 1.0, 6);

LatticeArray random_sparse_sequence(std::mt19937_64& rng) {
    LatticeArray a(index_lattice);
    std::uniform_int_distribution<int> pos(-6, 6), count(1, 12);
    std::normal_distribution<double> nd;
    for (int i = count(rng); i > 0; --i) a.at(pos(rng), pos(rng)) = cplx(nd(rng), nd(rng));
    return a;
}

// Hoelder constant of l^{q_src}_{s_src} -> l^{q_tgt}_{s_tgt} on the truncated index set.
double hoelder_constant(double q_src, double s_src, double q_tgt, double s_tgt) {
    if (q_src <= q_tgt) return 1.0;
    const double r = 1.0 / (1.0 / q_tgt - (std::isinf(q_src) ? 0.0 : 1.0 / q_src));
    double sum = 0.0;
    for (std::size_t i = 0; i < index_lattice.count(); ++i) sum += std::pow(bracket(index_lattice.point(i)), (s_tgt - s_src) * r);
    return std::pow(sum, 1.0 / r);
}

double mod_decomp(const SampledSignal& f, double q, double s) {
    return modulation_norm_decomp(f, inf, q, WeightSpec::polynomial(0), WeightSpec::polynomial(s));
}

template <typename A, typename B>
EmbeddingReport embedding_on(const std::vector<NamedSignal>& family, A norm_a, B norm_b) {
    std::vector<double> a, b;
    for (const auto& f : family) {
        a.push_back(norm_a(f.signal));
        b.push_back(norm_b(f.signal));
    }
    return check_embedding(a, b);
}

// Spectrum supported in |w| <= 1/4, where sigma_0 = 1.
SampledSignal narrow_band_signal(const Grid& grid) {
    std::vector<cplx> F(grid.n_samples);
    for (std::size_t k = 0; k < F.size(); ++k) {
        double w = grid.omega(static_cast<std::ptrdiff_t>(k));
        if (std::abs(w) <= 0.25) F[k] = cplx(1.0 + w, 0.5 - w * w);
    }
    return SampledSignal(grid, centered_idft(F, grid.spacing));
}

}  // namespace

TEST_CASE("weighted sequence norms", "[norms]") {
    LatticeArray a(index_lattice);
    a.at(0, 0) = 1.0;
    for (double q : {0.5, 1.0, 2.0, inf})
        for (double s : {-2.0, 0.0, 3.0}) REQUIRE(weighted_seq_norm(a, q, s) == Approx(1.0));
    LatticeArray b(index_lattice);
    b.at(1, 0) = 1.0;
    REQUIRE(weighted_seq_norm(b, 2.0, 1.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
    REQUIRE_THROWS_AS(weighted_seq_norm(b, 0.0, 1.0), InvalidArgument);
    REQUIRE_THROWS_AS(weighted_seq_norm(b, -1.0, 1.0), InvalidArgument);
}

TEST_CASE("weighted sequence norms are monotone in s and homogeneous", "[norms]") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        auto a = random_sparse_sequence(rng);
        for (double q : {0.5, 1.0, 2.0, inf}) {
            REQUIRE(weighted_seq_norm(a, q, 0.0) <= weighted_seq_norm(a, q, 1.0));
            REQUIRE(weighted_seq_norm(a, q, 1.0) <= weighted_seq_norm(a, q, 2.5));
            auto b = a;
            for (auto& v : b.values) v *= cplx(0.0, -3.0);
            REQUIRE(weighted_seq_norm(b, q, 1.0) == Approx(3.0 * weighted_seq_norm(a, q, 1.0)).epsilon(1e-13));
        }
    }
}

TEST_CASE("inclusions of weighted sequence spaces", "[norms]") {
    struct Case {
        double q_src, s_src, q_tgt, s_tgt;
    };
    const std::vector<Case> predicted{{1, 1, 2, 0}, {2, 2, 1, 0}, {0.5, 0, 1, 0}, {inf, 3, 1, 0}, {2, 4, 0.5, 0}};
    std::mt19937_64 rng(8);
    std::vector<LatticeArray> seqs;
    for (int t = 0; t < 100; ++t) seqs.push_back(random_sparse_sequence(rng));
    for (const auto& c : predicted) {
        REQUIRE(seq_inclusion_holds(c.q_src, c.s_src, c.q_tgt, c.s_tgt, 2));
        const double C = hoelder_constant(c.q_src, c.s_src, c.q_tgt, c.s_tgt);
        double worst = 0.0;
        for (const auto& a : seqs)
            worst = std::max(worst, weighted_seq_norm(a, c.q_tgt, c.s_tgt) / weighted_seq_norm(a, c.q_src, c.s_src));
        REQUIRE(worst <= C * (1 + 1e-12));
    }
    SECTION("reversed inclusions fail on spreading deltas") {
        REQUIRE_FALSE(seq_inclusion_holds(2, 0, 1, 2, 2));
        REQUIRE_FALSE(seq_inclusion_holds(2, 0, 2, 1, 2));
        // the literal printed condition s2 <= s1 would predict l^2_0 -> l^2_1
        std::vector<double> na, nb;
        for (int r : {0, 1, 2, 4, 6}) {
            LatticeArray d(index_lattice);
            d.at(r, 0) = 1.0;
            na.push_back(weighted_seq_norm(d, 2, 0));
            nb.push_back(weighted_seq_norm(d, 2, 1));
        }
        REQUIRE(check_embedding(na, nb).violated);
    }
    SECTION("borderline exponent fails") { REQUIRE_FALSE(seq_inclusion_holds(2, 1, 1, 0, 2)); }
}

TEST_CASE("partitions of unity", "[norms]") {
    PartitionOfUnity cube{PartitionOfUnity::Kind::cube}, dyadic{PartitionOfUnity::Kind::dyadic};
    for (double xi = -7.3; xi <= 7.3; xi += 0.01) {
        double total = 0.0;
        for (int k = -9; k <= 9; ++k) total += cube.eval(k, xi);
        REQUIRE(total == Approx(1.0).margin(1e-12));
        REQUIRE(cube.eval(2, xi) == Approx(cube.eval(0, xi - 2)).margin(1e-15));
    }
    REQUIRE(cube.eval(0, 0.76) == 0.0);
    REQUIRE(cube.eval(0, -0.76) == 0.0);
    REQUIRE(cube.eval(0, 0.25) == 1.0);
    for (double w = 0.0; w <= 16.0; w += 0.01) {
        double total = 0.0;
        for (int j = 0; j <= 4; ++j) total += dyadic.eval(j, w);
        REQUIRE(total == Approx(1.0).margin(1e-12));
        for (int j = 1; j <= 4; ++j)
            if (w < std::ldexp(0.5, j) - 1e-12 || w > std::ldexp(2.0, j) + 1e-12) REQUIRE(dyadic.eval(j, w) == 0.0);
    }
}

TEST_CASE("frequency-uniform decomposition", "[norms]") {
    const Grid grid = norm_grid();
    PartitionOfUnity cube{PartitionOfUnity::Kind::cube};
    SECTION("pieces sum to the signal") {
        for (const auto& f : norm_signal_family(grid)) {
            SampledSignal total(grid);
            for (int k : cube.indices(grid)) {
                auto piece = freq_uniform_decomp(f.signal, k);
                for (std::size_t j = 0; j < grid.n_samples; ++j) total.values[j] += piece[j];
            }
            REQUIRE(relative_l2_error(total, f.signal) <= 1e-10);
        }
    }
    SECTION("narrow-band signal lives in the central piece") {
        auto f = narrow_band_signal(grid);
        REQUIRE(relative_l2_error(freq_uniform_decomp(f, 0), f) <= 1e-12);
        for (int k : {-3, -2, 2, 3, 7}) REQUIRE(l2_norm(freq_uniform_decomp(f, k)) <= 1e-12 * l2_norm(f));
    }
    SECTION("modulation covariance") {
        auto f = sample_function(grid, [](double t) { return std::exp(-pi * t * t); });
        auto b0 = freq_uniform_decomp(f, 0);
        for (int k : {1, 3, -5}) {
            auto mk = tf_shift(f, {0.0, static_cast<double>(k)});
            auto bk = freq_uniform_decomp(mk, k);
            double dev = 0.0, peak = 0.0;
            for (std::size_t j = 0; j < grid.n_samples; ++j) {
                dev = std::max(dev, std::abs(std::abs(bk[j]) - std::abs(b0[j])));
                peak = std::max(peak, std::abs(b0[j]));
            }
            REQUIRE(dev <= 1e-8 * peak);
        }
    }
    SECTION("out-of-band index is rejected") {
        REQUIRE_THROWS_AS(freq_uniform_decomp(narrow_band_signal(grid), 40), InvalidArgument);
        REQUIRE_THROWS_AS(dyadic_block(narrow_band_signal(grid), 9), InvalidArgument);
    }
}

TEST_CASE("modulation norm via the stft", "[norms]") {
    const Grid grid = norm_grid();
    auto g = gaussian_window(grid, 1.0);
    REQUIRE(modulation_norm_stft(g, g, 2, 2, WeightSpec::polynomial(0)) == Approx(1.0).epsilon(1e-6));
    auto family = norm_signal_family(grid);
    SECTION("homogeneity") {
        auto f = family[3].signal;
        auto cf = f;
        for (auto& v : cf.values) v *= cplx(0.0, 2.5);
        for (double p : {1.0, 2.0, inf})
            REQUIRE(modulation_norm_stft(cf, g, p, 1, WeightSpec::tensor(0, 2)) ==
                    Approx(2.5 * modulation_norm_stft(f, g, p, 1, WeightSpec::tensor(0, 2))).epsilon(1e-13));
        REQUIRE(modulation_norm_stft(SampledSignal(grid), g, 1, 1, WeightSpec::polynomial(1)) == 0.0);
    }
    SECTION("window independence") {
        auto g13 = gaussian_window(grid, 1.3);
        for (auto [p, q] : {std::pair{1.0, 1.0}, std::pair{inf, 1.0}, std::pair{2.0, inf}}) {
            std::vector<double> r;
            for (const auto& f : family)
                r.push_back(modulation_norm_stft(f.signal, g13, p, q, WeightSpec::polynomial(0)) /
                            modulation_norm_stft(f.signal, g, p, q, WeightSpec::polynomial(0)));
            double hi = *std::max_element(r.begin(), r.end()), lo = *std::min_element(r.begin(), r.end());
            double mid = 0.5 * (hi + lo);
            REQUIRE(hi <= 1.2 * mid);
            REQUIRE(lo >= 0.8 * mid);
        }
    }
    SECTION("quasi-norm exponents") {
        double v = modulation_norm_stft(family[0].signal, g, 0.5, 0.5, WeightSpec::polynomial(0));
        REQUIRE(std::isfinite(v));
        REQUIRE(v > 0.0);
    }
    SECTION("invalid exponents are rejected") {
        REQUIRE_THROWS_AS(modulation_norm_stft(g, g, 0.0, 1.0, WeightSpec::polynomial(0)), InvalidArgument);
        REQUIRE_THROWS_AS(modulation_norm_stft(g, g, 1.0, -2.0, WeightSpec::polynomial(0)), InvalidArgument);
    }
}

TEST_CASE("modulation norm via the frequency-uniform decomposition", "[norms]") {
    const Grid grid = norm_grid();
    auto g = gaussian_window(grid, 1.0);
    auto family = norm_signal_family(grid);
    SECTION("equivalent to the stft norm") {
        for (double q : {1.0, 2.0, inf})
            for (double s : {0.0, 2.0}) {
                std::vector<double> r;
                for (const auto& f : family)
                    r.push_back(mod_decomp(f.signal, q, s) / modulation_norm_stft(f.signal, g, inf, q, WeightSpec::tensor(0, s)));
                REQUIRE(*std::max_element(r.begin(), r.end()) <= 10.0 * *std::min_element(r.begin(), r.end()));
            }
    }
    SECTION("L2 case tracks the signal norm") {
        std::vector<double> r;
        for (const auto& f : family)
            r.push_back(modulation_norm_decomp(f.signal, 2, 2, WeightSpec::polynomial(0), WeightSpec::polynomial(0)) / l2_norm(f.signal));
        double hi = *std::max_element(r.begin(), r.end()), lo = *std::min_element(r.begin(), r.end());
        double mid = 0.5 * (hi + lo);
        REQUIRE(hi <= 1.1 * mid);
        REQUIRE(lo >= 0.9 * mid);
    }
    SECTION("homogeneity and zero") {
        auto f = family[7].signal;
        auto cf = f;
        for (auto& v : cf.values) v *= -4.0;
        REQUIRE(mod_decomp(cf, 1, 2) == Approx(4.0 * mod_decomp(f, 1, 2)).epsilon(1e-13));
        REQUIRE(mod_decomp(SampledSignal(grid), 1, 2) == 0.0);
    }
}

TEST_CASE("Besov norms", "[norms]") {
    const Grid grid = norm_grid();
    auto family = norm_signal_family(grid);
    SECTION("homogeneity and zero") {
        auto f = family[4].signal;
        auto cf = f;
        for (auto& v : cf.values) v *= cplx(1.0, 1.0);
        REQUIRE(besov_norm(cf, inf, 2, 1) == Approx(std::sqrt(2.0) * besov_norm(f, inf, 2, 1)).epsilon(1e-13));
        REQUIRE(besov_norm(SampledSignal(grid), inf, 1, 1) == 0.0);
    }
    SECTION("Gaussian norms grow with smoothness index") {
        auto f = family[1].signal;
        double prev = 0.0;
        for (double s : {0.0, 0.5, 1.0, 2.0, 3.0}) {
            double v = besov_norm(f, inf, inf, s);
            REQUIRE(std::isfinite(v));
            REQUIRE(v >= prev);
            prev = v;
        }
    }
    SECTION("theta") {
        REQUIRE(besov_theta(1.0) == 0.0);
        REQUIRE(besov_theta(2.0) == -0.5);
        REQUIRE(besov_theta(inf) == -1.0);
        REQUIRE(besov_theta(0.5) == 0.0);
    }
}

TEST_CASE("check_embedding", "[norms]") {
    auto r = check_embedding({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    REQUIRE(r.max_ratio == 1.0);
    REQUIRE_FALSE(r.violated);
    REQUIRE(check_embedding({1, 1, 1}, {1, 2, 5}).violated);
    REQUIRE_FALSE(check_embedding({1, 1, 1}, {5, 2, 1}).violated);
    REQUIRE_THROWS_AS(check_embedding({1.0}, {1.0, 2.0}), InvalidArgument);
    REQUIRE_THROWS_AS(check_embedding({0.0}, {1.0}), InvalidArgument);
}

TEST_CASE("modulation space embedding chain", "[norms][embedding]") {
    const Grid grid = norm_grid();
    for (const auto& family : {dilation_family(grid), modulation_family(grid)}) {
        // M^{inf,1}_{<.>^2} -> M^{inf,2}_{<.>^2} -> M^{inf,1}
        REQUIRE_FALSE(embedding_on(family, [](auto& f) { return mod_decomp(f, 1, 2); }, [](auto& f) { return mod_decomp(f, 2, 2); }).violated);
        REQUIRE_FALSE(embedding_on(family, [](auto& f) { return mod_decomp(f, 2, 2); }, [](auto& f) { return mod_decomp(f, 1, 0); }).violated);
    }
    SECTION("reversed chain is flagged") {
        auto rev = embedding_on(dilation_family(grid), [](auto& f) { return mod_decomp(f, 1, 0); }, [](auto& f) { return mod_decomp(f, 1, 2); });
        REQUIRE(rev.violated);
        auto rev_mod = embedding_on(modulation_family(grid), [](auto& f) { return mod_decomp(f, 1, 0); }, [](auto& f) { return mod_decomp(f, 1, 2); });
        REQUIRE(rev_mod.violated);
    }
}

TEST_CASE("Besov sandwich of modulation spaces", "[norms][embedding]") {
    const Grid grid = norm_grid();
    auto ten = norm_signal_family(grid);
    for (double q : {1.0, 2.0, inf})
        for (double s : {0.0, 1.0}) {
            const double lower = s + (std::isinf(q) ? 0.0 : 1.0 / q);
            const double upper = s + besov_theta(q);
            auto bes_lo = [&](const SampledSignal& f) { return besov_norm(f, inf, q, lower); };
            auto bes_hi = [&](const SampledSignal& f) { return besov_norm(f, inf, q, upper); };
            auto mod = [&](const SampledSignal& f) { return mod_decomp(f, q, s); };
            for (const auto& family : {dilation_family(grid), modulation_family(grid)}) {
                REQUIRE_FALSE(embedding_on(family, bes_lo, mod).violated);
                REQUIRE_FALSE(embedding_on(family, mod, bes_hi).violated);
            }
            // constants estimated on the ten-signal family stay finite
            REQUIRE(std::isfinite(embedding_on(ten, bes_lo, mod).max_ratio));
            REQUIRE(std::isfinite(embedding_on(ten, mod, bes_hi).max_ratio));
        }
}

TEST_CASE("embedding suite", "[norms][embedding]") {
    auto suite = embedding_suite();
    int controls = 0;
    for (const auto& c : suite) {
        INFO(c.name << " on " << c.family << " growth " << c.report.growth);
        REQUIRE(c.report.violated == !c.predicted);
        if (!c.predicted) ++controls;
    }
    REQUIRE(controls == 3);
}
