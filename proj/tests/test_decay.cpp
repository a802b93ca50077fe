#include <catch2/catch_amalgamated.hpp>

#include "tfq/decay.hpp"

using namespace tfq;
using Catch::Approx;

namespace {

const Grid lab_grid(256, 1.0 / 16.0);
const SampledSignal& window() {
    static const SampledSignal g = gaussian_window(lab_grid, 1.0);
    return g;
}

Lattice lat(int radius) { return Lattice(0.5, 0.5, radius); }

const GaborMatrix& identity_matrix(int radius) {
    static std::map<int, GaborMatrix> cache;
    auto it = cache.find(radius);
    if (it == cache.end()) it = cache.emplace(radius, gabor_matrix_direct(constant(1.0), window(), lat(radius), 0.5)).first;
    return it->second;
}

const GaborMatrix& bracket_matrix(int radius) {
    static std::map<int, GaborMatrix> cache;
    auto it = cache.find(radius);
    if (it == cache.end()) it = cache.emplace(radius, gabor_matrix_direct(bracket_power(1.0), window(), lat(radius), 0.5)).first;
    return it->second;
}

LatticeArray synthetic(int radius, double (*f)(double)) {
    LatticeArray h(Lattice(1.0, 1.0, radius));
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        auto p = h.lattice.point(i);
        h.values[i] = f(std::hypot(p.x, p.omega));
    }
    return h;
}

}  // namespace

TEST_CASE("identity envelope is the Gaussian STFT magnitude", "[decay]") {
    const auto& M = identity_matrix(3);
    auto h = envelope(M, 0.0);
    REQUIRE(h.lattice.radius == 6);
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        REQUIRE(h.values[i].imag() == 0.0);
        REQUIRE(h.values[i].real() >= 0.0);
        auto k = h.lattice.point(i);
        double expect = std::exp(-pi * (k.x * k.x + k.omega * k.omega) / 2.0);
        REQUIRE(std::abs(h.values[i].real() - expect) <= 1e-8);
    }
}

TEST_CASE("bracket_power(1) envelope drops by 1e3 from |k| = 1 to |k| = 6", "[decay]") {
    auto h = envelope(bracket_matrix(8), 1.0);
    for (auto [near, far] : {std::pair{std::pair{2, 0}, std::pair{12, 0}}, std::pair{std::pair{0, 2}, std::pair{0, 12}}}) {
        double hn = std::abs(h.at(near.first, near.second));
        double hf = std::abs(h.at(far.first, far.second));
        REQUIRE(hn > 0.0);
        REQUIRE(hf * 1e3 <= hn);
    }
    for (auto v : h.values) REQUIRE(v.real() >= 0.0);
}

TEST_CASE("envelope minimality", "[decay]") {
    for (double tau : {0.0, 0.5, 1.0}) {
        auto M = gabor_matrix_direct(bracket_power(1.0), window(), lat(3), tau);
        const double m = 1.0;
        auto h = envelope(M, m);
        const Lattice& L = M.lattice;
        std::vector<bool> attained(h.values.size(), false);
        for (std::size_t li = 0; li < L.count(); ++li)
            for (std::size_t mi = 0; mi < L.count(); ++mi) {
                auto [lk, ll] = L.indices(li);
                auto [mk, ml] = L.indices(mi);
                auto center = gabor_center(L.point(li), L.point(mi), tau);
                double bound = std::abs(h.at(lk - mk, ll - ml)) * std::pow(bracket(center), m);
                double entry = std::abs(M(li, mi));
                REQUIRE(entry <= bound * (1 + 1e-12));
                if (entry >= bound * (1 - 1e-12)) attained[h.lattice.index(lk - mk, ll - ml)] = true;
            }
        for (bool a : attained) REQUIRE(a);
    }
}

TEST_CASE("envelope norms", "[decay]") {
    SECTION("zero matrix") {
        auto Z = identity_matrix(3);
        Z.entries.setZero();
        REQUIRE(envelope_norm(envelope(Z, 0.0), 1.0, 4.0) == 0.0);
        REQUIRE(envelope_norm(envelope(Z, 0.0), inf, 0.0) == 0.0);
    }
    SECTION("identity tail is negligible from radius 6 to 8") {
        double n6 = envelope_norm(envelope(identity_matrix(6), 0.0), 1.0, 4.0);
        double n8 = envelope_norm(envelope(identity_matrix(8), 0.0), 1.0, 4.0);
        REQUIRE(std::isfinite(n6));
        REQUIRE(n8 == Approx(n6).epsilon(0.05));
    }
    SECTION("quasi-norm branch") {
        double v = envelope_norm(envelope(identity_matrix(3), 0.0), 0.5, 2.0);
        REQUIRE(std::isfinite(v));
        REQUIRE(v > 0.0);
    }
}

TEST_CASE("decay order fit", "[decay]") {
    auto power = synthetic(10, [](double r) { return std::pow(1.0 + r * r, -1.5); });
    REQUIRE(decay_order_fit(power) == Approx(3.0).margin(0.05));
    auto expo = synthetic(10, [](double r) { return std::exp(-r); });
    REQUIRE(decay_order_fit(expo) > 6.0);
    REQUIRE(decay_order_fit(envelope(identity_matrix(6), 0.0)) > 6.0);
    REQUIRE_THROWS_AS(decay_order_fit(synthetic(2, [](double r) { return std::exp(-r); })), InvalidArgument);
    auto sparse = synthetic(10, [](double r) { return r < 2.5 ? std::exp(-r) : 0.0; });
    REQUIRE_THROWS_AS(decay_order_fit(sparse), InvalidArgument);
}

TEST_CASE("bound constants", "[decay]") {
    SECTION("identity, n = 4, radius-stable") {
        auto r6 = verify_th34(identity_matrix(6), constant(1.0), 4, 0.0);
        auto r8 = verify_th34(identity_matrix(8), constant(1.0), 4, 0.0);
        REQUIRE(std::isfinite(r6.bound_constant));
        REQUIRE(r6.bound_constant > 0.0);
        REQUIRE(r8.bound_constant == Approx(r6.bound_constant).epsilon(0.10));
        REQUIRE(r6.fitted_order > 6.0);
        REQUIRE(r6.fractional_available);
        REQUIRE(r6.fractional_s == 4.5);
        REQUIRE(std::isfinite(r6.fractional_bound_constant));
    }
    SECTION("bracket_power(1), m = 1, n in {0, 2, 4}") {
        for (int n : {0, 2, 4}) {
            auto r = verify_th34(bracket_matrix(6), bracket_power(1.0), n, 1.0);
            REQUIRE(std::isfinite(r.bound_constant));
            REQUIRE(r.bound_constant > 0.0);
            REQUIRE(r.seminorm_used > 0.0);
            REQUIRE(r.n == n);
            REQUIRE(r.envelope_norms.size() == default_envelope_norms().size());
        }
    }
    SECTION("bound constant is the max over pairs") {
        const auto& M = bracket_matrix(3);
        double c = bound_constant(M, 2.0, 1.0, 3.0);
        const Lattice& L = M.lattice;
        double best = 0.0;
        for (std::size_t li = 0; li < L.count(); ++li)
            for (std::size_t mi = 0; mi < L.count(); ++mi) {
                auto lam = L.point(li), mu = L.point(mi);
                auto d = lam - mu;
                auto w = gabor_center(lam, mu, 0.5);
                double v = std::abs(M(li, mi)) * (1 + d.x * d.x + d.omega * d.omega) /
                           (3.0 * std::sqrt(1 + w.x * w.x + w.omega * w.omega));
                best = std::max(best, v);
            }
        REQUIRE(c == Approx(best).epsilon(1e-12));
        REQUIRE_THROWS_AS(bound_constant(M, 2.0, 1.0, 0.0), InvalidArgument);
    }
    SECTION("non-member rejected naming the seminorm") {
        try {
            verify_th34(chirp(1.0), window(), lat(3), 0.5, 1, 0.0);
            FAIL("chirp accepted");
        } catch (const InvalidArgument& e) {
            REQUIRE(std::string(e.what()).find("|sigma|_{1,0}") != std::string::npos);
        }
        REQUIRE_THROWS_AS(verify_th34(constant(1.0), window(), lat(3), 0.5, 7, 0.0), InvalidArgument);
    }
}

TEST_CASE("non-member fit versus identity fit", "[decay]") {
    auto C = gabor_matrix_direct(chirp(2.0), window(), lat(6), 0.5);
    double chirp_fit = decay_order_fit(envelope(C, 0.0), 6);
    double id_fit = decay_order_fit(envelope(identity_matrix(6), 0.0), 6);
    REQUIRE(chirp_fit <= 2.0);
    REQUIRE(id_fit > 6.0);
}

TEST_CASE("tau sweeps", "[decay]") {
    const std::vector<double> taus{0.0, 0.25, 0.5, 0.75, 1.0};
    SECTION("multiplication symbols are tau-invariant") {
        auto r = tau_sweep(separable_x(gauss(1)), window(), lat(3), taus, 0.0, 1.0, 3.0);
        REQUIRE(r.norms.size() == taus.size());
        for (double v : r.norms) REQUIRE(v == Approx(r.norms.front()).epsilon(1e-7));
    }
    SECTION("bracket_power(0.5) is uniform in tau") {
        auto r = tau_sweep(bracket_power(0.5), window(), lat(4), taus, 0.5, 1.0, 3.0);
        REQUIRE(r.taus == taus);
        REQUIRE(r.ratio() <= 2.0);
        REQUIRE(r.max_over_tau == *std::max_element(r.norms.begin(), r.norms.end()));
    }
    SECTION("singleton") {
        auto r = tau_sweep(bracket_power(0.5), window(), lat(3), {0.5}, 0.5, 1.0, 3.0);
        auto direct = envelope_norm(envelope(gabor_matrix_direct(bracket_power(0.5), window(), lat(3), 0.5), 0.5), 1.0, 3.0);
        REQUIRE(r.max_over_tau == direct);
        REQUIRE(r.ratio() == 1.0);
    }
    REQUIRE_THROWS_AS(tau_sweep(constant(1.0), window(), lat(3), {}, 0.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("Born-Jordan decay", "[decay]") {
    SECTION("identity symbol") {
        auto r = bj_decay_check(constant(1.0), window(), lat(3), gauss_legendre(8), 0.0, 1.0, 3.0);
        auto h = envelope(identity_matrix(3), 0.0);
        REQUIRE(r.bj_envelope.values.size() == h.values.size());
        for (std::size_t i = 0; i < h.values.size(); ++i)
            REQUIRE(std::abs(r.bj_envelope.values[i] - h.values[i]) <= 1e-10);
        REQUIRE(r.dominated);
    }
    SECTION("bracket_power(1) is dominated and converges in the node count") {
        auto r8 = bj_decay_check(bracket_power(1.0), window(), lat(4), gauss_legendre(8), 1.0, 1.0, 3.0);
        auto r16 = bj_decay_check(bracket_power(1.0), window(), lat(4), gauss_legendre(16), 1.0, 1.0, 3.0);
        REQUIRE(r8.dominated);
        REQUIRE(r16.dominated);
        REQUIRE(r8.domination_ratio <= 1.0 + 1e-6);
        REQUIRE(r8.node_norms.size() == 8);
        REQUIRE(std::isfinite(r8.averaged_norm));
        REQUIRE(std::abs(r8.bj_norm - r16.bj_norm) <= 1e-6 * r16.bj_norm);
    }
}
