#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tfq/stft.hpp"

using namespace tfq;
using Catch::Approx;

namespace {

const Grid lab_grid(256, 1.0 / 16.0);

SampledSignal hermite(const Grid& grid) {
    return sample_function(grid, [](double t) { return t * std::exp(-pi * t * t); });
}

// Low-passed complex noise under a Gaussian envelope.
SampledSignal band_limited_noise(const Grid& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<cplx> F(grid.n_samples);
    for (std::size_t k = 0; k < F.size(); ++k) {
        double w = grid.omega(static_cast<std::ptrdiff_t>(k));
        F[k] = cplx(nd(rng), nd(rng)) * std::exp(-w * w / 2.0);
    }
    auto x = centered_idft(F, grid.spacing);
    for (std::size_t j = 0; j < x.size(); ++j) {
        double t = grid.t(static_cast<std::ptrdiff_t>(j));
        x[j] *= std::exp(-t * t / 4.0);
    }
    return SampledSignal(grid, x);
}

PhaseSpaceArray random_array(const Grid& xg, const Grid& wg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    PhaseSpaceArray F(xg, wg);
    for (Eigen::Index i = 0; i < F.values.size(); ++i) F.values.data()[i] = cplx(nd(rng), nd(rng));
    return F;
}

double array_norm(const PhaseSpaceArray& F) { return std::sqrt(inner_product(F, F).real()); }

}  // namespace

TEST_CASE("gaussian_window", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    REQUIRE(std::abs(l2_norm(g) - 1.0) <= 1e-12);
    REQUIRE(std::abs(inner_product(g, g) - cplx(1.0)) <= 1e-12);
    for (std::size_t j = 1; j < 128; ++j) REQUIRE(std::abs(g[128 + j] - g[128 - j]) <= 1e-14);
    REQUIRE_THROWS_AS(gaussian_window(lab_grid, 0.0), InvalidArgument);
    REQUIRE_THROWS_AS(gaussian_window(lab_grid, 0.05), InvalidArgument);
}

TEST_CASE("stft of a Gaussian", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    auto V = stft(g, g);
    REQUIRE(V.rows() == 256);
    REQUIRE(V.cols() == 256);
    REQUIRE(std::abs(V.values(128, 128) - cplx(1.0)) <= 1e-12);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < V.rows(); ++i)
        for (Eigen::Index k = 0; k < V.cols(); ++k) {
            double x = V.x(i), w = V.omega(k);
            if (x * x + w * w > 9.0) continue;
            dev = std::max(dev, std::abs(std::abs(V.values(i, k)) - std::exp(-pi * (x * x + w * w) / 2.0)));
        }
    REQUIRE(dev <= 1e-8);
}

TEST_CASE("stft covariance under lattice shifts", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    auto f = hermite(lab_grid);
    auto V = stft(f, g);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(-4, 4), near(-2, 2);
    const int step = 8;  // 0.5 in both axes
    for (int trial = 0; trial < 10; ++trial) {
        int wk = d(rng), wl = d(rng);
        int zk = wk + near(rng), zl = wl + near(rng);
        auto Vs = stft(tf_shift(f, {wk * 0.5, wl * 0.5}), g);
        auto i = static_cast<Eigen::Index>(128 + zk * step), k = static_cast<Eigen::Index>(128 + zl * step);
        auto i0 = i - wk * step, k0 = k - wl * step;
        double ref = std::abs(V.values(i0, k0));
        double got = std::abs(Vs.values(i, k));
        REQUIRE(ref > 1e-6);
        REQUIRE(std::abs(got - ref) <= 1e-10 * ref);
    }
}

TEST_CASE("stft rejects mismatched grids", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    auto h = gaussian_window(Grid(128, 1.0 / 16.0), 1.0);
    REQUIRE_THROWS_AS(stft(g, h), InvalidArgument);
    REQUIRE_THROWS_AS(stft(g, g, 3), InvalidArgument);
}

TEST_CASE("adjoint_stft", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    SECTION("zero input") {
        PhaseSpaceArray F(lab_grid, lab_grid.frequency_grid());
        auto out = adjoint_stft(F, g);
        for (auto v : out.values) REQUIRE(v == cplx{});
    }
    SECTION("adjointness on random inputs") {
        for (auto [xs, pad] : {std::pair{1, 1}, std::pair{2, 2}, std::pair{4, 1}}) {
            auto f = band_limited_noise(lab_grid, 17 + xs);
            auto V = stft(f, g, xs, pad);
            auto F = random_array(V.x_grid, V.omega_grid, 3 + pad);
            cplx lhs = inner_product(V, F);
            cplx rhs = inner_product(f, adjoint_stft(F, g));
            REQUIRE(std::abs(lhs - rhs) <= 1e-10 * l2_norm(f) * array_norm(F));
        }
    }
    SECTION("mismatched grids are rejected") {
        PhaseSpaceArray F(Grid(256, 1.0), lab_grid.frequency_grid());
        REQUIRE_THROWS_AS(adjoint_stft(F, g), InvalidArgument);
    }
}

TEST_CASE("inversion formula", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    REQUIRE(reconstruct(g, g).rel_error <= 1e-10);
    REQUIRE(reconstruct(hermite(lab_grid), g).rel_error <= 1e-10);
    REQUIRE(reconstruct(band_limited_noise(lab_grid, 99), g).rel_error <= 1e-8);
    auto V = stft(hermite(lab_grid), g);
    auto back = adjoint_stft(V, g);
    REQUIRE(relative_l2_error(back, hermite(lab_grid)) <= 1e-10);
}

TEST_CASE("Parseval identity of the stft", "[stft]") {
    auto g = gaussian_window(lab_grid, 1.0);
    for (const auto& f : {hermite(lab_grid), band_limited_noise(lab_grid, 4)}) {
        auto V = stft(f, g);
        double lhs = inner_product(V, V).real();
        double rhs = l2_norm(g) * l2_norm(g) * l2_norm(f) * l2_norm(f);
        REQUIRE(lhs == Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("Fourier transform round trip", "[stft]") {
    auto f = hermite(lab_grid);
    auto F = fourier_transform(f);
    REQUIRE(relative_l2_error(inverse_fourier_transform(F, lab_grid), f) <= 1e-14);
    REQUIRE(l2_norm(F) == Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("Gabor frame bounds", "[stft][frames]") {
    const Grid grid(2048, 1.0 / 20.0);
    auto g = gaussian_window(grid, 1.0);
    auto report = [&](double alpha) { return frame_bounds(g, Lattice(alpha, 1.0, 128)); };
    auto r05 = report(0.5), r075 = report(0.75), r095 = report(0.95), r1 = report(1.0);
    SECTION("frame at density 1/2") {
        REQUIRE(r05.lower_bound_estimate > 0.0);
        REQUIRE(std::isfinite(r05.condition()));
        REQUIRE(r05.lower_bound_estimate <= r05.upper_bound_estimate);
    }
    SECTION("no frame at critical density") {
        REQUIRE(r1.lower_bound_estimate / r1.upper_bound_estimate <= 1e-3);
    }
    SECTION("lower bound decreases with density") {
        REQUIRE(r05.lower_bound_estimate >= r075.lower_bound_estimate);
        REQUIRE(r075.lower_bound_estimate >= r095.lower_bound_estimate);
    }
    SECTION("quadratic form lies between the bounds") {
        std::mt19937_64 rng(21);
        std::normal_distribution<double> nd;
        for (int trial = 0; trial < 20; ++trial) {
            SampledSignal f(grid);
            for (std::size_t j = 512; j < 1536; ++j) f.values[j] = cplx(nd(rng), nd(rng));
            double q = frame_quadratic_form(f, g, Lattice(0.75, 1.0, 128));
            REQUIRE(q >= r075.lower_bound_estimate - 1e-8);
            REQUIRE(q <= r075.upper_bound_estimate + 1e-8);
        }
    }
    SECTION("incompatible lattices are rejected") {
        REQUIRE_THROWS_AS(frame_bounds(g, Lattice(0.51, 1.0, 128)), InvalidArgument);
        REQUIRE_THROWS_AS(frame_bounds(g, Lattice(0.5, 1.0, 4)), InvalidArgument);
    }
}
