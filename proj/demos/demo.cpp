// Gabor-matrix decay of a symbol of order 1 against a chirp, on a small lattice.
#include <cstdio>

#include "tfq/tfq.hpp"

using namespace tfq;

int main() {
    const Grid grid(256, 1.0 / 16.0);
    const auto g = gaussian_window(grid, 1.0);
    const Lattice lattice(0.5, 0.5, 6);

    auto member = gabor_matrix_direct(bracket_power(1.0), g, lattice, 0.5);
    auto outsider = gabor_matrix_direct(chirp(2.0), g, lattice, 0.5);
    auto h = envelope(member, 1.0);
    auto c = envelope(outsider, 0.0);

    std::printf("envelope along the time axis, tau = 1/2\n");
    std::printf("%6s %14s %14s\n", "k", "<z>^1", "chirp(2)");
    for (int k = 0; k <= 12; k += 2)
        std::printf("%6.1f %14.3e %14.3e\n", k * lattice.alpha, std::abs(h.at(k, 0)), std::abs(c.at(k, 0)));
    std::printf("fitted decay order: %.2f vs %.2f\n", decay_order_fit(h, lattice.radius), decay_order_fit(c, lattice.radius));

    auto sweep = tau_sweep(bracket_power(1.0), g, lattice, {0.0, 0.5, 1.0}, 1.0, 1.0, 3.0);
    std::printf("envelope l1 norms with weight <k>^3 over tau = 0, 1/2, 1:");
    for (double v : sweep.norms) std::printf(" %.4f", v);
    std::printf("  (max/min %.3f)\n", sweep.ratio());
}
