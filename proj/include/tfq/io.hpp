#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

#include "tfq/norms.hpp"
#include "tfq/quantization.hpp"

namespace tfq {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_csv_preamble(std::ostream& os, const std::string& config_hash) {
    if (!config_hash.empty()) os << "# config_hash=" << config_hash << "\n";
}

/// Columns x, omega, re, im.
inline void write_csv(std::ostream& os, const PhaseSpaceArray& A, const std::string& config_hash = {}) {
    write_csv_preamble(os, config_hash);
    os << "x,omega,re,im\n";
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index k = 0; k < A.cols(); ++k)
            os << format_number(A.x(i)) << ',' << format_number(A.omega(k)) << ',' << format_number(A.values(i, k).real())
               << ',' << format_number(A.values(i, k).imag()) << '\n';
}

/// Columns lambda_k, lambda_l, mu_k, mu_l, re, im, abs.
inline void write_csv(std::ostream& os, const GaborMatrix& M, const std::string& config_hash = {}) {
    write_csv_preamble(os, config_hash);
    os << "lambda_k,lambda_l,mu_k,mu_l,re,im,abs\n";
    const auto N = M.lattice.count();
    for (std::size_t li = 0; li < N; ++li) {
        auto [lk, ll] = M.lattice.indices(li);
        for (std::size_t mi = 0; mi < N; ++mi) {
            auto [mk, ml] = M.lattice.indices(mi);
            cplx v = M(li, mi);
            os << lk << ',' << ll << ',' << mk << ',' << ml << ',' << format_number(v.real()) << ','
               << format_number(v.imag()) << ',' << format_number(std::abs(v)) << '\n';
        }
    }
}

/// Columns k1, k2, value (envelopes and other lattice sequences, modulus).
inline void write_csv(std::ostream& os, const LatticeArray& h, const std::string& config_hash = {}) {
    write_csv_preamble(os, config_hash);
    os << "k1,k2,value\n";
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        auto [k, l] = h.lattice.indices(i);
        os << k << ',' << l << ',' << format_number(std::abs(h.values[i])) << '\n';
    }
}

/// Binary dump layout (all little-endian):
///   char[4] "TFQ1" | u32 kind | u64 rows | u64 cols | f64 meta[4] | u64 config_hash |
///   rows*cols complex values as (re, im) f64 pairs, row-major.
/// kind 1: phase-space array, meta = (x spacing, omega spacing, x origin, omega origin).
/// kind 2: Gabor matrix, meta = (alpha, beta, radius, tau; tau = -1 for Born-Jordan).
struct BinaryDump {
    std::uint32_t kind = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    double meta[4] = {0, 0, 0, 0};
    std::uint64_t config_hash = 0;
    std::vector<cplx> data;
};

namespace detail {
inline void put_u64(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}
inline void put_u32(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}
inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        int c = is.get();
        require(c != EOF, "binary dump: truncated input");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}
inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        int c = is.get();
        require(c != EOF, "binary dump: truncated input");
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }
}  // namespace detail

inline void write_binary(std::ostream& os, const BinaryDump& d) {
    require(d.data.size() == d.rows * d.cols, "binary dump: data size does not match dimensions");
    os.write("TFQ1", 4);
    detail::put_u32(os, d.kind);
    detail::put_u64(os, d.rows);
    detail::put_u64(os, d.cols);
    for (double m : d.meta) detail::put_f64(os, m);
    detail::put_u64(os, d.config_hash);
    for (auto v : d.data) {
        detail::put_f64(os, v.real());
        detail::put_f64(os, v.imag());
    }
}

inline BinaryDump read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    require(is.gcount() == 4 && std::string_view(magic, 4) == "TFQ1", "binary dump: bad magic");
    BinaryDump d;
    d.kind = detail::get_u32(is);
    d.rows = detail::get_u64(is);
    d.cols = detail::get_u64(is);
    for (double& m : d.meta) m = detail::get_f64(is);
    d.config_hash = detail::get_u64(is);
    require(d.rows < (1ull << 24) && d.cols < (1ull << 24), "binary dump: implausible dimensions");
    d.data.resize(d.rows * d.cols);
    for (auto& v : d.data) {
        double re = detail::get_f64(is);
        double im = detail::get_f64(is);
        v = cplx(re, im);
    }
    return d;
}

inline BinaryDump to_dump(const PhaseSpaceArray& A, std::uint64_t config_hash = 0) {
    BinaryDump d;
    d.kind = 1;
    d.rows = static_cast<std::uint64_t>(A.rows());
    d.cols = static_cast<std::uint64_t>(A.cols());
    d.meta[0] = A.x_grid.spacing;
    d.meta[1] = A.omega_grid.spacing;
    d.meta[2] = A.x_grid.origin;
    d.meta[3] = A.omega_grid.origin;
    d.config_hash = config_hash;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index k = 0; k < A.cols(); ++k) d.data.push_back(A.values(i, k));
    return d;
}

inline BinaryDump to_dump(const GaborMatrix& M, std::uint64_t config_hash = 0) {
    BinaryDump d;
    d.kind = 2;
    d.rows = static_cast<std::uint64_t>(M.entries.rows());
    d.cols = static_cast<std::uint64_t>(M.entries.cols());
    d.meta[0] = M.lattice.alpha;
    d.meta[1] = M.lattice.beta;
    d.meta[2] = M.lattice.radius;
    d.meta[3] = M.born_jordan ? -1.0 : M.tau;
    d.config_hash = config_hash;
    for (Eigen::Index i = 0; i < M.entries.rows(); ++i)
        for (Eigen::Index k = 0; k < M.entries.cols(); ++k) d.data.push_back(M.entries(i, k));
    return d;
}

}  // namespace tfq
