#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tfq {

using cplx = std::complex<double>;

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Rejected input or configuration.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computed quantity broke a numerical contract (tolerance, finiteness).
class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

/// Shortest round-trip-safe decimal form used in every text artifact.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline bool is_finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// <z> = (1 + |z|^2)^{1/2} for a point given by its components.
inline double bracket(double a, double b = 0.0) { return std::sqrt(1.0 + a * a + b * b); }

/// Compensated summation; works for double and std::complex<double>.
template <typename T>
class KahanSum {
public:
    void add(T v) {
        T y = v - c_;
        T t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    T value() const { return sum_; }

private:
    T sum_{};
    T c_{};
};

template <typename T, typename It>
T kahan_accumulate(It first, It last) {
    KahanSum<T> s;
    for (; first != last; ++first) s.add(*first);
    return s.value();
}

namespace detail {
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{1};
    return n;
}
}  // namespace detail

/// Worker count used by parallel loops. Results never depend on it.
inline int num_threads() { return detail::thread_setting().load(); }

inline void set_num_threads(int n) {
    require(n >= 1, "threads must be >= 1");
    detail::thread_setting().store(n);
}

/// Static contiguous partition of [0, n); each index is written by exactly one worker.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace tfq
