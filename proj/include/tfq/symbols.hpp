#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "tfq/phase_space.hpp"

namespace tfq {

inline constexpr int max_derivative_order = 8;

/// Multi-index (a1, a2): a1 derivatives in x, a2 in omega.
struct MultiIndex {
    int a1 = 0;
    int a2 = 0;
    int order() const { return a1 + a2; }
};

/// One-dimensional profile h(t) for separable symbols.
struct Profile {
    enum class Kind { gauss, bracket, sin, cos };
    Kind kind = Kind::gauss;
    double a = 1.0;  // gauss: e^{-a t^2}; bracket: (1+t^2)^{a/2}; sin/cos: sin(a t), cos(a t)
};

inline Profile gauss(double a) { return {Profile::Kind::gauss, a}; }
inline Profile bracket_profile(double m) { return {Profile::Kind::bracket, m}; }
inline Profile sin_profile(double a) { return {Profile::Kind::sin, a}; }
inline Profile cos_profile(double a) { return {Profile::Kind::cos, a}; }

struct SymbolSpec;

namespace sym {
struct Constant { cplx c; };
struct BracketPower { double m; };
struct SeparableX { Profile h; };
struct SeparableOmega { Profile h; };
struct Trig { double a, b; };
struct Chirp { double c; };
struct Sum { std::vector<SymbolSpec> terms; };
struct Product { std::vector<SymbolSpec> factors; };
}  // namespace sym

/// Symbol on R^2 built from closed-form families with exact derivative rules.
struct SymbolSpec {
    std::variant<sym::Constant, sym::BracketPower, sym::SeparableX, sym::SeparableOmega, sym::Trig, sym::Chirp,
                 sym::Sum, sym::Product>
        node;
};

inline SymbolSpec constant(cplx c) { return {sym::Constant{c}}; }
inline SymbolSpec bracket_power(double m) { return {sym::BracketPower{m}}; }
inline SymbolSpec separable_x(Profile h) { return {sym::SeparableX{h}}; }
inline SymbolSpec separable_omega(Profile h) { return {sym::SeparableOmega{h}}; }
inline SymbolSpec trig(double a, double b) { return {sym::Trig{a, b}}; }
inline SymbolSpec chirp(double c) { return {sym::Chirp{c}}; }

inline SymbolSpec operator+(const SymbolSpec& a, const SymbolSpec& b) {
    std::vector<SymbolSpec> t;
    for (const auto* s : {&a, &b}) {
        if (auto* p = std::get_if<sym::Sum>(&s->node)) t.insert(t.end(), p->terms.begin(), p->terms.end());
        else t.push_back(*s);
    }
    return {sym::Sum{std::move(t)}};
}

inline SymbolSpec operator*(const SymbolSpec& a, const SymbolSpec& b) {
    std::vector<SymbolSpec> f;
    for (const auto* s : {&a, &b}) {
        if (auto* p = std::get_if<sym::Product>(&s->node)) f.insert(f.end(), p->factors.begin(), p->factors.end());
        else f.push_back(*s);
    }
    return {sym::Product{std::move(f)}};
}

namespace detail {

inline double falling(double a, int r) {
    double v = 1.0;
    for (int i = 0; i < r; ++i) v *= a - i;
    return v;
}

inline double ipow(double x, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= x;
    return v;
}

/// a! / (i! (a - 2i)!): coefficient in d^a/dt^a F(t^2) = sum_i c(a,i) (2t)^{a-2i} F^{(a-i)}(t^2).
inline double chain_coeff(int a, int i) {
    double v = 1.0;
    for (int k = 2; k <= a; ++k) v *= k;
    for (int k = 2; k <= i; ++k) v /= k;
    for (int k = 2; k <= a - 2 * i; ++k) v /= k;
    return v;
}

/// d^k/dt^k e^{b t^2} = P_k(t) e^{b t^2}, P_{k+1} = P_k' + 2 b t P_k.
inline cplx gauss_type_derivative(cplx b, double t, int k) {
    std::vector<cplx> p{cplx(1.0)};
    for (int s = 0; s < k; ++s) {
        std::vector<cplx> q(p.size() + 1, cplx{});
        for (std::size_t i = 1; i < p.size(); ++i) q[i - 1] += static_cast<double>(i) * p[i];
        for (std::size_t i = 0; i < p.size(); ++i) q[i + 1] += 2.0 * b * p[i];
        p = std::move(q);
    }
    cplx v{};
    for (std::size_t i = p.size(); i-- > 0;) v = v * t + p[i];
    return v * std::exp(b * t * t);
}

/// d^a_x d^b_w (1 + x^2 + w^2)^{m/2}.
inline double bracket_derivative(double m, double x, double w, int a, int b) {
    const double s = x * x + w * w;
    double total = 0.0;
    for (int i = 0; 2 * i <= a; ++i)
        for (int j = 0; 2 * j <= b; ++j) {
            int r = a - i + b - j;
            double h = falling(0.5 * m, r) * std::pow(1.0 + s, 0.5 * m - r);
            total += chain_coeff(a, i) * chain_coeff(b, j) * ipow(2.0 * x, a - 2 * i) * ipow(2.0 * w, b - 2 * j) * h;
        }
    return total;
}

inline cplx profile_derivative(const Profile& p, double t, int k) {
    switch (p.kind) {
        case Profile::Kind::gauss: return gauss_type_derivative(cplx(-p.a), t, k);
        case Profile::Kind::bracket: return bracket_derivative(p.a, t, 0.0, k, 0);
        case Profile::Kind::sin: return ipow(p.a, k) * std::sin(p.a * t + k * pi / 2.0);
        case Profile::Kind::cos: return ipow(p.a, k) * std::cos(p.a * t + k * pi / 2.0);
    }
    return {};
}

inline cplx eval_node(const SymbolSpec& s, double x, double w, int a1, int a2);

struct EvalVisitor {
    double x, w;
    int a1, a2;

    cplx operator()(const sym::Constant& c) const { return (a1 == 0 && a2 == 0) ? c.c : cplx{}; }
    cplx operator()(const sym::BracketPower& b) const { return bracket_derivative(b.m, x, w, a1, a2); }
    cplx operator()(const sym::SeparableX& s) const { return a2 == 0 ? profile_derivative(s.h, x, a1) : cplx{}; }
    cplx operator()(const sym::SeparableOmega& s) const { return a1 == 0 ? profile_derivative(s.h, w, a2) : cplx{}; }
    cplx operator()(const sym::Trig& t) const {
        return ipow(t.a, a1) * std::sin(t.a * x + a1 * pi / 2.0) * ipow(t.b, a2) * std::cos(t.b * w + a2 * pi / 2.0);
    }
    cplx operator()(const sym::Chirp& c) const {
        cplx b(0.0, pi * c.c);
        return gauss_type_derivative(b, x, a1) * gauss_type_derivative(b, w, a2);
    }
    cplx operator()(const sym::Sum& s) const {
        cplx v{};
        for (const auto& t : s.terms) v += eval_node(t, x, w, a1, a2);
        return v;
    }
    cplx operator()(const sym::Product& p) const { return product(p.factors, 0, a1, a2); }

    // Leibniz rule over the factor list.
    cplx product(const std::vector<SymbolSpec>& f, std::size_t i, int b1, int b2) const {
        if (i + 1 == f.size()) return eval_node(f[i], x, w, b1, b2);
        cplx v{};
        for (int c1 = 0; c1 <= b1; ++c1)
            for (int c2 = 0; c2 <= b2; ++c2) {
                cplx head = eval_node(f[i], x, w, c1, c2);
                if (head == cplx{}) continue;
                v += binomial(b1, c1) * binomial(b2, c2) * head * product(f, i + 1, b1 - c1, b2 - c2);
            }
        return v;
    }
};

inline cplx eval_node(const SymbolSpec& s, double x, double w, int a1, int a2) {
    return std::visit(EvalVisitor{x, w, a1, a2}, s.node);
}

}  // namespace detail

/// Exact partial derivative d^alpha sigma(z), |alpha| <= 8.
inline cplx eval_symbol(const SymbolSpec& s, const PhaseSpacePoint& z, MultiIndex alpha = {}) {
    require(alpha.a1 >= 0 && alpha.a2 >= 0, "eval_symbol: negative multi-index");
    require(alpha.order() <= max_derivative_order, "eval_symbol: derivative order above 8 is unsupported");
    require_finite(z);
    return detail::eval_node(s, z.x, z.omega, alpha.a1, alpha.a2);
}

inline std::string to_string(const Profile& p) {
    const char* name = p.kind == Profile::Kind::gauss ? "gauss"
                       : p.kind == Profile::Kind::bracket ? "bracket"
                       : p.kind == Profile::Kind::sin ? "sin"
                                                       : "cos";
    return std::string(name) + "(" + format_number(p.a) + ")";
}

/// Canonical expression string; parse_symbol(to_string(s)) reproduces s.
inline std::string to_string(const SymbolSpec& s) {
    struct V {
        std::string operator()(const sym::Constant& c) const {
            if (c.c.imag() == 0.0) return "constant(" + format_number(c.c.real()) + ")";
            return "constant(" + format_number(c.c.real()) + "," + format_number(c.c.imag()) + ")";
        }
        std::string operator()(const sym::BracketPower& b) const { return "bracket_power(" + format_number(b.m) + ")"; }
        std::string operator()(const sym::SeparableX& p) const { return "separable_x(" + to_string(p.h) + ")"; }
        std::string operator()(const sym::SeparableOmega& p) const { return "separable_omega(" + to_string(p.h) + ")"; }
        std::string operator()(const sym::Trig& t) const {
            return "trig(" + format_number(t.a) + "," + format_number(t.b) + ")";
        }
        std::string operator()(const sym::Chirp& c) const { return "chirp(" + format_number(c.c) + ")"; }
        std::string operator()(const sym::Sum& s) const {
            std::string r = "(";
            for (std::size_t i = 0; i < s.terms.size(); ++i) r += (i ? "+" : "") + to_string(s.terms[i]);
            return r + ")";
        }
        std::string operator()(const sym::Product& p) const {
            std::string r = "(";
            for (std::size_t i = 0; i < p.factors.size(); ++i) r += (i ? "*" : "") + to_string(p.factors[i]);
            return r + ")";
        }
    };
    return std::visit(V{}, s.node);
}

namespace detail {

/// Grammar:
///   expr    := term ('+' term)*
///   term    := factor ('*' factor)*
///   factor  := '(' expr ')' | family
///   family  := constant(re[,im]) | bracket_power(m) | trig(a,b) | chirp(c)
///            | separable_x(profile) | separable_omega(profile)
///   profile := gauss(a) | bracket(m) | sin(a) | cos(a)
class SymbolParser {
public:
    explicit SymbolParser(std::string_view text) : s_(text) {}

    SymbolSpec parse() {
        auto e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidArgument("symbol: " + what + " at position " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    std::string name() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (start == pos_) fail("expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }
    double number() {
        skip();
        if (pos_ < s_.size() && s_[pos_] == '+') ++pos_;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc() || !std::isfinite(v)) fail("expected a finite number");
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return v;
    }
    std::vector<double> numbers(std::size_t lo, std::size_t hi) {
        std::vector<double> v;
        expect('(');
        if (!accept(')')) {
            do v.push_back(number());
            while (accept(','));
            expect(')');
        }
        if (v.size() < lo || v.size() > hi) fail("wrong number of parameters");
        return v;
    }
    Profile profile() {
        std::string nm = name();
        auto v = numbers(1, 1);
        if (nm == "gauss") return gauss(v[0]);
        if (nm == "bracket") return bracket_profile(v[0]);
        if (nm == "sin") return sin_profile(v[0]);
        if (nm == "cos") return cos_profile(v[0]);
        fail("unknown profile '" + nm + "'");
    }
    SymbolSpec expr() {
        SymbolSpec e = term();
        while (accept('+')) e = e + term();
        return e;
    }
    SymbolSpec term() {
        SymbolSpec e = factor();
        while (accept('*')) e = e * factor();
        return e;
    }
    SymbolSpec factor() {
        if (accept('(')) {
            auto e = expr();
            expect(')');
            return e;
        }
        std::string nm = name();
        if (nm == "separable_x" || nm == "separable_omega") {
            expect('(');
            Profile p = profile();
            expect(')');
            return nm == "separable_x" ? separable_x(p) : separable_omega(p);
        }
        if (nm == "constant") {
            auto v = numbers(1, 2);
            return constant(cplx(v[0], v.size() > 1 ? v[1] : 0.0));
        }
        if (nm == "bracket_power") return bracket_power(numbers(1, 1)[0]);
        if (nm == "chirp") return chirp(numbers(1, 1)[0]);
        if (nm == "trig") {
            auto v = numbers(2, 2);
            return trig(v[0], v[1]);
        }
        fail("unknown symbol family '" + nm + "'");
    }
};

}  // namespace detail

inline SymbolSpec parse_symbol(std::string_view text) { return detail::SymbolParser(text).parse(); }

struct SeminormReport {
    int order = 0;
    double m = 0.0;
    double value = 0.0;          // sup over [-r, r]^2
    double outer_value = 0.0;    // sup over [-2r, 2r]^2
    double region_radius = 0.0;
    double growth_exponent = 0.0;  // log2(outer_value / value)
    bool divergence_flag = false;
};

namespace detail {
inline double weighted_sup(const SymbolSpec& s, int N, double m, double r, int resolution) {
    double best = 0.0;
    for (int i = 0; i < resolution; ++i) {
        double x = -r + 2.0 * r * i / (resolution - 1);
        for (int k = 0; k < resolution; ++k) {
            double w = -r + 2.0 * r * k / (resolution - 1);
            double weight = std::pow(bracket(x, w), -m);
            for (int a1 = 0; a1 <= N; ++a1)
                for (int a2 = 0; a1 + a2 <= N; ++a2)
                    best = std::max(best, std::abs(detail::eval_node(s, x, w, a1, a2)) * weight);
        }
    }
    return best;
}
}  // namespace detail

/// Growth exponent above which a seminorm is reported as divergent.
inline constexpr double divergence_exponent = 0.05;

/// |sigma|_{N,m} = sup_{|alpha| <= N} sup_z |d^alpha sigma(z)| <z>^{-m}, sampled at radii r and 2r.
inline SeminormReport seminorm(const SymbolSpec& s, int N, double m, double region_radius, int resolution = 65) {
    require(N >= 0 && N <= max_derivative_order, "seminorm: order must be in [0, 8]");
    require(std::isfinite(m), "seminorm: m must be finite");
    require(region_radius > 0.0 && std::isfinite(region_radius), "seminorm: region radius must be positive");
    require(resolution >= 3 && resolution % 2 == 1, "seminorm: resolution must be odd and >= 3");
    SeminormReport r;
    r.order = N;
    r.m = m;
    r.region_radius = region_radius;
    r.value = detail::weighted_sup(s, N, m, region_radius, resolution);
    r.outer_value = detail::weighted_sup(s, N, m, 2.0 * region_radius, 2 * resolution - 1);
    if (r.value > 0.0) r.growth_exponent = std::log2(r.outer_value / r.value);
    else r.growth_exponent = r.outer_value > 0.0 ? inf : 0.0;
    r.divergence_flag = r.growth_exponent > divergence_exponent;
    return r;
}

/// | central finite difference of order alpha - d^alpha sigma(z) |.
inline double finite_difference_crosscheck(const SymbolSpec& s, const PhaseSpacePoint& z, MultiIndex alpha, double step) {
    require(alpha.a1 >= 0 && alpha.a2 >= 0 && alpha.order() <= 4, "finite_difference_crosscheck: |alpha| must be <= 4");
    require(step > 0.0 && std::isfinite(step), "finite_difference_crosscheck: step must be positive");
    cplx fd{};
    for (int i = 0; i <= alpha.a1; ++i)
        for (int k = 0; k <= alpha.a2; ++k) {
            double cx = binomial(alpha.a1, i) * ((i % 2) ? -1.0 : 1.0);
            double cw = binomial(alpha.a2, k) * ((k % 2) ? -1.0 : 1.0);
            PhaseSpacePoint p{z.x + (0.5 * alpha.a1 - i) * step, z.omega + (0.5 * alpha.a2 - k) * step};
            fd += cx * cw * eval_symbol(s, p);
        }
    fd /= std::pow(step, alpha.order());
    return std::abs(fd - eval_symbol(s, z, alpha));
}

}  // namespace tfq
