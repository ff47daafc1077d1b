#pragma once

#include "boldplay/dyadic.hpp"
#include "boldplay/ell.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

namespace boldplay {

/// Exact value p + q·ℓ with dyadic coefficients. Every fortune is one of these.
struct LinearForm {
    Dyadic p;
    Dyadic q;

    LinearForm() = default;
    LinearForm(Dyadic p_, Dyadic q_) : p(std::move(p_)), q(std::move(q_)) {}

    static LinearForm constant(Dyadic v) { return {std::move(v), Dyadic(0)}; }
    static LinearForm ell() { return {Dyadic(0), Dyadic(1)}; }
    static LinearForm zero() { return {}; }
    static LinearForm one() { return constant(Dyadic(1)); }

    bool is_zero_form() const noexcept { return p.is_zero() && q.is_zero(); }

    LinearForm& operator+=(const LinearForm& o) {
        p += o.p;
        q += o.q;
        return *this;
    }
    LinearForm& operator-=(const LinearForm& o) {
        p -= o.p;
        q -= o.q;
        return *this;
    }
    friend LinearForm operator+(LinearForm a, const LinearForm& b) { return a += b; }
    friend LinearForm operator-(LinearForm a, const LinearForm& b) { return a -= b; }
    LinearForm operator-() const { return {-p, -q}; }

    /// Multiply by 2^k.
    LinearForm scaled(long k) const { return {p.scaled(k), q.scaled(k)}; }
    LinearForm doubled() const { return scaled(1); }
    LinearForm halved() const { return scaled(-1); }

    /// Componentwise equality (representation equality, not value equality).
    friend bool operator==(const LinearForm& a, const LinearForm& b) noexcept {
        return a.p == b.p && a.q == b.q;
    }

    std::string to_string() const;
};

inline LinearForm lf_add(const LinearForm& x, const LinearForm& y) { return x + y; }
inline LinearForm lf_sub(const LinearForm& x, const LinearForm& y) { return x - y; }
inline LinearForm lf_neg(const LinearForm& x) { return -x; }
inline LinearForm lf_double(const LinearForm& x) { return x.doubled(); }
inline LinearForm lf_halve(const LinearForm& x) { return x.halved(); }

/// Exact sign of p + q·ℓ.
int lf_sign(const LinearForm& x, const EllSpec& ell);

/// Exact sign of x − y.
inline int lf_compare(const LinearForm& x, const LinearForm& y, const EllSpec& ell) {
    return lf_sign(x - y, ell);
}

/// Value equality. For irrational ℓ this is componentwise equality.
bool lf_eq(const LinearForm& x, const LinearForm& y, const EllSpec& ell);

/// Exact rational value; only meaningful for rational ℓ (or q = 0).
mpq_class lf_rational_value(const LinearForm& x, const EllSpec& ell);

/// Exact rational bounds on the value with width at most 2^-bits·max(1, |x|).
std::pair<mpq_class, mpq_class> lf_bounds(const LinearForm& x, const EllSpec& ell,
                                          unsigned long bits);

/**
 * Double-precision enclosure of the value, for reporting only.
 *
 * The width is at most 2^-precision_bits·max(1, |x|), except that it can
 * never be narrower than the two-ulp spacing a double enclosure allows.
 */
std::pair<double, double> lf_to_interval(const LinearForm& x, const EllSpec& ell,
                                         unsigned precision_bits);

/// Nearest double to the value (reporting only).
double lf_approx(const LinearForm& x, const EllSpec& ell);

/**
 * Parse "1/2", "1-ell", "1/2+3/4*ell", "-ell/8" style fortune text, or a JSON
 * object {"p_num","p_exp","q_num","q_exp"}. With a rational ℓ, non-dyadic
 * constants are rewritten as a + b·ℓ with a dyadic and b a small integer.
 */
LinearForm parse_linear_form(std::string_view text, const EllSpec& ell);

nlohmann::json lf_to_json(const LinearForm& x);
LinearForm lf_from_json(const nlohmann::json& j);

/**
 * Hashable identity of a fortune's value. For irrational ℓ the form is its
 * own key; for rational ℓ distinct forms with equal value share one key.
 */
struct FortuneKey {
    Dyadic a;
    Dyadic b;

    friend bool operator==(const FortuneKey& x, const FortuneKey& y) {
        return x.a == y.a && x.b == y.b;
    }
};

FortuneKey fortune_key(const LinearForm& x, const EllSpec& ell);

struct FortuneKeyHash {
    std::size_t operator()(const FortuneKey& k) const noexcept;
};

}  // namespace boldplay
