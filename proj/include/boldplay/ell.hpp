#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace boldplay {

/// The stake cap ℓ as an exact rational p/q.
struct EllRational {
    mpz_class p;
    mpz_class q;  // > 0, gcd(p, q) = 1
};

/// The stake cap ℓ as (a + b·√r) / c with r not a perfect square and b ≠ 0.
struct EllSurd {
    mpz_class a;
    mpz_class b;
    mpz_class r;
    mpz_class c;  // > 0
};

/**
 * Stake cap ℓ ∈ (0, 1/2]. Only rationals and quadratic surds are
 * representable, which keeps every comparison against ℓ exact.
 *
 * Accepted text forms: "p/q", "sqrt(p/q)", "(a+b*sqrt(r))/c" and the
 * obvious abbreviations ("sqrt(r)/c", "(a-b*sqrt(r))/c", decimals like "0.3").
 */
class EllSpec {
public:
    static EllSpec rational(mpz_class p, mpz_class q);
    static EllSpec surd(mpz_class a, mpz_class b, mpz_class r, mpz_class c);
    static EllSpec parse(std::string_view text);

    bool is_rational() const noexcept { return std::holds_alternative<EllRational>(rep_); }
    bool is_irrational() const noexcept { return !is_rational(); }
    const EllRational& as_rational() const { return std::get<EllRational>(rep_); }
    const EllSurd& as_surd() const { return std::get<EllSurd>(rep_); }

    /// Exact value; only valid for the rational variant.
    mpq_class rational_value() const;

    /// Exact sign of ℓ − t.
    int compare(const mpq_class& t) const;

    /// Rational bounds lo ≤ ℓ ≤ hi with hi − lo ≤ 2^-bits (lo = hi for rational ℓ).
    std::pair<mpq_class, mpq_class> bounds(unsigned long bits) const;

    /// Double approximation of ℓ and an absolute bound on its error.
    double approx() const noexcept { return approx_; }
    double approx_error() const noexcept { return approx_err_; }

    /// True when ℓ < 1/2 and ℓ is irrational (what the theorem pipeline needs).
    bool theorem_ready() const;

    std::string to_string() const;

private:
    explicit EllSpec(std::variant<EllRational, EllSurd> rep);
    void validate_and_cache();

    std::variant<EllRational, EllSurd> rep_;
    double approx_ = 0.0;
    double approx_err_ = 0.0;
};

/// Exact integer square-root test (n ≥ 0).
bool is_perfect_square(const mpz_class& n);

/// Parse "p/q", "p" or a decimal like "0.25" into an exact rational.
mpq_class parse_rational(std::string_view text, const std::string& field);

}  // namespace boldplay
