#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <string>

namespace boldplay {

/**
 * Exact number of the form numerator / 2^exponent.
 *
 * Always normalized: the exponent is 0 or the numerator is odd. Two
 * normalized values are equal iff their fields are equal, so the fields can
 * be hashed directly.
 */
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long v) : num_(v) {}  // NOLINT(google-explicit-constructor)
    explicit Dyadic(mpz_class v) : num_(std::move(v)) {}
    Dyadic(mpz_class numerator, unsigned long exponent);

    /// Exact conversion; throws PreconditionViolated if the denominator is not a power of two.
    static Dyadic from_rational(const mpq_class& q);
    /// 2^-k
    static Dyadic pow2_neg(unsigned long k);

    const mpz_class& numerator() const noexcept { return num_; }
    unsigned long exponent() const noexcept { return exp_; }

    int sign() const noexcept { return sgn(num_); }
    bool is_zero() const noexcept { return sgn(num_) == 0; }
    bool is_integer() const noexcept { return exp_ == 0; }

    mpq_class to_rational() const;
    double to_double() const;
    /// "n" or "n/d" with d a power of two.
    std::string to_string() const;

    Dyadic operator-() const;
    Dyadic& operator+=(const Dyadic& o);
    Dyadic& operator-=(const Dyadic& o);
    Dyadic& operator*=(const Dyadic& o);

    friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
    friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
    friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

    /// Multiply by 2^k (k may be negative).
    Dyadic scaled(long k) const;
    Dyadic doubled() const { return scaled(1); }
    Dyadic halved() const { return scaled(-1); }

    friend bool operator==(const Dyadic& a, const Dyadic& b) noexcept {
        return a.exp_ == b.exp_ && a.num_ == b.num_;
    }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

    std::size_t hash() const noexcept;

private:
    void normalize();

    mpz_class num_{0};
    unsigned long exp_ = 0;
};

std::size_t hash_mpz(const mpz_class& z) noexcept;

}  // namespace boldplay

template <>
struct std::hash<boldplay::Dyadic> {
    std::size_t operator()(const boldplay::Dyadic& d) const noexcept { return d.hash(); }
};
