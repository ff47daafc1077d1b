#include "boldplay/dyadic.hpp"

#include "boldplay/errors.hpp"

#include <cmath>

namespace boldplay {

Dyadic::Dyadic(mpz_class numerator, unsigned long exponent)
    : num_(std::move(numerator)), exp_(exponent) {
    normalize();
}

void Dyadic::normalize() {
    if (sgn(num_) == 0) {
        exp_ = 0;
        return;
    }
    if (exp_ == 0) return;
    const unsigned long tz = mpz_scan1(num_.get_mpz_t(), 0);
    const unsigned long shift = tz < exp_ ? tz : exp_;
    if (shift > 0) {
        mpz_tdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), shift);
        exp_ -= shift;
    }
}

Dyadic Dyadic::from_rational(const mpq_class& q) {
    const mpz_class& den = q.get_den();
    const unsigned long tz = mpz_scan1(den.get_mpz_t(), 0);
    // den is positive; it is a power of two iff it has a single set bit
    if (mpz_popcount(den.get_mpz_t()) != 1)
        throw PreconditionViolated("not a dyadic rational: " + q.get_str());
    return Dyadic(q.get_num(), tz);
}

Dyadic Dyadic::pow2_neg(unsigned long k) { return Dyadic(mpz_class(1), k); }

mpq_class Dyadic::to_rational() const {
    mpq_class r(num_);
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), exp_);
    return r;
}

double Dyadic::to_double() const {
    long e = 0;
    const double m = mpz_get_d_2exp(&e, num_.get_mpz_t());
    return std::ldexp(m, static_cast<int>(e - static_cast<long>(exp_)));
}

std::string Dyadic::to_string() const {
    if (exp_ == 0) return num_.get_str();
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, exp_);
    return num_.get_str() + "/" + den.get_str();
}

Dyadic Dyadic::operator-() const {
    Dyadic r = *this;
    r.num_ = -r.num_;
    return r;
}

Dyadic& Dyadic::operator+=(const Dyadic& o) {
    if (o.is_zero()) return *this;
    if (exp_ == o.exp_) {
        num_ += o.num_;
    } else if (exp_ > o.exp_) {
        mpz_class t;
        mpz_mul_2exp(t.get_mpz_t(), o.num_.get_mpz_t(), exp_ - o.exp_);
        num_ += t;
    } else {
        mpz_mul_2exp(num_.get_mpz_t(), num_.get_mpz_t(), o.exp_ - exp_);
        num_ += o.num_;
        exp_ = o.exp_;
    }
    normalize();
    return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& o) { return *this += -o; }

Dyadic& Dyadic::operator*=(const Dyadic& o) {
    num_ *= o.num_;
    exp_ += o.exp_;
    normalize();
    return *this;
}

Dyadic Dyadic::scaled(long k) const {
    if (is_zero() || k == 0) return *this;
    Dyadic r = *this;
    if (k < 0) {
        r.exp_ += static_cast<unsigned long>(-k);
        r.normalize();
        return r;
    }
    const auto up = static_cast<unsigned long>(k);
    if (up <= r.exp_) {
        r.exp_ -= up;
    } else {
        mpz_mul_2exp(r.num_.get_mpz_t(), r.num_.get_mpz_t(), up - r.exp_);
        r.exp_ = 0;
    }
    return r;
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    if (a.exp_ == b.exp_) {
        const int c = cmp(a.num_, b.num_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    const int s = (a - b).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

std::size_t hash_mpz(const mpz_class& z) noexcept {
    const mpz_srcptr p = z.get_mpz_t();
    std::size_t h = static_cast<std::size_t>(p->_mp_size) * 0x9e3779b97f4a7c15ULL;
    const int n = p->_mp_size < 0 ? -p->_mp_size : p->_mp_size;
    for (int i = 0; i < n; ++i) {
        h ^= static_cast<std::size_t>(p->_mp_d[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

std::size_t Dyadic::hash() const noexcept {
    return hash_mpz(num_) ^ (static_cast<std::size_t>(exp_) * 0xc2b2ae3d27d4eb4fULL);
}

}  // namespace boldplay
