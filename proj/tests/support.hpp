#pragma once

#include "boldplay/linear_form.hpp"

#include <random>

namespace testing_support {

using boldplay::Dyadic;
using boldplay::LinearForm;

inline Dyadic random_dyadic(std::mt19937_64& rng, long span = 64, unsigned max_exp = 12) {
    std::uniform_int_distribution<long> num(-span, span);
    std::uniform_int_distribution<unsigned> ex(0, max_exp);
    return Dyadic(mpz_class(num(rng)), ex(rng));
}

inline LinearForm random_form(std::mt19937_64& rng, long span = 64, unsigned max_exp = 12) {
    return {random_dyadic(rng, span, max_exp), random_dyadic(rng, span, max_exp)};
}

/// Uniform lattice point k/2^bits + j/2^bits·ℓ clipped into [0, 1] by rejection.
inline LinearForm random_fortune(std::mt19937_64& rng, const boldplay::EllSpec& ell,
                                 unsigned bits = 8) {
    std::uniform_int_distribution<long> a(0, 1L << bits);
    std::uniform_int_distribution<long> b(-(1L << bits), 1L << bits);
    for (;;) {
        LinearForm f{Dyadic(mpz_class(a(rng)), bits), Dyadic(mpz_class(b(rng)), bits + 1)};
        if (boldplay::lf_sign(f, ell) >= 0 && boldplay::lf_compare(f, LinearForm::one(), ell) <= 0)
            return f;
    }
}

}  // namespace testing_support
