#include "support.hpp"

#include "boldplay/coupling.hpp"
#include "boldplay/errors.hpp"
#include "boldplay/linear_form.hpp"

#include <doctest.h>

#include <cmath>

using namespace boldplay;
using testing_support::random_form;

namespace {

const EllSpec& root5() {
    static const EllSpec e = EllSpec::parse("sqrt(1/5)");
    return e;
}

}  // namespace

TEST_CASE("dyadic normalization") {
    CHECK(Dyadic(mpz_class(32), 5) == Dyadic(1));
    CHECK(Dyadic(mpz_class(6), 3) == Dyadic(mpz_class(3), 2));
    CHECK(Dyadic(mpz_class(0), 7) == Dyadic(0));
    CHECK(Dyadic(mpz_class(0), 7).exponent() == 0);
    CHECK(Dyadic(mpz_class(3), 2).to_string() == "3/4");
    CHECK(Dyadic::pow2_neg(3).to_rational() == mpq_class(1, 8));
    CHECK(Dyadic(1).scaled(-5).scaled(5) == Dyadic(1));
    CHECK(Dyadic(mpz_class(64), 0).scaled(-5) == Dyadic(2));
    CHECK(Dyadic::from_rational(mpq_class(5, 16)) == Dyadic(mpz_class(5), 4));
    CHECK_THROWS_AS(Dyadic::from_rational(mpq_class(1, 3)), PreconditionViolated);
}

TEST_CASE("normalizing twice changes nothing") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const Dyadic d = testing_support::random_dyadic(rng, 1 << 20, 30);
        const Dyadic again(d.numerator(), d.exponent());
        CHECK(again == d);
        if (d.exponent() > 0) CHECK(mpz_odd_p(d.numerator().get_mpz_t()) != 0);
        CHECK(Dyadic::from_rational(d.to_rational()) == d);
    }
}

TEST_CASE("stake cap parsing") {
    CHECK(EllSpec::parse("3/10").is_rational());
    CHECK(EllSpec::parse("0.3").rational_value() == mpq_class(3, 10));
    CHECK(EllSpec::parse("sqrt(1/4)").rational_value() == mpq_class(1, 2));

    const EllSpec a = EllSpec::parse("sqrt(1/5)");
    const EllSpec b = EllSpec::parse("sqrt(5)/5");
    const EllSpec c = EllSpec::parse("(0+1*sqrt(5))/5");
    CHECK(a.is_irrational());
    CHECK(a.to_string() == b.to_string());
    CHECK(a.to_string() == c.to_string());
    CHECK(EllSpec::parse(a.to_string()).to_string() == a.to_string());
    CHECK(a.approx() == doctest::Approx(0.4472135954999579).epsilon(1e-15));
    CHECK(EllSpec::parse("sqrt(2)/4").approx() == doctest::Approx(0.3535533905932738).epsilon(1e-15));
    CHECK(EllSpec::parse("(sqrt(5)-1)/4").approx() == doctest::Approx(0.3090169943749474));
    CHECK(EllSpec::parse("(3-sqrt(5))/2").approx() == doctest::Approx(0.3819660112501051));

    CHECK_THROWS_AS(EllSpec::parse("abc"), ParseError);
    CHECK_THROWS_AS(EllSpec::parse("1/0"), ParseError);
    CHECK_THROWS_AS(EllSpec::parse("3/4"), ParseError);
    CHECK_THROWS_AS(EllSpec::parse("0"), ParseError);
    CHECK_THROWS_AS(EllSpec::parse("-1/4"), ParseError);
    CHECK_THROWS_AS(EllSpec::rational(3, 4), PreconditionViolated);
}

TEST_CASE("stake cap comparisons and bounds") {
    const EllSpec& e = root5();
    CHECK(e.compare(mpq_class(4472, 10000)) > 0);
    CHECK(e.compare(mpq_class(4473, 10000)) < 0);
    CHECK(e.theorem_ready());
    CHECK_FALSE(EllSpec::parse("1/3").theorem_ready());
    for (unsigned long bits : {8ul, 64ul, 200ul}) {
        const auto [lo, hi] = e.bounds(bits);
        CHECK(lo <= hi);
        CHECK(e.compare(lo) >= 0);
        CHECK(e.compare(hi) <= 0);
        mpq_class width = hi - lo;
        mpq_class cap(1);
        mpq_div_2exp(cap.get_mpq_t(), cap.get_mpq_t(), bits);
        CHECK(width <= cap);
    }
}

TEST_CASE("linear form arithmetic") {
    const LinearForm one_minus_ell = LinearForm::one() - LinearForm::ell();
    CHECK(one_minus_ell.p == Dyadic(1));
    CHECK(one_minus_ell.q == Dyadic(-1));
    const LinearForm half = lf_halve(one_minus_ell);
    CHECK(half.p == Dyadic::pow2_neg(1));
    CHECK(half.q == -Dyadic::pow2_neg(1));
    CHECK(lf_add(one_minus_ell, lf_neg(one_minus_ell)).is_zero_form());
}

TEST_CASE("exact signs") {
    const EllSpec& e = root5();
    CHECK(lf_sign(LinearForm::zero(), e) == 0);
    const LinearForm x = LinearForm::one() - LinearForm::ell().doubled();
    CHECK(lf_sign(x, e) == 1);
    CHECK(lf_sign(-x, e) == -1);
    // sqrt(1/5) vs 1/2: negative. 3/10 vs 1/4: equal under rational ell.
    CHECK(lf_compare(LinearForm::ell(), LinearForm::constant(Dyadic::pow2_neg(1)), e) < 0);
    const EllSpec quarter = EllSpec::parse("1/4");
    CHECK(lf_eq(LinearForm::ell(), LinearForm::constant(Dyadic::pow2_neg(2)), quarter));
}

TEST_CASE("value equality is component equality for irrational ell") {
    const EllSpec& e = root5();
    const LinearForm one_minus_ell = LinearForm::one() - LinearForm::ell();
    CHECK(lf_eq(one_minus_ell, one_minus_ell, e));
    const LinearForm approx = LinearForm::constant(Dyadic::from_rational(mpq_class(7327, 16384)));
    CHECK_FALSE(lf_eq(LinearForm::ell(), approx, e));
}

TEST_CASE("float enclosures") {
    CHECK(lf_to_interval(LinearForm::constant(Dyadic::pow2_neg(1)), root5(), 53) ==
          std::pair<double, double>(0.5, 0.5));
    const auto [lo, hi] = lf_to_interval(LinearForm::ell(), root5(), 40);
    CHECK(lo <= 0.4472135955);
    CHECK(hi >= 0.4472135954);
    CHECK(hi - lo <= 1e-11);
    const EllSpec e3 = EllSpec::parse("3/10");
    const auto [a, b] = lf_to_interval(LinearForm::one() - LinearForm::ell(), e3, 53);
    CHECK(a <= 0.7);
    CHECK(b >= 0.7);
    CHECK(b - a <= 2e-16);
}

TEST_CASE("random forms obey ring laws") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        const LinearForm x = random_form(rng), y = random_form(rng), z = random_form(rng);
        CHECK((x + y) + z == x + (y + z));
        CHECK(x + y == y + x);
        CHECK((x + y).doubled() == x.doubled() + y.doubled());
        CHECK(x.doubled().halved() == x);
    }
}

TEST_CASE("random forms: sign laws and agreement with high precision") {
    std::mt19937_64 rng(7);
    const EllSpec& e = root5();
    const BigFloat tiny("1e-60");
    int decided = 0;
    for (int i = 0; i < 10000; ++i) {
        const LinearForm x = random_form(rng, 1 << 16, 20);
        const int s = lf_sign(x, e);
        CHECK((s == -1 || s == 0 || s == 1));
        CHECK(lf_sign(lf_neg(x), e) == -s);
        CHECK((s == 0) == x.is_zero_form());
        const BigFloat v = lf_big(x, e);
        if (abs(v) > tiny) {
            CHECK(s == (v > 0 ? 1 : -1));
            ++decided;
        }
        const auto [lo, hi] = lf_to_interval(x, e, 40);
        if (lo > 0) CHECK(s == 1);
        if (hi < 0) CHECK(s == -1);
    }
    CHECK(decided > 9900);
}

TEST_CASE("random pairs: equality iff components agree for irrational ell") {
    std::mt19937_64 rng(9);
    const EllSpec& e = root5();
    for (int i = 0; i < 10000; ++i) {
        const LinearForm x = random_form(rng, 4, 2);
        const LinearForm y = random_form(rng, 4, 2);
        CHECK(lf_eq(x, y, e) == (x.p == y.p && x.q == y.q));
    }
}

TEST_CASE("fortune text parsing") {
    const EllSpec& e = root5();
    CHECK(parse_linear_form("1-ell", e) == LinearForm::one() - LinearForm::ell());
    CHECK(parse_linear_form("1/2+3/4*ell", e) ==
          LinearForm(Dyadic::pow2_neg(1), Dyadic(mpz_class(3), 2)));
    CHECK(parse_linear_form("-ell/8", e) == LinearForm(Dyadic(0), -Dyadic::pow2_neg(3)));
    const LinearForm f(Dyadic(mpz_class(5), 7), Dyadic(mpz_class(-3), 2));
    CHECK(parse_linear_form(lf_to_json(f).dump(), e) == f);
    CHECK(lf_from_json(lf_to_json(f)) == f);
    CHECK(parse_linear_form(f.to_string(), e) == f);
    CHECK_THROWS_AS(parse_linear_form("1/3", e), ParseError);
    CHECK_THROWS_AS(parse_linear_form("ell+", e), ParseError);

    const EllSpec e3 = EllSpec::parse("3/10");
    CHECK(lf_eq(parse_linear_form("7/10", e3), LinearForm::one() - LinearForm::ell(), e3));
}

TEST_CASE("fortune keys collapse equal values under rational ell") {
    const EllSpec quarter = EllSpec::parse("1/4");
    const FortuneKeyHash h;
    const FortuneKey a = fortune_key(LinearForm::ell(), quarter);
    const FortuneKey b = fortune_key(LinearForm::constant(Dyadic::pow2_neg(2)), quarter);
    CHECK(a == b);
    CHECK(h(a) == h(b));
    const FortuneKey c = fortune_key(LinearForm::ell(), root5());
    const FortuneKey d = fortune_key(LinearForm::constant(Dyadic::pow2_neg(2)), root5());
    CHECK_FALSE(c == d);
}
