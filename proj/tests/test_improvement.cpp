#include "boldplay/improvement.hpp"

#include <doctest.h>

#include <sstream>

using namespace boldplay;

namespace {

const GameParams& root5() {
    static const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
    return p;
}

const Budget kBudget{80, 2'000'000, mpq_class("1/1000000000000")};

Fortune dy(long num, unsigned long exp) { return LinearForm::constant(Dyadic(mpz_class(num), exp)); }

}  // namespace

TEST_CASE("improvement preconditions") {
    const GameParams& p = root5();
    const Fortune f = dy(1, 1);
    CHECK_THROWS_AS(evaluate_improvement(p, f, Dyadic(0), kBudget), PreconditionViolated);
    CHECK_THROWS_AS(evaluate_improvement(p, f, Dyadic::pow2_neg(1), kBudget), PreconditionViolated);
    CHECK_THROWS_AS(evaluate_improvement(p, LinearForm::ell(), Dyadic::pow2_neg(6), kBudget),
                    PreconditionViolated);
    CHECK_THROWS_AS(find_improvement(GameParams(EllSpec::parse("1/3"), mpq_class(1, 4))),
                    PreconditionViolated);
}

TEST_CASE("substituted arguments coincide") {
    const GameParams& p = root5();
    const CounterexamplePoint c = construct_counterexample(p.ell);
    const LinearForm el = LinearForm::ell();
    for (unsigned k = 4; k <= 24; ++k) {
        const LinearForm eps = LinearForm::constant(Dyadic::pow2_neg(k));
        const Fortune f = c.f0 - eps;
        CHECK(lf_eq(stake(f, p), el, p.ell));
        CHECK(lf_eq(f + el - eps, c.f0 + el - eps.doubled(), p.ell));
        CHECK(lf_eq(f - el + eps, c.f0 - el, p.ell));
    }
}

TEST_CASE("one-step improvement at the counterexample point") {
    const GameParams& p = root5();
    const CounterexamplePoint c = construct_counterexample(p.ell);
    const Dyadic eps = Dyadic::pow2_neg(11);
    const Fortune f = c.f0 - LinearForm::constant(eps);
    const auto cert = verify_improvement(p, f, eps, kBudget);
    REQUIRE(cert);
    CHECK(sgn(cert->margin) > 0);
    CHECK(cert->margin == cert->lhs.lo - cert->rhs.hi);

    const Budget small{30, 100'000, kBudget.target_width};
    const ImprovementAttempt coarse = evaluate_improvement(p, f, eps, small);
    const ImprovementAttempt fine = evaluate_improvement(p, f, eps, small.scaled(2));
    CHECK(fine.lhs.subset_of(coarse.lhs));
    CHECK(fine.rhs.subset_of(coarse.rhs));
    CHECK(fine.margin() >= coarse.margin());

    const auto j = cert->to_json(p.ell);
    CHECK(j.at("margin").is_string());
    CHECK(j.at("epsilon") == "1/2048");
}

TEST_CASE("search returns the first certified epsilon") {
    const GameParams& p = root5();
    SearchOptions opt;
    opt.epsilon_exponents = epsilon_exponents(9, 12);
    const ImprovementSearch s = find_improvement(p, opt);
    CHECK(sgn(s.certificate.margin) > 0);
    REQUIRE_FALSE(s.attempts.empty());
    CHECK(s.attempts.back().certified());
    for (std::size_t i = 0; i + 1 < s.attempts.size(); ++i) CHECK_FALSE(s.attempts[i].certified());
}

TEST_CASE("search exhaustion carries every attempt") {
    SearchOptions opt;
    opt.epsilon_exponents = {4, 5};
    opt.budget = Budget{2, 1000, mpq_class(1, 1000)};
    try {
        find_improvement(root5(), opt);
        FAIL("expected exhaustion");
    } catch (const SearchExhausted& e) {
        CHECK(e.attempts().size() >= 2);
        for (const auto& a : e.attempts()) CHECK_FALSE(a.certified());
    }
}

TEST_CASE("bold play is never beaten when ell = 1/n") {
    for (int n : {3, 4, 5}) {
        const EllSpec ell = EllSpec::rational(1, n);
        for (const char* w : {"1/4", "2/5"}) {
            const GameParams p(ell, mpq_class(w));
            for (long num : {9, 11, 13, 15, 17})
                for (unsigned k : {5u, 8u, 11u}) {
                    const Fortune f = dy(num, 5);
                    if (lf_compare(f, LinearForm::ell(), ell) <= 0 ||
                        lf_compare(f, LinearForm::one() - LinearForm::ell(), ell) >= 0)
                        continue;
                    const ImprovementAttempt a =
                        evaluate_improvement(p, f, Dyadic::pow2_neg(k), {48, 400'000, mpq_class(1, 1'000'000'000)});
                    CHECK_FALSE(a.certified());
                }
        }
    }
}

TEST_CASE("one bet below one half") {
    const GameParams small(EllSpec::parse("3/10"), mpq_class(1, 100));
    const HpsReport r = hps_demo(small, Dyadic::pow2_neg(6), kBudget);
    CHECK(r.deviation_better());
    CHECK_FALSE(r.bold_better());

    const HpsReport same = hps_demo(small, Dyadic(0), kBudget);
    CHECK(same.bold == same.deviation);

    const GameParams fair(EllSpec::parse("3/10"), mpq_class(49, 100));
    const HpsReport near = hps_demo(fair, Dyadic::pow2_neg(6), kBudget);
    CHECK_FALSE(near.deviation_better());

    CHECK_THROWS_AS(hps_demo(root5(), Dyadic::pow2_neg(6), kBudget), PreconditionViolated);
    CHECK_THROWS_AS(hps_demo(small, Dyadic::pow2_neg(2), kBudget), PreconditionViolated);
}

TEST_CASE("scaling table") {
    const GameParams& p = root5();
    const CounterexamplePoint c = construct_counterexample(p.ell);
    const Fortune below = c.f0 - LinearForm::ell();
    CHECK(scaling_diagnostic(p, below, ScalingSide::Below, {}, kBudget).rows.empty());
    CHECK_THROWS_AS(scaling_diagnostic(p, below, ScalingSide::Below, {6, 5}, kBudget),
                    PreconditionViolated);

    const ScalingDiagnostic d = scaling_diagnostic(p, below, ScalingSide::Below, {4, 5, 6, 7}, kBudget);
    REQUIRE(d.rows.size() == 4);
    for (const auto& r : d.rows) {
        CHECK(sgn(r.delta.lo) > 0);
        CHECK(r.ratio.lo <= r.ratio.hi);
        mpq_class norm = 1;
        for (unsigned j = 0; j < r.k; ++j) norm *= 1 - p.w;
        CHECK(r.ratio.lo * norm == r.delta.lo);
    }
    std::ostringstream os;
    d.write_csv(os);
    CHECK(os.str().rfind("k,epsilon,delta_lo,delta_hi,ratio_lo,ratio_hi\n", 0) == 0);
    CHECK(scaling_side_from_string("above") == ScalingSide::Above);
    CHECK_THROWS_AS(scaling_side_from_string("left"), ParseError);
}
