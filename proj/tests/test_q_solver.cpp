#include "boldplay/errors.hpp"
#include "boldplay/q_solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace boldplay;

namespace {

/// Unrestricted bold play with ℓ = 1/2 on a dyadic f: exact recursion on binary digits.
mpq_class q_half_oracle(const mpq_class& f, const mpq_class& w) {
    if (f == 0) return 0;
    if (f == 1) return 1;
    if (f < mpq_class(1, 2)) return w * q_half_oracle(2 * f, w);
    return w + (1 - w) * q_half_oracle(2 * f - 1, w);
}

Fortune dy(long num, unsigned long exp) { return LinearForm::constant(Dyadic(mpz_class(num), exp)); }

const mpq_class kNano(1, 1'000'000'000);

}  // namespace

TEST_CASE("absorbing states are exact") {
    const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
    CHECK(q_bounds(p, LinearForm::zero(), {}).interval == ProbInterval::point(0));
    CHECK(q_bounds(p, LinearForm::one(), {}).interval == ProbInterval::point(1));
    CHECK_THROWS_AS(q_bounds(p, LinearForm::one() + LinearForm::ell(), {}), PreconditionViolated);
}

TEST_CASE("unrestricted bold play against hand unrolls") {
    const GameParams p(EllSpec::parse("1/2"), mpq_class(3, 10));
    const Budget b{64, 1'000'000, kNano};
    const auto at = [&](long num, unsigned long exp) { return q_bounds(p, dy(num, exp), b).interval; };
    for (auto [iv, v] : {std::pair{at(1, 1), mpq_class(3, 10)}, std::pair{at(1, 2), mpq_class(9, 100)},
                         std::pair{at(3, 2), mpq_class(51, 100)}}) {
        CHECK(iv.contains(v));
        CHECK(iv.width() <= kNano);
    }
}

TEST_CASE("unrestricted bold play against the digit recursion") {
    const mpq_class w(3, 10);
    const GameParams p(EllSpec::parse("1/2"), w);
    for (unsigned long exp = 1; exp <= 7; ++exp)
        for (long num = 1; num < (1L << exp); num += 2) {
            const QResult r = q_bounds(p, dy(num, exp), {64, 1'000'000, kNano});
            CHECK(r.interval.contains(q_half_oracle(mpq_class(num, 1L << exp), w)));
        }
}

TEST_CASE("kernels agree") {
    const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
    const Budget b{40, 200'000, mpq_class(1, 1'000'000)};
    const Fortune f = dy(1, 1);
    const ProbInterval s = q_bounds(p, f, b, SweepKernel::Serial).interval;
    const ProbInterval par = q_bounds(p, f, b, SweepKernel::Parallel).interval;
    CHECK(s.intersects(par));
    CHECK(s.width() <= b.target_width);
    CHECK(par.width() <= b.target_width);
}

TEST_CASE("budget validation") {
    CHECK_THROWS_AS((Budget{0, 10, kNano}).validate(), PreconditionViolated);
    CHECK_THROWS_AS((Budget{10, 10, mpq_class(0)}).validate(), PreconditionViolated);
    const Budget b = Budget{10, 100, kNano}.scaled(3);
    CHECK(b.max_depth == 30);
    CHECK(b.max_states == 300);
    CHECK(b.target_width == kNano);
}

TEST_CASE("state table: sandwich, monotonicity, one-step consistency") {
    for (const char* cap : {"3/10", "sqrt(1/5)"}) {
        const GameParams p(EllSpec::parse(cap), mpq_class(1, 4));
        const EllSpec& e = p.ell;
        StateTable t(p);
        std::vector<std::size_t> roots;
        for (long k = 1; k < 32; ++k) roots.push_back(t.add_root(dy(k, 5)));
        const Budget b{48, 500'000, mpq_class(1, 100'000'000)};
        t.solve(b);

        std::vector<FixedProb> lo(t.size()), hi(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            lo[i] = t.lo_fixed(i);
            hi[i] = t.hi_fixed(i);
            CHECK(lo[i] <= hi[i]);
        }
        t.sweep_serial();
        t.sweep_parallel();
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(t.lo_fixed(i) >= lo[i]);
            CHECK(t.hi_fixed(i) <= hi[i]);
        }

        for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
            const ProbInterval a = t.interval(roots[i]);
            const ProbInterval c = t.interval(roots[i + 1]);
            CHECK(lf_compare(t.fortune(roots[i]), t.fortune(roots[i + 1]), e) < 0);
            CHECK(a.lo <= c.hi);
            CHECK(a.midpoint() <= c.midpoint() + a.width() + c.width());
        }

        std::size_t interior = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.kind(i) != StateTable::Kind::Interior) continue;
            ++interior;
            const auto [win, lose] = t.successors(i);
            const ProbInterval m = mix(p.w, t.interval(win), t.interval(lose));
            const ProbInterval self = t.interval(i);
            // refinement stops at the sweep tolerance, so containment holds up to it
            CHECK(self.lo >= m.lo - b.target_width);
            CHECK(self.hi <= m.hi + b.target_width);
            CHECK(self.intersects(m));
        }
        CHECK(interior > 0);
    }
}

TEST_CASE("width decays geometrically with depth") {
    const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
    const unsigned k = static_cast<unsigned>(std::ceil(1.0 / p.ell.approx())) + 1;
    mpq_class survive = 1;
    for (unsigned i = 0; i < k; ++i) survive *= 1 - p.w;
    const mpq_class per_block = 1 - survive;
    mpq_class last = 2;
    for (std::size_t depth : {6u, 12u, 18u, 24u}) {
        const QResult r = q_bounds(p, dy(1, 1), {depth, 4'000'000, mpq_class(1, 1'000'000'000)});
        REQUIRE_FALSE(r.stats.state_cap_hit);
        mpq_class bound = 1;
        for (std::size_t j = 0; j < depth / k; ++j) bound *= per_block;
        CHECK(r.interval.width() <= bound);
        CHECK(r.interval.width() <= last);
        last = r.interval.width();
    }
}

TEST_CASE("closed form near the goal") {
    const GameParams p(EllSpec::parse("3/10"), mpq_class(2, 5));
    const ProbInterval in{mpq_class(1, 3), mpq_class(1, 2)};
    CHECK(q_near_goal(p, 0, in) == in);
    CHECK(q_near_goal(p, 1, ProbInterval::point(mpq_class(1, 2))) == ProbInterval::point(mpq_class(7, 10)));
    CHECK(q_near_goal(p, 2, ProbInterval{0, 1}) == ProbInterval{mpq_class(16, 25), 1});
    CHECK(lf_eq(near_goal_fortune(0), LinearForm::one() - LinearForm::ell(), p.ell));
}

TEST_CASE("closed form agrees with direct solves") {
    const GameParams p(EllSpec::parse("3/10"), mpq_class(1, 4));
    const Budget b{64, 4'000'000, mpq_class(1, 1'000'000)};
    const ConsistencyReport r = q_consistency_check(p, 6, b);
    REQUIRE(r.rows.size() == 7);
    for (const auto& row : r.rows) {
        CHECK(sgn(row.overlap) >= 0);
        CHECK(row.direct.width() <= b.target_width);
    }
    CHECK(q_consistency_check(p, 0, b).rows.size() == 1);
}

TEST_CASE("interval json round trip") {
    const ProbInterval iv{mpq_class(21, 100), mpq_class(22, 100)};
    const auto j = to_json(iv);
    CHECK(j.at("lo").get<std::string>() == "21/100");
    CHECK(j.at("hi").get<std::string>() == "11/50");
    CHECK(prob_interval_from_json(j) == iv);
    CHECK(mix(mpq_class(1, 4), ProbInterval::point(1), ProbInterval::point(0)) ==
          ProbInterval::point(mpq_class(1, 4)));
}
