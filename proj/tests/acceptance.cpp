#include "support.hpp"

#include "boldplay/coupling.hpp"
#include "boldplay/improvement.hpp"
#include "boldplay/q_solver.hpp"
#include "boldplay/reachability.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace boldplay;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = Clock::now();
    Verdict r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (limit_s > 0 && secs >= limit_s) {
        r.pass = false;
        r.detail += "; over the " + std::to_string(static_cast<int>(limit_s)) + " s limit";
    }
    if (!r.pass) ++failures;
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << id << "  " << name << "  [" << std::fixed
              << std::setprecision(2) << secs << " s]  " << r.detail << std::endl;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::vector<Outcome> random_word(std::mt19937_64& rng, std::size_t n) {
    std::vector<Outcome> w(n);
    for (auto& o : w) o = (rng() & 1) ? Outcome::Win : Outcome::Lose;
    return w;
}

const std::vector<std::string> kCaps{"3/10", "sqrt(1/5)"};
const std::vector<std::string> kWs{"1/10", "1/4", "2/5"};

}  // namespace

int main() {
    criterion(1, "bold-play oracle at ell = 1/2, w = 3/10", 1.0, [] {
        const GameParams p(EllSpec::parse("1/2"), mpq_class(3, 10));
        const Budget b{64, 100'000, mpq_class(1, 1'000'000'000)};
        bool ok = true;
        mpq_class widest = 0;
        for (const auto& [f, q] : std::vector<std::pair<const char*, const char*>>{
                 {"1/2", "3/10"}, {"1/4", "9/100"}, {"3/4", "51/100"}}) {
            const ProbInterval iv = q_bounds(p, parse_linear_form(f, p.ell), b).interval;
            ok = ok && iv.contains(mpq_class(q)) && iv.width() <= b.target_width;
            widest = std::max(widest, iv.width());
        }
        return Verdict{ok, "max width " + fmt(widest.get_d())};
    });

    criterion(2, "closed form near the goal agrees with direct bounds", 60.0, [] {
        const Budget b{64, 4'000'000, mpq_class(1, 1'000'000)};
        bool ok = true;
        mpq_class widest = 0;
        int rows = 0;
        for (const auto& cap : kCaps)
            for (const auto& w : kWs) {
                const GameParams p(EllSpec::parse(cap), mpq_class(w));
                const ConsistencyReport rep = q_consistency_check(p, 6, b);
                for (const auto& r : rep.rows) {
                    ok = ok && r.direct.intersects(r.mapped) && r.direct.width() <= b.target_width;
                    widest = std::max(widest, r.direct.width());
                    ++rows;
                }
            }
        return Verdict{ok && rows == 42, std::to_string(rows) + " rows, max width " + fmt(widest.get_d())};
    });

    criterion(3, "counterexample point for ell = 1/sqrt(5)", 30.0, [] {
        const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
        const EllSpec& e = p.ell;
        const CounterexamplePoint c = construct_counterexample(e);
        const LinearForm el = LinearForm::ell();
        const Fortune f0 = (LinearForm::one() - el).scaled(-3) + el;
        bool ok = c.m == 1 && c.d == 3 && c.n == 1 && lf_eq(c.f0, f0, e);
        ok = ok && c.witness.size() == 3 && word_to_string(c.witness) == "WWW";
        ok = ok && lf_eq(trajectory(f0 - el, c.witness, p).back(), LinearForm::one() - el, e);
        const bool cert = not_in_s_certificate(f0 + el, e).has_value();
        const bool hit = search_hit(p, f0 + el, 14).has_value();
        return Verdict{ok && cert && !hit, "(m,d,n) = (" + std::to_string(c.m) + "," + std::to_string(c.d) +
                                                "," + std::to_string(c.n) + "), witness " +
                                                word_to_string(c.witness) + ", certificate " +
                                                (cert ? "fires" : "missing") + ", depth-14 hit " +
                                                (hit ? "found" : "none")};
    });

    for (const auto& [cap, w] : std::vector<std::pair<const char*, const char*>>{
             {"sqrt(1/5)", "1/20"}, {"sqrt(1/5)", "1/4"}, {"sqrt(2)/4", "1/4"}}) {
        criterion(4, std::string("improvement certificate at ell = ") + cap + ", w = " + w, 600.0, [&] {
            const GameParams p(EllSpec::parse(cap), mpq_class(w));
            const ImprovementSearch s = find_improvement(p);
            const ImprovementCertificate& c = s.certificate;
            const ImprovementAttempt doubled = evaluate_improvement(p, c.f, c.epsilon, c.budget.scaled(2));
            return Verdict{sgn(c.margin) > 0 && doubled.certified(),
                            "eps " + c.epsilon.to_string() + ", margin " + fmt(c.margin.get_d()) +
                                ", doubled-budget margin " + fmt(doubled.margin().get_d())};
        });
    }

    criterion(5, "no certificate when ell = 1/3", 300.0, [] {
        const GameParams p(EllSpec::parse("1/3"), mpq_class(1, 4));
        const Budget b = SearchOptions{}.budget;
        int pairs = 0, certified = 0;
        mpq_class best = -1;
        for (long num : {11, 13, 15, 17, 19})
            for (unsigned k : {5u, 8u, 11u, 14u}) {
                const Fortune f = LinearForm::constant(Dyadic(mpz_class(num), 5));
                const ImprovementAttempt a = evaluate_improvement(p, f, Dyadic::pow2_neg(k), b);
                ++pairs;
                if (a.certified()) ++certified;
                best = std::max(best, a.margin());
            }
        return Verdict{pairs == 20 && certified == 0,
                        std::to_string(pairs) + " pairs, " + std::to_string(certified) +
                            " certified, largest margin " + fmt(best.get_d())};
    });

    criterion(6, "deviation beats bold play at ell = 3/10, w = 1/100", 60.0, [] {
        const GameParams p(EllSpec::parse("3/10"), mpq_class(1, 100));
        const HpsReport r = hps_demo(p, Dyadic::pow2_neg(6), SearchOptions{}.budget);
        return Verdict{r.deviation_better(),
                        "deviation lo " + fmt(r.deviation.lo.get_d()) + " vs bold hi " + fmt(r.bold.hi.get_d())};
    });

    criterion(7, "coupling invariants", 0.0, [] {
        std::mt19937_64 rng(7);
        std::size_t runs = 0, violations = 0, h_bad = 0, pairs = 0;
        for (const auto& cap : kCaps) {
            const GameParams p(EllSpec::parse(cap), mpq_class(1, 4));
            const EllSpec& e = p.ell;
            const Fortune el = LinearForm::ell(), top = LinearForm::one() - el;
            for (int i = 0; i < 5000; ++i) {
                Fortune f1 = testing_support::random_fortune(rng, e);
                Fortune f2 = testing_support::random_fortune(rng, e);
                if (lf_compare(f1, f2, e) < 0) std::swap(f1, f2);
                const CoupledRun r = coupled_run(f1, f2, random_word(rng, 200), p);
                violations += r.ordering_violations + r.doubling_violations;
                ++runs;

                const HRatio h = h_ratio(f1, f2, p);
                if (h.equal) continue;
                ++pairs;
                bool ok = lf_compare(h.numerator, h.denominator, e) <= 0 &&
                          lf_compare(-h.denominator, h.numerator, e) <= 0;
                const bool f_mid = lf_compare(f1, top, e) <= 0, g_mid = lf_compare(f2, el, e) >= 0;
                if (f_mid && g_mid) ok = ok && h.numerator.is_zero_form();
                if (g_mid && !f_mid) ok = ok && lf_sign(h.numerator, e) <= 0;
                if (f_mid && !g_mid) ok = ok && lf_sign(h.numerator, e) >= 0;
                if (!ok) ++h_bad;
            }
        }
        bool g_ok = true;
        for (const auto& wt : kWs) {
            const mpq_class w(wt);
            g_ok = g_ok && abs(g_func(w, 0) - 1) <= BigFloat("1e-10") && abs(g_func(w, -1) - 1) <= BigFloat("1e-10");
            BigFloat prev = g_func(w, 0);
            for (int i = 1; i <= 1000; ++i) {
                const BigFloat g = g_func(w, BigFloat(i) / 1001);
                g_ok = g_ok && g < prev;
                prev = g;
            }
            g_ok = g_ok && g_func(w, 1) < prev;
        }
        return Verdict{violations == 0 && h_bad == 0 && g_ok,
                        std::to_string(runs) + " runs at depth 200, " + std::to_string(violations) +
                            " order/doubling violations, " + std::to_string(h_bad) + " of " +
                            std::to_string(pairs) + " h checks failed, g " + (g_ok ? "ok" : "bad")};
    });

    criterion(8, "exact supermartingale checks", 300.0, [] {
        std::size_t checks = 0, failed = 0, min_driver = SIZE_MAX;
        for (const auto& cap : kCaps)
            for (const auto& wt : kWs) {
                const GameParams p(EllSpec::parse(cap), mpq_class(wt));
                for (LemmaKind k : {LemmaKind::A, LemmaKind::R, LemmaKind::B, LemmaKind::C, LemmaKind::Z}) {
                    const auto pairs = region_pairs(p, k, k == LemmaKind::Z ? 1 : 6);
                    if (pairs.empty()) ++failed;
                    for (const auto& [f1, f2] : pairs) {
                        ++checks;
                        try {
                            const LemmaReport r = exact_supermartingale_check(f1, f2, p, k, 100);
                            if (!r.passed) ++failed;
                            if (k == LemmaKind::Z) {
                                min_driver = std::min(min_driver, r.driver_states);
                                if (r.driver_states < 100) ++failed;
                            }
                        } catch (const InequalityViolated&) {
                            ++failed;
                        }
                    }
                }
            }
        return Verdict{failed == 0, std::to_string(checks) + " checks, " + std::to_string(failed) +
                                         " failed, fewest driver states " + std::to_string(min_driver)};
    });

    criterion(9, "scaling of the improvement near f0", 0.0, [] {
        const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
        const CounterexamplePoint c = construct_counterexample(p.ell);
        const auto ks = epsilon_exponents(4, 12);
        const Budget b = SearchOptions{}.budget;
        const auto below = scaling_diagnostic(p, c.f0 - LinearForm::ell(), ScalingSide::Below, ks, b);
        const auto above = scaling_diagnostic(p, c.f0 + LinearForm::ell(), ScalingSide::Above, ks, b);
        // floor: half the coarsest lower ratio, fixed before looking at finer scales
        const mpq_class floor = below.rows.front().ratio.lo / 2;
        mpq_class min_lo = below.rows.front().ratio.lo;
        bool ok = sgn(floor) > 0;
        for (const auto& r : below.rows) {
            ok = ok && r.ratio.lo > floor;
            min_lo = std::min(min_lo, r.ratio.lo);
        }
        for (std::size_t i = 1; i < above.rows.size(); ++i)
            ok = ok && above.rows[i].ratio.hi < above.rows[i - 1].ratio.hi;
        return Verdict{ok, "below: min ratio lo " + fmt(min_lo.get_d()) + " > " + fmt(floor.get_d()) +
                                "; above: ratio hi " + fmt(above.rows.front().ratio.hi.get_d()) + " -> " +
                                fmt(above.rows.back().ratio.hi.get_d())};
    });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
