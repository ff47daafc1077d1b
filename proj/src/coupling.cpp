#include "boldplay/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <random>
#include <unordered_set>

namespace boldplay {

namespace {

using boost::multiprecision::abs;
using boost::multiprecision::log;
using boost::multiprecision::pow;

struct Regions {
    const GameParams& params;
    LinearForm one_minus_ell = LinearForm::one() - LinearForm::ell();
    LinearForm one_minus_half_ell = LinearForm::one() - LinearForm::ell().halved();

    bool low(const Fortune& v) const { return lf_compare(v, one_minus_ell, params.ell) < 0; }
    bool below_half_cap(const Fortune& v) const {
        return lf_compare(v, one_minus_half_ell, params.ell) < 0;
    }

    ScheduleRule classify(const Fortune& x, const Fortune& y) const {
        if (!low(y)) return ScheduleRule::BothHigh;
        if (low(x)) return ScheduleRule::XLow;
        if (below_half_cap(x)) return ScheduleRule::Straddle;
        return ScheduleRule::Frozen;
    }
};

bool h_at_least_half(const Fortune& x, const Fortune& y, const GameParams& params) {
    return h_ratio(x, y, params).half_sign >= 0;
}

/// Value of W at (x, y) plus a relative rounding bound for it.
struct WValue {
    BigFloat value;
    BigFloat rel_err;
};

WValue w_value(const Fortune& x, const Fortune& y, const GameParams& params, const BigFloat& e) {
    const LinearForm d = x - y;
    if (d.is_zero_form() || lf_sign(d, params.ell) == 0) return {BigFloat(0), BigFloat(0)};
    const BigFloat eps = big_epsilon();
    const BigFloat diff = lf_big(d, params.ell);
    const BigFloat mag = abs(lf_big(LinearForm::constant(d.p), params.ell)) +
                         abs(lf_big(LinearForm{Dyadic(0), d.q}, params.ell));
    // cancellation in p + qℓ, then pow with a rounded exponent
    const BigFloat rel_diff = 8 * eps * mag / diff + eps;
    const BigFloat rel = e * rel_diff + 4 * eps * abs(log(diff)) + 4 * eps;
    return {pow(diff, e), rel};
}

struct Path {
    Fortune x;
    Fortune y;
    mpq_class prob{1};
    std::size_t steps = 0;
    bool n_event = false;
    bool first_win = false;
};

/**
 * All continuations from (x, y) until the stopping rule
 * inf{j ≥ start_min : ω_j = 1 or h(X_{j−1}, Y_{j−1}) ≥ 1/2} (a win at any j stops too).
 * Paths still running after `guard` bets are returned with steps = guard + 1.
 */
void enumerate_period(const Regions& rg, const Fortune& x0, const Fortune& y0,
                      std::size_t start_min, std::size_t guard, std::vector<Path>& out) {
    const GameParams& params = rg.params;
    std::vector<Path> stack{{x0, y0, mpq_class(1), 0, false, false}};
    const mpq_class lose_p = 1 - params.w;
    while (!stack.empty()) {
        Path p = std::move(stack.back());
        stack.pop_back();
        if (p.steps > guard) {
            out.push_back(std::move(p));
            continue;
        }
        const std::size_t j = p.steps + 1;
        const bool h_stop = j >= start_min && h_at_least_half(p.x, p.y, params);
        const bool straddle = rg.low(p.y) && !rg.low(p.x);

        Path win{step(p.x, Outcome::Win, params), step(p.y, Outcome::Win, params),
                 p.prob * params.w, j, p.n_event || straddle, j == 1 || p.first_win};
        out.push_back(std::move(win));

        Path lose{step(p.x, Outcome::Lose, params), step(p.y, Outcome::Lose, params),
                  p.prob * lose_p, j, p.n_event, p.first_win};
        if (h_stop)
            out.push_back(std::move(lose));
        else
            stack.push_back(std::move(lose));
    }
}

/// Stopping rule of the R lemma: stop after bet j on a win or when h(X_j, Y_j) ≥ 1/2.
void enumerate_r(const GameParams& params, const Fortune& x0, const Fortune& y0, std::size_t guard,
                 std::vector<Path>& out) {
    if (h_at_least_half(x0, y0, params)) {
        out.push_back({x0, y0, mpq_class(1), 0, false, false});
        return;
    }
    const mpq_class lose_p = 1 - params.w;
    std::vector<Path> stack{{x0, y0, mpq_class(1), 0, false, false}};
    while (!stack.empty()) {
        Path p = std::move(stack.back());
        stack.pop_back();
        if (p.steps > guard) {
            out.push_back(std::move(p));
            continue;
        }
        const std::size_t j = p.steps + 1;
        out.push_back({step(p.x, Outcome::Win, params), step(p.y, Outcome::Win, params),
                       p.prob * params.w, j, false, false});
        Path lose{step(p.x, Outcome::Lose, params), step(p.y, Outcome::Lose, params),
                  p.prob * lose_p, j, false, false};
        if (h_at_least_half(lose.x, lose.y, params))
            out.push_back(std::move(lose));
        else
            stack.push_back(std::move(lose));
    }
}

struct Accumulator {
    BigFloat sum = 0;
    BigFloat err = 0;
    std::size_t terms = 0;

    void add(const BigFloat& term, const BigFloat& rel_err) {
        sum += term;
        err += abs(term) * (rel_err + 4 * big_epsilon());
        ++terms;
    }
    BigFloat error() const { return err + abs(sum) * big_epsilon() * terms; }
};

void require_ordered(const Fortune& f1, const Fortune& f2, const EllSpec& ell) {
    require_valid_fortune(f1, ell, "f1");
    require_valid_fortune(f2, ell, "f2");
    if (lf_compare(f2, f1, ell) > 0)
        throw HypothesisViolated("coupling needs f2 <= f1, got f1 = " + f1.to_string() +
                                 ", f2 = " + f2.to_string());
}

BigFloat tolerance_from(const BigFloat& err) { return err + BigFloat("1e-10"); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Win iff a uniform 64-bit draw falls below floor(w·2^64).
std::uint64_t win_threshold(const mpq_class& w) {
    mpz_class t = w.get_num();
    mpz_mul_2exp(t.get_mpz_t(), t.get_mpz_t(), 64);
    mpz_fdiv_q(t.get_mpz_t(), t.get_mpz_t(), w.get_den().get_mpz_t());
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, t.get_mpz_t());
    return out;
}

}  // namespace

BigFloat big_epsilon() { return std::numeric_limits<BigFloat>::epsilon(); }

BigFloat to_big(const mpq_class& q) {
    BigFloat r;
    mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
    return r;
}

BigFloat ell_big(const EllSpec& ell) {
    if (ell.is_rational()) return to_big(ell.rational_value());
    const auto& s = ell.as_surd();
    BigFloat r;
    mpfr_set_z(r.backend().data(), s.r.get_mpz_t(), MPFR_RNDN);
    return (to_big(mpq_class(s.a)) + to_big(mpq_class(s.b)) * sqrt(r)) / to_big(mpq_class(s.c));
}

namespace {
BigFloat dyadic_big(const Dyadic& d) {
    BigFloat r;
    mpfr_set_z(r.backend().data(), d.numerator().get_mpz_t(), MPFR_RNDN);
    mpfr_div_2ui(r.backend().data(), r.backend().data(), d.exponent(), MPFR_RNDN);
    return r;
}
}  // namespace

BigFloat lf_big(const LinearForm& x, const EllSpec& ell) {
    if (x.q.is_zero()) return dyadic_big(x.p);
    return dyadic_big(x.p) + dyadic_big(x.q) * ell_big(ell);
}

std::string big_string(const BigFloat& v, int digits) {
    return v.str(digits, std::ios_base::scientific);
}

BigFloat w_exponent(const mpq_class& w) {
    const BigFloat one_minus = to_big(1 - w);
    BigFloat r;
    mpfr_log2(r.backend().data(), one_minus.backend().data(), MPFR_RNDN);
    return -r;
}

HRatio h_ratio(const Fortune& f, const Fortune& fstar, const GameParams& params) {
    const EllSpec& ell = params.ell;
    HRatio h;
    if (lf_eq(f, fstar, ell)) {
        h.equal = true;
        h.half_sign = 1;
        h.value = 1;
        return h;
    }
    h.denominator = f - fstar;
    if (lf_sign(h.denominator, ell) < 0)
        throw PreconditionViolated("h needs fstar <= f, got f = " + f.to_string() +
                                   ", fstar = " + fstar.to_string());
    h.numerator = stake(f, params) - stake(fstar, params);
    h.half_sign = lf_sign(h.numerator.doubled() - h.denominator, ell);
    h.value = lf_big(h.numerator, ell) / lf_big(h.denominator, ell);
    return h;
}

BigFloat g_func(const mpq_class& w, const BigFloat& x) {
    if (x < -1 || x > 1) throw PreconditionViolated("g is defined on [-1, 1]");
    const BigFloat e = w_exponent(w);
    const BigFloat wb = to_big(w);
    return wb * pow(1 + x, e) + (1 - wb) * pow(1 - x, e);
}

BigFloat w_statistic(const BigFloat& diff, const mpq_class& w) {
    if (diff < 0) throw PreconditionViolated("W needs a nonnegative difference");
    if (diff == 0) return BigFloat(0);
    return pow(diff, w_exponent(w));
}

nlohmann::json StoppingParams::to_json() const {
    return {{"L", L},
            {"g_half", big_string(g_half)},
            {"alpha", big_string(alpha)},
            {"alpha_float", alpha.convert_to<double>()}};
}

StoppingParams stopping_params(const GameParams& params) {
    const EllSpec& ell = params.ell;
    StoppingParams sp;
    // L = ⌊1/ℓ⌋ − 1: the largest n with (n + 1)ℓ ≤ 1
    while (lf_sign(LinearForm{Dyadic(1), Dyadic(-static_cast<long>(sp.L + 2))}, ell) >= 0) ++sp.L;
    sp.g_half = g_func(params.w, BigFloat("0.5"));
    sp.alpha = 1 - (1 - sp.g_half) * pow(to_big(1 - params.w), 2 * sp.L);
    if (!(sp.alpha > 0 && sp.alpha < 1))
        throw InvariantViolated("alpha outside (0, 1): " + big_string(sp.alpha));
    return sp;
}

CoupledRun coupled_run(const Fortune& f1, const Fortune& f2, std::span<const Outcome> outcomes,
                       const GameParams& params) {
    const EllSpec& ell = params.ell;
    require_ordered(f1, f2, ell);
    CoupledRun run;
    run.states.reserve(outcomes.size() + 1);
    run.states.push_back({f1, f2, 0});
    const LinearForm d0 = f1 - f2;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const CoupledState& cur = run.states.back();
        CoupledState next{step(cur.x, outcomes[k], params), step(cur.y, outcomes[k], params), k + 1};
        const LinearForm d = next.x - next.y;
        if (lf_sign(d, ell) < 0) ++run.ordering_violations;
        if (lf_compare(d, d0.scaled(static_cast<long>(k + 1)), ell) > 0) ++run.doubling_violations;
        run.states.push_back(std::move(next));
    }
    return run;
}

std::vector<ScheduleState> schedule(const Fortune& f1, const Fortune& f2,
                                    std::span<const Outcome> outcomes, const GameParams& params) {
    require_ordered(f1, f2, params.ell);
    const Regions rg{params};
    const StoppingParams sp = stopping_params(params);
    const BigFloat e = w_exponent(params.w);

    auto z_of = [&](const ScheduleState& s) {
        BigFloat z = w_value(s.x, s.y, params, e).value * pow(sp.alpha, -static_cast<long>(s.B));
        return s.n_reduced ? BigFloat(z * (1 - sp.alpha)) : z;
    };

    std::vector<ScheduleState> out;
    ScheduleState cur;
    cur.x = f1;
    cur.y = f2;
    cur.Z = z_of(cur);
    for (;;) {
        const ScheduleRule rule = cur.next_rule.emplace(rg.classify(cur.x, cur.y));
        if (rule == ScheduleRule::Frozen) {
            out.push_back(cur);
            break;
        }
        const std::size_t start_min = rule == ScheduleRule::Straddle ? 2 : 1;
        ScheduleState next;
        next.x = cur.x;
        next.y = cur.y;
        next.T = cur.T;
        next.B = cur.B + (rule == ScheduleRule::XLow ? 1 : 0);
        next.n_reduced = cur.n_reduced;
        bool complete = false;
        for (std::size_t j = 1;; ++j) {
            if (next.T >= outcomes.size()) break;
            const Outcome o = outcomes[next.T];
            const bool h_stop = rule != ScheduleRule::BothHigh && j >= start_min &&
                                h_at_least_half(next.x, next.y, params);
            if (o == Outcome::Win && rg.low(next.y) && !rg.low(next.x)) next.n_reduced = true;
            next.x = step(next.x, o, params);
            next.y = step(next.y, o, params);
            ++next.T;
            if (rule == ScheduleRule::BothHigh || o == Outcome::Win || h_stop) {
                complete = true;
                break;
            }
        }
        if (!complete) {
            cur.next_rule.reset();
            out.push_back(cur);
            break;
        }
        out.push_back(cur);
        next.Z = z_of(next);
        cur = std::move(next);
    }
    return out;
}

std::string to_string(LemmaKind k) {
    switch (k) {
        case LemmaKind::A: return "A";
        case LemmaKind::R: return "R";
        case LemmaKind::B: return "B";
        case LemmaKind::C: return "C";
        case LemmaKind::Z: return "Z";
    }
    return "?";
}

LemmaKind lemma_from_string(const std::string& s) {
    if (s == "A") return LemmaKind::A;
    if (s == "R") return LemmaKind::R;
    if (s == "B") return LemmaKind::B;
    if (s == "C") return LemmaKind::C;
    if (s == "Z") return LemmaKind::Z;
    throw ParseError("lemma", "expected one of A, R, B, C, Z, got '" + s + "'");
}

nlohmann::json LemmaReport::to_json() const {
    nlohmann::json j = {{"lemma", to_string(lemma)},
                        {"f1", lf_to_json(f1)},
                        {"f1_text", f1.to_string()},
                        {"f2", lf_to_json(f2)},
                        {"f2_text", f2.to_string()},
                        {"paths", paths},
                        {"max_stop", max_stop},
                        {"stop_bound", stop_bound},
                        {"lhs", big_string(lhs)},
                        {"rhs", big_string(rhs)},
                        {"error_bound", big_string(error_bound, 6)},
                        {"tolerance", big_string(tolerance, 6)},
                        {"relation", equality ? "==" : "<="},
                        {"passed", passed}};
    if (lemma == LemmaKind::Z) {
        j["driver_states"] = driver_states;
        j["seeds"] = seeds;
        j["worst_slack"] = big_string(worst_slack);
    }
    return j;
}

LemmaReport exact_supermartingale_check(const Fortune& f1, const Fortune& f2,
                                        const GameParams& params, LemmaKind lemma,
                                        std::size_t min_states) {
    const EllSpec& ell = params.ell;
    require_ordered(f1, f2, ell);
    const Regions rg{params};
    const StoppingParams sp = stopping_params(params);
    const BigFloat e = w_exponent(params.w);
    const BigFloat eps = big_epsilon();

    LemmaReport rep;
    rep.lemma = lemma;
    rep.f1 = f1;
    rep.f2 = f2;
    const WValue w0 = w_value(f1, f2, params, e);

    auto finish = [&](const Accumulator& acc, const BigFloat& rhs, BigFloat rhs_rel) {
        rep.lhs = acc.sum;
        rep.rhs = rhs;
        rep.error_bound = acc.error() + abs(rhs) * rhs_rel;
        rep.tolerance = tolerance_from(rep.error_bound);
        if (rep.max_stop > rep.stop_bound)
            throw InequalityViolated("lemma " + to_string(lemma) + ": stopping time " +
                                     std::to_string(rep.max_stop) + " exceeds " +
                                     std::to_string(rep.stop_bound));
        const BigFloat gap = rep.lhs - rep.rhs;
        const bool ok = rep.equality ? abs(gap) <= rep.tolerance : gap <= rep.tolerance;
        if (!ok)
            throw InequalityViolated("lemma " + to_string(lemma) + " fails at f1 = " +
                                     f1.to_string() + ", f2 = " + f2.to_string() + ": " +
                                     big_string(rep.lhs) + " vs " + big_string(rep.rhs));
        rep.passed = true;
    };

    switch (lemma) {
        case LemmaKind::A: {
            if (rg.low(f2))
                throw HypothesisViolated("lemma A needs 1 - ell <= f2 <= f1 <= 1");
            rep.equality = true;
            rep.stop_bound = 1;
            Accumulator acc;
            for (Outcome o : {Outcome::Win, Outcome::Lose}) {
                const WValue wv = w_value(step(f1, o, params), step(f2, o, params), params, e);
                const mpq_class p = o == Outcome::Win ? params.w : mpq_class(1 - params.w);
                acc.add(to_big(p) * wv.value, wv.rel_err + 2 * eps);
            }
            rep.paths = 2;
            rep.max_stop = 1;
            finish(acc, w0.value, w0.rel_err);
            break;
        }
        case LemmaKind::R:
        case LemmaKind::B: {
            if (!rg.low(f1))
                throw HypothesisViolated("lemma " + to_string(lemma) + " needs f2 <= f1 < 1 - ell");
            rep.stop_bound = lemma == LemmaKind::R ? sp.L : sp.L + 1;
            std::vector<Path> paths;
            if (lemma == LemmaKind::R)
                enumerate_r(params, f1, f2, rep.stop_bound, paths);
            else
                enumerate_period(rg, f1, f2, 1, rep.stop_bound, paths);
            Accumulator acc;
            for (const auto& p : paths) {
                rep.max_stop = std::max(rep.max_stop, p.steps);
                const WValue wv = w_value(p.x, p.y, params, e);
                acc.add(to_big(p.prob) * wv.value, wv.rel_err + 2 * eps);
            }
            rep.paths = paths.size();
            if (lemma == LemmaKind::R)
                finish(acc, w0.value, w0.rel_err);
            else
                finish(acc, sp.alpha * w0.value, w0.rel_err + 64 * eps);
            break;
        }
        case LemmaKind::C: {
            if (!(rg.low(f2) && !rg.low(f1) && rg.below_half_cap(f1)))
                throw HypothesisViolated("lemma C needs f2 < 1 - ell <= f1 < 1 - ell/2");
            rep.stop_bound = sp.L + 2;
            std::vector<Path> paths;
            enumerate_period(rg, f1, f2, 2, rep.stop_bound, paths);
            Accumulator acc;
            for (const auto& p : paths) {
                rep.max_stop = std::max(rep.max_stop, p.steps);
                const WValue wv = w_value(p.x, p.y, params, e);
                const BigFloat n = p.first_win ? BigFloat(1 - sp.alpha) : BigFloat(1);
                acc.add(to_big(p.prob) * n * wv.value, wv.rel_err + 64 * eps);
            }
            rep.paths = paths.size();
            finish(acc, w0.value, w0.rel_err);
            break;
        }
        case LemmaKind::Z: {
            rep.stop_bound = sp.L + 2;
            struct Node {
                Fortune x, y;
                unsigned long B;
                bool n;
            };
            auto key = [&](const Node& s) {
                const FortuneKey kx = fortune_key(s.x, ell), ky = fortune_key(s.y, ell);
                return kx.a.to_string() + "|" + kx.b.to_string() + "|" + ky.a.to_string() + "|" +
                       ky.b.to_string() + "|" + std::to_string(s.B) + (s.n ? "n" : "");
            };
            auto z_of = [&](const Fortune& x, const Fortune& y, unsigned long B, bool n) {
                const WValue wv = w_value(x, y, params, e);
                BigFloat z = wv.value * pow(sp.alpha, -static_cast<long>(B));
                if (n) z *= 1 - sp.alpha;
                return std::pair{z, BigFloat(wv.rel_err + (B + 64) * eps)};
            };

            std::deque<Node> queue{{f1, f2, 0, false}};
            std::unordered_set<std::string> seen{key(queue.front())};
            // Extra seeds, used only once the given pair's reachable T_k states run out.
            const auto extra = region_pairs(params, LemmaKind::Z, 4 * min_states);
            std::size_t next_seed = 0;
            rep.seeds = 1;
            const std::size_t cap = std::max<std::size_t>(min_states * 20, 2000);
            bool have_worst = false;
            BigFloat worst_err = 0;
            std::size_t visited = 0;
            while (rep.driver_states < min_states && visited < cap) {
                if (queue.empty()) {
                    if (next_seed == extra.size()) break;
                    Node seed{extra[next_seed].first, extra[next_seed].second, 0, false};
                    ++next_seed;
                    if (seen.insert(key(seed)).second) {
                        queue.push_back(std::move(seed));
                        ++rep.seeds;
                    }
                    continue;
                }
                Node s = std::move(queue.front());
                queue.pop_front();
                ++visited;
                const ScheduleRule rule = rg.classify(s.x, s.y);
                if (rule == ScheduleRule::Frozen || lf_eq(s.x, s.y, ell)) continue;

                const std::size_t start_min = rule == ScheduleRule::Straddle ? 2 : 1;
                std::vector<Path> paths;
                if (rule == ScheduleRule::BothHigh) {
                    for (Outcome o : {Outcome::Win, Outcome::Lose})
                        paths.push_back({step(s.x, o, params), step(s.y, o, params),
                                         o == Outcome::Win ? params.w : mpq_class(1 - params.w),
                                         1, false, o == Outcome::Win});
                } else {
                    enumerate_period(rg, s.x, s.y, start_min, rep.stop_bound, paths);
                }
                const unsigned long b_next = s.B + (rule == ScheduleRule::XLow ? 1 : 0);
                Accumulator acc;
                for (const auto& p : paths) {
                    rep.max_stop = std::max(rep.max_stop, p.steps);
                    const bool n_next = s.n || p.n_event;
                    auto [z, rel] = z_of(p.x, p.y, b_next, n_next);
                    acc.add(to_big(p.prob) * z, rel + 2 * eps);
                    Node child{p.x, p.y, b_next, n_next};
                    if (seen.insert(key(child)).second) queue.push_back(std::move(child));
                }
                rep.paths += paths.size();
                auto [z0, rel0] = z_of(s.x, s.y, s.B, s.n);
                const BigFloat err = acc.error() + abs(z0) * rel0;
                const BigFloat gap = acc.sum - z0;
                if (rep.max_stop > rep.stop_bound)
                    throw InequalityViolated("schedule gap exceeds L + 2 from " + s.x.to_string() +
                                             ", " + s.y.to_string());
                if (gap > tolerance_from(err))
                    throw InequalityViolated("Z fails to be a supermartingale at x = " +
                                             s.x.to_string() + ", y = " + s.y.to_string() +
                                             ", B = " + std::to_string(s.B));
                if (!have_worst || gap > rep.worst_slack) {
                    have_worst = true;
                    rep.worst_slack = gap;
                    rep.lhs = acc.sum;
                    rep.rhs = z0;
                    worst_err = err;
                }
                ++rep.driver_states;
            }
            rep.error_bound = worst_err;
            rep.tolerance = tolerance_from(worst_err);
            rep.passed = rep.driver_states >= min_states;
            break;
        }
    }
    return rep;
}

std::vector<std::pair<Fortune, Fortune>> region_pairs(const GameParams& params, LemmaKind lemma,
                                                      std::size_t count) {
    const EllSpec& ell = params.ell;
    const Regions rg{params};
    std::vector<Fortune> grid;
    std::unordered_set<FortuneKey, FortuneKeyHash> seen;
    for (long b = -4; b <= 4; ++b)
        for (long a = 0; a <= 32; ++a) {
            Fortune f{Dyadic(a).scaled(-5), Dyadic(b).scaled(-2)};
            if (!is_valid_fortune(f, ell)) continue;
            if (seen.insert(fortune_key(f, ell)).second) grid.push_back(std::move(f));
        }
    std::sort(grid.begin(), grid.end(),
              [&](const Fortune& u, const Fortune& v) { return lf_compare(u, v, ell) < 0; });

    auto fits = [&](const Fortune& f1, const Fortune& f2) {
        switch (lemma) {
            case LemmaKind::A: return !rg.low(f2);
            case LemmaKind::R:
            case LemmaKind::B: return rg.low(f1);
            case LemmaKind::C: return rg.low(f2) && !rg.low(f1) && rg.below_half_cap(f1);
            case LemmaKind::Z: return rg.classify(f1, f2) != ScheduleRule::Frozen;
        }
        return false;
    };
    std::vector<std::pair<Fortune, Fortune>> all;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (fits(grid[i], grid[j])) all.emplace_back(grid[i], grid[j]);
    if (all.size() <= count) return all;
    std::vector<std::pair<Fortune, Fortune>> picked;
    for (std::size_t i = 0; i < count; ++i) picked.push_back(all[i * all.size() / count]);
    return picked;
}

nlohmann::json MonteCarloResult::to_json() const {
    return {{"samples", samples},     {"split", split},       {"unabsorbed", unabsorbed},
            {"estimate", estimate},   {"std_error", std_error}, {"ci_lo", ci_lo},
            {"ci_hi", ci_hi}};
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::vector<Outcome> sample_word(const mpq_class& w, std::uint64_t seed, std::uint64_t index,
                                 std::size_t horizon) {
    const std::uint64_t thr = win_threshold(w);
    std::mt19937_64 gen(sample_seed(seed, index));
    std::vector<Outcome> word(horizon);
    for (auto& o : word) o = gen() < thr ? Outcome::Win : Outcome::Lose;
    return word;
}

MonteCarloResult monte_carlo_diff(const Fortune& f1, const Fortune& f2, const GameParams& params,
                                  std::size_t samples, std::size_t horizon, std::uint64_t seed) {
    const EllSpec& ell = params.ell;
    require_ordered(f1, f2, ell);
    if (samples == 0) throw PreconditionViolated("need at least one sample");
    const std::uint64_t thr = win_threshold(params.w);

    std::size_t split = 0, unabsorbed = 0;
    const long long n = static_cast<long long>(samples);
#pragma omp parallel for reduction(+ : split, unabsorbed) schedule(dynamic, 64)
    for (long long i = 0; i < n; ++i) {
        std::mt19937_64 gen(sample_seed(seed, static_cast<std::uint64_t>(i)));
        Fortune x = f1, y = f2;
        Absorption ax = absorbed(x, ell), ay = absorbed(y, ell);
        for (std::size_t k = 0; k < horizon; ++k) {
            if (ax != Absorption::Active && ay != Absorption::Active) break;
            const Outcome o = gen() < thr ? Outcome::Win : Outcome::Lose;
            if (ax == Absorption::Active) {
                x = step(x, o, params);
                ax = absorbed(x, ell);
            }
            if (ay == Absorption::Active) {
                y = step(y, o, params);
                ay = absorbed(y, ell);
            }
        }
        if (ax == Absorption::Active || ay == Absorption::Active)
            ++unabsorbed;
        else if (ax == Absorption::Goal && ay == Absorption::Ruin)
            ++split;
    }

    MonteCarloResult r;
    r.samples = samples;
    r.split = split;
    r.unabsorbed = unabsorbed;
    r.estimate = static_cast<double>(split) / static_cast<double>(samples);
    r.std_error = std::sqrt(r.estimate * (1 - r.estimate) / static_cast<double>(samples));
    r.ci_lo = std::max(0.0, r.estimate - 3 * r.std_error);
    r.ci_hi = std::min(1.0, r.estimate + 3 * r.std_error);
    return r;
}

void write_coupling_csv(std::ostream& os, const Fortune& f1, const Fortune& f2,
                        const GameParams& params, std::size_t samples, std::size_t horizon,
                        std::uint64_t seed) {
    const EllSpec& ell = params.ell;
    require_ordered(f1, f2, ell);
    const BigFloat e = w_exponent(params.w);
    os << "sample,step,outcome,x,y,diff,h,W\n";
    os.precision(17);
    for (std::size_t i = 0; i < samples; ++i) {
        const auto word = sample_word(params.w, seed, i, horizon);
        const CoupledRun run = coupled_run(f1, f2, word, params);
        for (const auto& s : run.states) {
            const HRatio h = h_ratio(s.x, s.y, params);
            os << i << ',' << s.k << ',';
            if (s.k > 0) os << (word[s.k - 1] == Outcome::Win ? 'W' : 'L');
            os << ',' << lf_approx(s.x, ell) << ',' << lf_approx(s.y, ell) << ','
               << lf_approx(s.x - s.y, ell) << ',' << h.value.convert_to<double>() << ','
               << w_value(s.x, s.y, params, e).value.convert_to<double>() << '\n';
            if (absorbed(s.x, ell) != Absorption::Active && absorbed(s.y, ell) != Absorption::Active)
                break;
        }
    }
}

}  // namespace boldplay
