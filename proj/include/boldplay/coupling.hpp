#pragma once

#include "boldplay/chain.hpp"
#include "boldplay/errors.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <gmpxx.h>
#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boldplay {

/// About 100 significant decimal digits.
using BigFloat = boost::multiprecision::mpfr_float_100;

/// Unit roundoff of BigFloat.
BigFloat big_epsilon();

BigFloat to_big(const mpq_class& q);
BigFloat ell_big(const EllSpec& ell);
BigFloat lf_big(const LinearForm& x, const EllSpec& ell);
std::string big_string(const BigFloat& v, int digits = 30);

/// The exponent −log2(1 − w), in (0, 1) for w < 1/2.
BigFloat w_exponent(const mpq_class& w);

/// h(f, f*) = (s(f) − s(f*))/(f − f*), or 1 when f = f*.
struct HRatio {
    LinearForm numerator;    // s(f) − s(f*)
    LinearForm denominator;  // f − f*
    bool equal = false;
    int half_sign = 0;  // exact sign of h − 1/2
    BigFloat value;
};

HRatio h_ratio(const Fortune& f, const Fortune& fstar, const GameParams& params);

/// w(1 + x)^e + (1 − w)(1 − x)^e with e = −log2(1 − w), for x ∈ [−1, 1].
BigFloat g_func(const mpq_class& w, const BigFloat& x);

/// diff^{−log2(1 − w)}; 0 at diff = 0.
BigFloat w_statistic(const BigFloat& diff, const mpq_class& w);

struct StoppingParams {
    unsigned long L = 0;
    BigFloat g_half;
    BigFloat alpha;

    nlohmann::json to_json() const;
};

/// L = ⌊1 + (1 − 2ℓ)/ℓ⌋ exactly, α = 1 − (1 − g(1/2))(1 − w)^{2L}.
StoppingParams stopping_params(const GameParams& params);

struct CoupledState {
    Fortune x;
    Fortune y;
    std::size_t k = 0;
};

struct CoupledRun {
    std::vector<CoupledState> states;
    std::size_t ordering_violations = 0;  // X_k < Y_k
    std::size_t doubling_violations = 0;  // X_k − Y_k > 2^k (f1 − f2)
};

/// Both gamblers see the same outcomes. Requires f2 ≤ f1.
CoupledRun coupled_run(const Fortune& f1, const Fortune& f2, std::span<const Outcome> outcomes,
                       const GameParams& params);

enum class ScheduleRule { BothHigh = 1, XLow = 2, Straddle = 3, Frozen = 4 };

struct ScheduleState {
    std::size_t T = 0;
    unsigned long B = 0;
    bool n_reduced = false;  // N_k = 1 − α rather than 1
    Fortune x;
    Fortune y;
    BigFloat Z;
    std::optional<ScheduleRule> next_rule;  // rule that produced T_{k+1}
};

/**
 * T_0 = 0, T_1, ... along a fixed outcome word, stopping at the first T_k
 * whose successor would need outcomes past the end of the word, or after a
 * frozen (rule 4) state.
 */
std::vector<ScheduleState> schedule(const Fortune& f1, const Fortune& f2,
                                    std::span<const Outcome> outcomes, const GameParams& params);

enum class LemmaKind { A, R, B, C, Z };

std::string to_string(LemmaKind k);
LemmaKind lemma_from_string(const std::string& s);

class HypothesisViolated : public PreconditionViolated {
public:
    using PreconditionViolated::PreconditionViolated;
};

class InequalityViolated : public InvariantViolated {
public:
    using InvariantViolated::InvariantViolated;
};

struct LemmaReport {
    LemmaKind lemma = LemmaKind::A;
    Fortune f1;
    Fortune f2;
    std::size_t paths = 0;           // distinct stopped outcome prefixes
    std::size_t max_stop = 0;        // largest stopping time seen
    std::size_t stop_bound = 0;      // L, L + 1 or L + 2 (1 for A)
    BigFloat lhs;                    // the expectation
    BigFloat rhs;                    // W0, αW0 or Z_k
    BigFloat error_bound;            // tracked rounding error of lhs − rhs
    BigFloat tolerance;              // error_bound + 1e-10
    bool equality = false;           // A asserts equality, the rest ≤
    std::size_t driver_states = 0;   // Z only: nontrivial T_k states checked
    std::size_t seeds = 0;           // Z only: start pairs the driver set grew from
    BigFloat worst_slack;            // Z only: max over states of lhs − rhs (scaled)
    bool passed = false;

    nlohmann::json to_json() const;
};

/**
 * Enumerates every outcome prefix up to the lemma's stopping time with exact
 * fortunes and forms the exact finite expectation in BigFloat.
 *
 * Throws HypothesisViolated outside the lemma's region and InequalityViolated
 * when the inequality (or the stopping bound) fails beyond tolerance.
 * For Z, (f1, f2) seeds a breadth-first driver set of at least min_states
 * nontrivial T_k states and every one is checked. When the pair's reachable
 * states run out first, further seeds come from region_pairs.
 */
LemmaReport exact_supermartingale_check(const Fortune& f1, const Fortune& f2,
                                        const GameParams& params, LemmaKind lemma,
                                        std::size_t min_states = 100);

/// Deterministic sample pairs inside the hypothesis region of a lemma (any non-frozen pair for Z).
std::vector<std::pair<Fortune, Fortune>> region_pairs(const GameParams& params, LemmaKind lemma,
                                                      std::size_t count = 6);

struct MonteCarloResult {
    std::size_t samples = 0;
    std::size_t split = 0;       // X absorbed at 1 and Y at 0
    std::size_t unabsorbed = 0;  // either chain still active at the horizon
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;  // estimate ± 3 standard errors, clipped to [0, 1]
    double ci_hi = 0.0;

    nlohmann::json to_json() const;
};

/// 64-bit substream seed for sample i; independent of thread count.
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

/// Outcome word of a sample drawn from its substream.
std::vector<Outcome> sample_word(const mpq_class& w, std::uint64_t seed, std::uint64_t index,
                                 std::size_t horizon);

/// Coupled sampling estimate of Q(f1) − Q(f2) = P(X ends at 1, Y ends at 0).
MonteCarloResult monte_carlo_diff(const Fortune& f1, const Fortune& f2, const GameParams& params,
                                  std::size_t samples, std::size_t horizon, std::uint64_t seed);

/// sample,step,outcome,x,y,diff,h,W rows for the first `samples` coupled runs.
void write_coupling_csv(std::ostream& os, const Fortune& f1, const Fortune& f2,
                        const GameParams& params, std::size_t samples, std::size_t horizon,
                        std::uint64_t seed);

}  // namespace boldplay
