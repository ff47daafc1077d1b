#pragma once

#include "boldplay/chain.hpp"
#include "boldplay/errors.hpp"
#include "boldplay/prob.hpp"
#include "boldplay/q_solver.hpp"
#include "boldplay/reachability.hpp"

#include <gmpxx.h>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace boldplay {

/**
 * Proof that staking s(f) − ε once and then playing boldly beats bold play at f:
 * lhs encloses w·Q(f + ℓ − ε) + (1 − w)·Q(f − ℓ + ε), rhs encloses Q(f), and
 * margin = lhs.lo − rhs.hi > 0.
 */
struct ImprovementCertificate {
    Fortune f;
    Dyadic epsilon;
    ProbInterval lhs;
    ProbInterval rhs;
    mpq_class margin;
    Budget budget;
    QStats stats;

    nlohmann::json to_json(const EllSpec& ell) const;
};

nlohmann::json budget_to_json(const Budget& b);

/// Outcome of one verification attempt, certified or not.
struct ImprovementAttempt {
    Fortune f;
    Dyadic epsilon;
    ProbInterval lhs;
    ProbInterval rhs;
    Budget budget;
    QStats stats;

    /// lhs.lo − rhs.hi; positive means certified.
    mpq_class margin() const { return lhs.lo - rhs.hi; }
    /// lhs.hi < rhs.lo: the deviation is certifiably worse at this (f, ε).
    bool refuted() const { return lhs.hi < rhs.lo; }
    bool certified() const { return sgn(margin()) > 0; }

    ImprovementCertificate certificate() const;
    nlohmann::json to_json() const;
};

/// Computes both sides of the improvement inequality at (f, ε). Requires f ∈ (ℓ, 1 − ℓ), 0 < ε < ℓ.
ImprovementAttempt evaluate_improvement(const GameParams& params, const Fortune& f,
                                        const Dyadic& epsilon, const Budget& budget,
                                        SweepKernel kernel = SweepKernel::Serial);

/// Certificate iff the enclosures separate strictly. std::nullopt is "inconclusive", not a refutation.
std::optional<ImprovementCertificate> verify_improvement(const GameParams& params, const Fortune& f,
                                                         const Dyadic& epsilon,
                                                         const Budget& budget,
                                                         SweepKernel kernel = SweepKernel::Serial);

/// ε = 2^-k for k in [first, last].
std::vector<unsigned> epsilon_exponents(unsigned first = 4, unsigned last = 24);

struct SearchOptions {
    std::vector<unsigned> epsilon_exponents = boldplay::epsilon_exponents();
    Budget budget{80, 2'000'000, mpq_class("1/1000000000000")};
    /// Budget factors tried in order at each ε while the enclosures overlap.
    std::vector<std::size_t> escalation{1, 2};
    SweepKernel kernel = SweepKernel::Serial;
};

class SearchExhausted : public Error {
public:
    SearchExhausted(std::vector<ImprovementAttempt> attempts, const std::string& what)
        : Error(what), attempts_(std::move(attempts)) {}
    const std::vector<ImprovementAttempt>& attempts() const noexcept { return attempts_; }

private:
    std::vector<ImprovementAttempt> attempts_;
};

struct ImprovementSearch {
    CounterexamplePoint point;
    ImprovementCertificate certificate;
    std::vector<ImprovementAttempt> attempts;
};

/**
 * Counterexample point f0, then f = f0 − 2^-k over the ε grid with escalating
 * budgets. Attempts that are refuted outright skip escalation.
 * Throws SearchExhausted (carrying every attempt) when nothing certifies.
 */
ImprovementSearch find_improvement(const GameParams& params, const SearchOptions& options = {});

struct HpsReport {
    Fortune f;
    Dyadic delta;
    ProbInterval bold;       // Q(1/2 − δ)
    ProbInterval deviation;  // w·Q(f + ℓ − δ) + (1 − w)·Q(f − ℓ + δ)
    QStats stats;

    bool deviation_better() const { return deviation.lo > bold.hi; }
    bool bold_better() const { return bold.lo > deviation.hi; }
    nlohmann::json to_json(const EllSpec& ell) const;
};

/// Requires 1/4 < ℓ < 1/3 and 0 ≤ δ ≤ 1/2 − ℓ. δ = 0 yields identical enclosures.
HpsReport hps_demo(const GameParams& params, const Dyadic& delta, const Budget& budget);

enum class ScalingSide { Below, Above };

std::string to_string(ScalingSide side);
ScalingSide scaling_side_from_string(const std::string& s);

struct ScalingRow {
    unsigned k = 0;  // ε = 2^-k
    Dyadic epsilon;
    ProbInterval delta;  // Q(f) − Q(f − ε), or Q(f) − Q(f − 2ε) above
    ProbInterval ratio;  // delta / (1 − w)^k
};

struct ScalingDiagnostic {
    Fortune base;
    ScalingSide side = ScalingSide::Below;
    std::vector<ScalingRow> rows;
    QStats stats;

    nlohmann::json to_json(const EllSpec& ell) const;
    /// k,epsilon,delta_lo,delta_hi,ratio_lo,ratio_hi (floats)
    void write_csv(std::ostream& os) const;
};

/**
 * Certified differences of Q at f against f − ε (below) or f − 2ε (above),
 * normalized by (1 − w)^k = ε^{-log2(1 − w)}. Exponents must be strictly increasing.
 */
ScalingDiagnostic scaling_diagnostic(const GameParams& params, const Fortune& f, ScalingSide side,
                                     const std::vector<unsigned>& exponents, const Budget& budget);

}  // namespace boldplay
