#pragma once

#include "boldplay/chain.hpp"
#include "boldplay/errors.hpp"

#include <gmpxx.h>
#include <json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace boldplay {

/// f = 2^-c·(a + b·ℓ) with c minimal.
struct AlgebraicForm {
    mpz_class a;
    mpz_class b;
    unsigned long c = 0;

    LinearForm to_linear_form() const;
    nlohmann::json to_json() const;
};

/// Unique (a, b, c) for irrational ℓ. Throws RationalEll otherwise.
AlgebraicForm canonical_form(const LinearForm& f, const EllSpec& ell);

/// Which necessary condition for membership in S ∩ (1 − ℓ, 1] failed.
enum class ObstructionTag {
    GoalAbsorbing,  // f = 1 never moves again, and 1 ≠ 1 − ℓ
    NoDyadicPart,   // minimal exponent c is 0, so no representation has c ≥ 1 with a or b odd
    ConstantBelowTwo,  // the only admissible representation has a < 2
};

std::string to_string(ObstructionTag tag);

struct NotInSCertificate {
    LinearForm fortune;
    AlgebraicForm form;
    ObstructionTag violated;

    nlohmann::json to_json() const;
};

/**
 * Shortest outcome word whose bold-play trajectory from f hits 1 − ℓ exactly,
 * searched breadth-first over exact states up to max_depth steps.
 * std::nullopt only means "no witness within max_depth".
 */
std::optional<std::vector<Outcome>> search_hit(const GameParams& params, const Fortune& f,
                                               std::size_t max_depth);

/**
 * Algebraic proof that f ∉ S, for f ∈ (1 − ℓ, 1].
 *
 * Every point of S above 1 − ℓ can be written 2^-c(a + bℓ) with c ≥ 1,
 * a ≥ 2 and a or b odd. With ℓ irrational that representation must be the
 * canonical one, so the certificate fires when the canonical form has c = 0
 * or a < 2. Returns std::nullopt when no conclusion follows.
 * Throws PreconditionViolated unless f > 1 − ℓ, RationalEll for rational ℓ.
 */
std::optional<NotInSCertificate> not_in_s_certificate(const Fortune& f, const EllSpec& ell);

struct InS {
    std::vector<Outcome> witness;
};
struct NotInS {
    NotInSCertificate certificate;
};
struct Unknown {
    std::size_t search_depth;
};

using MembershipVerdict = std::variant<InS, NotInS, Unknown>;

/// Witness search first, then the algebraic obstruction, else Unknown.
MembershipVerdict decide_membership(const GameParams& params, const Fortune& f,
                                    std::size_t max_depth);

nlohmann::json to_json(const MembershipVerdict& v);

struct CounterexamplePoint {
    unsigned long m = 0;
    unsigned long d = 0;
    unsigned long n = 0;
    Fortune f0;
    /// From f0 − ℓ: Lose^(n−1) then Win^(d+m−1), ending exactly at 1 − ℓ.
    std::vector<Outcome> witness;
    NotInSCertificate upper_certificate;  // for f0 + ℓ
    /// 2^-d(1 − mℓ) + nℓ ∈ (1 − 2ℓ, 1 − ℓ)
    bool window_with_m = false;
    /// 2^-d(1 − ℓ) + nℓ ∈ (1 − 2ℓ, 1 − ℓ), the condition as literally printed
    bool window_literal = false;

    nlohmann::json to_json(const EllSpec& ell) const;
};

class ConstructionFailed : public Error {
public:
    explicit ConstructionFailed(const std::string& what) : Error(what) {}
};

/**
 * Lexicographically smallest (m, d, n) with 1 − mℓ ∈ (ℓ, 2ℓ],
 * 2^-d(1 − mℓ) < 1 − 2ℓ and f0 = 2^-d(1 − mℓ) + nℓ ∈ (ℓ, 1 − ℓ).
 * The witness for f0 − ℓ ∈ S is replayed and the f0 + ℓ certificate checked
 * before returning.
 */
CounterexamplePoint construct_counterexample(const EllSpec& ell, unsigned long max_d = 64);

}  // namespace boldplay
