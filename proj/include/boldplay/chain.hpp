#pragma once

#include "boldplay/ell.hpp"
#include "boldplay/linear_form.hpp"

#include <gmpxx.h>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace boldplay {

/// Stake cap plus the (subfair) win probability of a single bet.
struct GameParams {
    EllSpec ell;
    mpq_class w;

    /// Validates 0 < w < 1/2.
    GameParams(EllSpec ell_, mpq_class w_);

    /// Throws PreconditionViolated unless ℓ is irrational and ℓ < 1/2.
    void require_theorem_ready() const;
};

/// A fortune is just its exact value.
using Fortune = LinearForm;

enum class Outcome : unsigned char { Lose = 0, Win = 1 };

enum class Absorption { Active, Goal, Ruin };

/// Bold stake min{ℓ, f, 1 − f}. Ties resolve to ℓ first, then f.
LinearForm stake(const Fortune& f, const GameParams& params);

Fortune step(const Fortune& f, Outcome o, const GameParams& params);

/// Fortunes along a fixed outcome word; result has outcomes.size() + 1 entries.
std::vector<Fortune> trajectory(const Fortune& f0, std::span<const Outcome> outcomes,
                                const GameParams& params);

Absorption absorbed(const Fortune& f, const EllSpec& ell);

/// 0 ≤ f ≤ 1.
bool is_valid_fortune(const Fortune& f, const EllSpec& ell);
void require_valid_fortune(const Fortune& f, const EllSpec& ell, const char* what = "fortune");

/// Outcome words as "W"/"L" strings.
std::string word_to_string(std::span<const Outcome> word);
std::vector<Outcome> word_from_string(std::string_view text);

/**
 * Writes a trajectory as CSV with columns
 * step,outcome,p_num,p_exp,q_num,q_exp,float_approx. Row 0 has an empty outcome.
 */
void write_trace_csv(std::ostream& os, const Fortune& f0, std::span<const Outcome> outcomes,
                     const GameParams& params);

}  // namespace boldplay
