#pragma once

#include "boldplay/chain.hpp"
#include "boldplay/errors.hpp"
#include "boldplay/prob.hpp"

#include <gmpxx.h>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace boldplay {

/// Exploration limits for one solve. target_width also sets the sweep tolerance.
struct Budget {
    std::size_t max_depth = 64;
    std::size_t max_states = 4'000'000;
    mpq_class target_width{1, 1'000'000'000};

    void validate() const;
    /// Same budget with depth and state cap multiplied by `factor`.
    Budget scaled(std::size_t factor) const;
};

enum class SweepKernel { Serial, Parallel };

struct QStats {
    std::size_t states = 0;
    std::size_t expanded = 0;
    std::size_t frontier = 0;
    std::size_t depth = 0;  // deepest expanded layer
    std::size_t sweeps = 0;
    bool state_cap_hit = false;
    bool converged = false;
    double runtime_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Probability stored as an integer multiple of 2^-kProbBits.
using FixedProb = unsigned __int128;
inline constexpr unsigned kProbBits = 96;
inline constexpr FixedProb kProbOne = FixedProb(1) << kProbBits;

/**
 * Lazily expanded bold-play graph over exact fortunes with a certified
 * [lo, hi] bound on Q at every state.
 *
 * Absorbing states are pinned to [1,1] and [0,0]; unexpanded states keep
 * [0,1]. Sweeps apply Q(f) = w·Q(f + s) + (1 − w)·Q(f − s) with outward
 * rounding and never loosen a bound, so every value ever reported is a
 * valid enclosure and later calls only tighten it.
 */
class StateTable {
public:
    enum class Kind : std::uint8_t { Frontier, Interior, Goal, Ruin };

    explicit StateTable(GameParams params, SweepKernel kernel = SweepKernel::Serial);

    const GameParams& params() const noexcept { return params_; }

    /// Registers f as a query root (expansion starts from roots). Returns its id.
    std::size_t add_root(const Fortune& f);

    /// Breadth-first expansion from all roots up to the budget's depth and state cap.
    void expand(const Budget& budget);

    /// Sweeps until the largest per-sweep change drops below the budget tolerance.
    void refine(const Budget& budget);

    void solve(const Budget& budget) {
        expand(budget);
        refine(budget);
    }

    /// One Gauss-Seidel pass in reverse BFS order. Returns the largest change.
    FixedProb sweep_serial();
    /// One Jacobi pass, parallel over states. Returns the largest change.
    FixedProb sweep_parallel();

    ProbInterval interval(std::size_t id) const;
    ProbInterval interval(const Fortune& f) const;
    std::optional<std::size_t> find(const Fortune& f) const;

    std::size_t size() const noexcept { return fortunes_.size(); }
    const Fortune& fortune(std::size_t id) const { return fortunes_.at(id); }
    Kind kind(std::size_t id) const { return kind_.at(id); }
    std::size_t depth(std::size_t id) const { return depth_.at(id); }
    /// (win successor, lose successor); only for Interior states.
    std::pair<std::size_t, std::size_t> successors(std::size_t id) const;
    FixedProb lo_fixed(std::size_t id) const { return lo_.at(id); }
    FixedProb hi_fixed(std::size_t id) const { return hi_.at(id); }

    const QStats& stats() const noexcept { return stats_; }

private:
    std::size_t intern(const Fortune& f);
    void expand_node(std::size_t id);

    FixedProb lower_update(std::size_t id) const;
    FixedProb upper_update(std::size_t id) const;

    GameParams params_;
    SweepKernel kernel_;
    std::uint64_t w_num_ = 0;
    std::uint64_t w_den_ = 0;

    std::unordered_map<FortuneKey, std::uint32_t, FortuneKeyHash> index_;
    std::vector<Fortune> fortunes_;
    std::vector<Kind> kind_;
    std::vector<std::uint32_t> win_;
    std::vector<std::uint32_t> lose_;
    std::vector<std::uint32_t> depth_;
    std::vector<FixedProb> lo_;
    std::vector<FixedProb> hi_;
    std::vector<std::uint32_t> roots_;
    std::vector<std::uint32_t> order_;  // BFS order of the last expansion
    QStats stats_;
};

mpq_class fixed_to_rational(FixedProb v);

struct QResult {
    ProbInterval interval;
    QStats stats;
};

/// Certified enclosure of Q(f) under the given budget.
QResult q_bounds(const GameParams& params, const Fortune& f, const Budget& budget,
                 SweepKernel kernel = SweepKernel::Serial);

/// Enclosure of Q(1 − 2^-n·ℓ) from an enclosure of Q(1 − ℓ), via the closed form near the goal.
ProbInterval q_near_goal(const GameParams& params, unsigned n,
                         const ProbInterval& q_at_one_minus_ell);

class InconsistencyDetected : public InvariantViolated {
public:
    InconsistencyDetected(unsigned n, const std::string& detail)
        : InvariantViolated("closed form and direct bounds disagree at n = " + std::to_string(n) +
                            ": " + detail),
          n_(n) {}
    unsigned n() const noexcept { return n_; }

private:
    unsigned n_;
};

struct ConsistencyRow {
    unsigned n = 0;
    ProbInterval direct;
    ProbInterval mapped;
    mpq_class overlap;  // length of direct ∩ mapped, ≥ 0 when consistent
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    nlohmann::json to_json() const;
};

/**
 * Solves Q(1 − 2^-n·ℓ) independently for n = 0..n_max and checks each
 * against the closed form applied to the n = 0 enclosure. Throws
 * InconsistencyDetected on an empty intersection.
 */
ConsistencyReport q_consistency_check(const GameParams& params, unsigned n_max,
                                      const Budget& budget);

/// 1 − 2^-n·ℓ
Fortune near_goal_fortune(unsigned n);

}  // namespace boldplay
