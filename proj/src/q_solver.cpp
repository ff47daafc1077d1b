#include "boldplay/q_solver.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace boldplay {

namespace {

constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t kMaxSweeps = 200'000;

inline FixedProb mul_down(FixedProb x, std::uint64_t num, std::uint64_t den) {
    return x * num / den;
}

inline FixedProb mul_up(FixedProb x, std::uint64_t num, std::uint64_t den) {
    return (x * num + (den - 1)) / den;
}

FixedProb rational_to_fixed_down(const mpq_class& q) {
    if (sgn(q) <= 0) return 0;
    if (q >= 1) return kProbOne;
    mpz_class scaled = q.get_num();
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), kProbBits);
    mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
    std::uint64_t words[2] = {0, 0};  // scaled < 2^96
    mpz_export(words, nullptr, -1, sizeof(std::uint64_t), 0, 0, scaled.get_mpz_t());
    return (static_cast<FixedProb>(words[1]) << 64) | words[0];
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

mpq_class fixed_to_rational(FixedProb v) {
    const auto hi64 = static_cast<std::uint64_t>(v >> 64);
    const auto lo64 = static_cast<std::uint64_t>(v);
    mpz_class num;
    mpz_import(num.get_mpz_t(), 1, -1, sizeof(hi64), 0, 0, &hi64);
    num <<= 64;
    mpz_class low;
    mpz_import(low.get_mpz_t(), 1, -1, sizeof(lo64), 0, 0, &lo64);
    num += low;
    mpq_class q(num);
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), kProbBits);
    return q;
}

void Budget::validate() const {
    if (max_depth == 0 || max_states == 0 || sgn(target_width) <= 0)
        throw PreconditionViolated("budget fields must all be positive");
}

Budget Budget::scaled(std::size_t factor) const {
    Budget b = *this;
    b.max_depth *= factor;
    b.max_states *= factor;
    return b;
}

nlohmann::json QStats::to_json() const {
    return {{"states_explored", states}, {"expanded", expanded},   {"frontier", frontier},
            {"depth", depth},            {"sweeps", sweeps},       {"state_cap_hit", state_cap_hit},
            {"converged", converged},    {"runtime_ms", runtime_ms}};
}

StateTable::StateTable(GameParams params, SweepKernel kernel)
    : params_(std::move(params)), kernel_(kernel) {
    const mpz_class& num = params_.w.get_num();
    const mpz_class& den = params_.w.get_den();
    if (mpz_sizeinbase(den.get_mpz_t(), 2) > 31)
        throw PreconditionViolated("win probability denominator must be below 2^31, got " +
                                   params_.w.get_str());
    w_num_ = num.get_ui();
    w_den_ = den.get_ui();
}

std::size_t StateTable::intern(const Fortune& f) {
    FortuneKey key = fortune_key(f, params_.ell);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(fortunes_.size());
    index_.emplace(std::move(key), id);
    fortunes_.push_back(f);
    win_.push_back(id);
    lose_.push_back(id);
    depth_.push_back(kUnreached);
    switch (absorbed(f, params_.ell)) {
        case Absorption::Goal:
            kind_.push_back(Kind::Goal);
            lo_.push_back(kProbOne);
            hi_.push_back(kProbOne);
            break;
        case Absorption::Ruin:
            kind_.push_back(Kind::Ruin);
            lo_.push_back(0);
            hi_.push_back(0);
            break;
        case Absorption::Active:
            kind_.push_back(Kind::Frontier);
            lo_.push_back(0);
            hi_.push_back(kProbOne);
            break;
    }
    return id;
}

std::size_t StateTable::add_root(const Fortune& f) {
    require_valid_fortune(f, params_.ell);
    const std::size_t id = intern(f);
    if (std::find(roots_.begin(), roots_.end(), id) == roots_.end())
        roots_.push_back(static_cast<std::uint32_t>(id));
    return id;
}

void StateTable::expand_node(std::size_t id) {
    const Fortune f = fortunes_[id];
    const LinearForm s = stake(f, params_);
    const std::size_t up = intern(f + s);
    const std::size_t down = intern(f - s);
    win_[id] = static_cast<std::uint32_t>(up);
    lose_[id] = static_cast<std::uint32_t>(down);
    kind_[id] = Kind::Interior;
}

void StateTable::expand(const Budget& budget) {
    budget.validate();
    const Stopwatch clock;
    std::fill(depth_.begin(), depth_.end(), kUnreached);
    order_.clear();
    std::deque<std::uint32_t> queue;
    for (auto r : roots_) {
        depth_[r] = 0;
        queue.push_back(r);
    }
    std::size_t deepest = 0;
    while (!queue.empty()) {
        const std::uint32_t id = queue.front();
        queue.pop_front();
        order_.push_back(id);
        const std::uint32_t d = depth_[id];
        if (kind_[id] == Kind::Frontier && d < budget.max_depth) {
            if (fortunes_.size() + 2 <= budget.max_states) {
                expand_node(id);
            } else {
                stats_.state_cap_hit = true;
            }
        }
        if (kind_[id] != Kind::Interior) continue;
        deepest = std::max<std::size_t>(deepest, d);
        for (std::uint32_t child : {win_[id], lose_[id]}) {
            if (depth_[child] == kUnreached) {
                depth_[child] = d + 1;
                queue.push_back(child);
            }
        }
    }

    stats_.states = fortunes_.size();
    stats_.expanded = static_cast<std::size_t>(
        std::count(kind_.begin(), kind_.end(), Kind::Interior));
    stats_.frontier = static_cast<std::size_t>(
        std::count(kind_.begin(), kind_.end(), Kind::Frontier));
    stats_.depth = deepest;
    stats_.runtime_ms += clock.ms();
}

std::pair<std::size_t, std::size_t> StateTable::successors(std::size_t id) const {
    if (kind_.at(id) != Kind::Interior)
        throw PreconditionViolated("state " + std::to_string(id) + " is not expanded");
    return {win_[id], lose_[id]};
}

FixedProb StateTable::lower_update(std::size_t id) const {
    return mul_down(lo_[win_[id]], w_num_, w_den_) +
           mul_down(lo_[lose_[id]], w_den_ - w_num_, w_den_);
}

FixedProb StateTable::upper_update(std::size_t id) const {
    const FixedProb v = mul_up(hi_[win_[id]], w_num_, w_den_) +
                        mul_up(hi_[lose_[id]], w_den_ - w_num_, w_den_);
    return v > kProbOne ? kProbOne : v;
}

FixedProb StateTable::sweep_serial() {
    FixedProb change = 0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const std::uint32_t id = *it;
        if (kind_[id] != Kind::Interior) continue;
        const FixedProb nl = lower_update(id);
        const FixedProb nh = upper_update(id);
        if (nl > lo_[id]) {
            change = std::max(change, nl - lo_[id]);
            lo_[id] = nl;
        }
        if (nh < hi_[id]) {
            change = std::max(change, hi_[id] - nh);
            hi_[id] = nh;
        }
    }
    return change;
}

FixedProb StateTable::sweep_parallel() {
    const std::vector<FixedProb> old_lo = lo_;
    const std::vector<FixedProb> old_hi = hi_;
    const auto n = static_cast<std::ptrdiff_t>(fortunes_.size());
    FixedProb change = 0;
#pragma omp parallel
    {
        FixedProb local = 0;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            if (kind_[i] != Kind::Interior) continue;
            const FixedProb nl = mul_down(old_lo[win_[i]], w_num_, w_den_) +
                                 mul_down(old_lo[lose_[i]], w_den_ - w_num_, w_den_);
            FixedProb nh = mul_up(old_hi[win_[i]], w_num_, w_den_) +
                           mul_up(old_hi[lose_[i]], w_den_ - w_num_, w_den_);
            if (nh > kProbOne) nh = kProbOne;
            if (nl > old_lo[i]) {
                local = std::max(local, nl - old_lo[i]);
                lo_[i] = nl;
            }
            if (nh < old_hi[i]) {
                local = std::max(local, old_hi[i] - nh);
                hi_[i] = nh;
            }
        }
#pragma omp critical
        change = std::max(change, local);
    }
    return change;
}

void StateTable::refine(const Budget& budget) {
    budget.validate();
    const Stopwatch clock;
    FixedProb tol = rational_to_fixed_down(budget.target_width) >> 16;
    if (tol == 0) tol = 1;
    FixedProb change = 0;
    std::size_t sweeps = 0;
    do {
        change = kernel_ == SweepKernel::Parallel ? sweep_parallel() : sweep_serial();
        ++sweeps;
    } while (change > tol && sweeps < kMaxSweeps);
    if (kernel_ == SweepKernel::Parallel) {
        // sequential validation pass
        change = std::max(change, sweep_serial());
        ++sweeps;
    }
    stats_.sweeps += sweeps;
    stats_.converged = change <= tol;
    stats_.runtime_ms += clock.ms();
}

ProbInterval StateTable::interval(std::size_t id) const {
    return {fixed_to_rational(lo_.at(id)), fixed_to_rational(hi_.at(id))};
}

std::optional<std::size_t> StateTable::find(const Fortune& f) const {
    auto it = index_.find(fortune_key(f, params_.ell));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ProbInterval StateTable::interval(const Fortune& f) const {
    auto id = find(f);
    if (!id) return {};
    return interval(*id);
}

QResult q_bounds(const GameParams& params, const Fortune& f, const Budget& budget,
                 SweepKernel kernel) {
    StateTable table(params, kernel);
    const std::size_t root = table.add_root(f);
    table.solve(budget);
    return {table.interval(root), table.stats()};
}

ProbInterval q_near_goal(const GameParams& params, unsigned n, const ProbInterval& base) {
    mpq_class factor = 1;
    const mpq_class lose = 1 - params.w;
    for (unsigned i = 0; i < n; ++i) factor *= lose;
    return {1 - factor * (1 - base.lo), 1 - factor * (1 - base.hi)};
}

Fortune near_goal_fortune(unsigned n) {
    return LinearForm::one() - LinearForm::ell().scaled(-static_cast<long>(n));
}

nlohmann::json ConsistencyReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"n", r.n},
                       {"direct", boldplay::to_json(r.direct)},
                       {"mapped", boldplay::to_json(r.mapped)},
                       {"overlap", rational_string(r.overlap)},
                       {"overlap_float", r.overlap.get_d()}});
    }
    return arr;
}

ConsistencyReport q_consistency_check(const GameParams& params, unsigned n_max,
                                      const Budget& budget) {
    ConsistencyReport report;
    ProbInterval base;
    for (unsigned n = 0; n <= n_max; ++n) {
        const QResult direct = q_bounds(params, near_goal_fortune(n), budget);
        if (n == 0) base = direct.interval;
        ConsistencyRow row;
        row.n = n;
        row.direct = direct.interval;
        row.mapped = q_near_goal(params, n, base);
        row.overlap = std::min(row.direct.hi, row.mapped.hi) - std::max(row.direct.lo, row.mapped.lo);
        if (sgn(row.overlap) < 0)
            throw InconsistencyDetected(n, "direct [" + rational_string(row.direct.lo) + ", " +
                                               rational_string(row.direct.hi) + "] vs mapped [" +
                                               rational_string(row.mapped.lo) + ", " +
                                               rational_string(row.mapped.hi) + "]");
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace boldplay
