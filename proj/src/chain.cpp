#include "boldplay/chain.hpp"

#include "boldplay/errors.hpp"

#include <ostream>

namespace boldplay {

GameParams::GameParams(EllSpec ell_, mpq_class w_) : ell(std::move(ell_)), w(std::move(w_)) {
    w.canonicalize();
    if (sgn(w) <= 0 || cmp(w, mpq_class(1, 2)) >= 0)
        throw PreconditionViolated("win probability must lie in (0, 1/2), got " + w.get_str());
}

void GameParams::require_theorem_ready() const {
    if (ell.is_rational()) throw RationalEll();
    if (!ell.theorem_ready()) throw PreconditionViolated("stake cap must be < 1/2");
}

LinearForm stake(const Fortune& f, const GameParams& params) {
    const EllSpec& ell = params.ell;
    LinearForm best = LinearForm::ell();
    if (lf_compare(f, best, ell) < 0) best = f;
    LinearForm upper = LinearForm::one() - f;
    if (lf_compare(upper, best, ell) < 0) best = std::move(upper);
    return best;
}

Fortune step(const Fortune& f, Outcome o, const GameParams& params) {
    const LinearForm s = stake(f, params);
    return o == Outcome::Win ? f + s : f - s;
}

std::vector<Fortune> trajectory(const Fortune& f0, std::span<const Outcome> outcomes,
                                const GameParams& params) {
    std::vector<Fortune> path;
    path.reserve(outcomes.size() + 1);
    path.push_back(f0);
    for (Outcome o : outcomes) path.push_back(step(path.back(), o, params));
    return path;
}

Absorption absorbed(const Fortune& f, const EllSpec& ell) {
    if (lf_sign(f, ell) == 0) return Absorption::Ruin;
    if (lf_compare(f, LinearForm::one(), ell) == 0) return Absorption::Goal;
    return Absorption::Active;
}

bool is_valid_fortune(const Fortune& f, const EllSpec& ell) {
    return lf_sign(f, ell) >= 0 && lf_compare(f, LinearForm::one(), ell) <= 0;
}

void require_valid_fortune(const Fortune& f, const EllSpec& ell, const char* what) {
    if (!is_valid_fortune(f, ell))
        throw PreconditionViolated(std::string(what) + " " + f.to_string() +
                                   " is outside [0, 1]");
}

std::string word_to_string(std::span<const Outcome> word) {
    std::string s;
    s.reserve(word.size());
    for (Outcome o : word) s.push_back(o == Outcome::Win ? 'W' : 'L');
    return s;
}

std::vector<Outcome> word_from_string(std::string_view text) {
    std::vector<Outcome> word;
    word.reserve(text.size());
    for (char ch : text) {
        if (ch == 'W' || ch == 'w' || ch == '1')
            word.push_back(Outcome::Win);
        else if (ch == 'L' || ch == 'l' || ch == '0')
            word.push_back(Outcome::Lose);
        else
            throw ParseError("outcomes", std::string("unexpected character '") + ch + "'");
    }
    return word;
}

void write_trace_csv(std::ostream& os, const Fortune& f0, std::span<const Outcome> outcomes,
                     const GameParams& params) {
    const auto path = trajectory(f0, outcomes, params);
    os << "step,outcome,p_num,p_exp,q_num,q_exp,float_approx\n";
    os.precision(17);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& f = path[k];
        os << k << ',';
        if (k > 0) os << (outcomes[k - 1] == Outcome::Win ? 'W' : 'L');
        os << ',' << f.p.numerator().get_str() << ',' << f.p.exponent() << ','
           << f.q.numerator().get_str() << ',' << f.q.exponent() << ','
           << lf_approx(f, params.ell) << '\n';
    }
}

}  // namespace boldplay
