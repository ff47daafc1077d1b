#include "boldplay/reachability.hpp"

#include <algorithm>
#include <unordered_map>

namespace boldplay {

namespace {

mpz_class shift_left(const mpz_class& v, unsigned long k) {
    mpz_class r;
    mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), k);
    return r;
}

bool in_open(const LinearForm& x, const LinearForm& lo, const LinearForm& hi, const EllSpec& ell) {
    return lf_compare(x, lo, ell) > 0 && lf_compare(x, hi, ell) < 0;
}

}  // namespace

LinearForm AlgebraicForm::to_linear_form() const {
    return {Dyadic(a, c), Dyadic(b, c)};
}

nlohmann::json AlgebraicForm::to_json() const {
    return {{"a", a.get_str()}, {"b", b.get_str()}, {"c", c}};
}

AlgebraicForm canonical_form(const LinearForm& f, const EllSpec& ell) {
    if (ell.is_rational()) throw RationalEll();
    AlgebraicForm out;
    out.c = std::max(f.p.exponent(), f.q.exponent());
    out.a = shift_left(f.p.numerator(), out.c - f.p.exponent());
    out.b = shift_left(f.q.numerator(), out.c - f.q.exponent());
    return out;
}

std::string to_string(ObstructionTag tag) {
    switch (tag) {
        case ObstructionTag::GoalAbsorbing: return "goal_absorbing";
        case ObstructionTag::NoDyadicPart: return "c_zero";
        case ObstructionTag::ConstantBelowTwo: return "a_below_2";
    }
    return "unknown";
}

nlohmann::json NotInSCertificate::to_json() const {
    return {{"fortune", lf_to_json(fortune)},
            {"fortune_text", fortune.to_string()},
            {"form", form.to_json()},
            {"violated", boldplay::to_string(violated)}};
}

std::optional<std::vector<Outcome>> search_hit(const GameParams& params, const Fortune& f,
                                               std::size_t max_depth) {
    const EllSpec& ell = params.ell;
    require_valid_fortune(f, ell);
    const LinearForm target = LinearForm::one() - LinearForm::ell();

    struct Node {
        Fortune fortune;
        std::size_t parent;
        Outcome via;
    };
    std::vector<Node> nodes{{f, 0, Outcome::Lose}};
    std::unordered_map<FortuneKey, std::size_t, FortuneKeyHash> seen;
    seen.emplace(fortune_key(f, ell), 0);

    auto unwind = [&](std::size_t id) {
        std::vector<Outcome> word;
        while (id != 0) {
            word.push_back(nodes[id].via);
            id = nodes[id].parent;
        }
        std::reverse(word.begin(), word.end());
        return word;
    };

    if (lf_eq(f, target, ell)) return std::vector<Outcome>{};

    std::size_t layer_begin = 0;
    for (std::size_t depth = 0; depth < max_depth; ++depth) {
        const std::size_t layer_end = nodes.size();
        if (layer_begin == layer_end) break;
        for (std::size_t id = layer_begin; id < layer_end; ++id) {
            if (absorbed(nodes[id].fortune, ell) != Absorption::Active) continue;
            for (Outcome o : {Outcome::Lose, Outcome::Win}) {
                Fortune next = step(nodes[id].fortune, o, params);
                auto [it, fresh] = seen.emplace(fortune_key(next, ell), nodes.size());
                if (!fresh) continue;
                const bool hit = lf_eq(next, target, ell);
                nodes.push_back({std::move(next), id, o});
                if (hit) return unwind(nodes.size() - 1);
            }
        }
        layer_begin = layer_end;
    }
    return std::nullopt;
}

// S ∩ (1 − ℓ, 1] is the relevant slice; the closed upper piece of the
// boundary region is [1 − ℓ, 1], and 1 − ℓ itself is excluded by the precondition.
std::optional<NotInSCertificate> not_in_s_certificate(const Fortune& f, const EllSpec& ell) {
    if (ell.is_rational()) throw RationalEll();
    const LinearForm boundary = LinearForm::one() - LinearForm::ell();
    if (lf_compare(f, boundary, ell) <= 0)
        throw PreconditionViolated("certificate needs f > 1 - ell, got " + f.to_string());
    if (lf_compare(f, LinearForm::one(), ell) > 0)
        throw PreconditionViolated("fortune " + f.to_string() + " exceeds 1");

    NotInSCertificate cert{f, canonical_form(f, ell), ObstructionTag::GoalAbsorbing};
    if (lf_eq(f, LinearForm::one(), ell)) return cert;
    if (cert.form.c == 0) {
        cert.violated = ObstructionTag::NoDyadicPart;
        return cert;
    }
    if (cert.form.a < 2) {
        cert.violated = ObstructionTag::ConstantBelowTwo;
        return cert;
    }
    return std::nullopt;
}

MembershipVerdict decide_membership(const GameParams& params, const Fortune& f,
                                    std::size_t max_depth) {
    if (auto w = search_hit(params, f, max_depth)) return InS{std::move(*w)};
    const EllSpec& ell = params.ell;
    if (ell.is_irrational() &&
        lf_compare(f, LinearForm::one() - LinearForm::ell(), ell) > 0) {
        if (auto cert = not_in_s_certificate(f, ell)) return NotInS{std::move(*cert)};
    }
    return Unknown{max_depth};
}

nlohmann::json to_json(const MembershipVerdict& v) {
    return std::visit(
        [](const auto& x) -> nlohmann::json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, InS>)
                return {{"verdict", "in_s"},
                        {"witness", word_to_string(x.witness)},
                        {"witness_length", x.witness.size()}};
            else if constexpr (std::is_same_v<T, NotInS>)
                return {{"verdict", "not_in_s"}, {"certificate", x.certificate.to_json()}};
            else
                return {{"verdict", "unknown"}, {"search_depth", x.search_depth}};
        },
        v);
}

nlohmann::json CounterexamplePoint::to_json(const EllSpec& ell) const {
    return {{"ell", ell.to_string()},
            {"m", m},
            {"d", d},
            {"n", n},
            {"f0", lf_to_json(f0)},
            {"f0_text", f0.to_string()},
            {"f0_float", lf_approx(f0, ell)},
            {"witness_start", lf_to_json(f0 - LinearForm::ell())},
            {"witness", word_to_string(witness)},
            {"witness_length", witness.size()},
            {"upper_certificate", upper_certificate.to_json()},
            {"window_with_m", window_with_m},
            {"window_literal", window_literal}};
}

CounterexamplePoint construct_counterexample(const EllSpec& ell, unsigned long max_d) {
    if (ell.is_rational()) throw RationalEll();
    if (!ell.theorem_ready()) throw PreconditionViolated("stake cap must be < 1/2");
    // w plays no role in reachability; any admissible value will do.
    const GameParams params(ell, mpq_class(1, 4));
    const LinearForm one = LinearForm::one();
    const LinearForm el = LinearForm::ell();
    const LinearForm lo_window = one - el.doubled();
    const LinearForm hi_window = one - el;

    unsigned long m = 1;
    LinearForm base = one - el;
    while (!(lf_compare(base, el, ell) > 0 && lf_compare(base, el.doubled(), ell) <= 0)) {
        if (lf_compare(base, el, ell) <= 0)
            throw ConstructionFailed("no m with 1 - m*ell in (ell, 2*ell]");
        ++m;
        base -= el;
    }

    for (unsigned long d = 1; d <= max_d; ++d) {
        const LinearForm x = base.scaled(-static_cast<long>(d));
        if (lf_compare(x, lo_window, ell) >= 0) continue;
        // f0 − ℓ must stay a fortune, so n ≥ 1; beyond 1/ℓ + 1 the sum leaves [0, 1].
        const unsigned long n_max = static_cast<unsigned long>(1.0 / ell.approx()) + 2;
        for (unsigned long n = 1; n <= n_max; ++n) {
            const LinearForm nl{Dyadic(0), Dyadic(static_cast<long>(n))};
            LinearForm f0 = x + nl;
            if (!in_open(f0, el, hi_window, ell)) continue;

            CounterexamplePoint pt;
            pt.m = m;
            pt.d = d;
            pt.n = n;
            pt.f0 = f0;
            pt.window_with_m = in_open(f0, lo_window, hi_window, ell);
            pt.window_literal =
                in_open((one - el).scaled(-static_cast<long>(d)) + nl, lo_window, hi_window, ell);
            pt.witness.assign(n - 1, Outcome::Lose);
            pt.witness.insert(pt.witness.end(), d + m - 1, Outcome::Win);

            const auto path = trajectory(f0 - el, pt.witness, params);
            if (!lf_eq(path.back(), hi_window, ell))
                throw InvariantViolated("witness from f0 - ell ends at " +
                                        path.back().to_string() + " instead of 1 - ell");
            auto cert = not_in_s_certificate(f0 + el, ell);
            if (!cert)
                throw InvariantViolated("algebraic obstruction did not fire at f0 + ell = " +
                                        (f0 + el).to_string());
            pt.upper_certificate = std::move(*cert);
            return pt;
        }
    }
    throw ConstructionFailed("d_exhausted: no (d, n) with d <= " + std::to_string(max_d));
}

}  // namespace boldplay
