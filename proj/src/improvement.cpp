#include "boldplay/improvement.hpp"

#include <algorithm>
#include <ostream>

namespace boldplay {

namespace {

void require_interior(const Fortune& f, const EllSpec& ell, const char* what) {
    const LinearForm el = LinearForm::ell();
    if (!(lf_compare(f, el, ell) > 0 && lf_compare(f, LinearForm::one() - el, ell) < 0))
        throw PreconditionViolated(std::string(what) + " " + f.to_string() +
                                   " must lie strictly between ell and 1 - ell");
}

mpq_class clip_zero(const mpq_class& v) { return sgn(v) < 0 ? mpq_class(0) : v; }

/// Enclosure of Q(a) − Q(b) for a ≥ b; Q is nondecreasing so the difference is ≥ 0.
ProbInterval difference(const ProbInterval& a, const ProbInterval& b) {
    return {clip_zero(a.lo - b.hi), clip_zero(a.hi - b.lo)};
}

}  // namespace

nlohmann::json budget_to_json(const Budget& b) {
    return {{"max_depth", b.max_depth},
            {"max_states", b.max_states},
            {"target_width", rational_string(b.target_width)}};
}

ImprovementCertificate ImprovementAttempt::certificate() const {
    if (!certified()) throw InvariantViolated("attempt does not separate the enclosures");
    return {f, epsilon, lhs, rhs, margin(), budget, stats};
}

nlohmann::json ImprovementAttempt::to_json() const {
    return {{"f", lf_to_json(f)},
            {"f_text", f.to_string()},
            {"epsilon", epsilon.to_string()},
            {"lhs", boldplay::to_json(lhs)},
            {"rhs", boldplay::to_json(rhs)},
            {"margin", rational_string(margin())},
            {"margin_float", margin().get_d()},
            {"status", certified() ? "certified" : refuted() ? "refuted" : "inconclusive"},
            {"budget", budget_to_json(budget)},
            {"stats", stats.to_json()}};
}

nlohmann::json ImprovementCertificate::to_json(const EllSpec& ell) const {
    return {{"f", lf_to_json(f)},
            {"f_text", f.to_string()},
            {"f_float", lf_approx(f, ell)},
            {"epsilon", epsilon.to_string()},
            {"lhs", boldplay::to_json(lhs)},
            {"rhs", boldplay::to_json(rhs)},
            {"margin", rational_string(margin)},
            {"margin_float", margin.get_d()},
            {"budget", budget_to_json(budget)},
            {"stats", stats.to_json()}};
}

ImprovementAttempt evaluate_improvement(const GameParams& params, const Fortune& f,
                                        const Dyadic& epsilon, const Budget& budget,
                                        SweepKernel kernel) {
    const EllSpec& ell = params.ell;
    budget.validate();
    require_interior(f, ell, "fortune");
    const LinearForm eps = LinearForm::constant(epsilon);
    if (epsilon.sign() <= 0 || lf_compare(eps, LinearForm::ell(), ell) >= 0)
        throw PreconditionViolated("epsilon " + epsilon.to_string() + " must lie in (0, ell)");

    const LinearForm el = LinearForm::ell();
    StateTable table(params, kernel);
    const std::size_t up = table.add_root(f + el - eps);
    const std::size_t down = table.add_root(f - el + eps);
    const std::size_t mid = table.add_root(f);
    table.solve(budget);

    ImprovementAttempt out;
    out.f = f;
    out.epsilon = epsilon;
    out.lhs = mix(params.w, table.interval(up), table.interval(down));
    ProbInterval rhs = table.interval(mid);
    if (auto [win, lose] = table.successors(mid); table.kind(mid) == StateTable::Kind::Interior)
        rhs = rhs.intersect(mix(params.w, table.interval(win), table.interval(lose)));
    out.rhs = rhs;
    out.budget = budget;
    out.stats = table.stats();
    return out;
}

std::optional<ImprovementCertificate> verify_improvement(const GameParams& params, const Fortune& f,
                                                         const Dyadic& epsilon,
                                                         const Budget& budget,
                                                         SweepKernel kernel) {
    const ImprovementAttempt a = evaluate_improvement(params, f, epsilon, budget, kernel);
    if (!a.certified()) return std::nullopt;
    return a.certificate();
}

std::vector<unsigned> epsilon_exponents(unsigned first, unsigned last) {
    std::vector<unsigned> ks;
    for (unsigned k = first; k <= last; ++k) ks.push_back(k);
    return ks;
}

ImprovementSearch find_improvement(const GameParams& params, const SearchOptions& options) {
    params.require_theorem_ready();
    if (options.escalation.empty())
        throw PreconditionViolated("escalation schedule must not be empty");
    const EllSpec& ell = params.ell;
    CounterexamplePoint point = construct_counterexample(ell);

    std::vector<ImprovementAttempt> attempts;
    for (unsigned k : options.epsilon_exponents) {
        const Dyadic eps = Dyadic::pow2_neg(k);
        const Fortune f = point.f0 - LinearForm::constant(eps);
        const LinearForm el = LinearForm::ell();
        if (lf_compare(f, el, ell) <= 0 || lf_compare(LinearForm::constant(eps), el, ell) >= 0)
            continue;
        for (std::size_t factor : options.escalation) {
            ImprovementAttempt a =
                evaluate_improvement(params, f, eps, options.budget.scaled(factor), options.kernel);
            attempts.push_back(a);
            if (a.certified()) {
                ImprovementCertificate cert = a.certificate();
                return {std::move(point), std::move(cert), std::move(attempts)};
            }
            if (a.refuted()) break;
        }
    }
    throw SearchExhausted(std::move(attempts),
                          "no certificate over the epsilon grid at the given budgets");
}

nlohmann::json HpsReport::to_json(const EllSpec& ell) const {
    return {{"f", lf_to_json(f)},
            {"f_text", f.to_string()},
            {"f_float", lf_approx(f, ell)},
            {"delta", delta.to_string()},
            {"bold", boldplay::to_json(bold)},
            {"deviation", boldplay::to_json(deviation)},
            {"deviation_better", deviation_better()},
            {"bold_better", bold_better()},
            {"stats", stats.to_json()}};
}

HpsReport hps_demo(const GameParams& params, const Dyadic& delta, const Budget& budget) {
    const EllSpec& ell = params.ell;
    budget.validate();
    if (!(ell.compare(mpq_class(1, 4)) > 0 && ell.compare(mpq_class(1, 3)) < 0))
        throw PreconditionViolated("stake cap must lie in (1/4, 1/3)");
    const LinearForm d = LinearForm::constant(delta);
    const LinearForm half = LinearForm::constant(Dyadic::pow2_neg(1));
    const LinearForm el = LinearForm::ell();
    if (delta.sign() < 0 || lf_compare(d, half - el, ell) > 0)
        throw PreconditionViolated("delta " + delta.to_string() + " must lie in [0, 1/2 - ell]");

    const Fortune f = half - d;
    StateTable table(params);
    const std::size_t bold = table.add_root(f);
    const std::size_t up = table.add_root(f + el - d);
    const std::size_t down = table.add_root(f - el + d);
    table.solve(budget);

    HpsReport r;
    r.f = f;
    r.delta = delta;
    r.deviation = mix(params.w, table.interval(up), table.interval(down));
    // Bold play's own first step, so δ = 0 reproduces the deviation exactly.
    const auto [win, lose] = table.successors(bold);
    r.bold = mix(params.w, table.interval(win), table.interval(lose));
    r.stats = table.stats();
    return r;
}

std::string to_string(ScalingSide side) { return side == ScalingSide::Below ? "below" : "above"; }

ScalingSide scaling_side_from_string(const std::string& s) {
    if (s == "below") return ScalingSide::Below;
    if (s == "above") return ScalingSide::Above;
    throw ParseError("side", "expected below or above, got '" + s + "'");
}

nlohmann::json ScalingDiagnostic::to_json(const EllSpec& ell) const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"k", r.k},
                             {"epsilon", r.epsilon.to_string()},
                             {"delta", boldplay::to_json(r.delta)},
                             {"ratio", boldplay::to_json(r.ratio)}});
    return {{"base", lf_to_json(base)},
            {"base_text", base.to_string()},
            {"base_float", lf_approx(base, ell)},
            {"side", to_string(side)},
            {"rows", rows_json},
            {"stats", stats.to_json()}};
}

void ScalingDiagnostic::write_csv(std::ostream& os) const {
    os << "k,epsilon,delta_lo,delta_hi,ratio_lo,ratio_hi\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.k << ',' << r.epsilon.to_double() << ',' << r.delta.lo.get_d() << ','
           << r.delta.hi.get_d() << ',' << r.ratio.lo.get_d() << ',' << r.ratio.hi.get_d() << '\n';
}

ScalingDiagnostic scaling_diagnostic(const GameParams& params, const Fortune& f, ScalingSide side,
                                     const std::vector<unsigned>& exponents, const Budget& budget) {
    const EllSpec& ell = params.ell;
    require_valid_fortune(f, ell);
    for (std::size_t i = 1; i < exponents.size(); ++i)
        if (exponents[i] <= exponents[i - 1])
            throw PreconditionViolated("epsilon exponents must be strictly increasing");

    ScalingDiagnostic diag;
    diag.base = f;
    diag.side = side;
    if (exponents.empty()) return diag;

    StateTable table(params);
    const std::size_t root = table.add_root(f);
    std::vector<std::size_t> shifted;
    for (unsigned k : exponents) {
        const Dyadic step = Dyadic::pow2_neg(side == ScalingSide::Below ? k : k - 1);
        const Fortune g = f - LinearForm::constant(step);
        if (lf_sign(g, ell) <= 0)
            throw PreconditionViolated("f - epsilon leaves (0, 1] at k = " + std::to_string(k));
        shifted.push_back(table.add_root(g));
    }
    table.solve(budget);

    const mpq_class lose = 1 - params.w;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        ScalingRow row;
        row.k = exponents[i];
        row.epsilon = Dyadic::pow2_neg(row.k);
        row.delta = difference(table.interval(root), table.interval(shifted[i]));
        mpq_class norm = 1;
        for (unsigned j = 0; j < row.k; ++j) norm *= lose;
        row.ratio = {row.delta.lo / norm, row.delta.hi / norm};
        diag.rows.push_back(std::move(row));
    }
    diag.stats = table.stats();
    return diag;
}

}  // namespace boldplay
