#include "boldplay/linear_form.hpp"

#include "boldplay/errors.hpp"

#include <cmath>
#include <limits>
#include <regex>

namespace boldplay {

std::string LinearForm::to_string() const {
    if (q.is_zero()) return p.to_string();
    std::string out;
    if (!p.is_zero()) out = p.to_string() + (q.sign() > 0 ? "+" : "");
    return out + q.to_string() + "*ell";
}

namespace {

int exact_sign(const LinearForm& x, const EllSpec& ell) {
    if (x.q.is_zero()) return x.p.sign();
    // p + qℓ > 0  ⇔  q·(ℓ − (−p/q)) > 0
    const mpq_class t = -x.p.to_rational() / x.q.to_rational();
    return x.q.sign() * ell.compare(t);
}

}  // namespace

int lf_sign(const LinearForm& x, const EllSpec& ell) {
    if (x.q.is_zero()) return x.p.sign();
    if (x.p.is_zero()) return x.q.sign();  // ℓ > 0
    const double pd = x.p.to_double();
    const double qd = x.q.to_double();
    if (std::isfinite(pd) && std::isfinite(qd)) {
        const double lv = ell.approx();
        const double v = pd + qd * lv;
        const double err = 8.0 * std::numeric_limits<double>::epsilon() *
                               (std::abs(pd) + std::abs(qd) * lv) +
                           std::abs(qd) * ell.approx_error() + 1e-300;
        if (v > err) return 1;
        if (v < -err) return -1;
    }
    return exact_sign(x, ell);
}

bool lf_eq(const LinearForm& x, const LinearForm& y, const EllSpec& ell) {
    if (ell.is_irrational()) return x == y;
    return lf_sign(x - y, ell) == 0;
}

mpq_class lf_rational_value(const LinearForm& x, const EllSpec& ell) {
    if (x.q.is_zero()) return x.p.to_rational();
    if (ell.is_irrational())
        throw PreconditionViolated("value of " + x.to_string() + " is irrational");
    return x.p.to_rational() + x.q.to_rational() * ell.rational_value();
}

std::pair<mpq_class, mpq_class> lf_bounds(const LinearForm& x, const EllSpec& ell,
                                          unsigned long bits) {
    if (x.q.is_zero() || ell.is_rational()) {
        mpq_class v = x.q.is_zero() ? x.p.to_rational() : lf_rational_value(x, ell);
        return {v, v};
    }
    const long qbits = static_cast<long>(mpz_sizeinbase(x.q.numerator().get_mpz_t(), 2)) -
                       static_cast<long>(x.q.exponent());
    const unsigned long pad = qbits > 0 ? static_cast<unsigned long>(qbits) : 0;
    const auto [lo_ell, hi_ell] = ell.bounds(bits + pad + 1);
    const mpq_class p = x.p.to_rational();
    const mpq_class q = x.q.to_rational();
    mpq_class lo = p + q * lo_ell;
    mpq_class hi = p + q * hi_ell;
    if (sgn(q) < 0) std::swap(lo, hi);
    return {lo, hi};
}

namespace {

double round_down(const mpq_class& v) {
    double d = v.get_d();
    if (cmp(mpq_class(d), v) > 0) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
    return d;
}

double round_up(const mpq_class& v) {
    double d = v.get_d();
    if (cmp(mpq_class(d), v) < 0) d = std::nextafter(d, std::numeric_limits<double>::infinity());
    return d;
}

}  // namespace

std::pair<double, double> lf_to_interval(const LinearForm& x, const EllSpec& ell,
                                         unsigned precision_bits) {
    if (precision_bits < 1) throw PreconditionViolated("precision_bits must be >= 1");
    const auto [lo, hi] = lf_bounds(x, ell, precision_bits);
    return {round_down(lo), round_up(hi)};
}

double lf_approx(const LinearForm& x, const EllSpec& ell) {
    const auto [lo, hi] = lf_bounds(x, ell, 60);
    const mpq_class mid = (lo + hi) / 2;
    return mid.get_d();
}

namespace {

Dyadic dyadic_field(const nlohmann::json& j, const char* num, const char* exp) {
    if (!j.contains(num) || !j.contains(exp))
        throw ParseError("fortune", std::string("missing field ") + num + "/" + exp);
    const auto& n = j.at(num);
    mpz_class numerator;
    if (n.is_string()) {
        if (numerator.set_str(n.get<std::string>(), 10) != 0)
            throw ParseError("fortune", std::string("bad integer in ") + num);
    } else if (n.is_number_integer()) {
        numerator = n.get<long>();
    } else {
        throw ParseError("fortune", std::string(num) + " must be an integer or string");
    }
    const auto& e = j.at(exp);
    if (!e.is_number_integer() || e.get<long>() < 0)
        throw ParseError("fortune", std::string(exp) + " must be a nonnegative integer");
    return Dyadic(numerator, e.get<unsigned long>());
}

bool is_dyadic(const mpq_class& v) { return mpz_popcount(v.get_den().get_mpz_t()) == 1; }

}  // namespace

nlohmann::json lf_to_json(const LinearForm& x) {
    return {{"p_num", x.p.numerator().get_str()},
            {"p_exp", x.p.exponent()},
            {"q_num", x.q.numerator().get_str()},
            {"q_exp", x.q.exponent()}};
}

LinearForm lf_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("fortune", "expected a JSON object");
    return {dyadic_field(j, "p_num", "p_exp"), dyadic_field(j, "q_num", "q_exp")};
}

LinearForm parse_linear_form(std::string_view text, const EllSpec& ell) {
    std::string s;
    for (char ch : text)
        if (ch != ' ' && ch != '\t') s.push_back(ch);
    if (s.empty()) throw ParseError("fortune", "empty");
    if (s.front() == '{') {
        try {
            return lf_from_json(nlohmann::json::parse(s));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("fortune", e.what());
        }
    }

    static const std::regex term(R"(((?:\d+(?:/\d+)?)|(?:\d*\.\d+))?(\*?ell)?(?:/(\d+))?)");
    mpq_class pc(0), qc(0);
    std::size_t pos = 0;
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1 : 1;
            ++pos;
        }
        std::size_t end = s.find_first_of("+-", pos);
        if (end == std::string::npos) end = s.size();
        const std::string body = s.substr(pos, end - pos);
        std::smatch m;
        if (body.empty() || !std::regex_match(body, m, term) ||
            (!m[1].matched && !m[2].matched))
            throw ParseError("fortune", "cannot parse term '" + body + "' in '" + s + "'");
        if (m[2].matched && m[2].str().front() == '*' && !m[1].matched)
            throw ParseError("fortune", "dangling '*' in '" + body + "'");
        mpq_class coef = m[1].matched ? parse_rational(m[1].str(), "fortune") : mpq_class(1);
        if (m[3].matched) {
            const mpz_class div(m[3].str());
            if (div == 0) throw ParseError("fortune", "division by zero");
            coef /= mpq_class(div);
        }
        if (sign < 0) coef = -coef;
        if (m[2].matched)
            qc += coef;
        else
            pc += coef;
        pos = end;
    }

    if (is_dyadic(pc) && is_dyadic(qc))
        return {Dyadic::from_rational(pc), Dyadic::from_rational(qc)};
    if (ell.is_irrational())
        throw ParseError("fortune", "coefficients must be dyadic rationals, got '" + s + "'");
    // rational ℓ: find value = a + b·ℓ with b a small integer and a dyadic
    const mpq_class value = pc + qc * ell.rational_value();
    for (long k = 0; k <= 4096; ++k) {
        for (long b : {k, -k}) {
            const mpq_class a = value - mpq_class(b) * ell.rational_value();
            if (is_dyadic(a)) return {Dyadic::from_rational(a), Dyadic(b)};
            if (k == 0) break;
        }
    }
    throw ParseError("fortune", "'" + s + "' is not of the form a + b*ell with dyadic a");
}

FortuneKey fortune_key(const LinearForm& x, const EllSpec& ell) {
    if (ell.is_irrational()) return {x.p, x.q};
    // value·Q = p·Q + q·P is dyadic when ℓ = P/Q
    const auto& r = ell.as_rational();
    return {x.p * Dyadic(r.q) + x.q * Dyadic(r.p), Dyadic(0)};
}

std::size_t FortuneKeyHash::operator()(const FortuneKey& k) const noexcept {
    return k.a.hash() * 31 + k.b.hash();
}

}  // namespace boldplay
