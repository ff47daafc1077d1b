#include "boldplay/ell.hpp"

#include "boldplay/errors.hpp"

#include <cmath>
#include <limits>
#include <regex>

namespace boldplay {

namespace {

std::string strip_spaces(std::string_view text) {
    std::string out;
    for (char ch : text)
        if (ch != ' ' && ch != '\t') out.push_back(ch);
    return out;
}

int sign_of(const mpq_class& q) { return sgn(q); }

mpz_class signed_int(const std::string& t) {
    return mpz_class(!t.empty() && t[0] == '+' ? t.substr(1) : t);
}

/// Pull square factors out of r: returns (s, r') with r = s²·r'.
std::pair<mpz_class, mpz_class> extract_squares(mpz_class r) {
    mpz_class s = 1;
    for (unsigned long p = 2; p < 10000; ++p) {
        const mpz_class pp = p * p;
        if (pp > r) break;
        while (mpz_divisible_p(r.get_mpz_t(), pp.get_mpz_t())) {
            r /= pp;
            s *= p;
        }
    }
    return {s, r};
}

}  // namespace

bool is_perfect_square(const mpz_class& n) {
    return sgn(n) >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

mpq_class parse_rational(std::string_view text, const std::string& field) {
    const std::string s = strip_spaces(text);
    static const std::regex frac(R"(([+-]?\d+)(?:/(\d+))?)");
    static const std::regex dec(R"(([+-]?)(\d*)\.(\d+))");
    std::smatch m;
    if (std::regex_match(s, m, frac)) {
        mpz_class num = signed_int(m[1].str());
        mpz_class den = m[2].matched ? mpz_class(m[2].str()) : mpz_class(1);
        if (den == 0) throw ParseError(field, "zero denominator in '" + s + "'");
        mpq_class q(num, den);
        q.canonicalize();
        return q;
    }
    if (std::regex_match(s, m, dec)) {
        const std::string digits = m[2].str() + m[3].str();
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, m[3].length());
        mpq_class q(mpz_class(digits.empty() ? "0" : digits), den);
        q.canonicalize();
        return m[1].str() == "-" ? mpq_class(-q) : q;
    }
    throw ParseError(field, "expected a rational like 3/10, got '" + s + "'");
}

EllSpec::EllSpec(std::variant<EllRational, EllSurd> rep) : rep_(std::move(rep)) {
    validate_and_cache();
}

EllSpec EllSpec::rational(mpz_class p, mpz_class q) {
    if (q == 0) throw PreconditionViolated("stake cap: zero denominator");
    mpq_class v(p, q);
    v.canonicalize();
    return EllSpec(EllRational{v.get_num(), v.get_den()});
}

EllSpec EllSpec::surd(mpz_class a, mpz_class b, mpz_class r, mpz_class c) {
    if (c == 0) throw PreconditionViolated("stake cap: zero denominator");
    if (sgn(r) <= 0) throw PreconditionViolated("stake cap: radicand must be positive");
    if (c < 0) {
        c = -c;
        a = -a;
        b = -b;
    }
    auto [s, rr] = extract_squares(std::move(r));
    b *= s;
    if (b == 0) return rational(a, c);
    if (is_perfect_square(rr)) {
        mpz_class root;
        mpz_sqrt(root.get_mpz_t(), rr.get_mpz_t());
        return rational(a + b * root, c);
    }
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g > 1) {
        a /= g;
        b /= g;
        c /= g;
    }
    return EllSpec(EllSurd{std::move(a), std::move(b), std::move(rr), std::move(c)});
}

EllSpec EllSpec::parse(std::string_view text) {
    const std::string s = strip_spaces(text);
    const std::string field = "ell";
    std::smatch m;

    static const std::regex sqrt_frac(R"(sqrt\((\d+)(?:/(\d+))?\))");
    if (std::regex_match(s, m, sqrt_frac)) {
        const mpz_class p(m[1].str());
        const mpz_class q = m[2].matched ? mpz_class(m[2].str()) : mpz_class(1);
        if (q == 0) throw ParseError(field, "zero denominator in '" + s + "'");
        // sqrt(p/q) = sqrt(p·q)/q
        return surd(0, 1, p * q, q);
    }

    // (a ± b*sqrt(r))/c, (b*sqrt(r))/c, b*sqrt(r)/c, sqrt(r)/c
    static const std::regex full(
        R"(\(([+-]?\d+)([+-])(\d*)\*?sqrt\((\d+)\)\)/(\d+))");
    if (std::regex_match(s, m, full)) {
        const mpz_class a = signed_int(m[1].str());
        mpz_class b = m[3].length() > 0 ? mpz_class(m[3].str()) : mpz_class(1);
        if (m[2].str() == "-") b = -b;
        return surd(a, b, mpz_class(m[4].str()), mpz_class(m[5].str()));
    }
    static const std::regex surd_first(
        R"(\(([+-]?\d*)\*?sqrt\((\d+)\)([+-]\d+)\)/(\d+))");
    if (std::regex_match(s, m, surd_first)) {
        const std::string bs = m[1].str();
        mpz_class b = (bs.empty() || bs == "+") ? mpz_class(1)
                                                : (bs == "-" ? mpz_class(-1) : mpz_class(bs));
        return surd(signed_int(m[3].str()), b, mpz_class(m[2].str()), mpz_class(m[4].str()));
    }
    static const std::regex bare(R"(\(?([+-]?\d*)\*?sqrt\((\d+)\)\)?/(\d+))");
    if (std::regex_match(s, m, bare)) {
        const std::string bs = m[1].str();
        mpz_class b = (bs.empty() || bs == "+") ? mpz_class(1)
                                                : (bs == "-" ? mpz_class(-1) : mpz_class(bs));
        return surd(0, b, mpz_class(m[2].str()), mpz_class(m[3].str()));
    }

    try {
        const mpq_class v = parse_rational(s, field);
        return rational(v.get_num(), v.get_den());
    } catch (const ParseError&) {
        throw ParseError(field,
                         "expected p/q, sqrt(p/q) or (a+b*sqrt(r))/c, got '" + s + "'");
    } catch (const PreconditionViolated& e) {
        throw ParseError(field, e.what());
    }
}

mpq_class EllSpec::rational_value() const {
    const auto& r = as_rational();
    return mpq_class(r.p, r.q);
}

int EllSpec::compare(const mpq_class& t) const {
    if (is_rational()) return cmp(rational_value(), t);
    const auto& s = as_surd();
    // sign((a + b√r)/c − t) = sign(b√r − u), u = c·t − a
    const mpq_class u = mpq_class(s.c) * t - mpq_class(s.a);
    if (sgn(s.b) > 0) {
        if (sign_of(u) < 0) return 1;
        // both sides nonnegative: compare squares
        const mpq_class lhs = mpq_class(s.b * s.b * s.r);
        return cmp(lhs, u * u);
    }
    if (sign_of(u) >= 0) return -1;
    // b√r < 0 and u < 0: b√r > u iff b²r < u²
    const mpq_class lhs = mpq_class(s.b * s.b * s.r);
    return -cmp(lhs, u * u);
}

std::pair<mpq_class, mpq_class> EllSpec::bounds(unsigned long bits) const {
    if (is_rational()) {
        const mpq_class v = rational_value();
        return {v, v};
    }
    const auto& s = as_surd();
    // ℓ width = |b|/c · 2^-m, so pad m by the bit length of |b|
    const unsigned long m = bits + mpz_sizeinbase(s.b.get_mpz_t(), 2) + 2;
    mpz_class scaled = s.r;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * m);
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
    mpq_class lo_root(root), hi_root(root + 1);
    mpq_div_2exp(lo_root.get_mpq_t(), lo_root.get_mpq_t(), m);
    mpq_div_2exp(hi_root.get_mpq_t(), hi_root.get_mpq_t(), m);
    const mpq_class a(s.a), b(s.b), c(s.c);
    mpq_class lo = (a + b * lo_root) / c;
    mpq_class hi = (a + b * hi_root) / c;
    if (sgn(s.b) < 0) std::swap(lo, hi);
    return {lo, hi};
}

bool EllSpec::theorem_ready() const {
    return is_irrational() && compare(mpq_class(1, 2)) < 0;
}

std::string EllSpec::to_string() const {
    if (is_rational()) {
        const auto& r = as_rational();
        return r.p.get_str() + "/" + r.q.get_str();
    }
    const auto& s = as_surd();
    std::string out = "(" + s.a.get_str();
    out += sgn(s.b) < 0 ? "-" : "+";
    mpz_class absb = abs(s.b);
    out += absb.get_str() + "*sqrt(" + s.r.get_str() + "))/" + s.c.get_str();
    return out;
}

void EllSpec::validate_and_cache() {
    if (compare(mpq_class(0)) <= 0 || compare(mpq_class(1, 2)) > 0)
        throw PreconditionViolated("stake cap must lie in (0, 1/2], got " + to_string());
    const auto [lo, hi] = bounds(64);
    const double dlo = lo.get_d();
    const double dhi = hi.get_d();
    approx_ = 0.5 * (dlo + dhi);
    approx_err_ = (dhi - dlo) + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(approx_);
}

}  // namespace boldplay
