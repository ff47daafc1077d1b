#include "boldplay/prob.hpp"

#include "boldplay/ell.hpp"
#include "boldplay/errors.hpp"

#include <algorithm>

namespace boldplay {

ProbInterval::ProbInterval(mpq_class lo_, mpq_class hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    lo.canonicalize();
    hi.canonicalize();
    if (lo > hi) throw InvariantViolated("empty probability interval");
}

ProbInterval ProbInterval::intersect(const ProbInterval& o) const {
    mpq_class l = std::max(lo, o.lo);
    mpq_class h = std::min(hi, o.hi);
    if (l > h) throw InvariantViolated("disjoint enclosures of the same probability");
    return {l, h};
}

ProbInterval mix(const mpq_class& w, const ProbInterval& win, const ProbInterval& lose) {
    const mpq_class v = 1 - w;
    return {w * win.lo + v * lose.lo, w * win.hi + v * lose.hi};
}

std::string rational_string(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    return c.get_str();
}

nlohmann::json to_json(const ProbInterval& iv) {
    return {{"lo", rational_string(iv.lo)},
            {"hi", rational_string(iv.hi)},
            {"lo_float", iv.lo.get_d()},
            {"hi_float", iv.hi.get_d()},
            {"width_float", iv.width().get_d()}};
}

ProbInterval prob_interval_from_json(const nlohmann::json& j) {
    return {parse_rational(j.at("lo").get<std::string>(), "lo"),
            parse_rational(j.at("hi").get<std::string>(), "hi")};
}

}  // namespace boldplay
