#pragma once

#include <gmpxx.h>
#include <json.hpp>

#include <string>

namespace boldplay {

/// Certified enclosure lo ≤ P ≤ hi of a probability, exact rational endpoints.
struct ProbInterval {
    mpq_class lo{0};
    mpq_class hi{1};

    ProbInterval() = default;
    ProbInterval(mpq_class lo_, mpq_class hi_);

    static ProbInterval point(const mpq_class& v) { return {v, v}; }

    mpq_class width() const { return hi - lo; }
    mpq_class midpoint() const { return (lo + hi) / 2; }
    bool contains(const mpq_class& v) const { return lo <= v && v <= hi; }
    bool intersects(const ProbInterval& o) const { return lo <= o.hi && o.lo <= hi; }
    bool subset_of(const ProbInterval& o) const { return o.lo <= lo && hi <= o.hi; }

    /// Tighter of two sound enclosures of the same quantity.
    ProbInterval intersect(const ProbInterval& o) const;

    friend bool operator==(const ProbInterval& a, const ProbInterval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

/// w·win + (1 − w)·lose, exactly.
ProbInterval mix(const mpq_class& w, const ProbInterval& win, const ProbInterval& lose);

/// {"lo": "a/b", "hi": "c/d", "lo_float": ..., "hi_float": ..., "width_float": ...}
nlohmann::json to_json(const ProbInterval& iv);
ProbInterval prob_interval_from_json(const nlohmann::json& j);

/// Canonical exact string "a/b" (or "a").
std::string rational_string(const mpq_class& q);

}  // namespace boldplay
