#pragma once

#include "boldplay/chain.hpp"
#include "boldplay/q_solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace boldplay {

inline constexpr const char* kVersion = "0.3.0";

/// Raw option values by flag name (without dashes), as typed or read from --config.
using RunConfig = std::map<std::string, std::string>;

/// key = value lines; '#' starts a comment. Errors carry the line number.
RunConfig parse_config_text(const std::string& text, const std::string& source = "config");

enum class RunStatus { Ok, Inconclusive, Error };

std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);
int exit_code(RunStatus s);

struct ExperimentReport {
    std::string command;
    RunConfig config;
    RunStatus status = RunStatus::Ok;
    nlohmann::json results = nlohmann::json::object();
    std::vector<std::string> warnings;
    std::string error;
    double runtime_ms = 0.0;
    std::string version = kVersion;

    nlohmann::json to_json() const;
    static ExperimentReport from_json(const nlohmann::json& j);
};

/// Copy of j with every "runtime_ms" member removed, recursively.
nlohmann::json strip_runtimes(nlohmann::json j);

struct SuiteConfig {
    std::vector<std::string> ells{"3/10", "sqrt(1/5)"};
    std::vector<std::string> ws{"1/10", "1/4", "2/5"};
    unsigned n_max = 6;
    Budget budget{64, 4'000'000, mpq_class(1, 1'000'000)};
    std::size_t min_states = 100;
};

struct SuiteReport {
    bool passed = true;
    std::vector<std::string> warnings;
    nlohmann::json rows = nlohmann::json::array();

    nlohmann::json to_json() const;
};

/**
 * Closed-form consistency near the goal plus every lemma check over the
 * ell × w grid. Every grid entry is parsed before any work starts, so a bad
 * entry fails fast with ParseError or PreconditionViolated.
 */
SuiteReport lemma_check_suite(const SuiteConfig& config);

/**
 * Parses argv (argv[0] is the program name), dispatches, and writes the
 * report. Returns 0 on success, 2 when inconclusive, 1 on error.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace boldplay
