#include "boldplay/cli.hpp"

#include "boldplay/coupling.hpp"
#include "boldplay/improvement.hpp"
#include "boldplay/reachability.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

namespace boldplay {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

unsigned long parse_count(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(field, "expected a nonnegative integer, got '" + text + "'");
    try {
        return std::stoul(t);
    } catch (const std::out_of_range&) {
        throw ParseError(field, "integer out of range: '" + text + "'");
    }
}

/// "4..24" or "4,6,9".
std::vector<unsigned> parse_exponents(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    std::vector<unsigned> out;
    if (const auto dots = t.find(".."); dots != std::string::npos) {
        const auto a = parse_count(t.substr(0, dots), field);
        const auto b = parse_count(t.substr(dots + 2), field);
        if (a == 0 || b < a) throw ParseError(field, "range must be 1 <= first <= last");
        for (auto k = a; k <= b; ++k) out.push_back(static_cast<unsigned>(k));
        return out;
    }
    for (const auto& item : split_list(t)) {
        const auto k = parse_count(item, field);
        if (k == 0) throw ParseError(field, "exponents start at 1");
        out.push_back(static_cast<unsigned>(k));
    }
    if (out.empty()) throw ParseError(field, "empty exponent list");
    return out;
}

mpq_class parse_w(const std::string& text) {
    const mpq_class w = parse_rational(text, "w");
    if (!(sgn(w) > 0 && w < mpq_class(1, 2)))
        throw ParseError("w", "must lie in (0, 1/2), got " + rational_string(w));
    return w;
}

EllSpec parse_ell(const std::string& text) {
    try {
        return EllSpec::parse(text);
    } catch (const PreconditionViolated& e) {
        throw ParseError("ell", e.what());
    }
}

Dyadic parse_dyadic(const std::string& text, const std::string& field) {
    try {
        return Dyadic::from_rational(parse_rational(text, field));
    } catch (const PreconditionViolated&) {
        throw ParseError(field, "expected a dyadic rational like 1/64, got '" + text + "'");
    }
}

Fortune parse_fortune(const std::string& text, const EllSpec& ell, const std::string& field) {
    try {
        return parse_linear_form(text, ell);
    } catch (const ParseError& e) {
        throw ParseError(field, e.what());
    }
}

nlohmann::json fortune_json(const Fortune& f, const EllSpec& ell) {
    return {{"form", lf_to_json(f)}, {"text", f.to_string()}, {"float", lf_approx(f, ell)}};
}

struct CommandResult {
    RunStatus status = RunStatus::Ok;
    nlohmann::json results = nlohmann::json::object();
    std::string summary;
    std::vector<std::string> warnings;
};

/// Typed access to the merged option strings of one invocation.
class Args {
public:
    explicit Args(const RunConfig& values) : values_(values) {}

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string str(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    std::string required(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ParseError(key, "missing required option --" + key);
        return it->second;
    }
    unsigned long count(const std::string& key, unsigned long fallback) const {
        return has(key) ? parse_count(values_.at(key), key) : fallback;
    }

    EllSpec ell() const { return parse_ell(required("ell")); }
    GameParams params(const std::string& w_fallback = "") const {
        const EllSpec e = ell();
        const std::string wtext = w_fallback.empty() ? required("w") : str("w", w_fallback);
        return GameParams(e, parse_w(wtext));
    }

    /// --budget "depth,states,width" then the individual flags on top.
    Budget budget(const Budget& base) const {
        Budget b = base;
        if (has("budget")) {
            const auto parts = split_list(values_.at("budget"));
            if (parts.size() != 3)
                throw ParseError("budget", "expected max_depth,max_states,target_width");
            b.max_depth = parse_count(parts[0], "budget");
            b.max_states = parse_count(parts[1], "budget");
            b.target_width = parse_rational(parts[2], "budget");
        }
        b.max_depth = count("max-depth", b.max_depth);
        b.max_states = count("max-states", b.max_states);
        if (has("target-width")) b.target_width = parse_rational(values_.at("target-width"), "target-width");
        try {
            b.validate();
        } catch (const PreconditionViolated& e) {
            throw ParseError("budget", e.what());
        }
        return b;
    }

    SweepKernel kernel() const {
        const std::string k = str("kernel", "serial");
        if (k == "serial") return SweepKernel::Serial;
        if (k == "parallel") return SweepKernel::Parallel;
        throw ParseError("kernel", "expected serial or parallel, got '" + k + "'");
    }

private:
    const RunConfig& values_;
};

std::ofstream open_output(const std::string& path, const std::string& field) {
    std::ofstream os(path);
    if (!os) throw ParseError(field, "cannot open '" + path + "' for writing");
    return os;
}

CommandResult cmd_q(const Args& a) {
    const GameParams params = a.params();
    const Fortune f = parse_fortune(a.required("fortune"), params.ell, "fortune");
    const Budget budget = a.budget({});
    const QResult r = q_bounds(params, f, budget, a.kernel());
    CommandResult o;
    o.results = {{"query", fortune_json(f, params.ell)},
                 {"interval", to_json(r.interval)},
                 {"states_explored", r.stats.states},
                 {"depth", r.stats.depth},
                 {"runtime_ms", r.stats.runtime_ms},
                 {"stats", r.stats.to_json()}};
    const bool tight = r.interval.width() <= budget.target_width;
    if (!tight) {
        o.status = RunStatus::Inconclusive;
        o.warnings.push_back("interval width exceeds the target width at this budget");
    }
    std::ostringstream s;
    s.precision(12);
    s << "Q(" << f.to_string() << ") in [" << r.interval.lo.get_d() << ", "
      << r.interval.hi.get_d() << "]";
    o.summary = s.str();
    return o;
}

CommandResult cmd_reach(const Args& a) {
    const GameParams params = a.params("1/4");
    const Fortune f = parse_fortune(a.required("fortune"), params.ell, "fortune");
    const std::size_t depth = a.count("max-depth", 32);
    const MembershipVerdict v = decide_membership(params, f, depth);
    CommandResult o;
    o.results = {{"query", fortune_json(f, params.ell)}, {"verdict", to_json(v)}};
    if (const auto* in = std::get_if<InS>(&v)) {
        o.summary = "in S, witness " + word_to_string(in->witness);
        if (a.has("trace")) {
            auto os = open_output(a.str("trace", ""), "trace");
            write_trace_csv(os, f, in->witness, params);
        }
    } else if (const auto* no = std::get_if<NotInS>(&v)) {
        o.summary = "not in S (" + to_string(no->certificate.violated) + ")";
    } else {
        o.status = RunStatus::Inconclusive;
        o.summary = "unknown within depth " + std::to_string(depth);
    }
    return o;
}

CommandResult cmd_counterexample(const Args& a) {
    const EllSpec ell = a.ell();
    const CounterexamplePoint p = construct_counterexample(ell, a.count("max-d", 64));
    CommandResult o;
    o.results = p.to_json(ell);
    o.summary = "m=" + std::to_string(p.m) + " d=" + std::to_string(p.d) +
                " n=" + std::to_string(p.n) + " f0=" + p.f0.to_string() +
                " witness=" + word_to_string(p.witness);
    if (a.has("trace")) {
        auto os = open_output(a.str("trace", ""), "trace");
        write_trace_csv(os, p.f0 - LinearForm::ell(), p.witness, GameParams(ell, mpq_class(1, 4)));
    }
    return o;
}

CommandResult cmd_verify_theorem(const Args& a) {
    const GameParams params = a.params();
    SearchOptions opt;
    if (a.has("epsilon-grid")) opt.epsilon_exponents = parse_exponents(a.str("epsilon-grid", ""), "epsilon-grid");
    opt.budget = a.budget(opt.budget);
    if (a.has("escalation")) {
        opt.escalation.clear();
        for (const auto& s : split_list(a.str("escalation", "")))
            opt.escalation.push_back(parse_count(s, "escalation"));
    }
    opt.kernel = a.kernel();
    CommandResult o;
    try {
        const ImprovementSearch r = find_improvement(params, opt);
        nlohmann::json attempts = nlohmann::json::array();
        for (const auto& t : r.attempts) attempts.push_back(t.to_json());
        o.results = {{"point", r.point.to_json(params.ell)},
                     {"certificate", r.certificate.to_json(params.ell)},
                     {"attempts", attempts}};
        o.summary = "certified at epsilon " + r.certificate.epsilon.to_string() + ", margin " +
                    std::to_string(r.certificate.margin.get_d());
    } catch (const SearchExhausted& e) {
        nlohmann::json attempts = nlohmann::json::array();
        for (const auto& t : e.attempts()) attempts.push_back(t.to_json());
        o.status = RunStatus::Inconclusive;
        o.results = {{"attempts", attempts}};
        o.summary = e.what();
    }
    return o;
}

CommandResult cmd_hps(const Args& a) {
    const GameParams params = a.params();
    const Dyadic delta = parse_dyadic(a.str("delta", "1/64"), "delta");
    const HpsReport r = hps_demo(params, delta, a.budget({}));
    CommandResult o;
    o.results = r.to_json(params.ell);
    if (r.deviation_better()) {
        o.summary = "deviation strictly better";
    } else if (r.bold_better()) {
        o.summary = "bold play strictly better";
    } else {
        o.status = RunStatus::Inconclusive;
        o.summary = "enclosures overlap";
    }
    return o;
}

CommandResult cmd_scaling(const Args& a, bool json_mode, std::ostream& out) {
    const GameParams params = a.params();
    const ScalingSide side = scaling_side_from_string(a.str("side", "below"));
    Fortune base;
    if (a.has("fortune")) {
        base = parse_fortune(a.str("fortune", ""), params.ell, "fortune");
    } else {
        const CounterexamplePoint p = construct_counterexample(params.ell);
        base = side == ScalingSide::Below ? p.f0 - LinearForm::ell() : p.f0 + LinearForm::ell();
    }
    const auto ks = parse_exponents(a.str("epsilons", "4..12"), "epsilons");
    const ScalingDiagnostic d = scaling_diagnostic(params, base, side, ks, a.budget({}));
    CommandResult o;
    o.results = d.to_json(params.ell);
    if (a.has("trace")) {
        auto os = open_output(a.str("trace", ""), "trace");
        d.write_csv(os);
    } else if (!json_mode) {
        d.write_csv(out);
    }
    o.summary = std::to_string(d.rows.size()) + " rows at " + base.to_string();
    return o;
}

std::pair<Fortune, Fortune> pair_or_default(const Args& a, const GameParams& params, LemmaKind k) {
    if (a.has("f1") != a.has("f2")) throw ParseError("f1", "--f1 and --f2 go together");
    if (a.has("f1"))
        return {parse_fortune(a.str("f1", ""), params.ell, "f1"),
                parse_fortune(a.str("f2", ""), params.ell, "f2")};
    const auto pairs = region_pairs(params, k, 1);
    if (pairs.empty()) throw PreconditionViolated("no sample pair in the lemma's region");
    return pairs.front();
}

CommandResult cmd_coupling_check(const Args& a) {
    const GameParams params = a.params();
    const LemmaKind k = lemma_from_string(a.str("lemma", "A"));
    const auto [f1, f2] = pair_or_default(a, params, k);
    const LemmaReport r = exact_supermartingale_check(f1, f2, params, k, a.count("min-states", 100));
    CommandResult o;
    o.results = r.to_json();
    o.summary = "lemma " + to_string(k) + (r.passed ? " holds" : " fails") + " over " +
                std::to_string(r.paths) + " paths";
    if (!r.passed) o.status = RunStatus::Error;
    return o;
}

CommandResult cmd_coupling_sim(const Args& a, bool json_mode, std::ostream& out) {
    const GameParams params = a.params();
    const Fortune f1 = parse_fortune(a.required("f1"), params.ell, "f1");
    const Fortune f2 = parse_fortune(a.required("f2"), params.ell, "f2");
    const std::size_t samples = a.count("samples", 10'000);
    const std::size_t horizon = a.count("horizon", 200);
    const std::uint64_t seed = a.count("seed", 1);
    const MonteCarloResult mc = monte_carlo_diff(f1, f2, params, samples, horizon, seed);
    const std::size_t traced = std::min<std::size_t>(samples, a.count("trace-samples", 16));
    if (a.has("trace")) {
        auto os = open_output(a.str("trace", ""), "trace");
        write_coupling_csv(os, f1, f2, params, traced, horizon, seed);
    } else if (!json_mode) {
        write_coupling_csv(out, f1, f2, params, traced, horizon, seed);
    }
    CommandResult o;
    o.results = mc.to_json();
    if (mc.unabsorbed > 0)
        o.warnings.push_back(std::to_string(mc.unabsorbed) + " samples unabsorbed at the horizon");
    std::ostringstream s;
    s.precision(6);
    s << "Q(f1) - Q(f2) ~ " << mc.estimate << " [" << mc.ci_lo << ", " << mc.ci_hi << "]";
    o.summary = s.str();
    return o;
}

CommandResult cmd_lemma_check(const Args& a) {
    SuiteConfig cfg;
    if (a.has("ells")) cfg.ells = split_list(a.str("ells", ""));
    if (a.has("ws")) cfg.ws = split_list(a.str("ws", ""));
    cfg.n_max = static_cast<unsigned>(a.count("n-max", cfg.n_max));
    cfg.budget = a.budget(cfg.budget);
    cfg.min_states = a.count("min-states", cfg.min_states);
    const SuiteReport r = lemma_check_suite(cfg);
    CommandResult o;
    o.results = r.to_json();
    o.warnings = r.warnings;
    o.status = r.passed ? RunStatus::Ok : RunStatus::Error;
    o.summary = std::string(r.passed ? "all checks pass" : "some checks failed") + " over " +
                std::to_string(r.rows.size()) + " grid points";
    return o;
}

struct Command {
    const char* name;
    const char* help;
    std::vector<const char*> options;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> cmds{
        {"q", "certified bounds on Q(f)",
         {"ell", "w", "fortune", "max-depth", "max-states", "target-width", "budget", "kernel"}},
        {"reach", "decide whether 1 - ell is reachable from f",
         {"ell", "w", "fortune", "max-depth", "trace"}},
        {"counterexample", "construct the counterexample point", {"ell", "max-d", "trace"}},
        {"verify-theorem", "certify a one-step improvement over bold play",
         {"ell", "w", "epsilon-grid", "budget", "max-depth", "max-states", "target-width",
          "escalation", "kernel"}},
        {"hps-demo", "compare bold play with staking ell - delta at 1/2 - delta",
         {"ell", "w", "delta", "budget", "max-depth", "max-states", "target-width"}},
        {"scaling", "normalized differences of Q near a point",
         {"ell", "w", "side", "epsilons", "fortune", "budget", "max-depth", "max-states",
          "target-width", "trace"}},
        {"coupling-check", "exact supermartingale check of one lemma",
         {"ell", "w", "f1", "f2", "lemma", "min-states"}},
        {"coupling-sim", "coupled Monte Carlo estimate of Q(f1) - Q(f2)",
         {"ell", "w", "f1", "f2", "samples", "horizon", "seed", "trace", "trace-samples"}},
        {"lemma-check", "closed-form consistency and every lemma over a grid",
         {"ells", "ws", "n-max", "budget", "max-depth", "max-states", "target-width",
          "min-states"}},
    };
    return cmds;
}

const std::map<std::string, std::string>& option_help() {
    static const std::map<std::string, std::string> h{
        {"ell", "stake cap: p/q, sqrt(p/q) or (a+b*sqrt(r))/c"},
        {"w", "win probability, rational in (0, 1/2)"},
        {"fortune", "fortune text like 1/2+3/4*ell, or LinearForm JSON"},
        {"max-depth", "exploration depth"},
        {"max-states", "state cap"},
        {"target-width", "target interval width (rational)"},
        {"budget", "max_depth,max_states,target_width"},
        {"kernel", "serial or parallel"},
        {"trace", "CSV trace path"},
        {"max-d", "largest d tried"},
        {"epsilon-grid", "epsilon exponents k (epsilon = 2^-k): a..b or a,b,c"},
        {"escalation", "budget factors tried per epsilon, e.g. 1,2"},
        {"delta", "dyadic delta"},
        {"side", "below or above"},
        {"epsilons", "epsilon exponents: a..b or a,b,c"},
        {"f1", "upper fortune"},
        {"f2", "lower fortune"},
        {"lemma", "A, R, B, C or Z"},
        {"min-states", "driver states for Z"},
        {"samples", "Monte Carlo samples"},
        {"horizon", "steps per sample"},
        {"seed", "RNG seed"},
        {"trace-samples", "samples written to the CSV trace"},
        {"ells", "comma-separated stake caps"},
        {"ws", "comma-separated win probabilities"},
        {"n-max", "largest n in the closed-form check"},
    };
    return h;
}

CommandResult dispatch(const std::string& name, const Args& a, bool json_mode, std::ostream& out) {
    if (name == "q") return cmd_q(a);
    if (name == "reach") return cmd_reach(a);
    if (name == "counterexample") return cmd_counterexample(a);
    if (name == "verify-theorem") return cmd_verify_theorem(a);
    if (name == "hps-demo") return cmd_hps(a);
    if (name == "scaling") return cmd_scaling(a, json_mode, out);
    if (name == "coupling-check") return cmd_coupling_check(a);
    if (name == "coupling-sim") return cmd_coupling_sim(a, json_mode, out);
    return cmd_lemma_check(a);
}

RunConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    std::set<std::string> known{"threads", "json", "out"};
    for (const auto& [k, v] : option_help()) known.insert(k);
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(no);
        if (eq == std::string::npos) throw ParseError(where, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (!known.count(key)) throw ParseError(where, "unknown key '" + key + "'");
        cfg[key] = value;
    }
    return cfg;
}

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::Inconclusive: return "inconclusive";
        case RunStatus::Error: return "error";
    }
    return "error";
}

RunStatus run_status_from_string(const std::string& s) {
    if (s == "ok") return RunStatus::Ok;
    if (s == "inconclusive") return RunStatus::Inconclusive;
    if (s == "error") return RunStatus::Error;
    throw ParseError("status", "unknown status '" + s + "'");
}

int exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return 0;
        case RunStatus::Inconclusive: return 2;
        case RunStatus::Error: return 1;
    }
    return 1;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j{{"version", version},
                     {"command", command},
                     {"config", config},
                     {"status", to_string(status)},
                     {"results", results},
                     {"warnings", warnings},
                     {"runtime_ms", runtime_ms}};
    if (!error.empty()) j["error"] = error;
    return j;
}

ExperimentReport ExperimentReport::from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.version = j.at("version").get<std::string>();
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config").get<RunConfig>();
    r.status = run_status_from_string(j.at("status").get<std::string>());
    r.results = j.at("results");
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.runtime_ms = j.at("runtime_ms").get<double>();
    r.error = j.value("error", "");
    return r;
}

nlohmann::json strip_runtimes(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("runtime_ms");
        for (auto& [k, v] : j.items()) v = strip_runtimes(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_runtimes(v);
    }
    return j;
}

nlohmann::json SuiteReport::to_json() const {
    return {{"passed", passed}, {"warnings", warnings}, {"rows", rows}};
}

SuiteReport lemma_check_suite(const SuiteConfig& config) {
    std::vector<GameParams> grid;
    for (const auto& e : config.ells) {
        const EllSpec ell = parse_ell(e);
        for (const auto& w : config.ws) grid.emplace_back(ell, parse_w(w));
    }
    SuiteReport rep;
    if (grid.empty()) {
        rep.warnings.push_back("empty parameter grid: nothing checked");
        return rep;
    }
    for (const GameParams& params : grid) {
        nlohmann::json row{{"ell", params.ell.to_string()}, {"w", rational_string(params.w)}};
        bool ok = true;
        try {
            row["consistency"] = q_consistency_check(params, config.n_max, config.budget).to_json();
        } catch (const InconsistencyDetected& e) {
            row["consistency_error"] = e.what();
            ok = false;
        }
        nlohmann::json lemmas = nlohmann::json::array();
        for (LemmaKind k : {LemmaKind::A, LemmaKind::R, LemmaKind::B, LemmaKind::C, LemmaKind::Z}) {
            const auto pairs = region_pairs(params, k, k == LemmaKind::Z ? 1 : 6);
            if (pairs.empty()) {
                rep.warnings.push_back("lemma " + to_string(k) + ": empty region at ell " +
                                       params.ell.to_string() + ", w " + rational_string(params.w));
                continue;
            }
            for (const auto& [f1, f2] : pairs) {
                try {
                    const LemmaReport r =
                        exact_supermartingale_check(f1, f2, params, k, config.min_states);
                    nlohmann::json lj = r.to_json();
                    lemmas.push_back(lj);
                    ok = ok && r.passed;
                } catch (const InequalityViolated& e) {
                    lemmas.push_back({{"lemma", to_string(k)},
                                      {"f1", f1.to_string()},
                                      {"f2", f2.to_string()},
                                      {"passed", false},
                                      {"error", e.what()}});
                    ok = false;
                }
            }
        }
        row["lemmas"] = lemmas;
        row["passed"] = ok;
        rep.passed = rep.passed && ok;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    CLI::App app{"Certified bold-play analysis under a stake cap"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    struct Sub {
        CLI::App* app;
        const Command* cmd;
    };
    std::vector<Sub> subs;
    std::map<std::string, std::string> flag_values;
    std::string config_path, out_path;
    bool json_mode = false;
    int threads = 0;
    for (const Command& c : commands()) {
        CLI::App* s = app.add_subcommand(c.name, c.help);
        for (const char* name : c.options)
            s->add_option(std::string("--") + name, flag_values[name], option_help().at(name));
        s->add_option("--config", config_path, "key = value file; flags override it");
        s->add_option("--out", out_path, "write the JSON report here");
        s->add_flag("--json", json_mode, "print the JSON report to stdout");
        s->add_option("--threads", threads, "OpenMP threads (0 keeps the default)")
            ->check(CLI::NonNegativeNumber);
        subs.push_back({s, &c});
    }

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    const Sub* chosen = nullptr;
    for (const Sub& s : subs)
        if (s.app->parsed()) chosen = &s;

    ExperimentReport report;
    report.command = chosen->cmd->name;
    try {
        RunConfig merged;
        if (!config_path.empty()) {
            const RunConfig file = read_config_file(config_path);
            std::set<std::string> allowed(chosen->cmd->options.begin(), chosen->cmd->options.end());
            for (const auto& [k, v] : file) {
                if (k == "json") {
                    json_mode = json_mode || v == "true" || v == "1";
                } else if (k == "threads") {
                    if (chosen->app->get_option("--threads")->count() == 0)
                        threads = static_cast<int>(parse_count(v, "threads"));
                } else if (k == "out") {
                    if (out_path.empty()) out_path = v;
                } else if (allowed.count(k)) {
                    merged[k] = v;
                }
            }
        }
        for (const char* name : chosen->cmd->options)
            if (chosen->app->get_option(std::string("--") + name)->count() > 0)
                merged[name] = flag_values[name];
        report.config = merged;
        if (threads > 0) {
            omp_set_num_threads(threads);
            report.config["threads"] = std::to_string(threads);
        }

        const Args a(report.config);
        CommandResult o = dispatch(report.command, a, json_mode, out);
        report.status = o.status;
        report.results = std::move(o.results);
        report.warnings = std::move(o.warnings);
        if (!json_mode) out << o.summary << '\n';
    } catch (const SearchExhausted& e) {
        report.status = RunStatus::Inconclusive;
        report.error = e.what();
    } catch (const std::exception& e) {
        report.status = RunStatus::Error;
        report.error = e.what();
    }
    report.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    if (!report.error.empty()) err << "error: " << report.error << '\n';
    const std::string text = report.to_json().dump(2);
    if (json_mode) out << text << '\n';
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        if (!os) {
            err << "error: cannot write '" << out_path << "'\n";
            return 1;
        }
        os << text << '\n';
    }
    return exit_code(report.status);
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace boldplay
