#include "gwtails/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwtails/bounds.hpp"
#include "gwtails/classes.hpp"
#include "gwtails/error.hpp"
#include "gwtails/estimators.hpp"
#include "gwtails/numeric.hpp"
#include "gwtails/parallel.hpp"
#include "gwtails/simulator.hpp"

namespace gwtails {

using nlohmann::json;

namespace {

const std::vector<std::string> kFields = {
    "subcommand", "law",   "n",     "x",     "x_geo", "replicas", "seed",      "workers",  "eps",
    "method",     "approx", "out",  "population_cap", "track_x", "track_eps", "shift", "y", "lambda",
    "c",          "check", "grid_max", "delta", "mat_c", "gamma", "c1", "x0"};

std::pair<int, int> line_column(const std::string& text, std::size_t byte)
{
    int line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        parts.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    return parts;
}

double to_real(const std::string& s, const std::string& field)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("malformed number for " + field, 1, 1, s);
    }
    if (pos != s.size()) throw ParseError("malformed number for " + field, 1, static_cast<int>(pos) + 1, s);
    return v;
}

std::int64_t to_integer(const std::string& s, const std::string& field)
{
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("malformed integer for " + field, 1, 1, s);
    }
    if (pos != s.size()) throw ParseError("malformed integer for " + field, 1, static_cast<int>(pos) + 1, s);
    return v;
}

Horizon parse_horizon(const std::string& s)
{
    if (s == "inf" || s == "infinity") return std::nullopt;
    const auto v = to_integer(s, "n");
    return static_cast<int>(v);
}

std::vector<Horizon> parse_horizon_list(const std::string& s)
{
    std::vector<Horizon> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_horizon(part));
    return out;
}

json horizon_json(const Horizon& h) { return h ? json(*h) : json("inf"); }

Horizon horizon_from_json(const json& j)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::nullopt;
        throw Error(ErrorCode::BadParam, "n must be an integer or \"inf\"");
    }
    if (!j.is_number_integer()) throw Error(ErrorCode::BadParam, "n must be an integer or \"inf\"");
    return j.get<int>();
}

template <class T>
T get_field(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadParam, std::string("config field '") + key + "': " + e.what());
    }
}

double shift_value(const std::string& shift, double m)
{
    if (shift == "m") return m;
    if (shift == "2m") return 2.0 * m;
    return to_real(shift, "shift");
}

void write_text(const std::string& path, const std::string& body)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::BadParam, "cannot open output file " + path);
    f << body;
    if (!f) throw Error(ErrorCode::BadParam, "failed writing " + path);
}

json report_json(const ClassReport& r)
{
    json j;
    j["class_name"] = to_string(r.class_name);
    j["grid"] = r.grid;
    j["statistic"] = r.statistic;
    j["verdict"] = to_string(r.verdict);
    if (r.witness) {
        j["witness"] = {{"x", r.witness->x}, {"statistic", r.witness->statistic}};
        if (r.witness->y) j["witness"]["y"] = *r.witness->y;
    } else {
        j["witness"] = nullptr;
    }
    j["parameters"] = r.parameters;
    j["note"] = r.note;
    return j;
}

std::vector<int> finite_horizons(const ExperimentConfig& c)
{
    std::vector<int> ns;
    for (const auto& h : c.n) {
        if (!h) throw Error(ErrorCode::BadParam, "subcommand " + to_string(c.subcommand) + " needs finite n");
        ns.push_back(*h);
    }
    return ns;
}

std::string regime_guard(const OffspringLaw& law, ApproxMethod method, std::ostream& log)
{
    const RegimeTag tag = classify_regime(law);
    if (regime_supports(tag.regime, method)) return "";
    std::string w = "warning: law classified as " + to_string(tag.regime) + "; method " + to_string(method) +
                    " is outside its regime";
    log << w << "\n";
    return w;
}

//---------------------------------------------------------------------------//
// Subcommand bodies; each returns CSV (or JSON) text.
//---------------------------------------------------------------------------//

std::string run_simulate(const ExperimentConfig& c, const OffspringLaw& law, const MonteCarloOptions& mc)
{
    const auto ns = finite_horizons(c);
    if (ns.size() != 1) throw Error(ErrorCode::BadParam, "simulate takes a single n");
    const int n = ns.front();
    std::ostringstream csv;
    csv << "replica,k,Z_k,W_k,max_offspring,b_k,a_k\n";
    const double m = law.mean();
    EventOptions ev;
    if (c.track_x) {
        ev.x = *c.track_x;
        ev.eps = c.track_eps;
    }
    for (std::int64_t r = 0; r < c.replicas; ++r) {
        RandomStream rng(mc.seed, mc.lane, static_cast<std::uint64_t>(r));
        TrajectoryRecord rec;
        EventFlags flags;
        if (c.track_x) {
            std::tie(rec, flags) = simulate_with_events(law, n, ev, rng, mc.sim);
        } else {
            rec = simulate(law, n, rng, mc.sim);
        }
        for (int k = 0; k <= n; ++k) {
            const auto i = static_cast<std::size_t>(k);
            csv << r << ',' << k << ',' << rec.sizes[i] << ',' << format_real(rec.w_values[i]) << ',';
            if (k < n) csv << rec.gen_max_offspring[i];
            csv << ',';
            if (c.track_x) csv << (flags.b(k) ? 1 : 0);
            csv << ',';
            if (c.track_x && k < n) csv << (flags.a(k) ? 1 : 0);
            csv << '\n';
        }
    }
    (void)m;
    return csv.str();
}

std::string run_estimate(const ExperimentConfig& c, const OffspringLaw& law, const MonteCarloOptions& mc)
{
    const auto ns = finite_horizons(c);
    const auto method = parse_estimator_method(c.method);
    if (!method) throw Error(ErrorCode::BadParam, "unknown estimator method '" + c.method + "'");
    int max_n = 0;
    for (int n : ns) max_n = std::max(max_n, n);
    std::ostringstream csv;
    csv << "n,x,method,estimate,se,ci_low,ci_high,replicas";
    if (*method == EstimatorMethod::BigJumpDecomposition)
        for (int k = 0; k < max_n; ++k) csv << ",breakdown_k" << k;
    csv << '\n';
    std::uint32_t cell = 0;
    for (int n : ns) {
        for (double x : c.resolved_x()) {
            MonteCarloOptions opt = mc;
            opt.lane = mc.lane + 64u * cell++;
            EstimatorResult r;
            switch (*method) {
                case EstimatorMethod::NaiveMC: r = naive_mc(law, n, x, c.replicas, opt); break;
                case EstimatorMethod::BigJumpDecomposition:
                    r = big_jump_estimator(law, n, x, c.eps, c.replicas, opt);
                    break;
                case EstimatorMethod::ExactConvolution:
                    r = exact_convolution(law, n, integer_threshold(std::pow(law.mean(), n) * x));
                    break;
            }
            csv << n << ',' << format_real(x) << ',' << to_string(r.method) << ',' << format_real(r.estimate) << ','
                << format_real(r.std_error) << ',' << format_real(r.ci_low) << ',' << format_real(r.ci_high) << ','
                << r.replicas_used;
            if (*method == EstimatorMethod::BigJumpDecomposition) {
                for (int k = 0; k < max_n; ++k) {
                    csv << ',';
                    if (k < n) csv << format_real((*r.per_generation_breakdown)[static_cast<std::size_t>(k)]);
                }
            }
            csv << '\n';
        }
    }
    return csv.str();
}

std::string run_approximate(const ExperimentConfig& c, const OffspringLaw& law, std::vector<std::string>& warnings,
                            std::ostream& log)
{
    const auto method = parse_approx_method(c.approx);
    if (!method) throw Error(ErrorCode::BadParam, "unknown approximation method '" + c.approx + "'");
    if (auto w = regime_guard(law, *method, log); !w.empty()) warnings.push_back(w);
    std::ostringstream csv;
    csv << "x,n,method,value,truncation_terms,truncation_bound\n";
    for (const auto& n : c.n) {
        for (double x : c.resolved_x()) {
            const TailApproximation a = approximate(law, *method, n, x);
            csv << format_real(x) << ',' << (n ? std::to_string(*n) : "inf") << ',' << to_string(a.method) << ','
                << format_real(a.value) << ',' << a.truncation_terms << ',' << format_real(a.truncation_bound)
                << '\n';
        }
    }
    return csv.str();
}

std::string run_diagnose(const ExperimentConfig& c, const OffspringLaw& law)
{
    const auto grid = class_grid_up_to(c.grid_max);
    json out;
    out["law"] = law.spec();
    json reports = json::array();
    const std::string& k = c.check;
    const bool all = k == "all";
    if (all || k == "dominated") reports.push_back(report_json(check_dominated_varying(law, c.grid_max)));
    if (all || k == "irv") reports.push_back(report_json(check_intermediate_rv(law, 0.01, grid)));
    if (all || k == "matuszewska") reports.push_back(report_json(check_matuszewska(law, c.delta, c.mat_c, grid)));
    if (all || k == "insensitive") reports.push_back(report_json(check_insensitive(law, c.gamma, grid)));
    if (all || k == "sstar") reports.push_back(report_json(check_sstar(law, grid)));
    if (all || k == "rapid")
        reports.push_back(report_json(check_rapid_variation(law, c.eps > 0.0 ? c.eps : 0.1, grid)));
    if (all || k == "hazard_increment")
        reports.push_back(
            report_json(check_hazard_increment(law, c.c1, static_cast<std::int64_t>(std::min(c.grid_max, 1e7)))));
    if (all || k == "hazard_slope")
        reports.push_back(report_json(check_hazard_slope(law, c.eps > 0.0 ? c.eps : 0.1, c.x0, grid)));
    if (all || k == "regime") {
        const RegimeTag tag = classify_regime(law, c.grid_max);
        json r;
        r["regime"] = to_string(tag.regime);
        r["tail_index"] = tag.tail_index;
        r["hazard_index"] = tag.hazard_index;
        r["at_weibull_threshold"] = tag.at_weibull_threshold;
        r["note"] = tag.note;
        json just = json::array();
        for (const auto& rep : tag.justification) just.push_back(report_json(rep));
        r["justification"] = just;
        out["regime"] = r;
    }
    if (reports.empty() && k != "regime") throw Error(ErrorCode::BadParam, "unknown check '" + k + "'");
    out["reports"] = reports;
    return out.dump(2) + "\n";
}

std::string run_bound(const ExperimentConfig& c, const OffspringLaw& law)
{
    const auto ns = finite_horizons(c);
    const CenteredSummandLaw summand(law, shift_value(c.shift, law.mean()));
    std::ostringstream csv;
    csv << "n,x,prop,bound,jump_term,chernoff_term,lambda,y,validity,raw_chebyshev\n";
    for (int n : ns) {
        for (double x : c.resolved_x()) {
            BoundResult b;
            if (c.method == "22") {
                b = prop22_bound(summand, n, x, c.eps, c.c);
            } else if (c.method == "23") {
                b = prop23_bound(summand, n, x, c.y.value_or((1.0 - c.eps) * x), c.eps, c.c);
            } else if (c.method == "chebyshev") {
                const double y = c.y.value_or(x / 2.0);
                const double lambda = c.lambda ? *c.lambda : 2.0 * summand.hazard(x) / x;
                b = chebyshev_sum_bound(summand, n, x, y, lambda);
            } else {
                throw Error(ErrorCode::BadParam, "unknown bound '" + c.method + "' (use 22, 23 or chebyshev)");
            }
            csv << n << ',' << format_real(x) << ',' << c.method << ',' << format_real(b.bound_value) << ','
                << format_real(b.jump_term) << ',' << format_real(b.chernoff_term) << ','
                << format_real(b.lambda_used) << ',' << format_real(b.y_used) << ',' << to_string(b.validity) << ','
                << format_real(b.raw_chebyshev) << '\n';
        }
    }
    return csv.str();
}

std::string run_compare(const ExperimentConfig& c, const OffspringLaw& law, const MonteCarloOptions& mc,
                        std::vector<std::string>& warnings, std::ostream& log)
{
    const auto ns = finite_horizons(c);
    const auto method = parse_approx_method(c.approx);
    if (!method) throw Error(ErrorCode::BadParam, "unknown approximation method '" + c.approx + "'");
    const auto estimator = parse_estimator_method(c.method);
    if (!estimator) throw Error(ErrorCode::BadParam, "unknown estimator method '" + c.method + "'");
    if (auto w = regime_guard(law, *method, log); !w.empty()) warnings.push_back(w);
    const auto rows = compare_to_asymptotics(law, ns, c.resolved_x(), *method, *estimator, c.replicas, mc, c.eps);
    std::ostringstream csv;
    csv << "n,x,estimator,method,estimate,se,ci_low,ci_high,approximation,ratio\n";
    for (const auto& r : rows) {
        csv << r.n << ',' << format_real(r.x) << ',' << to_string(r.estimate.method) << ','
            << to_string(r.approximation.method) << ',' << format_real(r.estimate.estimate) << ','
            << format_real(r.estimate.std_error) << ',' << format_real(r.estimate.ci_low) << ','
            << format_real(r.estimate.ci_high) << ',' << format_real(r.approximation.value) << ','
            << format_real(r.ratio) << '\n';
    }
    return csv.str();
}

}  // namespace

std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_string(Subcommand sub)
{
    switch (sub) {
        case Subcommand::Simulate: return "simulate";
        case Subcommand::Estimate: return "estimate";
        case Subcommand::Approximate: return "approximate";
        case Subcommand::Diagnose: return "diagnose";
        case Subcommand::Bound: return "bound";
        case Subcommand::Compare: return "compare";
    }
    return "unknown";
}

std::optional<Subcommand> parse_subcommand(const std::string& text)
{
    for (auto s : {Subcommand::Simulate, Subcommand::Estimate, Subcommand::Approximate, Subcommand::Diagnose,
                   Subcommand::Bound, Subcommand::Compare})
        if (text == to_string(s)) return s;
    return std::nullopt;
}

std::vector<double> ExperimentConfig::resolved_x() const
{
    if (x_geo) return geometric_grid(x_geo->start, x_geo->factor, x_geo->count);
    return x;
}

ExperimentConfig parse_config_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        const std::size_t at = e.byte > 0 ? std::min(e.byte - 1, text.size()) : 0;
        throw ParseError("malformed JSON", line, col, text.substr(at, 1));
    }
    if (!j.is_object()) throw ParseError("config must be a JSON object", 1, 1, text.substr(0, 1));
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(kFields.begin(), kFields.end(), key) == kFields.end())
            throw Error(ErrorCode::UnknownField, "unknown config field '" + key + "'");
    }

    ExperimentConfig c;
    if (j.contains("subcommand")) {
        const auto s = parse_subcommand(get_field<std::string>(j, "subcommand"));
        if (!s) throw Error(ErrorCode::BadParam, "unknown subcommand '" + j["subcommand"].dump() + "'");
        c.subcommand = *s;
    }
    if (j.contains("law")) c.law = get_field<std::string>(j, "law");
    if (j.contains("n")) {
        c.n.clear();
        if (j["n"].is_array())
            for (const auto& e : j["n"]) c.n.push_back(horizon_from_json(e));
        else
            c.n.push_back(horizon_from_json(j["n"]));
    }
    if (j.contains("x")) {
        if (j["x"].is_array())
            c.x = get_field<std::vector<double>>(j, "x");
        else
            c.x = {get_field<double>(j, "x")};
    }
    if (j.contains("x_geo") && !j["x_geo"].is_null()) {
        const json& g = j["x_geo"];
        c.x_geo = GeometricGridSpec{get_field<double>(g, "start"), get_field<double>(g, "factor"),
                                    get_field<int>(g, "count")};
    }
    if (j.contains("replicas")) c.replicas = get_field<std::int64_t>(j, "replicas");
    if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed");
    if (j.contains("workers")) c.workers = get_field<int>(j, "workers");
    if (j.contains("eps")) c.eps = get_field<double>(j, "eps");
    if (j.contains("method")) c.method = get_field<std::string>(j, "method");
    if (j.contains("approx")) c.approx = get_field<std::string>(j, "approx");
    if (j.contains("out")) c.out = get_field<std::string>(j, "out");
    if (j.contains("population_cap")) c.population_cap = get_field<std::int64_t>(j, "population_cap");
    if (j.contains("track_x") && !j["track_x"].is_null()) c.track_x = get_field<double>(j, "track_x");
    if (j.contains("track_eps")) c.track_eps = get_field<double>(j, "track_eps");
    if (j.contains("shift")) c.shift = j["shift"].is_number() ? format_real(j["shift"].get<double>()) : get_field<std::string>(j, "shift");
    if (j.contains("y") && !j["y"].is_null()) c.y = get_field<double>(j, "y");
    if (j.contains("lambda") && !j["lambda"].is_null()) c.lambda = get_field<double>(j, "lambda");
    if (j.contains("c")) c.c = get_field<double>(j, "c");
    if (j.contains("check")) c.check = get_field<std::string>(j, "check");
    if (j.contains("grid_max")) c.grid_max = get_field<double>(j, "grid_max");
    if (j.contains("delta")) c.delta = get_field<double>(j, "delta");
    if (j.contains("mat_c")) c.mat_c = get_field<double>(j, "mat_c");
    if (j.contains("gamma")) c.gamma = get_field<double>(j, "gamma");
    if (j.contains("c1")) c.c1 = get_field<double>(j, "c1");
    if (j.contains("x0")) c.x0 = get_field<double>(j, "x0");
    return c;
}

std::string config_to_json(const ExperimentConfig& c)
{
    json j;
    j["subcommand"] = to_string(c.subcommand);
    j["law"] = c.law;
    json n = json::array();
    for (const auto& h : c.n) n.push_back(horizon_json(h));
    j["n"] = n;
    j["x"] = c.x;
    if (c.x_geo) j["x_geo"] = {{"start", c.x_geo->start}, {"factor", c.x_geo->factor}, {"count", c.x_geo->count}};
    j["replicas"] = c.replicas;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["eps"] = c.eps;
    j["method"] = c.method;
    j["approx"] = c.approx;
    j["out"] = c.out;
    j["population_cap"] = c.population_cap;
    if (c.track_x) j["track_x"] = *c.track_x;
    j["track_eps"] = c.track_eps;
    j["shift"] = c.shift;
    if (c.y) j["y"] = *c.y;
    if (c.lambda) j["lambda"] = *c.lambda;
    j["c"] = c.c;
    j["check"] = c.check;
    j["grid_max"] = c.grid_max;
    j["delta"] = c.delta;
    j["mat_c"] = c.mat_c;
    j["gamma"] = c.gamma;
    j["c1"] = c.c1;
    j["x0"] = c.x0;
    return j.dump(2);
}

void validate_config(const ExperimentConfig& c)
{
    if (c.law.empty()) throw Error(ErrorCode::BadParam, "a law spec is required (--law)");
    (void)parse_law_spec(c.law);
    require(!c.n.empty(), "at least one n is required");
    for (const auto& h : c.n)
        if (h) require(*h >= 0, "n must be nonnegative");
    const auto xs = c.resolved_x();
    if (c.subcommand != Subcommand::Simulate && c.subcommand != Subcommand::Diagnose)
        require(!xs.empty(), "an x grid is required (--x or --x-geo)");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(std::isfinite(xs[i]), "x values must be finite");
        if (i) require(xs[i] > xs[i - 1], "x grid must be strictly increasing");
    }
    require(c.replicas >= 1, "replicas must be at least 1");
    require(c.workers >= 0, "workers must be nonnegative");
    require(c.population_cap >= 1, "population_cap must be at least 1");
}

std::optional<ExperimentConfig> parse_command_line(const std::vector<std::string>& args, std::ostream& out)
{
    CLI::App app{"Tail asymptotics toolkit for supercritical Galton-Watson processes", "gwtails"};
    app.set_version_flag("--version", kVersion);
    std::string sub, config_path, law, n, x, x_geo, method, prop, approx, out_path, track, shift, check;
    std::string replicas, seed, workers, eps, population_cap, y, lambda, c, grid_max, delta, mat_c, gamma, c1, x0;
    app.add_option("subcommand", sub, "simulate|estimate|approximate|diagnose|bound|compare")->required();
    app.add_option("--config", config_path, "JSON config file; flags override its fields");
    app.add_option("--law", law, "law spec, e.g. tuned(pareto(alpha=2), m=2)");
    app.add_option("--n", n, "horizon(s): N, inf, or a comma list");
    app.add_option("--x", x, "comma-separated thresholds");
    app.add_option("--x-geo", x_geo, "geometric grid start,factor,count");
    app.add_option("--replicas", replicas, "replicas (per k for bigjump)");
    app.add_option("--seed", seed, "64-bit seed (default 0 or $GWTAILS_SEED)");
    app.add_option("--workers", workers, "worker threads (default: logical cores)");
    app.add_option("--eps", eps, "epsilon");
    app.add_option("--method", method, "estimator (naive|bigjump|exact) or bound (22|23|chebyshev)");
    app.add_option("--prop", prop, "bound: 22|23|chebyshev");
    app.add_option("--approx", approx, "approximation tag for approximate/compare");
    app.add_option("--out", out_path, "output file");
    app.add_option("--population-cap", population_cap, "batching threshold for huge generations");
    app.add_option("--track-events", track, "simulate: x=X,eps=E");
    app.add_option("--shift", shift, "bound: m, 2m or a real shift");
    app.add_option("--y", y, "bound: truncation level y");
    app.add_option("--lambda", lambda, "bound: Chebyshev parameter");
    app.add_option("--c", c, "bound: range constant c");
    app.add_option("--check", check, "diagnose: check name or all");
    app.add_option("--grid-max", grid_max, "diagnose: grid maximum");
    app.add_option("--delta", delta, "diagnose: Matuszewska delta");
    app.add_option("--mat-c", mat_c, "diagnose: Matuszewska constant");
    app.add_option("--gamma", gamma, "diagnose: insensitivity exponent");
    app.add_option("--c1", c1, "diagnose: hazard increment constant");
    app.add_option("--x0", x0, "diagnose: hazard slope start");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw Error(ErrorCode::BadParam, e.what());
    }

    ExperimentConfig cfg;
    bool seed_given = false;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw Error(ErrorCode::BadParam, "cannot read config file " + config_path);
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = parse_config_json(ss.str());
        seed_given = ss.str().find("\"seed\"") != std::string::npos;
    }
    const auto s = parse_subcommand(sub);
    if (!s) throw Error(ErrorCode::BadParam, "unknown subcommand '" + sub + "'");
    cfg.subcommand = *s;
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--law")) cfg.law = law;
    if (given("--n")) cfg.n = parse_horizon_list(n);
    if (given("--x")) {
        cfg.x.clear();
        for (const auto& p : split(x, ',')) cfg.x.push_back(to_real(p, "x"));
        cfg.x_geo.reset();
    }
    if (given("--x-geo")) {
        const auto parts = split(x_geo, ',');
        if (parts.size() != 3) throw ParseError("--x-geo needs start,factor,count", 1, 1, x_geo);
        cfg.x_geo = GeometricGridSpec{to_real(parts[0], "x-geo"), to_real(parts[1], "x-geo"),
                                      static_cast<int>(to_integer(parts[2], "x-geo"))};
    }
    if (given("--replicas")) cfg.replicas = to_integer(replicas, "replicas");
    if (given("--seed")) {
        std::size_t pos = 0;
        try {
            cfg.seed = std::stoull(seed, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != seed.size() || seed.empty() || seed[0] == '-') throw ParseError("malformed seed", 1, 1, seed);
        seed_given = true;
    }
    if (!seed_given) {
        if (const char* env = std::getenv("GWTAILS_SEED")) {
            try {
                cfg.seed = std::stoull(env);
            } catch (const std::exception&) {
                throw Error(ErrorCode::BadParam, "GWTAILS_SEED is not an unsigned integer");
            }
        }
    }
    if (given("--workers")) cfg.workers = static_cast<int>(to_integer(workers, "workers"));
    if (given("--eps")) cfg.eps = to_real(eps, "eps");
    if (given("--method")) {
        if (cfg.subcommand == Subcommand::Approximate)
            cfg.approx = method;
        else
            cfg.method = method;
    }
    if (given("--prop")) cfg.method = prop;
    if (given("--approx")) cfg.approx = approx;
    if (given("--out")) cfg.out = out_path;
    if (given("--population-cap")) cfg.population_cap = to_integer(population_cap, "population-cap");
    if (given("--track-events")) {
        for (const auto& part : split(track, ',')) {
            const auto kv = split(part, '=');
            if (kv.size() != 2) throw ParseError("--track-events expects x=X,eps=E", 1, 1, part);
            if (kv[0] == "x")
                cfg.track_x = to_real(kv[1], "track-events x");
            else if (kv[0] == "eps")
                cfg.track_eps = to_real(kv[1], "track-events eps");
            else
                throw ParseError("unknown --track-events key", 1, 1, kv[0]);
        }
    }
    if (given("--shift")) cfg.shift = shift;
    if (given("--y")) cfg.y = to_real(y, "y");
    if (given("--lambda")) cfg.lambda = to_real(lambda, "lambda");
    if (given("--c")) cfg.c = to_real(c, "c");
    if (given("--check")) cfg.check = check;
    if (given("--grid-max")) cfg.grid_max = to_real(grid_max, "grid-max");
    if (given("--delta")) cfg.delta = to_real(delta, "delta");
    if (given("--mat-c")) cfg.mat_c = to_real(mat_c, "mat-c");
    if (given("--gamma")) cfg.gamma = to_real(gamma, "gamma");
    if (given("--c1")) cfg.c1 = to_real(c1, "c1");
    if (given("--x0")) cfg.x0 = to_real(x0, "x0");
    return cfg;
}

int run(const ExperimentConfig& config, std::ostream& log)
{
    const auto started = std::chrono::steady_clock::now();
    validate_config(config);
    const OffspringLaw law = build_law(parse_law_spec(config.law));

    MonteCarloOptions mc;
    mc.seed = config.seed;
    mc.workers = config.workers > 0 ? config.workers : default_workers();
    mc.sim.population_cap = config.population_cap;

    std::vector<std::string> warnings;
    std::string body;
    switch (config.subcommand) {
        case Subcommand::Simulate: body = run_simulate(config, law, mc); break;
        case Subcommand::Estimate: body = run_estimate(config, law, mc); break;
        case Subcommand::Approximate: body = run_approximate(config, law, warnings, log); break;
        case Subcommand::Diagnose: body = run_diagnose(config, law); break;
        case Subcommand::Bound: body = run_bound(config, law); break;
        case Subcommand::Compare: body = run_compare(config, law, mc, warnings, log); break;
    }
    write_text(config.out, body);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest;
    manifest["config"] = json::parse(config_to_json(config));
    manifest["resolved_law"] = law.spec();
    manifest["mean"] = law.mean();
    manifest["seed"] = config.seed;
    manifest["workers_resolved"] = mc.workers;
    manifest["wall_time_seconds"] = wall;
    manifest["versions"] = {{"gwtails", kVersion}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}};
    manifest["output"] = config.out;
    manifest["warnings"] = warnings;
    write_text(config.out + ".manifest.json", manifest.dump(2) + "\n");
    log << "wrote " << config.out << " (" << format_real(wall) << " s)\n";
    return 0;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    try {
        const auto config = parse_command_line(args, out);
        if (!config) return 0;
        return run(*config, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_parameter_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace gwtails
