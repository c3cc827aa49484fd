#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forestfire/analytic.hpp"
#include "forestfire/estimator.hpp"
#include "forestfire/fire.hpp"
#include "forestfire/green.hpp"
#include "forestfire/model.hpp"
#include "forestfire/validators.hpp"

#ifndef FORESTFIRE_VERSION
#define FORESTFIRE_VERSION "0.0.0"
#endif

namespace forestfire::cli {

using nlohmann::json;

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_config = 2, exit_partial = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads the members of one JSON object and rejects any it did not ask for.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j.is_object())
            throw ConfigError(where_ + ": expected an object");
    }

    bool has(const std::string& key)
    {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    template <class T>
    T get(const std::string& key, T fallback)
    {
        return has(key) ? convert<T>(key) : fallback;
    }

    template <class T>
    T require(const std::string& key)
    {
        if (!has(key))
            throw ConfigError(where_ + ": missing required key '" + key + "'");
        return convert<T>(key);
    }

    Fields object(const std::string& key)
    {
        seen_.insert(key);
        static const json empty = json::object();
        return Fields(j_.contains(key) && !j_.at(key).is_null() ? j_.at(key) : empty, where_ + "." + key);
    }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }

private:
    template <class T>
    T convert(const std::string& key) const
    {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

struct RateSpec {
    std::string kind = "constant";
    double value = 1.0;
    std::vector<double> values;
    double c1 = 1.0;
    double c2 = 1.0;
    std::uint64_t seed = 0;
    std::vector<Site> permutation;

    RateProfile build() const
    {
        RateProfile p = RateProfile::constant(1.0);
        if (kind == "constant")
            p = RateProfile::constant(value);
        else if (kind == "explicit")
            p = RateProfile::explicit_list(values, c1, c2);
        else if (kind == "periodic")
            p = RateProfile::periodic(values, c1, c2);
        else if (kind == "iid_uniform")
            p = RateProfile::iid_uniform(c1, c2, seed);
        else
            throw ConfigError("model.rates.kind: expected constant, explicit, periodic or iid_uniform");
        return permutation.empty() ? p : p.permuted(permutation);
    }
};

struct RunConfig {
    // model
    std::string space = "discrete";
    unsigned range = 1;
    RateSpec rates;
    double intensity = 1.0;
    double connect_distance = 1.0;
    double ignite_distance = 1.0;
    double time_cap = 1e4;
    Site site_cap = Site{1} << 30;

    std::uint64_t seed = 1;
    std::size_t reps = 1000;
    unsigned workers = 0;  // 0: one per hardware thread
    std::string output_path;
    std::string format = "csv";
    bool emit_plot_data = false;

    // run
    std::vector<double> targets{16.0, 256.0};
    std::optional<double> horizon;
    bool trace = false;
    bool green = true;

    // schedule
    double gamma = 1.5;
    unsigned k_max = 5;

    // validate
    std::string suite = "oracles";
    unsigned k = 4;
    Site n = 10000;
    double epsilon = 0.2;
    std::size_t cycles = 1000;
    std::vector<double> validate_targets{16.0, 256.0, 4096.0};
    double validate_horizon = 1e4;
    std::vector<double> times{1.0, 2.0, 3.0};
    std::optional<double> ks_time;
    Site x = 2;
    std::vector<Site> permutation{2, 1};

    // sweep
    std::vector<double> x_grid{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};

    ModelConfig model() const
    {
        ModelConfig m;
        if (space == "discrete")
            m.space = Space::discrete;
        else if (space == "continuous")
            m.space = Space::continuous;
        else
            throw ConfigError("model.space: expected discrete or continuous");
        m.range = range;
        m.profile = rates.build();
        m.intensity = intensity;
        m.connect_distance = connect_distance;
        m.ignite_distance = ignite_distance;
        m.time_cap = time_cap;
        m.site_cap = site_cap;
        m.validate();
        return m;
    }

    unsigned worker_count() const
    {
        return workers ? workers : std::max(1u, std::thread::hardware_concurrency());
    }
};

inline const std::set<std::string>& suite_names()
{
    static const std::set<std::string> names{"prop1",       "thresholds", "lemma1",  "alpha_k",
                                             "growth",      "permutation", "oracles", "continuous-moments"};
    return names;
}

inline void check_config(const RunConfig& c)
{
    if (!(c.gamma > 1.0 && c.gamma < 2.0))
    {
        std::ostringstream g;
        g << c.gamma;
        throw ConfigError("gamma = " + g.str() + " is invalid: the level ladder needs γ ∈ (1,2)");
    }
    if (c.format != "csv" && c.format != "json")
        throw ConfigError("output.format: expected csv or json");
    if (!suite_names().count(c.suite))
        throw ConfigError("validate.suite: unknown suite '" + c.suite + "'");
    if (c.reps < 2)
        throw ConfigError("reps must be >= 2");
    if (c.k < 1 || c.k_max < 1)
        throw ConfigError("k and k_max must be >= 1");
    if (!(c.epsilon >= 0.0 && c.epsilon < 1.0))
        throw ConfigError("validate.epsilon must lie in [0, 1)");
    for (double t : c.targets)
        if (!(t > 0.0))
            throw ConfigError("run.targets must be > 0");
    try {
        (void)c.model();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

inline RunConfig parse_config(const json& j)
{
    RunConfig c;
    Fields root(j, "config");
    {
        auto m = root.object("model");
        c.space = m.get("space", c.space);
        c.range = m.get("range", c.range);
        {
            auto r = m.object("rates");
            c.rates.kind = r.get("kind", c.rates.kind);
            c.rates.value = r.get("value", c.rates.value);
            c.rates.values = r.get("values", c.rates.values);
            c.rates.c1 = r.get("c1", c.rates.c1);
            c.rates.c2 = r.get("c2", c.rates.c2);
            c.rates.seed = r.get("seed", c.rates.seed);
            c.rates.permutation = r.get("permutation", c.rates.permutation);
            r.finish();
        }
        c.intensity = m.get("intensity", c.intensity);
        c.connect_distance = m.get("connect_distance", c.connect_distance);
        c.ignite_distance = m.get("ignite_distance", c.ignite_distance);
        c.time_cap = m.get("time_cap", c.time_cap);
        c.site_cap = m.get("site_cap", c.site_cap);
        m.finish();
    }
    c.seed = root.get("seed", c.seed);
    c.reps = root.get("reps", c.reps);
    c.workers = root.get("workers", c.workers);
    {
        auto o = root.object("output");
        c.output_path = o.get("path", c.output_path);
        c.format = o.get("format", c.format);
        c.emit_plot_data = o.get("emit_plot_data", c.emit_plot_data);
        o.finish();
    }
    {
        auto r = root.object("run");
        c.targets = r.get("targets", c.targets);
        if (r.has("horizon"))
            c.horizon = r.require<double>("horizon");
        c.trace = r.get("trace", c.trace);
        c.green = r.get("green", c.green);
        r.finish();
    }
    {
        auto s = root.object("schedule");
        c.gamma = s.get("gamma", c.gamma);
        c.k_max = s.get("k_max", c.k_max);
        s.finish();
    }
    {
        auto v = root.object("validate");
        c.suite = v.get("suite", c.suite);
        c.k = v.get("k", c.k);
        c.n = v.get("n", c.n);
        c.epsilon = v.get("epsilon", c.epsilon);
        c.cycles = v.get("cycles", c.cycles);
        c.validate_targets = v.get("targets", c.validate_targets);
        c.validate_horizon = v.get("horizon", c.validate_horizon);
        c.times = v.get("times", c.times);
        if (v.has("ks_time"))
            c.ks_time = v.require<double>("ks_time");
        c.x = v.get("x", c.x);
        c.permutation = v.get("permutation", c.permutation);
        v.finish();
    }
    {
        auto s = root.object("sweep");
        c.x_grid = s.get("x_grid", c.x_grid);
        s.finish();
    }
    root.finish();
    check_config(c);
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

/// Every field, defaults included, so equal effective configs serialise
/// identically. The worker count and output location are excluded: they
/// do not affect results.
inline json to_json(const RunConfig& c)
{
    json rates = {{"kind", c.rates.kind}, {"value", c.rates.value}, {"values", c.rates.values}, {"c1", c.rates.c1},
                  {"c2", c.rates.c2},     {"seed", c.rates.seed},   {"permutation", c.rates.permutation}};
    json j;
    j["model"] = {{"space", c.space},
                  {"range", c.range},
                  {"rates", rates},
                  {"intensity", c.intensity},
                  {"connect_distance", c.connect_distance},
                  {"ignite_distance", c.ignite_distance},
                  {"time_cap", c.time_cap},
                  {"site_cap", c.site_cap}};
    j["seed"] = c.seed;
    j["reps"] = c.reps;
    j["run"] = {{"targets", c.targets}, {"trace", c.trace}, {"green", c.green}};
    j["run"]["horizon"] = c.horizon ? json(*c.horizon) : json(nullptr);
    j["schedule"] = {{"gamma", c.gamma}, {"k_max", c.k_max}};
    j["validate"] = {{"suite", c.suite},   {"k", c.k},
                     {"n", c.n},           {"epsilon", c.epsilon},
                     {"cycles", c.cycles}, {"targets", c.validate_targets},
                     {"horizon", c.validate_horizon}, {"times", c.times},
                     {"x", c.x},           {"permutation", c.permutation}};
    j["validate"]["ks_time"] = c.ks_time ? json(*c.ks_time) : json(nullptr);
    j["sweep"] = {{"x_grid", c.x_grid}};
    return j;
}

/// FNV-1a (64 bit) of the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const RunConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

// ---------------------------------------------------------------------------
// Output

/// Shortest decimal that reads back to the same double; empty for NaN.
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::string> column_docs;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline std::string provenance_line(const RunConfig& c)
{
    return "config_hash=" + config_hash(c) + " seed=" + std::to_string(c.seed) + " version=" FORESTFIRE_VERSION;
}

inline void write_csv(std::ostream& out, const Table& t, const RunConfig& c)
{
    out << "# forestfire " << t.title << '\n';
    out << "# " << provenance_line(c) << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << "# " << t.columns[i] << ": " << (i < t.column_docs.size() ? t.column_docs[i] : "") << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

inline json table_json(const Table& t, const RunConfig& c)
{
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < t.columns.size() && i < row.size(); ++i)
            r[t.columns[i]] = row[i];
        rows.push_back(r);
    }
    return {{"title", t.title},     {"config_hash", config_hash(c)}, {"seed", c.seed},
            {"version", FORESTFIRE_VERSION}, {"rows", rows}};
}

inline json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json report_json(const Report& r, const RunConfig& c)
{
    json checks = json::array();
    for (const auto& ch : r.checks)
        checks.push_back({{"id", ch.id},
                          {"kind", to_string(ch.kind)},
                          {"value", number_json(ch.value)},
                          {"reference", number_json(ch.reference)},
                          {"margin", number_json(ch.margin)},
                          {"pass", ch.pass},
                          {"note", ch.note}});
    return {{"suite", r.suite},         {"config_hash", config_hash(c)}, {"seed", r.seed},
            {"reps", r.reps},           {"censored", r.censored},        {"hard_pass", r.hard_pass()},
            {"version", FORESTFIRE_VERSION}, {"checks", checks}};
}

/// Writes to `path`, or to `fallback` when path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write)
{
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    write(out);
}

inline void emit_table(const Table& t, const RunConfig& c, std::ostream& fallback)
{
    emit(c.output_path, fallback, [&](std::ostream& out) {
        if (c.format == "json")
            out << table_json(t, c).dump(2) << '\n';
        else
            write_csv(out, t, c);
    });
}

/// Tidy long-format companion file <out>.plot.csv (series, x, y, stderr).
inline void emit_plot(const Table& plot, const RunConfig& c, std::ostream& fallback)
{
    if (!c.emit_plot_data)
        return;
    emit(c.output_path.empty() ? std::string() : c.output_path + ".plot.csv", fallback,
         [&](std::ostream& out) { write_csv(out, plot, c); });
}

inline Table plot_table()
{
    return {"plot data", {"series", "x", "y", "stderr"}, {"curve name", "abscissa", "ordinate", "standard error"}, {}};
}

inline std::vector<std::string> estimate_row(const std::string& quantity, const std::string& x,
                                             const EstimatorResult& e)
{
    return {quantity,           x, format_number(e.mean), format_number(e.std_error), format_number(std::uint64_t(e.reps)),
            format_number(std::uint64_t(e.censored)), format_number(e.master_seed)};
}

inline Table estimate_table(std::string title)
{
    return {std::move(title),
            {"quantity", "x", "estimate", "stderr", "reps", "censored", "seed"},
            {"estimated quantity", "grid point (target site or position)", "Monte Carlo mean",
             "sample standard deviation / sqrt(reps)", "uncensored replications", "censored replications",
             "master seed"},
            {}};
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_run(const RunConfig& c, std::ostream& out)
{
    const ModelConfig model = c.model();
    const FireStop stop{.targets = c.targets,
                        .horizon = c.horizon.value_or(std::numeric_limits<double>::infinity())};
    struct Rep {
        std::vector<std::optional<double>> tau, tau_green;
    };
    auto reps = run_replications<Rep>(c.reps, c.seed, c.worker_count(), [&](std::uint64_t s, std::size_t) {
        Rep rep;
        rep.tau.resize(c.targets.size());
        rep.tau_green.resize(c.targets.size());
        try {
            if (model.space == Space::discrete) {
                const DiscreteNoise noise(s, model.profile);
                const auto trace = run_fire(noise, model, stop);
                for (std::size_t i = 0; i < c.targets.size(); ++i) {
                    rep.tau[i] = trace.tau_of(c.targets[i]);
                    if (c.green)
                        rep.tau_green[i] = simulate_tau_green(noise, model, static_cast<Site>(c.targets[i]));
                }
            } else {
                const ContinuousNoise noise(s, model.intensity);
                const auto trace = run_fire(noise, model, stop);
                for (std::size_t i = 0; i < c.targets.size(); ++i) {
                    rep.tau[i] = trace.tau_of(c.targets[i]);
                    if (c.green)
                        rep.tau_green[i] = simulate_tau_green_cont(noise, model, c.targets[i]);
                }
            }
        } catch (const HorizonExceeded&) {
        }
        return rep;
    });
    Table table = estimate_table("run: first burning times");
    Table plot = plot_table();
    std::size_t censored = 0;
    auto sorted = c.targets;
    std::sort(sorted.begin(), sorted.end());
    for (double x : sorted) {
        const auto i = static_cast<std::size_t>(std::find(c.targets.begin(), c.targets.end(), x) - c.targets.begin());
        std::vector<std::optional<double>> fire(c.reps), green(c.reps);
        for (std::size_t j = 0; j < c.reps; ++j) {
            fire[j] = reps[j].tau[i];
            green[j] = reps[j].tau_green[i];
        }
        const auto e = summarize(fire, c.seed, "tau");
        censored += e.censored;
        table.add(estimate_row("tau", format_number(x), e));
        plot.add({"tau", format_number(x), format_number(e.mean), format_number(e.std_error)});
        if (c.green) {
            const auto g = summarize(green, c.seed, "tau_green");
            table.add(estimate_row("tau_green", format_number(x), g));
            plot.add({"tau_green", format_number(x), format_number(g.mean), format_number(g.std_error)});
        }
    }
    emit_table(table, c, out);
    emit_plot(plot, c, out);

    if (c.trace) {
        // Full trace of replication 0.
        const std::uint64_t s0 = replication_seed(c.seed, 0);
        FireTrace trace;
        try {
            trace = model.space == Space::discrete ? run_fire(DiscreteNoise(s0, model.profile), model, stop)
                                                   : run_fire(ContinuousNoise(s0, model.intensity), model, stop);
        } catch (const HorizonExceeded&) {
            trace.complete = false;
        }
        Table events{"trace: burn events of replication 0",
                     {"event_index", "time", "rightmost_burnt"},
                     {"ignition count from 1", "ignition time", "right-most burnt point, clamped to the largest target"},
                     {}};
        for (std::size_t i = 0; i < trace.burns.size(); ++i)
            events.add({format_number(std::uint64_t(i + 1)), format_number(trace.burns[i].time),
                        format_number(trace.burns[i].rightmost)});
        Table taus{"trace: first burning times of replication 0",
                   {"target_x", "tau_x"},
                   {"target", "first time the target burns (empty if unreached)"},
                   {}};
        for (const auto& e : trace.tau)
            taus.add({format_number(e.target), e.tau ? format_number(*e.tau) : ""});
        const std::string base = c.output_path;
        emit(base.empty() ? base : base + ".trace.csv", out, [&](std::ostream& o) { write_csv(o, events, c); });
        emit(base.empty() ? base : base + ".trace_tau.csv", out, [&](std::ostream& o) { write_csv(o, taus, c); });
        const json summary = {{"config_hash", config_hash(c)},       {"seed", c.seed},
                              {"replication_seed", s0},              {"ignitions", trace.burns.size()},
                              {"records", trace.records.size()},     {"complete", trace.complete},
                              {"version", FORESTFIRE_VERSION}};
        emit(base.empty() ? base : base + ".trace.json", out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
        if (!trace.complete)
            censored += 1;
    }
    return censored ? exit_partial : exit_ok;
}

inline int cmd_schedule(const RunConfig& c, std::ostream& out)
{
    const ModelConfig model = c.model();
    if (model.space != Space::discrete)
        throw ConfigError("schedule is defined for the discrete model");
    std::vector<analytic::ScheduleEntry> entries;
    bool partial = false;
    try {
        entries = analytic::schedule(model.profile, model.range, c.gamma, c.k_max, model.site_cap, &entries);
    } catch (const HorizonExceeded&) {
        partial = true;
    }
    Table table{"schedule: level ladder",
                {"k", "gamma_k", "n_k", "T_k", "T_k_minus_gamma_k"},
                {"level", "gamma^k", "least n with f_n(gamma^k) >= 1/2", "t_*(n_k, 1/2)", "T_k - gamma^k"},
                {}};
    Table plot = plot_table();
    for (const auto& e : entries) {
        table.add({format_number(std::uint64_t(e.k)), format_number(e.gamma_k), format_number(std::uint64_t(e.n_k)),
                   format_number(e.T_k), format_number(e.T_k - e.gamma_k)});
        plot.add({"n_k", format_number(std::uint64_t(e.k)), format_number(static_cast<double>(e.n_k)), ""});
        plot.add({"T_k", format_number(std::uint64_t(e.k)), format_number(e.T_k), ""});
    }
    emit_table(table, c, out);
    emit_plot(plot, c, out);
    return partial ? exit_partial : exit_ok;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out)
{
    const ModelConfig model = c.model();
    const auto study = scaling_study(model, c.x_grid, c.reps, c.seed, c.worker_count());
    Table table = estimate_table("sweep: E tau_x over the grid");
    Table plot = plot_table();
    for (const auto& row : study.rows) {
        table.add(estimate_row("tau", format_number(row.x), row.tau));
        plot.add({"tau", format_number(row.x), format_number(row.tau.mean), format_number(row.tau.std_error)});
    }
    table.add({"kappa_hat", "", format_number(study.kappa_hat), "", format_number(std::uint64_t(c.reps)),
               format_number(std::uint64_t(study.censored)), format_number(c.seed)});
    table.add({"min_tau_over_log_x", "", format_number(study.min_tau_over_log_x), "",
               format_number(std::uint64_t(c.reps)), format_number(std::uint64_t(study.censored)),
               format_number(c.seed)});
    emit_table(table, c, out);
    emit_plot(plot, c, out);
    return study.censored ? exit_partial : exit_ok;
}

inline Report run_suite(const RunConfig& c)
{
    const ModelConfig model = c.model();
    const unsigned w = c.worker_count();
    if (c.suite == "prop1")
        return validate_prop1(model, c.validate_targets, c.validate_horizon, c.reps, c.seed, w);
    if (c.suite == "thresholds")
        return validate_thresholds(model, {.n = c.n, .epsilon = c.epsilon, .gamma = c.gamma, .k = c.k}, c.reps, c.seed,
                                   w);
    if (c.suite == "lemma1")
        return validate_lemma1(model, {.gamma = c.gamma, .k = c.k, .cycles = c.cycles, .check_domination = true},
                               c.seed);
    if (c.suite == "alpha_k") {
        const auto e = estimate_alpha_k(model, {.gamma = c.gamma, .k = c.k}, c.reps, c.seed, w);
        Report r{"alpha_k", c.seed, c.reps, e.censored, {}};
        r.checks.push_back(check_at_most("alpha_k", CheckKind::trend, e.mean, 1.0,
                                         "standard error " + format_number(e.std_error)));
        return r;
    }
    if (c.suite == "growth")
        return estimate_growth(model, c.gamma, c.k, c.reps, c.seed, w).report;
    if (c.suite == "permutation")
        return validate_permutation(model, c.x, c.permutation, c.reps, c.seed, w).report;
    if (c.suite == "oracles")
        return validate_oracles(c.seed);
    MomentOptions opt;
    opt.times = c.times;
    opt.ks_time = c.ks_time;
    return validate_continuous_moments(model, opt, c.reps, c.seed, w);
}

inline int cmd_validate(const RunConfig& c, std::ostream& out)
{
    const Report report = run_suite(c);
    emit(c.output_path, out, [&](std::ostream& o) {
        if (c.format == "csv") {
            Table t{"validate: " + report.suite,
                    {"id", "kind", "value", "reference", "margin", "pass"},
                    {"check name", "exact, pathwise, statistical or trend", "measured value", "bound or target",
                     "signed slack (>= 0 passes)", "1 if the check passed"},
                    {}};
            for (const auto& ch : report.checks)
                t.add({ch.id, to_string(ch.kind), format_number(ch.value), format_number(ch.reference),
                       format_number(ch.margin), ch.pass ? "1" : "0"});
            write_csv(o, t, c);
        } else {
            o << report_json(report, c).dump(2) << '\n';
        }
    });
    if (c.emit_plot_data) {
        Table plot = plot_table();
        for (const auto& ch : report.checks)
            plot.add({ch.id, "", format_number(ch.value), ""});
        emit_plot(plot, c, out);
    }
    if (!report.hard_pass())
        return exit_failed;
    return report.censored ? exit_partial : exit_ok;
}

/// Entry point shared by the executable and the tests.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Forest-fire process simulator and validator"};
    app.require_subcommand(1);
    std::string config_path, out_path, format, suite;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<unsigned> workers;
    bool plot = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--reps", reps, "replications (overrides the config)");
        sub->add_option("--out", out_path, "output file (default: standard output)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--workers", workers, "worker threads (default: hardware threads)");
        sub->add_flag("--emit-plot-data", plot, "also write tidy long-format CSV to <out>.plot.csv");
    };
    auto* run = app.add_subcommand("run", "simulate first burning times at the configured targets");
    auto* validate = app.add_subcommand("validate", "run a validation suite and report its checks");
    auto* schedule = app.add_subcommand("schedule", "tabulate the level ladder (k, gamma^k, n_k, T_k)");
    auto* sweep = app.add_subcommand("sweep", "estimate E tau_x over a grid and fit its growth exponent");
    for (auto* sub : {run, validate, schedule, sweep})
        common(sub);
    validate->add_option("suite", suite, "suite name (overrides validate.suite)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }
    try {
        RunConfig c = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
        if (seed)
            c.seed = *seed;
        if (reps)
            c.reps = *reps;
        if (workers)
            c.workers = *workers;
        if (!out_path.empty())
            c.output_path = out_path;
        if (!format.empty())
            c.format = format;
        if (plot)
            c.emit_plot_data = true;
        if (!suite.empty())
            c.suite = suite;
        check_config(c);
        if (*run)
            return cmd_run(c, out);
        if (*validate)
            return cmd_validate(c, out);
        if (*schedule)
            return cmd_schedule(c, out);
        return cmd_sweep(c, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const HorizonExceeded& e) {
        err << "horizon exceeded: " << e.what() << '\n';
        return exit_partial;
    }
}

} // namespace forestfire::cli
