#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "forestfire/analytic.hpp"
#include "forestfire/estimator.hpp"
#include "forestfire/fire.hpp"
#include "forestfire/green.hpp"
#include "forestfire/model.hpp"
#include "forestfire/noise.hpp"

namespace forestfire {

/// exact and pathwise checks decide a suite's verdict; statistical checks
/// are 3-sigma comparisons; trend checks only annotate.
enum class CheckKind { exact, pathwise, statistical, trend };

inline const char* to_string(CheckKind kind)
{
    switch (kind) {
    case CheckKind::exact:
        return "exact";
    case CheckKind::pathwise:
        return "pathwise";
    case CheckKind::statistical:
        return "statistical";
    case CheckKind::trend:
        return "trend";
    }
    return "?";
}

struct Check {
    std::string id;
    CheckKind kind = CheckKind::exact;
    double value = 0.0;      // measured quantity
    double reference = 0.0;  // bound or target it is compared with
    double margin = 0.0;     // signed slack, >= 0 when the check passes
    bool pass = false;
    std::string note;

    bool hard() const noexcept { return kind == CheckKind::exact || kind == CheckKind::pathwise; }
};

/// value <= bound.
inline Check check_at_most(std::string id, CheckKind kind, double value, double bound, std::string note = {})
{
    const double margin = bound - value;
    return {std::move(id), kind, value, bound, margin, margin >= 0.0, std::move(note)};
}

/// |value - reference| <= tolerance.
inline Check check_close(std::string id, CheckKind kind, double value, double reference, double tolerance,
                         std::string note = {})
{
    const double margin = tolerance - std::abs(value - reference);
    return {std::move(id), kind, value, reference, margin, margin >= 0.0, std::move(note)};
}

/// A count that must be zero.
inline Check check_zero(std::string id, CheckKind kind, std::uint64_t count, std::string note = {})
{
    const auto v = static_cast<double>(count);
    return {std::move(id), kind, v, 0.0, 0.0 - v, count == 0, std::move(note)};
}

struct Report {
    std::string suite;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::size_t censored = 0;
    std::vector<Check> checks;

    bool hard_pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.hard() || c.pass; });
    }

    const Check* find(const std::string& id) const
    {
        for (const auto& c : checks)
            if (c.id == id)
                return &c;
        return nullptr;
    }
};

inline double binomial_std_error(double p, std::size_t n)
{
    return n == 0 ? 0.0 : std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

namespace detail {

inline void require_discrete(const ModelConfig& config, const char* what)
{
    if (config.space != Space::discrete)
        throw std::invalid_argument(std::string(what) + " is defined for the discrete model only");
}

inline void require_gamma(double gamma)
{
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::invalid_argument("gamma must lie in (1,2)");
}

/// (n_k, n_{k+1}) for the configured profile.
inline std::pair<Site, Site> schedule_pair(const ModelConfig& config, double gamma, unsigned k)
{
    require_gamma(gamma);
    if (k < 1)
        throw std::invalid_argument("level k must be >= 1");
    const auto s = analytic::schedule(config.profile, config.range, gamma, k + 1, config.site_cap);
    return {s[k - 1].n_k, s[k].n_k};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Coupling of fire and green

/// Runs fire and green on shared noise; counts violations of tau_x >= tau^G_x
/// at every target and mismatches N(sigma_i) != N^G(sigma_i) at every record.
inline Report validate_prop1(const ModelConfig& config, const std::vector<double>& targets, double horizon,
                             std::size_t reps, std::uint64_t seed, unsigned workers = 1)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("validate_prop1 needs horizon > 0");
    if (targets.empty())
        throw std::invalid_argument("validate_prop1 needs at least one target");
    struct Outcome {
        std::uint64_t tau_checked = 0, tau_violations = 0, records_checked = 0, record_mismatches = 0;
        bool censored = false;
    };
    const FireStop stop{.targets = targets, .horizon = horizon};
    auto outcomes = run_replications<Outcome>(reps, seed, workers, [&](std::uint64_t s, std::size_t) {
        Outcome o;
        try {
            if (config.space == Space::discrete) {
                const DiscreteNoise noise(s, config.profile);
                const auto trace = run_fire(noise, config, stop);
                for (const auto& e : trace.tau) {
                    if (!e.tau)
                        continue;
                    ++o.tau_checked;
                    if (*e.tau < simulate_tau_green(noise, config, static_cast<Site>(e.target)))
                        ++o.tau_violations;
                }
                const auto limit = static_cast<Site>(trace.window);
                for (const auto& rec : trace.records) {
                    ++o.records_checked;
                    if (static_cast<double>(simulate_N_green(noise, config, rec.time, limit)) != rec.location)
                        ++o.record_mismatches;
                }
            } else {
                const ContinuousNoise noise(s, config.intensity);
                const auto trace = run_fire(noise, config, stop);
                for (const auto& e : trace.tau) {
                    if (!e.tau)
                        continue;
                    ++o.tau_checked;
                    if (*e.tau < simulate_tau_green_cont(noise, config, e.target))
                        ++o.tau_violations;
                }
                for (const auto& rec : trace.records) {
                    ++o.records_checked;
                    if (simulate_N_green_cont(noise, config, rec.time, trace.window) != rec.location)
                        ++o.record_mismatches;
                }
            }
        } catch (const HorizonExceeded&) {
            o.censored = true;
        }
        return o;
    });
    Outcome total;
    std::size_t censored = 0;
    for (const auto& o : outcomes) {
        total.tau_checked += o.tau_checked;
        total.tau_violations += o.tau_violations;
        total.records_checked += o.records_checked;
        total.record_mismatches += o.record_mismatches;
        censored += o.censored;
    }
    Report report{"prop1", seed, reps, censored, {}};
    report.checks.push_back(check_zero("tau_ge_tau_green", CheckKind::pathwise, total.tau_violations,
                                       std::to_string(total.tau_checked) + " targets compared"));
    report.checks.push_back(check_zero("record_reach_equals_green", CheckKind::pathwise, total.record_mismatches,
                                       std::to_string(total.records_checked) + " record times compared"));
    return report;
}

// ---------------------------------------------------------------------------
// Green thresholds

struct ThresholdOptions {
    Site n = 10000;
    double epsilon = 0.2;
    /// Adds the level-k checks at (1 +- epsilon) gamma^k when set.
    std::optional<double> gamma;
    unsigned k = 0;
};

namespace detail {

/// Whether sites 1..m contain no vacant r-run at time t, from precomputed
/// first arrivals (first[y] for y >= 1).
inline bool reaches_from(const std::vector<double>& first, unsigned r, Site m, double t)
{
    unsigned run = 0;
    for (Site y = 1; y <= m; ++y) {
        run = first[y] <= t ? 0 : run + 1;
        if (run == r)
            return false;
    }
    return true;
}

} // namespace detail

/// Tail probabilities of N^G around the homogeneous centring T = log n/(r c1)
/// and around T~ = t_*(n, 1/2), compared with their envelopes.
inline Report validate_thresholds(const ModelConfig& config, const ThresholdOptions& opt, std::size_t reps,
                                  std::uint64_t seed, unsigned workers = 1)
{
    detail::require_discrete(config, "validate_thresholds");
    const unsigned r = config.range;
    const Site n = opt.n;
    const double eps = opt.epsilon;
    if (n < 2 || n < r)
        throw std::invalid_argument("validate_thresholds needs n >= max(2, r)");
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("epsilon must lie in [0, 1)");
    const auto& profile = config.profile;
    const bool homog = profile.homogeneous();
    const double T = homog ? analytic::homog_threshold(static_cast<double>(n), r) / profile.c1() : 0.0;
    const double Tt = analytic::t_star(profile, r, n, 0.5);
    const double c = profile.c1() / (2.0 * profile.c2());

    std::optional<std::pair<Site, double>> level;
    if (opt.gamma) {
        detail::require_gamma(*opt.gamma);
        const auto s = analytic::schedule(profile, r, *opt.gamma, std::max(1u, opt.k), config.site_cap);
        level = {s.back().n_k, s.back().gamma_k};
    }
    const Site span = std::max(n + 1, level ? level->first : Site{0});

    // Indicator order: T-upper, T-lower, Tt-upper, Tt-lower, Tt-critical,
    // level-lower, level-upper.
    using Row = std::array<bool, 7>;
    auto rows = run_replications<Row>(reps, seed, workers, [&](std::uint64_t s, std::size_t) {
        const DiscreteNoise noise(s, profile);
        std::vector<double> first(span + 1);
        for (Site y = 1; y <= span; ++y)
            first[y] = noise.first_arrival(y);
        Row row{};
        if (homog) {
            row[0] = !detail::reaches_from(first, r, n, (1.0 + eps) * T);
            row[1] = detail::reaches_from(first, r, n + 1, (1.0 - eps) * T);
        }
        row[2] = !detail::reaches_from(first, r, n, (1.0 + eps) * Tt);
        row[3] = detail::reaches_from(first, r, n, (1.0 - eps) * Tt);
        row[4] = !detail::reaches_from(first, r, n, Tt);
        if (level) {
            row[5] = detail::reaches_from(first, r, level->first, (1.0 - eps) * level->second);
            row[6] = !detail::reaches_from(first, r, level->first, (1.0 + eps) * level->second);
        }
        return row;
    });
    std::array<double, 7> p{};
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            p[i] += row[i];
    for (auto& v : p)
        v /= static_cast<double>(reps);
    auto se = [&](double q) { return binomial_std_error(q, reps); };
    const double nd = static_cast<double>(n);

    Report report{"thresholds", seed, reps, 0, {}};
    if (homog) {
        report.checks.push_back(check_at_most("upper_tail_T", CheckKind::statistical, p[0],
                                              std::pow(nd, -eps) + 3.0 * se(p[0]),
                                              "P(N^G((1+eps)T) < n) vs n^-eps + 3 se"));
        const double prop2 = std::pow(-std::expm1(-static_cast<double>(r) * (1.0 - eps) * T * profile.c1()),
                                      std::floor(nd / r));
        report.checks.push_back(check_at_most("lower_tail_T", CheckKind::statistical, p[1], 0.01,
                                              "P(N^G((1-eps)T) > n) vs 0.01; product bound " + std::to_string(prop2)));
    }
    report.checks.push_back(check_at_most("upper_tail_Ttilde", CheckKind::trend, p[2],
                                          std::pow(nd, -c * eps) + 3.0 * se(p[2]),
                                          "P(N^G((1+eps)T~) < n) vs n^-(c eps)"));
    report.checks.push_back(check_at_most("lower_tail_Ttilde", CheckKind::trend, p[3],
                                          std::exp(-std::pow(nd, c * eps)) + 3.0 * se(p[3]),
                                          "P(N^G((1-eps)T~) >= n) vs exp(-n^(c eps))"));
    {
        const double lo = -std::expm1(-1.0 / (2.0 * r));
        const double hi = 0.5;
        const double slack = 3.0 * se(p[4]);
        const double margin = std::min(p[4] - (lo - slack), (hi + slack) - p[4]);
        report.checks.push_back({"critical_window", CheckKind::statistical, p[4], hi, margin, margin >= 0.0,
                                 "P(N^G(T~) < n) in [1 - e^(-1/(2r)), 1/2] +- 3 se"});
    }
    if (level) {
        report.checks.push_back(check_at_most("level_lower_tail", CheckKind::trend, p[5], 0.5,
                                              "P(N^G((1-eps) gamma^k) >= n_k), n_k = " + std::to_string(level->first)));
        report.checks.push_back(check_at_most("level_upper_tail", CheckKind::trend, p[6], 0.5,
                                              "P(N^G((1+eps) gamma^k) < n_k)"));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Blue renewal cycles

struct Lemma1Options {
    double gamma = 1.5;
    unsigned k = 4;
    std::size_t cycles = 1000;
    bool check_domination = true;
};

/// Pools blue cycles from independent runs, each stopped once the fire
/// reaches n_{k+1}, until `cycles` cycles are collected. Checks
/// rho_i <= rho^F_i, the conditional equality, rho_1 = rho^F_1, site
/// domination, and the gap-event containment
/// {rho^F_{j+1} >= rho^F_j, rho^F_{j+1} < n_{k+1}} within E_{k,j}.
inline Report validate_lemma1(const ModelConfig& config, const Lemma1Options& opt, std::uint64_t seed)
{
    detail::require_discrete(config, "validate_lemma1");
    const auto [n_k, n_k1] = detail::schedule_pair(config, opt.gamma, opt.k);
    std::uint64_t rho_violations = 0, conditional_violations = 0, first_cycle_mismatch = 0, domination = 0;
    std::uint64_t containment_checked = 0, containment_violations = 0;
    std::size_t collected = 0, runs = 0, censored = 0;
    while (collected < opt.cycles) {
        const std::uint64_t s = replication_seed(seed, runs++);
        const DiscreteNoise noise(s, config.profile);
        BlueResult blue;
        try {
            blue = run_blue_experiment(noise, config, n_k,
                                       {.cycles = opt.cycles - collected,
                                        .stop_when_fire_reaches = static_cast<double>(n_k1),
                                        .check_domination = opt.check_domination});
        } catch (const HorizonExceeded&) {
            ++censored;
            continue;
        }
        if (!blue.complete && blue.records.empty()) {
            ++censored;
            continue;
        }
        domination += blue.domination_violations;
        const auto& rec = blue.records;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            rho_violations += rec[i].rho > rec[i].rho_fire;
            if (i == 0)
                first_cycle_mismatch += rec[0].rho != rec[0].rho_fire;
            else if (rec[i].rho <= rec[i - 1].rho && rec[i].rho_fire != rec[i].rho)
                ++conditional_violations;
        }
        for (std::size_t j = 0; j + 1 < rec.size(); ++j) {
            if (!(rec[j + 1].rho_fire >= rec[j].rho_fire && rec[j + 1].rho_fire < static_cast<double>(n_k1)))
                continue;
            ++containment_checked;
            const double start = j == 0 ? 0.0 : rec[j - 1].hit_time;
            if (!detect_gap_event(noise, config, n_k1, start, rec[j + 1].hit_time - start))
                ++containment_violations;
        }
        collected += rec.size();
    }
    Report report{"lemma1", seed, runs, censored, {}};
    report.checks.push_back(check_zero("rho_le_rho_fire", CheckKind::pathwise, rho_violations));
    report.checks.push_back(check_zero("conditional_equality", CheckKind::pathwise, conditional_violations,
                                       "rho_i <= rho_(i-1) implies rho^F_i = rho_i"));
    report.checks.push_back(check_zero("first_cycle_equality", CheckKind::pathwise, first_cycle_mismatch));
    if (opt.check_domination)
        report.checks.push_back(check_zero("blue_le_fire_le_green", CheckKind::pathwise, domination));
    // For r >= 2 the vacant run that stops the fire may extend past n_{k+1},
    // so the containment is only pathwise for r = 1.
    report.checks.push_back(check_zero("gap_event_containment",
                                       config.range == 1 ? CheckKind::pathwise : CheckKind::trend,
                                       containment_violations,
                                       std::to_string(containment_checked) + " qualifying cycle pairs"));
    report.checks.push_back(check_at_most("cycles_collected", CheckKind::exact, static_cast<double>(opt.cycles),
                                          static_cast<double>(collected)));
    return report;
}

struct AlphaOptions {
    double gamma = 1.5;
    unsigned k = 4;
    /// Replaces the measured two-cycle duration (0 makes every window
    /// arrival-free).
    std::optional<double> forced_duration;
};

/// Monte Carlo estimate of alpha_k = P(E_{k,1}): some r-window in
/// (0, n_{k+1}] stays arrival-free over the first two cycles of n_k.
inline EstimatorResult estimate_alpha_k(const ModelConfig& config, const AlphaOptions& opt, std::size_t reps,
                                        std::uint64_t seed, unsigned workers = 1)
{
    detail::require_discrete(config, "estimate_alpha_k");
    const auto [n_k, n_k1] = detail::schedule_pair(config, opt.gamma, opt.k);
    const Site span = std::max<Site>(n_k1, config.range);
    const Sampler sampler = [&](std::uint64_t s, std::size_t) -> std::optional<double> {
        const DiscreteNoise noise(s, config.profile);
        double duration = 0.0;
        if (opt.forced_duration) {
            duration = *opt.forced_duration;
        } else {
            const auto blue = run_blue_experiment(noise, config, n_k, {.cycles = 2, .window = static_cast<double>(span)});
            if (blue.records.size() < 2)
                return std::nullopt;
            duration = blue.records[1].hit_time;
        }
        return detect_gap_event(noise, config, span, 0.0, duration) ? 1.0 : 0.0;
    };
    return mc_estimate(sampler, reps, seed, "alpha_k=" + std::to_string(opt.k), workers);
}

struct GrowthReport {
    Site n_k = 0;
    Site n_k1 = 0;
    EstimatorResult tau_nk;
    EstimatorResult tau_nk1;
    double ratio = 0.0;
    double hits_mean = 0.0;      // 1 + sum_i P^(A_i)
    double hits_std_error = 0.0;
    double combined_std_error = 0.0;  // standard error of ratio - hits_mean
    std::size_t truncation = 0;  // largest i with P^(A_i) > 0, plus one
    std::vector<double> prob_A;  // P^(A_i), i = 1..truncation-1
    Report report;
};

/// Estimates E tau_{n_{k+1}} / E tau_{n_k} and, from the same trajectories,
/// 1 + sum_i P(A_i), where A_i is the event that the first i hits of n_k
/// all stop short of n_{k+1}.
inline GrowthReport estimate_growth(const ModelConfig& config, double gamma, unsigned k, std::size_t reps,
                                    std::uint64_t seed, unsigned workers = 1,
                                    std::optional<std::pair<Site, Site>> thresholds = std::nullopt)
{
    detail::require_discrete(config, "estimate_growth");
    if (reps < 2)
        throw std::invalid_argument("estimate_growth needs reps >= 2");
    const auto [n_k, n_k1] = thresholds ? *thresholds : detail::schedule_pair(config, gamma, k);
    struct Run {
        double a = 0.0, b = 0.0;  // tau_{n_{k+1}}, tau_{n_k}
        std::size_t hits = 0;
        bool ok = false;
    };
    auto runs = run_replications<Run>(reps, seed, workers, [&](std::uint64_t s, std::size_t) {
        const DiscreteNoise noise(s, config.profile);
        Run run;
        try {
            const auto blue = run_blue_experiment(noise, config, n_k,
                                                  {.cycles = std::numeric_limits<std::size_t>::max(),
                                                   .stop_when_fire_reaches = static_cast<double>(n_k1)});
            if (blue.records.empty() || blue.records.back().rho_fire < static_cast<double>(n_k1))
                return run;
            run = {blue.records.back().hit_time, blue.records.front().hit_time, blue.records.size(), true};
        } catch (const HorizonExceeded&) {
        }
        return run;
    });
    SampleStats a, b, hits;
    std::size_t censored = 0, max_hits = 0;
    for (const auto& r : runs) {
        if (!r.ok) {
            ++censored;
            continue;
        }
        a.add(r.a);
        b.add(r.b);
        hits.add(static_cast<double>(r.hits));
        max_hits = std::max(max_hits, r.hits);
    }
    GrowthReport g;
    g.n_k = n_k;
    g.n_k1 = n_k1;
    g.tau_nk = {b.mean(), b.std_error(), b.count(), censored, seed, "tau_n_k"};
    g.tau_nk1 = {a.mean(), a.std_error(), a.count(), censored, seed, "tau_n_k+1"};
    g.ratio = a.mean() / b.mean();
    g.hits_mean = hits.mean();
    g.hits_std_error = hits.std_error();
    g.truncation = max_hits;
    const auto m = hits.count();
    g.prob_A.assign(max_hits > 0 ? max_hits - 1 : 0, 0.0);
    for (double h : hits.values())
        for (std::size_t i = 1; i < static_cast<std::size_t>(h); ++i)
            g.prob_A[i - 1] += 1.0 / static_cast<double>(m);

    // Delta method: ratio - hits_mean ~ mean of (a - R b)/b_bar - (I - I_bar).
    SampleStats d;
    for (std::size_t i = 0; i < m; ++i)
        d.add((a.values()[i] - g.ratio * b.values()[i]) / b.mean() - (hits.values()[i] - g.hits_mean));
    g.combined_std_error = d.std_error();

    g.report = {"growth", seed, reps, censored, {}};
    g.report.checks.push_back(check_close("ratio_matches_hit_series", CheckKind::statistical, g.ratio, g.hits_mean,
                                          3.0 * g.combined_std_error, "E tau_(n_k+1)/E tau_(n_k) vs 1 + sum P(A_i)"));
    g.report.checks.push_back(check_at_most("ratio_below_e_plus_half", CheckKind::trend, g.ratio,
                                            std::numbers::e + 0.5));
    g.report.checks.push_back(check_zero("censored", CheckKind::trend, censored));
    return g;
}

// ---------------------------------------------------------------------------
// Scaling of E tau_x

struct ScalingRow {
    double x;
    EstimatorResult tau;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double kappa_hat = 0.0;            // OLS slope of log E tau_x on log log x
    double min_tau_over_log_x = 0.0;   // over every replication and grid point
    std::size_t censored = 0;
    Report report;
};

/// Least-squares slope of ys on xs.
inline double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("ols_slope needs two equal-length series of length >= 2");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

inline ScalingReport scaling_study(const ModelConfig& config, const std::vector<double>& x_grid, std::size_t reps,
                                   std::uint64_t seed, unsigned workers = 1, double kappa_ceiling = 1.45)
{
    if (x_grid.size() < 2 || !std::is_sorted(x_grid.begin(), x_grid.end()) ||
        std::adjacent_find(x_grid.begin(), x_grid.end()) != x_grid.end() || !(x_grid.front() > 1.0))
        throw std::invalid_argument("scaling grid must be strictly increasing, > 1, with at least two points");
    const FireStop stop{.targets = x_grid};
    auto runs = run_replications<std::vector<std::optional<double>>>(reps, seed, workers, [&](std::uint64_t s, std::size_t) {
        std::vector<std::optional<double>> taus(x_grid.size());
        try {
            const FireTrace trace = config.space == Space::discrete
                                        ? run_fire(DiscreteNoise(s, config.profile), config, stop)
                                        : run_fire(ContinuousNoise(s, config.intensity), config, stop);
            for (std::size_t i = 0; i < x_grid.size(); ++i)
                taus[i] = trace.tau_of(x_grid[i]);
        } catch (const HorizonExceeded&) {
        }
        return taus;
    });
    ScalingReport out;
    out.min_tau_over_log_x = std::numeric_limits<double>::infinity();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        std::vector<std::optional<double>> column(reps);
        for (std::size_t j = 0; j < reps; ++j) {
            column[j] = runs[j][i];
            if (column[j])
                out.min_tau_over_log_x = std::min(out.min_tau_over_log_x, *column[j] / std::log(x_grid[i]));
        }
        auto est = summarize(column, seed, "tau_x");
        out.censored = std::max(out.censored, est.censored);
        out.rows.push_back({x_grid[i], est});
        lx.push_back(std::log(std::log(x_grid[i])));
        ly.push_back(std::log(est.mean));
    }
    out.kappa_hat = ols_slope(lx, ly);
    out.report = {"scaling", seed, reps, out.censored, {}};
    out.report.checks.push_back(check_at_most("kappa_hat", CheckKind::trend, out.kappa_hat, kappa_ceiling));
    return out;
}

// ---------------------------------------------------------------------------
// Rate permutation

struct PermutationReport {
    EstimatorResult original;
    EstimatorResult permuted;
    double combined_std_error = 0.0;
    bool identical = false;
    Report report;
};

/// E tau_x under a profile and under the profile with the rates of sites
/// 1..m permuted, on common seeds.
inline PermutationReport validate_permutation(const ModelConfig& config, Site x, const std::vector<Site>& perm,
                                              std::size_t reps, std::uint64_t seed, unsigned workers = 1)
{
    detail::require_discrete(config, "validate_permutation");
    if (config.range != 1)
        throw std::invalid_argument("rate permutation invariance holds for r = 1 only");
    if (perm.size() > x)
        throw std::invalid_argument("permutation must act on sites 1..x");
    ModelConfig permuted = config;
    permuted.profile = config.profile.permuted(perm);
    auto tau_sampler = [&](const ModelConfig& c) -> Sampler {
        return [&c, x](std::uint64_t s, std::size_t) -> std::optional<double> {
            const auto trace = run_fire(DiscreteNoise(s, c.profile), c, {.targets = {static_cast<double>(x)}});
            return trace.tau_of(static_cast<double>(x));
        };
    };
    PermutationReport out;
    out.original = mc_estimate(tau_sampler(config), reps, seed, "tau_x", workers);
    out.permuted = mc_estimate(tau_sampler(permuted), reps, seed, "tau_x", workers);
    out.combined_std_error = std::hypot(out.original.std_error, out.permuted.std_error);
    out.identical = out.original.mean == out.permuted.mean && out.original.std_error == out.permuted.std_error;
    out.report = {"permutation", seed, reps, out.original.censored + out.permuted.censored, {}};
    out.report.checks.push_back(check_close("means_agree", CheckKind::statistical, out.permuted.mean,
                                            out.original.mean, 3.0 * out.combined_std_error));
    return out;
}

// ---------------------------------------------------------------------------
// Analytic oracles

/// Cross-checks of the exact formulas against each other. `seed` drives the
/// random profiles of the t_* bracket check.
inline Report validate_oracles(std::uint64_t seed = 1)
{
    using namespace analytic;
    Report report{"oracles", seed, 0, 0, {}};
    const double ts[] = {0.25, 0.5, 1.0, 2.0};
    const auto unit = RateProfile::constant(1.0);

    double triangle = 0.0, closed = 0.0, dp_product = 0.0, inhomog = 0.0;
    const auto periodic = RateProfile::periodic({0.5, 1.5, 1.0}, 0.5, 1.5);
    for (unsigned r = 1; r <= 3; ++r)
        for (double t : ts)
            for (Site n = 0; n <= 16; ++n) {
                const double brute = p_n_bruteforce(unit, r, n, t);
                const double dp = p_n_dp(unit, r, n, t);
                const double rec = p_n_homog(std::exp(-t), r, n);
                triangle = std::max({triangle, std::abs(brute - dp), std::abs(dp - rec)});
                if (r == 2 && n >= 1)
                    closed = std::max(closed, std::abs(p_n_closed_r2(std::exp(-t), n) - rec));
                if (r == 1 && n >= 1)
                    dp_product = std::max(dp_product, std::abs(dp - product_reach_prob(unit, n, t)));
                inhomog = std::max(inhomog, std::abs(p_n_bruteforce(periodic, r, n, t) - p_n_dp(periodic, r, n, t)));
            }
    report.checks.push_back(check_at_most("triangle_brute_dp_recursion", CheckKind::exact, triangle, 1e-12));
    report.checks.push_back(check_at_most("closed_form_r2", CheckKind::exact, closed, 1e-12));
    report.checks.push_back(check_at_most("dp_equals_product_r1", CheckKind::exact, dp_product, 1e-12));
    report.checks.push_back(check_at_most("dp_equals_brute_periodic", CheckKind::exact, inhomog, 1e-12));

    double boundary = 0.0;
    for (double t : ts) {
        const double a = std::exp(-t);
        boundary = std::max({boundary, std::abs(p_n_closed_r2(a, 1) - 1.0),
                             std::abs(p_n_closed_r2(a, 2) + std::expm1(-2.0 * t)),
                             std::abs(p_n_bruteforce(unit, 2, 1, t) - 1.0),
                             std::abs(p_n_bruteforce(unit, 2, 2, t) + std::expm1(-2.0 * t))});
    }
    report.checks.push_back(check_at_most("recursion_boundary", CheckKind::exact, boundary, 1e-15,
                                          "p_1 = 1, p_2 = 1 - e^(-2t) for r = 2"));

    report.checks.push_back(check_close("char_root_half_r2", CheckKind::exact, char_root(0.5, 2),
                                        (0.5 + std::sqrt(1.25)) / 2.0, 1e-6));
    double ratio_gap = 0.0;
    for (double a : {0.3, 0.5, 0.7})
        for (unsigned r = 1; r <= 3; ++r)
            ratio_gap = std::max(ratio_gap, std::abs(p_n_homog(a, r, 201) / p_n_homog(a, r, 200) - char_root(a, r)));
    report.checks.push_back(check_at_most("ratio_converges_to_root", CheckKind::exact, ratio_gap, 1e-6));

    double homog_rel = 0.0;
    for (unsigned r = 1; r <= 3; ++r)
        for (Site n : {Site{3}, Site{10}, Site{1000}, Site{1000000}}) {
            const double tt = t_star(unit, r, n, 0.5);
            const double target = 2.0 * static_cast<double>(n - r + 1);
            homog_rel = std::max(homog_rel, std::abs(std::exp(r * tt) / target - 1.0));
        }
    report.checks.push_back(check_at_most("t_star_homogeneous", CheckKind::exact, homog_rel, 1e-9));

    std::uint64_t bracket_failures = 0;
    const CounterStream rng(seed, StreamTag::test_sequences, 0);
    std::uint64_t draw = 0;
    for (int i = 0; i < 100; ++i) {
        const double c1 = 0.2 + 0.8 * rng.uniform(draw++);
        const double c2 = c1 * (1.0 + 3.0 * rng.uniform(draw++));
        const unsigned r = 1 + static_cast<unsigned>(3.0 * rng.uniform(draw++));
        const Site n = r + static_cast<Site>(500.0 * rng.uniform(draw++));
        std::vector<double> values(n + 1);
        for (auto& v : values)
            v = std::clamp(c1 + (c2 - c1) * rng.uniform(draw++), c1, c2);
        const auto profile = RateProfile::explicit_list(values, c1, c2);
        const double ert = std::exp(r * t_star(profile, r, n, 0.5));
        const double base = 2.0 * static_cast<double>(n - r + 1);
        const double tol = 1e-9;
        if (ert < std::pow(base, 1.0 / c2) * (1.0 - tol) || ert > std::pow(base, 1.0 / c1) * (1.0 + tol))
            ++bracket_failures;
    }
    report.checks.push_back(check_zero("t_star_bracket_random_profiles", CheckKind::exact, bracket_failures,
                                       "100 random admissible profiles"));

    double sum_identity = 0.0;
    std::uint64_t monotone_failures = 0;
    const auto mixed = RateProfile::periodic({0.7, 1.3, 1.0, 0.9}, 0.7, 1.3);
    for (unsigned r = 1; r <= 3; ++r)
        for (Site n = r + 1; n <= 60; ++n)
            for (double t : ts) {
                double parts = 0.0;
                for (unsigned j = 0; j < r; ++j)
                    parts += f_nj(mixed, r, n, j, t);
                const double whole = f_n(mixed, r, n, t);
                sum_identity = std::max(sum_identity, std::abs(parts - whole) / whole);
                if (!(f_n(mixed, r, n, t * 1.01) < whole))
                    ++monotone_failures;
                const double step = whole - f_n(mixed, r, n - 1, t);
                if (!(step > 0.0) || step > std::exp(-r * mixed.c1() * t) * (1.0 + 1e-12))
                    ++monotone_failures;
            }
    report.checks.push_back(check_at_most("f_nj_sum_identity", CheckKind::exact, sum_identity, 1e-13));
    report.checks.push_back(check_zero("f_n_monotonicity", CheckKind::exact, monotone_failures));

    double laplace = 0.0;
    // Central differences step to lambda = -h, outside the public domain. The
    // second difference uses a wider step: at 1e-5 its rounding error alone
    // is about 1e-6 relative.
    const double h = 1e-5;
    const double h2 = 1e-4;
    auto transform = [](double lambda, double t) { return (lambda + t) * std::exp(-t) / (lambda + t * std::exp(-lambda - t)); };
    for (double t : {0.5, 1.0, 2.0, 3.0}) {
        const auto m = green_moments_cont(t);
        const double d1 = (transform(h, t) - transform(-h, t)) / (2.0 * h);
        const double d2 = (transform(h2, t) - 2.0 * transform(0.0, t) + transform(-h2, t)) / (h2 * h2);
        const double second = m.variance + m.mean * m.mean;
        laplace = std::max({laplace, std::abs(-d1 - m.mean) / m.mean, std::abs(d2 - second) / second});
    }
    report.checks.push_back(check_at_most("laplace_derivatives", CheckKind::exact, laplace, 1e-6));
    report.checks.push_back(check_close("laplace_value", CheckKind::exact, green_laplace_cont(1.0, 1.0),
                                        2.0 * std::exp(-1.0) / (1.0 + std::exp(-2.0)), 1e-12));
    return report;
}

// ---------------------------------------------------------------------------
// Continuous green moments

struct MomentOptions {
    std::vector<double> times{1.0, 2.0, 3.0};
    /// Time of the t e^{-t} N^G(t) ~ Exp(1) comparison; skipped when unset.
    std::optional<double> ks_time;
    double ks_tolerance = 0.02;
};

inline Report validate_continuous_moments(const ModelConfig& config, const MomentOptions& opt, std::size_t reps,
                                          std::uint64_t seed, unsigned workers = 1)
{
    if (config.space != Space::continuous)
        throw std::invalid_argument("continuous moments need the continuous model");
    if (config.intensity != 1.0 || config.connect_distance != 1.0 || config.ignite_distance != 1.0)
        throw std::invalid_argument("the closed-form moments assume unit intensity and unit distances");
    Report report{"continuous-moments", seed, reps, 0, {}};
    auto sample = [&](double t) {
        return run_replications<double>(reps, seed, workers, [&](std::uint64_t s, std::size_t) {
            return simulate_N_green_cont(ContinuousNoise(s, config.intensity), config, t);
        });
    };
    for (double t : opt.times) {
        SampleStats n, laplace;
        for (double v : sample(t)) {
            n.add(v);
            laplace.add(std::exp(-v));
        }
        const auto m = analytic::green_moments_cont(t);
        const std::string tag = "_t=" + std::to_string(t).substr(0, 4);
        report.checks.push_back(check_close("mean" + tag, CheckKind::statistical, n.mean(), m.mean, 3.0 * n.std_error()));
        report.checks.push_back(check_close("variance" + tag, CheckKind::statistical, n.variance(), m.variance,
                                            3.0 * n.variance_std_error()));
        report.checks.push_back(check_close("laplace" + tag, CheckKind::statistical, laplace.mean(),
                                            analytic::green_laplace_cont(1.0, t), 3.0 * laplace.std_error()));
    }
    if (opt.ks_time) {
        const double t = *opt.ks_time;
        std::vector<double> scaled = sample(t);
        for (auto& v : scaled)
            v *= t * std::exp(-t);
        const double d = ks_distance(std::move(scaled), [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
        report.checks.push_back(check_at_most("ks_exponential_limit", CheckKind::statistical, d, opt.ks_tolerance));
    }
    return report;
}

} // namespace forestfire
