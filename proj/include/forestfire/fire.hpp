#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "forestfire/green.hpp"
#include "forestfire/model.hpp"
#include "forestfire/noise.hpp"

namespace forestfire {

struct BurnEvent {
    double time;
    double rightmost;  // right-most burnt point
};

struct RecordEvent {
    double time;      // sigma_i: a never-before-burnt point burns
    double location;  // u_i: right-most point burnt then
};

struct TauEntry {
    double target;
    std::optional<double> tau;
};

struct FireTrace {
    std::vector<BurnEvent> burns;
    std::vector<TauEntry> tau;
    std::vector<RecordEvent> records;
    double horizon = 0.0;
    double window = std::numeric_limits<double>::infinity();
    bool complete = true;

    std::optional<double> tau_of(double x) const
    {
        for (const auto& e : tau)
            if (e.target == x)
                return e.tau;
        return std::nullopt;
    }

    /// N(t): the right-most point burnt by time t, or -1 before any burn.
    double reach_at(double t) const
    {
        double n = -1.0;
        for (const auto& r : records) {
            if (r.time > t)
                break;
            n = r.location;
        }
        return n;
    }
};

struct FireStop {
    std::vector<double> targets;
    double horizon = std::numeric_limits<double>::infinity();
    /// Observation window X: the process is simulated on [0, X] only and
    /// every reported position is min(position, X). Burning inside [0, X]
    /// never depends on anything to the right of it, so this is exact.
    /// Defaults to the largest target; unbounded without targets.
    std::optional<double> window;
};

inline double observation_window(const FireStop& stop)
{
    if (stop.window)
        return *stop.window;
    if (stop.targets.empty())
        return std::numeric_limits<double>::infinity();
    return *std::max_element(stop.targets.begin(), stop.targets.end());
}

/// Discrete site states over shared noise, materialised lazily.
///
/// Site y is occupied at time t iff it has an arrival in (last clear, t].
/// clear_all() resets every site at once without touching them. Sites past
/// `limit` are permanently vacant.
class LatticeState {
public:
    explicit LatticeState(const DiscreteNoise& noise, Site limit = std::numeric_limits<Site>::max())
        : noise_(&noise), limit_(limit)
    {
    }

    bool occupied(Site y, double t)
    {
        return y <= limit_ && normalized(y).next() <= t;
    }

    Site limit() const noexcept { return limit_; }

    void clear(Site y, double t)
    {
        normalized(y).skip_through(t);
        cleared_[y] = t;
    }

    void clear_all(double t) { global_clear_ = t; }

    Site touched() const noexcept { return cursors_.size(); }

    /// Arrivals consumed by the touched sites once every site is advanced
    /// through time t.
    std::uint64_t consumed_through(double t) const
    {
        std::uint64_t total = 0;
        for (auto c : cursors_) {
            c.skip_through(t);
            total += c.consumed();
        }
        return total;
    }

private:
    ArrivalCursor& normalized(Site y)
    {
        while (cursors_.size() <= y) {
            cursors_.push_back(noise_->cursor(cursors_.size()));
            cleared_.push_back(0.0);
        }
        if (cleared_[y] < global_clear_) {
            cursors_[y].skip_through(global_clear_);
            cleared_[y] = global_clear_;
        }
        return cursors_[y];
    }

    const DiscreteNoise* noise_;
    Site limit_;
    std::vector<ArrivalCursor> cursors_;
    std::vector<double> cleared_;
    double global_clear_ = 0.0;
};

/// Burns [0, reach] at time t: site 0 and every site up to the reach are
/// vacated, whether or not they were occupied. Returns min(reach, limit).
inline Site ignite(LatticeState& state, unsigned r, double t, Site site_cap)
{
    const Site reach = std::min(reach_scan([&](Site y) { return state.occupied(y, t); }, r, site_cap), state.limit());
    for (Site y = 0; y <= reach; ++y)
        state.clear(y, t);
    return reach;
}

namespace detail {

inline Site lattice_limit(double window)
{
    if (!(window >= 0.0))
        throw std::invalid_argument("observation window must be >= 0");
    return std::isfinite(window) ? static_cast<Site>(std::floor(window)) : std::numeric_limits<Site>::max();
}

} // namespace detail

namespace detail {

inline std::vector<TauEntry> sorted_targets(const FireStop& stop)
{
    std::vector<TauEntry> out;
    for (double x : stop.targets)
        out.push_back({x, std::nullopt});
    std::sort(out.begin(), out.end(), [](const TauEntry& a, const TauEntry& b) { return a.target < b.target; });
    out.erase(std::unique(out.begin(), out.end(), [](const TauEntry& a, const TauEntry& b) { return a.target == b.target; }),
              out.end());
    return out;
}

/// Appends one burn to the trace; returns true once every target is recorded.
inline bool record_burn(FireTrace& trace, std::size_t& next_target, double t, double rightmost)
{
    trace.burns.push_back({t, rightmost});
    if (trace.records.empty() || rightmost > trace.records.back().location)
        trace.records.push_back({t, rightmost});
    while (next_target < trace.tau.size() && rightmost >= trace.tau[next_target].target)
        trace.tau[next_target++].tau = t;
    return !trace.tau.empty() && next_target == trace.tau.size();
}

inline FireTrace run_fire_discrete(const DiscreteNoise& noise, const ModelConfig& config, const FireStop& stop)
{
    FireTrace trace;
    trace.tau = sorted_targets(stop);
    trace.horizon = std::min(stop.horizon, config.time_cap);
    trace.window = observation_window(stop);
    LatticeState state(noise, lattice_limit(trace.window));
    ArrivalCursor origin = noise.cursor(0);
    std::size_t next_target = 0;
    while (origin.next() <= trace.horizon) {
        const double t = origin.next();
        origin.advance();
        const Site reach = ignite(state, config.range, t, config.site_cap);
        if (record_burn(trace, next_target, t, static_cast<double>(reach)))
            return trace;
    }
    trace.complete = next_target == trace.tau.size();
    return trace;
}

/// Living trees of the continuous fire process, ordered by position. No
/// living tree ever lies within ignite_distance: such a tree burns on arrival.
class Forest {
public:
    /// Trees beyond `limit` are dropped; reported reaches are clamped to
    /// limit - connect_distance, below which they are exact.
    explicit Forest(const ModelConfig& config, double limit = std::numeric_limits<double>::infinity())
        : connect_(config.connect_distance), ignite_(config.ignite_distance), limit_(limit)
    {
    }

    /// Adds a tree; returns the right-most burnt centre if it ignited.
    std::optional<double> add(double position)
    {
        if (position > limit_)
            return std::nullopt;
        if (position > ignite_) {
            trees_.insert(position);
            return std::nullopt;
        }
        double reach = position;
        auto it = trees_.begin();
        while (it != trees_.end() && *it - reach <= connect_) {
            reach = std::max(reach, *it);
            it = trees_.erase(it);
        }
        return std::min(reach, limit_ - connect_);
    }

    void clear() { trees_.clear(); }
    bool contains(double position) const { return trees_.count(position) != 0; }
    const std::set<double>& trees() const noexcept { return trees_; }

private:
    double connect_;
    double ignite_;
    double limit_;
    std::set<double> trees_;
};

inline FireTrace run_fire_continuous(const ContinuousNoise& noise, const ModelConfig& config, const FireStop& stop)
{
    const double window = observation_window(stop);
    if (!(window > 0.0))
        throw std::invalid_argument("observation window must be > 0");
    auto attempt = [&](std::uint64_t cells, double limit) {
        FireTrace trace;
        trace.tau = sorted_targets(stop);
        trace.horizon = std::min(stop.horizon, config.time_cap);
        trace.window = window;
        TimeOrderedFeed feed(noise, cells);
        Forest forest(config, limit);
        std::size_t next_target = 0;
        while (true) {
            const TreePoint p = feed.next();
            if (p.time > trace.horizon)
                break;
            const auto burnt = forest.add(p.position);
            if (!burnt)
                continue;
            if (!std::isfinite(limit) && *burnt + config.connect_distance >= feed.window())
                throw WindowTooSmall{};
            if (record_burn(trace, next_target, p.time, *burnt))
                return trace;
        }
        trace.complete = next_target == trace.tau.size();
        return trace;
    };
    if (std::isfinite(window)) {
        const double limit = window + config.connect_distance;
        const auto cells = static_cast<std::uint64_t>(std::ceil(limit)) + 1;
        if (cells > config.site_cap)
            throw HorizonExceeded("continuous window exceeds the spatial cap");
        return attempt(cells, limit);
    }
    return with_growing_window(64.0, config,
                               [&](std::uint64_t cells) { return attempt(cells, std::numeric_limits<double>::infinity()); });
}

} // namespace detail

/// Runs the fire process until every target is burnt or the horizon
/// (capped by config.time_cap) passes. An unreached target leaves the trace
/// flagged incomplete rather than throwing.
inline FireTrace run_fire(const DiscreteNoise& noise, const ModelConfig& config, const FireStop& stop)
{
    if (stop.targets.empty() && !std::isfinite(stop.horizon) && !std::isfinite(config.time_cap))
        throw std::invalid_argument("run_fire needs targets or a finite horizon");
    return detail::run_fire_discrete(noise, config, stop);
}

inline FireTrace run_fire(const ContinuousNoise& noise, const ModelConfig& config, const FireStop& stop)
{
    if (stop.targets.empty() && !std::isfinite(stop.horizon) && !std::isfinite(config.time_cap))
        throw std::invalid_argument("run_fire needs targets or a finite horizon");
    return detail::run_fire_continuous(noise, config, stop);
}

// ---------------------------------------------------------------------------
// Blue renewal process

struct RenewalRecord {
    std::size_t i;     // hit index, from 1
    double tau;        // cycle length: time since the previous hit of n_k
    double hit_time;   // absolute time of the hit
    double rho;        // right-most point burnt by the blue process at the hit
    double rho_fire;   // right-most point burnt by the fire process at the hit
};

struct BlueOptions {
    std::size_t cycles = 1;
    /// Stop early at the first hit whose fire burn reaches this point.
    std::optional<double> stop_when_fire_reaches;
    /// Check blue <= fire <= green occupancy at every ignition.
    bool check_domination = false;
    /// Observation window, as for FireStop; defaults to
    /// stop_when_fire_reaches, else unbounded. Must be >= n_k.
    std::optional<double> window;

    double effective_window() const
    {
        return window ? *window
                      : stop_when_fire_reaches.value_or(std::numeric_limits<double>::infinity());
    }
};

struct BlueResult {
    std::vector<RenewalRecord> records;
    bool complete = true;
    std::uint64_t domination_violations = 0;
};

/// Runs the fire process and, on the same noise, the blue process that is
/// reset to all-vacant each time the fire reaches n_k.
inline BlueResult run_blue_experiment(const DiscreteNoise& noise, const ModelConfig& config, Site n_k,
                                      const BlueOptions& options)
{
    if (n_k < 1 || options.cycles < 1)
        throw std::invalid_argument("blue experiment needs n_k >= 1 and cycles >= 1");
    const double window = options.effective_window();
    if (window < static_cast<double>(n_k))
        throw std::invalid_argument("blue experiment window must be >= n_k");
    BlueResult out;
    LatticeState fire(noise, detail::lattice_limit(window));
    LatticeState blue(noise, detail::lattice_limit(window));
    ArrivalCursor origin = noise.cursor(0);
    double previous_hit = 0.0;
    while (out.records.size() < options.cycles) {
        const double t = origin.next();
        if (t > config.time_cap) {
            out.complete = false;
            break;
        }
        origin.advance();
        if (options.check_domination) {
            const Site upto = std::min(std::max(fire.touched(), blue.touched()) + config.range, fire.limit());
            for (Site y = 1; y <= upto; ++y) {
                const bool b = blue.occupied(y, t);
                const bool f = fire.occupied(y, t);
                const bool g = noise.first_arrival(y) <= t;
                if ((b && !f) || (f && !g))
                    ++out.domination_violations;
            }
        }
        const Site rho_fire = ignite(fire, config.range, t, config.site_cap);
        const Site rho = ignite(blue, config.range, t, config.site_cap);
        if (rho_fire < n_k)
            continue;
        out.records.push_back({out.records.size() + 1, t - previous_hit, t, static_cast<double>(rho),
                               static_cast<double>(rho_fire)});
        previous_hit = t;
        blue.clear_all(t);
        if (options.stop_when_fire_reaches && static_cast<double>(rho_fire) >= *options.stop_when_fire_reaches)
            break;
    }
    return out;
}

/// Continuous analogue: the blue forest is emptied at every hit of n_k.
inline BlueResult run_blue_experiment(const ContinuousNoise& noise, const ModelConfig& config, double n_k,
                                      const BlueOptions& options)
{
    if (!(n_k > 0.0) || options.cycles < 1)
        throw std::invalid_argument("blue experiment needs n_k > 0 and cycles >= 1");
    const double window = options.effective_window();
    if (window < n_k)
        throw std::invalid_argument("blue experiment window must be >= n_k");
    auto attempt = [&](std::uint64_t cells, double limit) {
        BlueResult out;
        TimeOrderedFeed feed(noise, cells);
        detail::Forest fire(config, limit);
        detail::Forest blue(config, limit);
        double previous_hit = 0.0;
        while (out.records.size() < options.cycles) {
            const TreePoint p = feed.next();
            if (p.time > config.time_cap) {
                out.complete = false;
                break;
            }
            const auto rho_fire = fire.add(p.position);
            const auto rho = blue.add(p.position);
            if (options.check_domination)
                for (double b : blue.trees())
                    if (!fire.contains(b))
                        ++out.domination_violations;
            if (!rho_fire)
                continue;
            if (!std::isfinite(limit) && *rho_fire + config.connect_distance >= feed.window())
                throw detail::WindowTooSmall{};
            if (*rho_fire < n_k)
                continue;
            out.records.push_back({out.records.size() + 1, p.time - previous_hit, p.time, rho.value_or(0.0), *rho_fire});
            previous_hit = p.time;
            blue.clear();
            if (options.stop_when_fire_reaches && *rho_fire >= *options.stop_when_fire_reaches)
                break;
        }
        return out;
    };
    if (std::isfinite(window)) {
        const double limit = window + config.connect_distance;
        const auto cells = static_cast<std::uint64_t>(std::ceil(limit)) + 1;
        if (cells > config.site_cap)
            throw HorizonExceeded("continuous window exceeds the spatial cap");
        return attempt(cells, limit);
    }
    return detail::with_growing_window(2.0 * n_k, config, [&](std::uint64_t cells) {
        return attempt(cells, std::numeric_limits<double>::infinity());
    });
}

// ---------------------------------------------------------------------------
// Gap events

/// True iff some window of r consecutive sites inside (0, span] receives no
/// arrival during [start, start + duration).
inline bool detect_gap_event(const DiscreteNoise& noise, const ModelConfig& config, Site span, double start,
                             double duration)
{
    const unsigned r = config.range;
    if (span < r)
        throw std::invalid_argument("gap span must be >= r");
    if (!(duration >= 0.0))
        throw std::invalid_argument("gap duration must be >= 0");
    unsigned run = 0;
    for (Site y = 1; y <= span; ++y) {
        run = noise.has_arrival_in(y, start, duration) ? 0 : run + 1;
        if (run == r)
            return true;
    }
    return false;
}

/// Continuous analogue: some subinterval of (0, span] of length
/// connect_distance receives no tree during [start, start + duration).
inline bool detect_gap_event(const ContinuousNoise& noise, const ModelConfig& config, double span, double start,
                             double duration)
{
    if (!(span >= config.connect_distance))
        throw std::invalid_argument("gap span must be >= connect_distance");
    if (!(duration >= 0.0))
        throw std::invalid_argument("gap duration must be >= 0");
    if (duration == 0.0)
        return true;
    std::vector<double> xs{0.0};
    for (const auto& p : noise.points_in(0.0, span, start, start + duration))
        if (p.time < start + duration)
            xs.push_back(p.position);
    xs.push_back(span);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] - xs[i - 1] >= config.connect_distance)
            return true;
    return false;
}

} // namespace forestfire
