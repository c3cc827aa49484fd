#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "forestfire/model.hpp"
#include "forestfire/noise.hpp"

namespace forestfire {

// Reach convention
// ----------------
// N^G(t) >= n  iff  sites 1..n contain no vacant run of length r.
// Site 0 is ignored. If the first vacant run of length r among sites >= 1
// ends at site y, the reach is y - 1. With r = 1 this is the right end of
// the occupied block 0..y-1, i.e. the cluster containing the origin; an
// all-vacant configuration has reach r - 1.

/// Reach under range r, given an occupancy predicate over sites >= 1.
/// Throws HorizonExceeded when no vacant run is found up to `site_cap`.
template <class OccupiedFn>
Site reach_scan(OccupiedFn&& occupied, unsigned r, Site site_cap = Site{1} << 30)
{
    unsigned run = 0;
    for (Site y = 1; y <= site_cap; ++y) {
        run = occupied(y) ? 0 : run + 1;
        if (run == r)
            return y - 1;
    }
    throw HorizonExceeded("no vacant run of length r within the site cap");
}

/// Reach of an explicit occupancy pattern; occ[0] is site 1, sites past
/// the end are vacant.
inline Site reach_discrete(std::span<const bool> occ, unsigned r)
{
    return reach_scan([&](Site y) { return y <= occ.size() && occ[y - 1]; }, r, occ.size() + r);
}

/// Green occupancy at time t: a site is occupied once it has had an arrival.
class GreenOccupancy {
public:
    GreenOccupancy(const DiscreteNoise& noise, double t) : noise_(&noise), t_(t) {}
    bool operator()(Site y) const { return noise_->first_arrival(y) <= t_; }
    double time() const noexcept { return t_; }

private:
    const DiscreteNoise* noise_;
    double t_;
};

/// N^G(t) for the discrete model.
inline Site simulate_N_green(const DiscreteNoise& noise, const ModelConfig& config, double t)
{
    return reach_scan(GreenOccupancy(noise, t), config.range, config.site_cap);
}

/// min(N^G(t), limit), scanning no further than limit + r.
inline Site simulate_N_green(const DiscreteNoise& noise, const ModelConfig& config, double t, Site limit)
{
    const GreenOccupancy occ(noise, t);
    return std::min(reach_scan([&](Site y) { return y <= limit && occ(y); }, config.range, config.site_cap), limit);
}

/// Whether N^G(t) >= n, scanning only sites 1..n.
inline bool green_reaches(const DiscreteNoise& noise, unsigned r, Site n, double t)
{
    unsigned run = 0;
    for (Site y = 1; y <= n; ++y) {
        run = noise.first_arrival(y) <= t ? 0 : run + 1;
        if (run == r)
            return false;
    }
    return true;
}

/// First time N^G reaches x, event-driven over the first arrivals of
/// sites 1..x. The end of the first vacant run only moves right.
inline double simulate_tau_green(const DiscreteNoise& noise, const ModelConfig& config, Site x)
{
    const unsigned r = config.range;
    if (x + 1 <= r)
        return 0.0;
    std::vector<double> first(x + 1);
    for (Site y = 1; y <= x; ++y)
        first[y] = noise.first_arrival(y);
    std::vector<Site> order(x);
    std::iota(order.begin(), order.end(), Site{1});
    std::sort(order.begin(), order.end(), [&](Site a, Site b) { return first[a] < first[b]; });

    std::vector<bool> occ(x + 1, false);
    Site run_end = r;  // sites 1..r vacant
    for (Site s : order) {
        occ[s] = true;
        if (s + r <= run_end || s > run_end)
            continue;
        unsigned run = 0;
        Site y = s + 1;
        for (; y <= x; ++y) {
            run = occ[y] ? 0 : run + 1;
            if (run == r)
                break;
        }
        if (y > x) {
            if (first[s] > config.time_cap)
                throw HorizonExceeded("tau_green exceeds the time cap");
            return first[s];
        }
        run_end = y;
    }
    // Unreachable: once every site 1..x is occupied the scan passes x.
    throw HorizonExceeded("tau_green did not terminate");
}

// ---------------------------------------------------------------------------
// Continuous model

/// N^G(t) on R+: the right-most centre of the chain x_1 <= ignite,
/// x_i - x_{i-1} <= connect, or 0 when no centre lies within ignite.
/// Walks unit cells outward, so the window is extended on demand. With a
/// finite limit the result is min(N^G(t), limit).
inline double simulate_N_green_cont(const ContinuousNoise& noise, const ModelConfig& config, double t,
                                    double limit = std::numeric_limits<double>::infinity())
{
    double reach = 0.0;
    double next = config.ignite_distance;
    const auto slabs = static_cast<std::uint64_t>(std::ceil(std::max(t, 0.0)));
    std::vector<TreePoint> cell;
    std::vector<double> positions;
    for (std::uint64_t c = 0; static_cast<double>(c) <= next; ++c) {
        if (c > config.site_cap)
            throw HorizonExceeded("continuous green cluster exceeds the spatial cap");
        cell.clear();
        for (std::uint64_t s = 0; s < slabs; ++s)
            noise.append_cell(c, s, cell);
        positions.clear();
        for (const auto& p : cell)
            if (p.time <= t)
                positions.push_back(p.position);
        std::sort(positions.begin(), positions.end());
        for (double p : positions) {
            if (p > next)
                return reach;
            reach = p;
            next = p + config.connect_distance;
            if (reach >= limit)
                return limit;
        }
    }
    return reach;
}

/// Feeds the points of [0, window) x [0, inf) in time order, one unit
/// time slab at a time.
class TimeOrderedFeed {
public:
    TimeOrderedFeed(const ContinuousNoise& noise, std::uint64_t window_cells)
        : noise_(&noise), cells_(window_cells)
    {
    }

    const TreePoint& next()
    {
        while (pos_ == buf_.size()) {
            buf_.clear();
            pos_ = 0;
            for (std::uint64_t c = 0; c < cells_; ++c)
                noise_->append_cell(c, slab_, buf_);
            std::sort(buf_.begin(), buf_.end(), [](const TreePoint& a, const TreePoint& b) { return a.time < b.time; });
            ++slab_;
        }
        return buf_[pos_++];
    }

    double window() const noexcept { return static_cast<double>(cells_); }

private:
    const ContinuousNoise* noise_;
    std::uint64_t cells_;
    std::uint64_t slab_ = 0;
    std::vector<TreePoint> buf_;
    std::size_t pos_ = 0;
};

namespace detail {

struct WindowTooSmall {};

/// Runs fn(window_cells), doubling the window whenever fn reports that a
/// cluster touched its boundary.
template <class Fn>
auto with_growing_window(double needed, const ModelConfig& config, Fn&& fn)
{
    auto cells = static_cast<std::uint64_t>(std::ceil(needed + 2.0 * config.connect_distance + config.ignite_distance)) + 4;
    while (true) {
        if (cells > config.site_cap)
            throw HorizonExceeded("continuous window exceeds the spatial cap");
        try {
            return fn(cells);
        } catch (const WindowTooSmall&) {
            cells *= 2;
        }
    }
}

} // namespace detail

/// First time the continuous green cluster reaches x.
inline double simulate_tau_green_cont(const ContinuousNoise& noise, const ModelConfig& config, double x)
{
    if (!(x > 0.0))
        throw std::invalid_argument("continuous target must be > 0");
    return detail::with_growing_window(2.0 * x, config, [&](std::uint64_t cells) {
        TimeOrderedFeed feed(noise, cells);
        std::set<double> centres;
        double reach = 0.0;
        double limit = config.ignite_distance;
        while (true) {
            const TreePoint p = feed.next();
            if (p.time > config.time_cap)
                throw HorizonExceeded("tau_green exceeds the time cap");
            auto it = centres.insert(p.position).first;
            if (p.position <= reach || p.position > limit)
                continue;
            reach = p.position;
            for (++it; it != centres.end() && *it <= reach + config.connect_distance; ++it)
                reach = *it;
            limit = reach + config.connect_distance;
            if (reach >= x)
                return p.time;
            if (limit >= feed.window())
                throw detail::WindowTooSmall{};
        }
    });
}

} // namespace forestfire
