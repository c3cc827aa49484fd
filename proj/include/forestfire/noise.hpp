#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "forestfire/counter_rng.hpp"
#include "forestfire/model.hpp"

namespace forestfire {

/// Arrival stream of a single site: unit-rate exponential gaps divided by
/// lambda_x, so scaling every rate by c divides every arrival time by c.
///
/// Cursors are cheap values; two cursors for the same (seed, site) always
/// enumerate identical arrival times.
class ArrivalCursor {
public:
    ArrivalCursor() = default;
    ArrivalCursor(std::uint64_t seed, Site site, double rate)
        : stream_(seed, StreamTag::site_arrivals, site), inv_rate_(1.0 / rate)
    {
        advance();
    }

    /// Time of the current (not yet consumed) arrival.
    double next() const noexcept { return unit_sum_ * inv_rate_; }

    /// Number of arrivals consumed so far.
    std::uint64_t consumed() const noexcept { return count_ - 1; }

    void advance() noexcept { unit_sum_ += -std::log(stream_.uniform(count_++)); }

    /// Consume every arrival at or before t.
    void skip_through(double t) noexcept
    {
        while (next() <= t)
            advance();
    }

private:
    CounterStream stream_{0, StreamTag::site_arrivals, 0};
    double inv_rate_ = 1.0;
    double unit_sum_ = 0.0;
    std::uint64_t count_ = 0;
};

/// Independent Poisson arrival processes of rate lambda_x at every site
/// x >= 0, addressed by (master_seed, x). Stateless: every query recomputes
/// from coordinates, so instances can be shared read-only across threads.
class DiscreteNoise {
public:
    DiscreteNoise(std::uint64_t master_seed, RateProfile profile)
        : seed_(master_seed), profile_(std::move(profile))
    {
    }

    std::uint64_t seed() const noexcept { return seed_; }
    const RateProfile& profile() const noexcept { return profile_; }
    double rate(Site x) const { return profile_.rate_at(x); }

    ArrivalCursor cursor(Site x) const { return ArrivalCursor(seed_, x, rate(x)); }

    double first_arrival(Site x) const { return cursor(x).next(); }

    /// All arrival times of site x in [0, t], increasing.
    std::vector<double> arrivals_before(Site x, double t) const
    {
        std::vector<double> out;
        for (auto c = cursor(x); c.next() <= t; c.advance())
            out.push_back(c.next());
        return out;
    }

    /// True iff site x has an arrival in [start, start + duration).
    bool has_arrival_in(Site x, double start, double duration) const
    {
        if (!(duration > 0.0))
            return false;
        auto c = cursor(x);
        while (c.next() < start)
            c.advance();
        return c.next() < start + duration;
    }

private:
    std::uint64_t seed_;
    RateProfile profile_;
};

/// One tree centre of the continuous model.
struct TreePoint {
    double position;
    double time;

    friend bool operator==(const TreePoint&, const TreePoint&) = default;
};

/// Space-time Poisson point field on [0, inf) x [0, inf) with the given
/// intensity, generated per unit cell [c, c+1) x [s, s+1) from
/// (master_seed, c, s). Growing a window never reshuffles existing points.
class ContinuousNoise {
public:
    ContinuousNoise(std::uint64_t master_seed, double intensity) : seed_(master_seed), intensity_(intensity)
    {
        if (!(intensity > 0.0))
            throw std::invalid_argument("intensity must be > 0");
        poisson_zero_ = std::exp(-intensity);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    double intensity() const noexcept { return intensity_; }

    static constexpr std::uint64_t kMaxSpaceCell = std::uint64_t{1} << 36;
    static constexpr std::uint64_t kMaxTimeCell = std::uint64_t{1} << 20;

    /// Points of cell (c, s), in generation order.
    void append_cell(std::uint64_t c, std::uint64_t s, std::vector<TreePoint>& out) const
    {
        if (c >= kMaxSpaceCell || s >= kMaxTimeCell)
            throw HorizonExceeded("continuous noise cell index out of range");
        const CounterStream stream(seed_, StreamTag::continuous_cells, (s << 36) | c);
        // Poisson(intensity) count by inversion of the cdf.
        const double u = stream.uniform(0);
        std::uint64_t count = 0;
        double pmf = poisson_zero_;
        double cdf = pmf;
        while (u > cdf && pmf > 0.0) {
            ++count;
            pmf *= intensity_ / static_cast<double>(count);
            cdf += pmf;
        }
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto [a, b] = stream.uniform_pair(i + 1);
            out.push_back({static_cast<double>(c) + a, static_cast<double>(s) + b});
        }
    }

    std::vector<TreePoint> cell(std::uint64_t c, std::uint64_t s) const
    {
        std::vector<TreePoint> out;
        append_cell(c, s, out);
        return out;
    }

    /// Points in [a, b] x [s, t], ordered by position.
    std::vector<TreePoint> points_in(double a, double b, double s, double t) const
    {
        std::vector<TreePoint> out;
        if (!(a < b) || !(s < t))
            return out;
        const auto c0 = static_cast<std::uint64_t>(std::floor(std::max(a, 0.0)));
        const auto s0 = static_cast<std::uint64_t>(std::floor(std::max(s, 0.0)));
        std::vector<TreePoint> buf;
        for (std::uint64_t c = c0; static_cast<double>(c) <= b; ++c) {
            for (std::uint64_t q = s0; static_cast<double>(q) <= t; ++q) {
                buf.clear();
                append_cell(c, q, buf);
                for (const auto& p : buf)
                    if (p.position >= a && p.position <= b && p.time >= s && p.time <= t)
                        out.push_back(p);
            }
        }
        std::sort(out.begin(), out.end(), [](const TreePoint& x, const TreePoint& y) {
            return x.position < y.position || (x.position == y.position && x.time < y.time);
        });
        return out;
    }

private:
    std::uint64_t seed_;
    double intensity_;
    double poisson_zero_;
};

} // namespace forestfire
