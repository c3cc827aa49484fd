#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "forestfire/counter_rng.hpp"

namespace forestfire {

using Site = std::uint64_t;

/// A simulation or search ran into a configured resource cap (time, sites,
/// spatial window, schedule size). Signals the cap, not a modelling error.
class HorizonExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Site-dependent occupation rates lambda_x with uniform bounds c1 <= lambda_x <= c2.
///
/// rate_at is a pure function of (profile, x). The i.i.d. kind recomputes
/// lambda_x from (seed, x) on every query instead of memoising, so the site
/// range is unbounded.
class RateProfile {
public:
    enum class Kind { constant, explicit_list, periodic, iid_uniform };

    static RateProfile constant(double rate)
    {
        RateProfile p(Kind::constant, rate, rate);
        p.values_ = {rate};
        return p;
    }

    /// values[x] for x < values.size(); the last value repeats beyond the list.
    static RateProfile explicit_list(std::vector<double> values, double c1, double c2)
    {
        if (values.empty())
            throw std::invalid_argument("explicit rate profile needs at least one value");
        RateProfile p(Kind::explicit_list, c1, c2);
        p.values_ = std::move(values);
        p.check_values();
        return p;
    }

    /// lambda_x = period[x mod period.size()].
    static RateProfile periodic(std::vector<double> period, double c1, double c2)
    {
        if (period.empty())
            throw std::invalid_argument("periodic rate profile needs a non-empty period");
        RateProfile p(Kind::periodic, c1, c2);
        p.values_ = std::move(period);
        p.check_values();
        return p;
    }

    /// lambda_x ~ Uniform[c1, c2] independently per site, drawn from (seed, x).
    static RateProfile iid_uniform(double c1, double c2, std::uint64_t seed)
    {
        RateProfile p(Kind::iid_uniform, c1, c2);
        p.seed_ = seed;
        return p;
    }

    /// Profile whose rate at site i (1 <= i <= perm.size()) is the original
    /// rate at site perm[i-1]. `perm` must be a permutation of 1..perm.size().
    RateProfile permuted(std::vector<Site> perm) const
    {
        std::vector<Site> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (sorted[i] != i + 1)
                throw std::invalid_argument("permutation must be a rearrangement of 1..m");
        RateProfile p = *this;
        // Compose with an existing remap so permuting twice behaves.
        for (auto& target : perm)
            target = remap(target);
        p.index_map_ = std::move(perm);
        return p;
    }

    double rate_at(Site x) const
    {
        x = remap(x);
        switch (kind_) {
        case Kind::constant:
            return values_.front();
        case Kind::explicit_list:
            return x < values_.size() ? values_[x] : values_.back();
        case Kind::periodic:
            return values_[x % values_.size()];
        case Kind::iid_uniform: {
            const double u = CounterStream(seed_, StreamTag::site_rates, x).uniform(0);
            return c1_ + (c2_ - c1_) * u;
        }
        }
        return values_.front();
    }

    Kind kind() const noexcept { return kind_; }
    double c1() const noexcept { return c1_; }
    double c2() const noexcept { return c2_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<Site>& index_map() const noexcept { return index_map_; }

    /// True when every site carries the same rate (the homogeneous model).
    bool homogeneous() const noexcept { return kind_ == Kind::constant || c1_ == c2_; }

private:
    RateProfile(Kind kind, double c1, double c2) : kind_(kind), c1_(c1), c2_(c2)
    {
        if (!(c1 > 0.0) || !std::isfinite(c2))
            throw std::invalid_argument("rate bounds need 0 < c1 <= c2 < inf");
        if (c2 < c1)
            throw std::invalid_argument("rate bounds need c1 <= c2");
    }

    void check_values() const
    {
        for (double v : values_)
            if (!(v >= c1_ && v <= c2_))
                throw std::invalid_argument("rate " + std::to_string(v) + " outside [c1, c2] = [" +
                                            std::to_string(c1_) + ", " + std::to_string(c2_) + "]");
    }

    Site remap(Site x) const noexcept
    {
        if (x >= 1 && x <= index_map_.size())
            return index_map_[x - 1];
        return x;
    }

    Kind kind_;
    double c1_;
    double c2_;
    std::vector<double> values_;
    std::uint64_t seed_ = 0;
    std::vector<Site> index_map_;
};

inline double rate_at(const RateProfile& profile, Site x) { return profile.rate_at(x); }

enum class Space { discrete, continuous };

/// Everything that defines one forest-fire model instance.
struct ModelConfig {
    Space space = Space::discrete;
    unsigned range = 1;
    RateProfile profile = RateProfile::constant(1.0);

    // Continuous model: tree centres arrive with `intensity` per unit length
    // per unit time; centres within connect_distance are linked, and a tree
    // within ignite_distance of the origin ignites.
    double intensity = 1.0;
    double connect_distance = 1.0;
    double ignite_distance = 1.0;

    // Resource guards.
    double time_cap = 1e4;
    Site site_cap = Site{1} << 30;

    void validate() const
    {
        if (range < 1)
            throw std::invalid_argument("range r must be >= 1");
        if (!(intensity > 0.0))
            throw std::invalid_argument("intensity must be > 0");
        if (!(connect_distance > 0.0))
            throw std::invalid_argument("connect_distance must be > 0");
        if (!(ignite_distance > 0.0))
            throw std::invalid_argument("ignite_distance must be > 0");
        if (!(time_cap > 0.0))
            throw std::invalid_argument("time_cap must be > 0");
    }

    static ModelConfig discrete(unsigned r, RateProfile profile = RateProfile::constant(1.0))
    {
        ModelConfig c;
        c.range = r;
        c.profile = std::move(profile);
        c.validate();
        return c;
    }

    static ModelConfig continuous(double connect = 1.0, double ignite = 1.0, double intensity = 1.0)
    {
        ModelConfig c;
        c.space = Space::continuous;
        c.connect_distance = connect;
        c.ignite_distance = ignite;
        c.intensity = intensity;
        c.validate();
        return c;
    }
};

} // namespace forestfire
