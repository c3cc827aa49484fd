#include <gtest/gtest.h>

#include <cmath>

#include "forestfire/fire.hpp"
#include "forestfire/green.hpp"

using namespace forestfire;

TEST(FireDiscrete, TauDominatesGreen)
{
    for (unsigned r : {1u, 2u, 3u}) {
        const auto config = ModelConfig::discrete(r, RateProfile::iid_uniform(0.5, 1.5, 4));
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const DiscreteNoise noise(seed, config.profile);
            const auto trace = run_fire(noise, config, FireStop{.targets = {8, 64, 512}});
            for (double x : {8.0, 64.0, 512.0}) {
                const auto tau = trace.tau_of(x);
                ASSERT_TRUE(tau.has_value());
                EXPECT_GE(*tau, simulate_tau_green(noise, config, static_cast<Site>(x)));
            }
        }
    }
}

TEST(FireDiscrete, RecordsMatchGreenReach)
{
    for (unsigned r : {1u, 3u}) {
        const auto config = ModelConfig::discrete(r);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const DiscreteNoise noise(seed, config.profile);
            const auto trace = run_fire(noise, config, FireStop{.targets = {256}});
            ASSERT_FALSE(trace.records.empty());
            for (const auto& rec : trace.records)
                EXPECT_EQ(rec.location, static_cast<double>(simulate_N_green(noise, config, rec.time, 256)));
        }
    }
}

TEST(FireDiscrete, WindowDoesNotChangeEarlyBurns)
{
    const auto config = ModelConfig::discrete(2);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DiscreteNoise noise(seed, config.profile);
        const auto small = run_fire(noise, config, FireStop{.targets = {20, 60}});
        const auto large = run_fire(noise, config, FireStop{.targets = {20, 60}, .window = 5000.0});
        EXPECT_EQ(small.tau_of(20), large.tau_of(20));
        EXPECT_EQ(small.tau_of(60), large.tau_of(60));
        for (const auto& rec : small.records)
            EXPECT_EQ(rec.location, std::min(large.reach_at(rec.time), 60.0));
    }
}

TEST(FireDiscrete, FirstSiteMeanTimeIsTwo)
{
    // Site 1 must be occupied when the origin fires: Exp(1) + Exp(1).
    const auto config = ModelConfig::discrete(1);
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const DiscreteNoise noise(replication_seed(5, i), config.profile);
        const double t = *run_fire(noise, config, FireStop{.targets = {1}}).tau_of(1);
        sum += t;
        sq += t * t;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    EXPECT_NEAR(mean, 2.0, 3.0 * se);
}

TEST(FireDiscrete, LongerRangeBurnsFaster)
{
    auto mean_tau = [](unsigned r) {
        const auto config = ModelConfig::discrete(r);
        double sum = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const DiscreteNoise noise(replication_seed(6, i), config.profile);
            sum += *run_fire(noise, config, FireStop{.targets = {256}}).tau_of(256);
        }
        return sum / 2000;
    };
    EXPECT_LT(mean_tau(2), mean_tau(1));
}

TEST(FireDiscrete, HorizonStopsIncomplete)
{
    const auto config = ModelConfig::discrete(1);
    const DiscreteNoise noise(1, config.profile);
    const auto trace = run_fire(noise, config, FireStop{.targets = {1u << 20}, .horizon = 0.5});
    EXPECT_FALSE(trace.tau_of(1u << 20).has_value());
    for (const auto& b : trace.burns)
        EXPECT_LE(b.time, 0.5);
}

TEST(LatticeState, ConsumedArrivalsMatchNoise)
{
    const DiscreteNoise noise(12, RateProfile::constant(1.0));
    LatticeState state(noise);
    for (double t = 0.5; t < 6.0; t += 0.5) {
        for (Site y = 0; y < 30; ++y)
            if (state.occupied(y, t) && (y % 3 == 0))
                state.clear(y, t);
        if (t == 3.0)
            state.clear_all(t);
    }
    std::uint64_t expected = 0;
    for (Site y = 0; y < state.touched(); ++y)
        expected += noise.arrivals_before(y, 8.0).size();
    EXPECT_EQ(state.consumed_through(8.0), expected);
}

TEST(LatticeState, ClearEmptiesUntilNextArrival)
{
    const DiscreteNoise noise(2, RateProfile::constant(1.0));
    LatticeState state(noise);
    const double first = noise.first_arrival(4);
    EXPECT_TRUE(state.occupied(4, first));
    state.clear(4, first);
    EXPECT_FALSE(state.occupied(4, first));
    const auto later = noise.arrivals_before(4, first + 50.0);
    ASSERT_GE(later.size(), 2u);
    EXPECT_TRUE(state.occupied(4, later[1]));
}

TEST(FireContinuous, TauDominatesGreenAndRecordsMatch)
{
    const auto config = ModelConfig::continuous();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ContinuousNoise noise(seed, 1.0);
        const auto trace = run_fire(noise, config, FireStop{.targets = {4.0, 16.0}});
        for (double x : {4.0, 16.0}) {
            ASSERT_TRUE(trace.tau_of(x).has_value());
            EXPECT_GE(*trace.tau_of(x), simulate_tau_green_cont(noise, config, x));
        }
        for (const auto& rec : trace.records)
            EXPECT_EQ(rec.location, simulate_N_green_cont(noise, config, rec.time, 16.0));
    }
}

TEST(BlueProcess, RenewalProperties)
{
    const auto config = ModelConfig::discrete(1);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DiscreteNoise noise(seed, config.profile);
        const auto result = run_blue_experiment(
            noise, config, 79, BlueOptions{.cycles = 50, .stop_when_fire_reaches = 993, .check_domination = true});
        EXPECT_EQ(result.domination_violations, 0u);
        ASSERT_FALSE(result.records.empty());
        EXPECT_EQ(result.records.front().rho, result.records.front().rho_fire);
        double previous_hit = 0.0;
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            const auto& rec = result.records[i];
            EXPECT_EQ(rec.i, i + 1);
            EXPECT_GE(rec.rho_fire, 79.0);
            EXPECT_LE(rec.rho, rec.rho_fire);
            EXPECT_NEAR(rec.tau, rec.hit_time - previous_hit, 1e-9);
            if (i > 0 && rec.rho <= result.records[i - 1].rho) {
                EXPECT_EQ(rec.rho_fire, rec.rho);
            }
            previous_hit = rec.hit_time;
        }
    }
}

TEST(BlueProcess, RejectsSmallWindow)
{
    const auto config = ModelConfig::discrete(1);
    const DiscreteNoise noise(1, config.profile);
    EXPECT_THROW(run_blue_experiment(noise, config, 50, BlueOptions{.window = 10.0}), std::invalid_argument);
    EXPECT_THROW(run_blue_experiment(noise, config, 0, BlueOptions{}), std::invalid_argument);
}

TEST(BlueProcess, ContinuousFirstCycleAgrees)
{
    const auto config = ModelConfig::continuous();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ContinuousNoise noise(seed, 1.0);
        const auto result =
            run_blue_experiment(noise, config, 5.0, BlueOptions{.cycles = 5, .stop_when_fire_reaches = 40.0});
        ASSERT_FALSE(result.records.empty());
        EXPECT_EQ(result.records.front().rho, result.records.front().rho_fire);
        for (const auto& rec : result.records)
            EXPECT_LE(rec.rho, rec.rho_fire);
    }
}

TEST(GapEvent, ZeroDurationAlwaysHasGap)
{
    const DiscreteNoise noise(1, RateProfile::constant(1.0));
    EXPECT_TRUE(detect_gap_event(noise, ModelConfig::discrete(2), 10, 1.0, 0.0));
    EXPECT_TRUE(detect_gap_event(ContinuousNoise(1, 1.0), ModelConfig::continuous(), 10.0, 1.0, 0.0));
}

TEST(GapEvent, SingleWindowVoidProbability)
{
    // span = r: the only window is sites 1..r, void with prob exp(-r * d).
    const auto config = ModelConfig::discrete(2);
    const int n = 40000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const DiscreteNoise noise(replication_seed(8, i), config.profile);
        hits += detect_gap_event(noise, config, 2, 3.0, 0.5);
    }
    const double p = std::exp(-1.0);
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(GapEvent, LongDurationClosesAllGaps)
{
    const auto config = ModelConfig::discrete(1);
    const DiscreteNoise noise(3, config.profile);
    EXPECT_FALSE(detect_gap_event(noise, config, 20, 0.0, 200.0));
    EXPECT_THROW(detect_gap_event(noise, config, 20, 0.0, -1.0), std::invalid_argument);
    EXPECT_THROW(detect_gap_event(noise, ModelConfig::discrete(3), 2, 0.0, 1.0), std::invalid_argument);
}
