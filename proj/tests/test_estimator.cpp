#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "forestfire/counter_rng.hpp"
#include "forestfire/estimator.hpp"

using namespace forestfire;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

Sampler uniform_sampler()
{
    return [](std::uint64_t seed, std::size_t) -> std::optional<double> {
        return CounterStream(seed, StreamTag::test_sequences, 0).uniform(0);
    };
}
} // namespace

TEST(McEstimate, ConstantSamplerHasZeroError)
{
    const auto r = mc_estimate([](std::uint64_t, std::size_t) { return std::optional<double>(3.5); }, 100, 1, "c");
    EXPECT_EQ(r.mean, 3.5);
    EXPECT_EQ(r.std_error, 0.0);
    EXPECT_EQ(r.reps, 100u);
    EXPECT_EQ(r.censored, 0u);
    EXPECT_EQ(r.quantity_id, "c");
}

TEST(McEstimate, ReproducibleAndWorkerInvariant)
{
    const auto a = mc_estimate(uniform_sampler(), 5000, 42, "u", 1);
    const auto b = mc_estimate(uniform_sampler(), 5000, 42, "u", 1);
    const auto c = mc_estimate(uniform_sampler(), 5000, 42, "u", 4);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    EXPECT_NE(a.mean, mc_estimate(uniform_sampler(), 5000, 43, "u").mean);
    EXPECT_NEAR(a.mean, 0.5, 4.0 * a.std_error);
    EXPECT_NEAR(a.std_error, std::sqrt(1.0 / 12.0 / 5000), 2e-4);
}

TEST(McEstimate, CensoringExcludesSamples)
{
    const Sampler s = [](std::uint64_t, std::size_t i) -> std::optional<double> {
        if (i % 4 == 0)
            return std::nullopt;
        if (i % 4 == 1)
            throw HorizonExceeded("cap");
        return static_cast<double>(i % 4);
    };
    const auto r = mc_estimate(s, 100, 7);
    EXPECT_EQ(r.censored, 50u);
    EXPECT_EQ(r.reps, 50u);
    EXPECT_DOUBLE_EQ(r.mean, 2.5);
}

TEST(McEstimate, OtherExceptionsPropagate)
{
    const Sampler s = [](std::uint64_t, std::size_t i) -> std::optional<double> {
        if (i == 3)
            throw std::runtime_error("boom");
        return 1.0;
    };
    EXPECT_THROW(mc_estimate(s, 10, 1, {}, 1), std::runtime_error);
    EXPECT_THROW(mc_estimate(s, 10, 1, {}, 3), std::runtime_error);
}

TEST(McEstimate, NeedsTwoReplications)
{
    EXPECT_THROW(mc_estimate(uniform_sampler(), 1, 1), std::invalid_argument);
}

TEST(SampleStatsTest, KnownMoments)
{
    SampleStats s;
    for (double v : {1.0, 2.0, 3.0, 4.0})
        s.add(v);
    EXPECT_DOUBLE_EQ(s.mean(), 2.5);
    EXPECT_DOUBLE_EQ(s.variance(), 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.std_error(), std::sqrt(5.0 / 12.0));
}

TEST(KsDistance, UniformSampleAgainstUniformCdf)
{
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i)
        xs.push_back(CounterStream(3, StreamTag::test_sequences, 1).uniform(i));
    const double d = ks_distance(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
    EXPECT_LT(d, 1.36 / std::sqrt(20000.0));
    EXPECT_GT(ks_distance(xs, [](double x) { return std::clamp(x * x, 0.0, 1.0); }), 0.2);
    EXPECT_DOUBLE_EQ(ks_distance({0.5}, [](double x) { return x; }), 0.5);
    EXPECT_THROW(ks_distance({}, [](double x) { return x; }), std::invalid_argument);
}

TEST(WeakMinima, ReferenceSequence)
{
    const auto m = extract_weak_minima({kInf, 3, 2, 4, 1, 3, 2, 5});
    EXPECT_EQ(m.nu, 2u);
    EXPECT_EQ(m.s, (std::vector<std::size_t>{2, 6}));
}

TEST(WeakMinima, StrictlyDecreasingHasNone)
{
    EXPECT_EQ(extract_weak_minima({kInf, 5, 4, 3, 2, 1}).nu, 0u);
}

TEST(WeakMinima, ShortSequence)
{
    const auto m = extract_weak_minima({kInf, 1, 2});
    EXPECT_EQ(m.nu, 1u);
    EXPECT_EQ(m.s, (std::vector<std::size_t>{1}));
    EXPECT_EQ(extract_weak_minima({kInf, 1}).nu, 0u);
}

TEST(WeakMinima, Errors)
{
    EXPECT_THROW(extract_weak_minima({kInf}), std::invalid_argument);
    EXPECT_THROW(extract_weak_minima({1.0, 2.0, 3.0}), std::invalid_argument);
    EXPECT_THROW(extract_weak_minima({-kInf, 2.0, 3.0}), std::invalid_argument);
}

TEST(WeakMinima, InvariantsOnRandomSequences)
{
    const CounterStream rng(9, StreamTag::test_sequences, 2);
    std::uint64_t draw = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t len = 2 + static_cast<std::size_t>(rng.uniform(draw++) * 30);
        std::vector<double> y{kInf};
        for (std::size_t j = 1; j < len; ++j)
            y.push_back(std::floor(rng.uniform(draw++) * 5));  // ties included
        const auto m = extract_weak_minima(y);
        ASSERT_EQ(m.nu, m.s.size());
        for (std::size_t q = 0; q < m.s.size(); ++q) {
            const auto j = m.s[q];
            ASSERT_GE(j, 1u);
            ASSERT_LE(j + 2, y.size());
            EXPECT_LE(y[j], std::min(y[j - 1], y[j + 1]));
            if (q > 0) {
                EXPECT_GE(j, m.s[q - 1] + 3);
            }
        }
        // Greedy maximality: no qualifying index is skipped unless it is
        // within 2 of the previous choice.
        std::size_t earliest = 1, next = 0;
        for (std::size_t j = 1; j + 1 < y.size(); ++j) {
            const bool weak = y[j] <= std::min(y[j - 1], y[j + 1]);
            if (weak && j >= earliest) {
                ASSERT_LT(next, m.s.size());
                EXPECT_EQ(m.s[next++], j);
                earliest = j + 3;
            }
        }
        EXPECT_EQ(next, m.nu);
    }
}

TEST(WeakMinima, NoMinimumIsRareForIidSequences)
{
    // For i i.i.d. continuous values, P(no weak minimum) <= 1/i! since the
    // sequence must then be strictly decreasing.
    const CounterStream rng(10, StreamTag::test_sequences, 3);
    std::uint64_t draw = 0;
    for (std::size_t i : {3u, 4u, 5u}) {
        const int trials = 50000;
        int none = 0;
        for (int k = 0; k < trials; ++k) {
            std::vector<double> y{kInf};
            for (std::size_t j = 0; j < i; ++j)
                y.push_back(rng.uniform(draw++));
            none += extract_weak_minima(y).nu == 0;
        }
        double fact = 1.0;
        for (std::size_t j = 2; j <= i; ++j)
            fact *= static_cast<double>(j);
        const double p = static_cast<double>(none) / trials;
        EXPECT_LE(p, 1.0 / fact + 3.0 * std::sqrt((1.0 / fact) / trials));
    }
}

TEST(RunReplications, ResultsIndexedBySeed)
{
    const auto out = run_replications<std::uint64_t>(50, 5, 3, [](std::uint64_t s, std::size_t) { return s; });
    for (std::size_t i = 0; i < out.size(); ++i)
        EXPECT_EQ(out[i], replication_seed(5, i));
}
