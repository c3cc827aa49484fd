#include <gtest/gtest.h>

#include <cmath>

#include "forestfire/validators.hpp"

using namespace forestfire;

namespace {

void expect_all_pass(const Report& report)
{
    for (const auto& c : report.checks)
        EXPECT_TRUE(c.pass) << report.suite << "/" << c.id << ": value " << c.value << " reference " << c.reference
                            << " " << c.note;
    EXPECT_TRUE(report.hard_pass());
}

const Check& get(const Report& report, const std::string& id)
{
    const Check* c = report.find(id);
    if (!c)
        throw std::runtime_error("missing check " + id);
    return *c;
}

} // namespace

TEST(Checks, HelpersComputeMargins)
{
    const auto a = check_at_most("a", CheckKind::exact, 0.5, 1.0);
    EXPECT_TRUE(a.pass);
    EXPECT_DOUBLE_EQ(a.margin, 0.5);
    const auto b = check_close("b", CheckKind::statistical, 1.3, 1.0, 0.2);
    EXPECT_FALSE(b.pass);
    EXPECT_NEAR(b.margin, -0.1, 1e-12);
    const auto c = check_zero("c", CheckKind::pathwise, 0);
    EXPECT_TRUE(c.pass);
    EXPECT_TRUE(c.hard());
    EXPECT_FALSE(check_zero("d", CheckKind::trend, 0).hard());
}

TEST(Checks, OnlyHardFailuresFailTheReport)
{
    Report r{"x", 1, 1, 0, {}};
    r.checks.push_back(check_at_most("trend", CheckKind::trend, 2.0, 1.0));
    r.checks.push_back(check_at_most("stat", CheckKind::statistical, 2.0, 1.0));
    EXPECT_TRUE(r.hard_pass());
    r.checks.push_back(check_zero("path", CheckKind::pathwise, 1));
    EXPECT_FALSE(r.hard_pass());
}

TEST(FireGreenCoupling, DiscreteShortRange)
{
    const auto report = validate_prop1(ModelConfig::discrete(1), {16, 256, 4096}, 1e4, 200, 3);
    expect_all_pass(report);
    EXPECT_EQ(report.censored, 0u);
}

TEST(FireGreenCoupling, DiscretePeriodicLongRange)
{
    const auto config = ModelConfig::discrete(3, RateProfile::periodic({0.5, 1.5, 1.0}, 0.5, 1.5));
    expect_all_pass(validate_prop1(config, {16, 256, 4096}, 1e4, 200, 4));
}

TEST(FireGreenCoupling, Continuous)
{
    expect_all_pass(validate_prop1(ModelConfig::continuous(), {16, 64}, 1e4, 100, 5));
}

TEST(FireGreenCoupling, RejectsBadArguments)
{
    EXPECT_THROW(validate_prop1(ModelConfig::discrete(1), {}, 1.0, 10, 1), std::invalid_argument);
    EXPECT_THROW(validate_prop1(ModelConfig::discrete(1), {4}, 0.0, 10, 1), std::invalid_argument);
}

TEST(Thresholds, ShortRangeEnvelopes)
{
    const auto report = validate_thresholds(ModelConfig::discrete(1), {.n = 10000, .epsilon = 0.2}, 3000, 6);
    expect_all_pass(report);
    EXPECT_LE(get(report, "upper_tail_T").value, std::pow(1e4, -0.2) + 0.03);
}

TEST(Thresholds, RangeTwoWithLevel)
{
    const auto report =
        validate_thresholds(ModelConfig::discrete(2), {.n = 2000, .epsilon = 0.2, .gamma = 1.5, .k = 3}, 2000, 7);
    EXPECT_TRUE(report.hard_pass());
    EXPECT_NE(report.find("level_lower_tail"), nullptr);
    EXPECT_TRUE(get(report, "critical_window").pass);
}

TEST(Thresholds, InhomogeneousSkipsHomogeneousChecks)
{
    const auto config = ModelConfig::discrete(1, RateProfile::iid_uniform(0.5, 1.5, 2));
    const auto report = validate_thresholds(config, {.n = 1000}, 500, 8);
    EXPECT_EQ(report.find("upper_tail_T"), nullptr);
    EXPECT_NE(report.find("critical_window"), nullptr);
}

TEST(BlueCoupling, ShortRange)
{
    const auto report = validate_lemma1(ModelConfig::discrete(1), {.gamma = 1.5, .k = 4, .cycles = 1000}, 9);
    expect_all_pass(report);
    EXPECT_EQ(get(report, "gap_event_containment").kind, CheckKind::pathwise);
}

TEST(BlueCoupling, LongRangeContainmentIsTrend)
{
    const auto report = validate_lemma1(ModelConfig::discrete(2), {.gamma = 1.5, .k = 3, .cycles = 200}, 10);
    EXPECT_TRUE(report.hard_pass());
    EXPECT_EQ(get(report, "gap_event_containment").kind, CheckKind::trend);
}

TEST(BlueCoupling, RejectsContinuousModel)
{
    EXPECT_THROW(validate_lemma1(ModelConfig::continuous(), {}, 1), std::invalid_argument);
}

TEST(AlphaK, ZeroDurationGivesOne)
{
    const auto est = estimate_alpha_k(ModelConfig::discrete(1), {.gamma = 1.5, .k = 3, .forced_duration = 0.0}, 20, 1);
    EXPECT_EQ(est.mean, 1.0);
    EXPECT_EQ(est.std_error, 0.0);
}

TEST(AlphaK, DecreasesAlongTheLadder)
{
    const auto config = ModelConfig::discrete(1);
    const auto low = estimate_alpha_k(config, {.gamma = 1.5, .k = 3}, 5000, 11);
    const auto high = estimate_alpha_k(config, {.gamma = 1.5, .k = 5}, 100, 12);
    EXPECT_GT(low.mean, 0.0);
    EXPECT_LT(high.mean, low.mean - 3.0 * std::hypot(low.std_error, high.std_error));
}

TEST(Growth, RatioMatchesHitSeries)
{
    const auto g = estimate_growth(ModelConfig::discrete(1), 1.5, 3, 3000, 13);
    EXPECT_EQ(g.n_k, 15u);
    EXPECT_EQ(g.n_k1, 79u);
    EXPECT_TRUE(get(g.report, "ratio_matches_hit_series").pass)
        << g.ratio << " vs " << g.hits_mean << " se " << g.combined_std_error;
    EXPECT_GT(g.ratio, 1.0);
    EXPECT_LT(g.ratio, std::numbers::e + 0.5);
    double sum = 1.0;
    for (double p : g.prob_A)
        sum += p;
    EXPECT_NEAR(sum, g.hits_mean, 1e-9);
    for (std::size_t i = 1; i < g.prob_A.size(); ++i)
        EXPECT_LE(g.prob_A[i], g.prob_A[i - 1]);
}

TEST(Growth, EqualThresholdsGiveUnitRatio)
{
    const auto g = estimate_growth(ModelConfig::discrete(1), 1.5, 3, 200, 14, 1, std::pair<Site, Site>{40, 40});
    EXPECT_DOUBLE_EQ(g.ratio, 1.0);
    EXPECT_DOUBLE_EQ(g.hits_mean, 1.0);
    EXPECT_TRUE(g.prob_A.empty());
}

TEST(Scaling, DiscreteGrowsLogarithmically)
{
    const auto s = scaling_study(ModelConfig::discrete(1), {16, 64, 256, 1024}, 300, 15);
    ASSERT_EQ(s.rows.size(), 4u);
    for (std::size_t i = 1; i < s.rows.size(); ++i)
        EXPECT_GT(s.rows[i].tau.mean, s.rows[i - 1].tau.mean);
    EXPECT_GT(s.kappa_hat, 0.5);
    EXPECT_LE(s.kappa_hat, 1.45);
    EXPECT_GT(s.min_tau_over_log_x, 0.0);
    EXPECT_EQ(s.censored, 0u);
}

TEST(Scaling, Continuous)
{
    const auto s = scaling_study(ModelConfig::continuous(), {8, 32, 128}, 100, 16);
    EXPECT_EQ(s.rows.size(), 3u);
    EXPECT_GT(s.rows.back().tau.mean, s.rows.front().tau.mean);
}

TEST(Scaling, RejectsBadGrid)
{
    EXPECT_THROW(scaling_study(ModelConfig::discrete(1), {16}, 10, 1), std::invalid_argument);
    EXPECT_THROW(scaling_study(ModelConfig::discrete(1), {64, 16}, 10, 1), std::invalid_argument);
    EXPECT_THROW(scaling_study(ModelConfig::discrete(1), {1, 16}, 10, 1), std::invalid_argument);
}

TEST(Permutation, IdentityIsExact)
{
    const auto config = ModelConfig::discrete(1, RateProfile::explicit_list({1.0, 0.5, 1.5, 1.0}, 0.5, 1.5));
    const auto p = validate_permutation(config, 3, {1, 2, 3}, 500, 17);
    EXPECT_TRUE(p.identical);
}

TEST(Permutation, ConstantProfileIsExact)
{
    const auto p = validate_permutation(ModelConfig::discrete(1), 4, {3, 1, 4, 2}, 500, 18);
    EXPECT_TRUE(p.identical);
}

TEST(Permutation, SwapPreservesMean)
{
    const auto config = ModelConfig::discrete(1, RateProfile::explicit_list({1.0, 0.5, 1.5}, 0.5, 1.5));
    const auto p = validate_permutation(config, 2, {2, 1}, 100000, 19);
    EXPECT_FALSE(p.identical);
    EXPECT_TRUE(get(p.report, "means_agree").pass)
        << p.original.mean << " vs " << p.permuted.mean << " se " << p.combined_std_error;
}

TEST(Permutation, Errors)
{
    EXPECT_THROW(validate_permutation(ModelConfig::discrete(2), 4, {2, 1}, 10, 1), std::invalid_argument);
    EXPECT_THROW(validate_permutation(ModelConfig::discrete(1), 1, {2, 1}, 10, 1), std::invalid_argument);
}

TEST(Oracles, AllChecksPass)
{
    expect_all_pass(validate_oracles(1));
    expect_all_pass(validate_oracles(2));
}

TEST(ContinuousMoments, SmallSample)
{
    const auto report =
        validate_continuous_moments(ModelConfig::continuous(), {.times = {1.0, 2.0}, .ks_time = 6.0, .ks_tolerance = 0.05},
                                    4000, 20);
    EXPECT_NE(report.find("mean_t=1.00"), nullptr);
    expect_all_pass(report);
}

TEST(ContinuousMoments, RejectsNonUnitModel)
{
    EXPECT_THROW(validate_continuous_moments(ModelConfig::continuous(2.0), {}, 10, 1), std::invalid_argument);
    EXPECT_THROW(validate_continuous_moments(ModelConfig::discrete(1), {}, 10, 1), std::invalid_argument);
}
