#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "forestfire/counter_rng.hpp"
#include "forestfire/model.hpp"

namespace forestfire {

/// Runs fn(replication_seed(master_seed, i), i) for i in [0, reps) on up to
/// `workers` threads. Results are stored by index, so the output does not
/// depend on the worker count or on completion order.
template <class T, class Fn>
std::vector<T> run_replications(std::size_t reps, std::uint64_t master_seed, unsigned workers, Fn&& fn)
{
    std::vector<T> out(reps);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(reps, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < reps; ++i)
            out[i] = fn(replication_seed(master_seed, i), i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < reps; i = next++) {
                try {
                    out[i] = fn(replication_seed(master_seed, i), i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

/// Mean, variance and fourth central moment, accumulated in a fixed order.
class SampleStats {
public:
    void add(double x)
    {
        values_.push_back(x);
    }

    std::size_t count() const noexcept { return values_.size(); }

    double mean() const
    {
        if (values_.empty())
            return std::numeric_limits<double>::quiet_NaN();
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            m += (values_[i] - m) / static_cast<double>(i + 1);
        return m;
    }

    /// Unbiased sample variance.
    double variance() const
    {
        const auto n = values_.size();
        if (n < 2)
            return 0.0;
        const double m = mean();
        double s = 0.0;
        for (double v : values_)
            s += (v - m) * (v - m);
        return s / static_cast<double>(n - 1);
    }

    double std_error() const
    {
        const auto n = values_.size();
        return n < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n));
    }

    /// Large-sample standard error of the sample variance,
    /// sqrt((m4 - s^4) / n).
    double variance_std_error() const
    {
        const auto n = values_.size();
        if (n < 2)
            return 0.0;
        const double m = mean();
        double m2 = 0.0, m4 = 0.0;
        for (double v : values_) {
            const double d = (v - m) * (v - m);
            m2 += d;
            m4 += d * d;
        }
        m2 /= static_cast<double>(n);
        m4 /= static_cast<double>(n);
        return std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(n));
    }

    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

struct EstimatorResult {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(reps)
    std::size_t reps = 0;    // replications that contributed
    std::size_t censored = 0;
    std::uint64_t master_seed = 0;
    std::string quantity_id;

    friend bool operator==(const EstimatorResult&, const EstimatorResult&) = default;
};

/// Reduces per-replication samples (nullopt = censored) in index order.
inline EstimatorResult summarize(const std::vector<std::optional<double>>& samples, std::uint64_t master_seed,
                                 std::string quantity_id)
{
    SampleStats stats;
    std::size_t censored = 0;
    for (const auto& s : samples) {
        if (s)
            stats.add(*s);
        else
            ++censored;
    }
    return {stats.mean(), stats.std_error(), stats.count(), censored, master_seed, std::move(quantity_id)};
}

using Sampler = std::function<std::optional<double>(std::uint64_t seed, std::size_t index)>;

/// Plain Monte Carlo over independent replications; replication i is seeded
/// from (master_seed, i). A sampler returning nullopt or throwing
/// HorizonExceeded counts as censored and is excluded from the mean.
inline EstimatorResult mc_estimate(const Sampler& sampler, std::size_t reps, std::uint64_t master_seed,
                                   std::string quantity_id = {}, unsigned workers = 1)
{
    if (reps < 2)
        throw std::invalid_argument("mc_estimate needs reps >= 2");
    auto samples = run_replications<std::optional<double>>(reps, master_seed, workers,
                                                           [&](std::uint64_t seed, std::size_t i) -> std::optional<double> {
                                                               try {
                                                                   return sampler(seed, i);
                                                               } catch (const HorizonExceeded&) {
                                                                   return std::nullopt;
                                                               }
                                                           });
    return summarize(samples, master_seed, std::move(quantity_id));
}

/// Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)| of a sample against a
/// continuous cdf.
template <class Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf)
{
    if (samples.empty())
        throw std::invalid_argument("ks_distance needs a non-empty sample");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

struct MinimaDecomposition {
    std::size_t nu = 0;
    std::vector<std::size_t> s;
};

/// Spaced weak local minima of y = (+inf, y_1, ..., y_i).
///
/// Index j in 1..i-1 qualifies when y_j <= min(y_{j-1}, y_{j+1}); the last
/// index has no right neighbour and never qualifies. Greedy: the first
/// qualifying index, then the first qualifying index at least 3 further on,
/// until none is left.
inline MinimaDecomposition extract_weak_minima(const std::vector<double>& y)
{
    if (y.size() < 2)
        throw std::invalid_argument("weak minima need a sequence of length >= 2");
    if (!(std::isinf(y.front()) && y.front() > 0))
        throw std::invalid_argument("weak minima need y_0 = +inf");
    MinimaDecomposition out;
    std::size_t earliest = 1;
    for (std::size_t j = 1; j + 1 < y.size(); ++j) {
        if (j < earliest)
            continue;
        if (y[j] <= std::min(y[j - 1], y[j + 1])) {
            out.s.push_back(j);
            earliest = j + 3;
        }
    }
    out.nu = out.s.size();
    return out;
}

} // namespace forestfire
