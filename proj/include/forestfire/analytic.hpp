#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "forestfire/model.hpp"

namespace forestfire::analytic {

/// Compensated (Kahan-Babuska-Neumaier) accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Generic bisection for a monotone function on [lo, hi]: returns x with
/// f(x) ~ target, to absolute tolerance `tol` on the argument.
template <class Fn>
double bisect(Fn&& f, double target, double lo, double hi, double tol, bool increasing)
{
    for (int iter = 0; iter < 400 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const bool above = f(mid) > target;
        if (above == increasing)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// P(N^G(t) >= n) for r = 1: the product of (1 - e^{-lambda_i t}), i = 1..n.
inline double product_reach_prob(const RateProfile& profile, Site n, double t)
{
    if (t < 0.0)
        throw std::invalid_argument("t must be >= 0");
    double p = 1.0;
    for (Site i = 1; i <= n; ++i)
        p *= -std::expm1(-profile.rate_at(i) * t);
    return p;
}

/// Window sums s_i = lambda_{i+1} + ... + lambda_{i+r}, i = 0..n-r.
inline std::vector<double> window_sums(const RateProfile& profile, unsigned r, Site n)
{
    if (n < r)
        return {};
    std::vector<double> lam(n + 1);
    for (Site x = 1; x <= n; ++x)
        lam[x] = profile.rate_at(x);
    std::vector<double> out(n - r + 1);
    for (Site i = 0; i + r <= n; ++i) {
        double s = 0.0;
        for (unsigned m = 1; m <= r; ++m)
            s += lam[i + m];
        out[i] = s;
    }
    return out;
}

/// f_n(t) = sum_{i=0}^{n-r} exp(-(lambda_{i+1} + ... + lambda_{i+r}) t).
inline double f_n(const RateProfile& profile, unsigned r, Site n, double t)
{
    if (n < r || t < 0.0)
        throw std::invalid_argument("f_n needs n >= r and t >= 0");
    CompensatedSum sum;
    for (double s : window_sums(profile, r, n))
        sum.add(std::exp(-s * t));
    return sum.value();
}

/// The part of f_n whose window start i satisfies i = r k + j.
inline double f_nj(const RateProfile& profile, unsigned r, Site n, unsigned j, double t)
{
    if (n < r || j >= r || t < 0.0)
        throw std::invalid_argument("f_nj needs n >= r, 0 <= j < r and t >= 0");
    const auto sums = window_sums(profile, r, n);
    CompensatedSum sum;
    for (std::size_t i = j; i < sums.size(); i += r)
        sum.add(std::exp(-sums[i] * t));
    return sum.value();
}

/// f_n as a reusable function of t: window sums grouped by value so that
/// periodic and constant profiles evaluate in O(distinct sums).
class SumBound {
public:
    SumBound(const RateProfile& profile, unsigned r, Site n) : r_(r), n_(n)
    {
        if (n < r)
            throw std::invalid_argument("f_n needs n >= r");
        auto sums = window_sums(profile, r, n);
        std::sort(sums.begin(), sums.end());
        for (double s : sums) {
            if (!groups_.empty() && groups_.back().first == s)
                ++groups_.back().second;
            else
                groups_.emplace_back(s, 1.0);
        }
    }

    double operator()(double t) const
    {
        CompensatedSum sum;
        for (const auto& [s, count] : groups_)
            sum.add(count * std::exp(-s * t));
        return sum.value();
    }

    unsigned range() const noexcept { return r_; }
    Site n() const noexcept { return n_; }

private:
    unsigned r_;
    Site n_;
    std::vector<std::pair<double, double>> groups_;
};

struct Bounds {
    double lower;
    double upper;
};

/// 1 - e^{-f_n/r} <= P(N^G(t) < n) <= min(1, f_n).
inline Bounds sandwich_bounds(const RateProfile& profile, unsigned r, Site n, double t)
{
    const double f = f_n(profile, r, n, t);
    return {-std::expm1(-f / r), std::min(1.0, f)};
}

/// P(N^G(t) >= n) in the homogeneous model with alpha = e^{-t}, by the linear
/// recursion p_n = sum_{k=1}^r (1-alpha) alpha^{k-1} p_{n-k}, p_n = 1 for n < r.
inline double p_n_homog(double alpha, unsigned r, Site n)
{
    if (!(alpha >= 0.0 && alpha <= 1.0) || r < 1)
        throw std::invalid_argument("p_n_homog needs alpha in [0, 1] and r >= 1");
    if (n < r)
        return 1.0;
    std::vector<double> p(n + 1, 1.0);
    std::vector<double> weight(r + 1);
    for (unsigned k = 1; k <= r; ++k)
        weight[k] = (1.0 - alpha) * std::pow(alpha, k - 1);
    for (Site m = r; m <= n; ++m) {
        double s = 0.0;
        for (unsigned k = 1; k <= r; ++k)
            s += weight[k] * p[m - k];
        p[m] = s;
    }
    return p[n];
}

/// Two-root closed form of the r = 2 recursion.
inline double p_n_closed_r2(double alpha, Site n)
{
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("closed form needs alpha in [0, 1)");
    if (n < 1)
        throw std::invalid_argument("closed form is stated for n >= 1");
    const double root_d = std::sqrt(1.0 + 2.0 * alpha - 3.0 * alpha * alpha);
    const double xi1 = (1.0 - alpha + root_d) / 2.0;
    const double xi2 = (1.0 - alpha - root_d) / 2.0;
    const double c = (1.0 + alpha) / root_d;
    const auto k = static_cast<double>(n);
    return 0.5 * ((1.0 + c) * std::pow(xi1, k) + (1.0 - c) * std::pow(xi2, k));
}

/// Exact P(N^G(t) >= n) for any profile: dynamic programme over the length
/// of the trailing vacant run (states 0..r-1; reaching r is absorbing).
inline double p_n_dp(const RateProfile& profile, unsigned r, Site n, double t)
{
    if (r < 1 || t < 0.0)
        throw std::invalid_argument("p_n_dp needs r >= 1 and t >= 0");
    std::vector<double> state(r, 0.0), next(r, 0.0);
    state[0] = 1.0;
    for (Site x = 1; x <= n; ++x) {
        const double vacant = std::exp(-profile.rate_at(x) * t);
        double alive = 0.0;
        for (double v : state)
            alive += v;
        std::fill(next.begin(), next.end(), 0.0);
        next[0] = (1.0 - vacant) * alive;
        for (unsigned k = 0; k + 1 < r; ++k)
            next[k + 1] = vacant * state[k];
        std::swap(state, next);
    }
    double total = 0.0;
    for (double v : state)
        total += v;
    return total;
}

/// Ground truth by enumerating all 2^n occupancy patterns of sites 1..n and
/// summing the probability of those with no all-vacant window
/// {i+1, ..., i+r}, i = 0..n-r.
inline double p_n_bruteforce(const RateProfile& profile, unsigned r, Site n, double t)
{
    if (n > 20)
        throw std::invalid_argument("brute force enumeration limited to n <= 20");
    if (r < 1 || t < 0.0)
        throw std::invalid_argument("p_n_bruteforce needs r >= 1 and t >= 0");
    std::vector<double> vacant(n + 1);
    for (Site x = 1; x <= n; ++x)
        vacant[x] = std::exp(-profile.rate_at(x) * t);
    CompensatedSum total;
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        // bit x-1 set <=> site x occupied
        bool hole = false;
        for (Site i = 0; i + r <= n && !hole; ++i) {
            bool all_vacant = true;
            for (unsigned m = 1; m <= r; ++m)
                all_vacant = all_vacant && !((mask >> (i + m - 1)) & 1u);
            hole = all_vacant;
        }
        if (hole)
            continue;
        double prob = 1.0;
        for (Site x = 1; x <= n; ++x)
            prob *= ((mask >> (x - 1)) & 1u) ? 1.0 - vacant[x] : vacant[x];
        total.add(prob);
    }
    return total.value();
}

/// Largest root of xi^r - sum_{k=0}^{r-1} (1-alpha) alpha^{r-1-k} xi^k = 0.
/// Bisection on g(xi) = 1 - (1-alpha) sum_k alpha^{r-1-k} xi^{k-r}, which is
/// increasing on (0, inf) with g(1) = alpha^r > 0.
inline double char_root(double alpha, unsigned r)
{
    if (!(alpha > 0.0 && alpha < 1.0) || r < 1)
        throw std::invalid_argument("char_root needs alpha in (0, 1) and r >= 1");
    auto g = [&](double xi) {
        double s = 0.0;
        for (unsigned k = 0; k < r; ++k)
            s += std::pow(alpha, r - 1 - k) * std::pow(xi, static_cast<double>(k) - r);
        return 1.0 - (1.0 - alpha) * s;
    };
    // g(xi) <= 1 - (1-alpha) xi^{-1} alpha^{r-1}... below zero for small xi.
    double lo = 0.5;
    while (g(lo) > 0.0)
        lo *= 0.5;
    return bisect(g, 0.0, lo, 1.0, 1e-15, true);
}

/// Unique t with f_n(t) = alpha_target, by bisection on
/// [0, log((n-r+1)/alpha_target) / (r c1)], to relative tolerance 1e-12.
inline double t_star(const RateProfile& profile, unsigned r, Site n, double alpha_target)
{
    if (n < r)
        throw std::invalid_argument("t_star needs n >= r");
    if (!(alpha_target > 0.0 && alpha_target < 1.0))
        throw std::invalid_argument("t_star needs alpha in (0, 1)");
    const SumBound f(profile, r, n);
    const double hi = std::log(static_cast<double>(n - r + 1) / alpha_target) / (r * profile.c1());
    if (hi <= 0.0)
        return 0.0;
    return bisect(f, alpha_target, 0.0, hi, 1e-12 * std::max(1.0, hi) / 4, false);
}

/// Homogeneous centring time T = log(n) / r.
inline double homog_threshold(double n, unsigned r)
{
    if (!(n > 1.0) || r < 1)
        throw std::invalid_argument("homog_threshold needs n > 1 and r >= 1");
    return std::log(n) / r;
}

struct ScheduleEntry {
    unsigned k;
    double gamma_k;
    Site n_k;
    double T_k;
};

/// The ladder gamma^k, k = 1..k_max, with n_k = min{n : f_n(gamma^k) >= 1/2}
/// and T_k = t_*(n_k, 1/2). f_n is a prefix sum in n, so n_k is found by
/// accumulating terms until the sum crosses 1/2.
///
/// Throws HorizonExceeded when n_k would pass `n_cap`; entries computed
/// before the overflow are returned through `partial` when given.
inline std::vector<ScheduleEntry> schedule(const RateProfile& profile, unsigned r, double gamma, unsigned k_max,
                                           Site n_cap = Site{1} << 28,
                                           std::vector<ScheduleEntry>* partial = nullptr)
{
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::invalid_argument("gamma must lie in (1, 2)");
    if (k_max < 1)
        throw std::invalid_argument("k_max must be >= 1");
    std::vector<ScheduleEntry> out;
    for (unsigned k = 1; k <= k_max; ++k) {
        const double gk = std::pow(gamma, k);
        CompensatedSum sum;
        Site n = r;
        while (true) {
            double window = 0.0;
            for (unsigned m = 0; m < r; ++m)
                window += profile.rate_at(n - m);
            sum.add(std::exp(-window * gk));
            if (sum.value() >= 0.5)
                break;
            if (n >= n_cap) {
                if (partial)
                    *partial = out;
                throw HorizonExceeded("schedule: n_k exceeds the configured cap at k = " + std::to_string(k));
            }
            ++n;
        }
        out.push_back({k, gk, n, t_star(profile, r, n, 0.5)});
    }
    return out;
}

/// E exp(-lambda N^G(t)) for the continuous model.
inline double green_laplace_cont(double lambda, double t)
{
    if (!(t > 0.0) || lambda < 0.0)
        throw std::invalid_argument("laplace transform needs t > 0 and lambda >= 0");
    return (lambda + t) * std::exp(-t) / (lambda + t * std::exp(-lambda - t));
}

struct Moments {
    double mean;
    double variance;
};

/// Mean (e^t - 1 - t)/t and variance (e^{2t} - 1 - 2t e^t)/t^2 of N^G(t).
inline Moments green_moments_cont(double t)
{
    if (!(t > 0.0))
        throw std::invalid_argument("moments need t > 0");
    const double mean = (std::expm1(t) - t) / t;
    const double var = (std::expm1(2.0 * t) - 2.0 * t * std::exp(t)) / (t * t);
    return {mean, var};
}

} // namespace forestfire::analytic
