#pragma once

#include "shotclust/common.hpp"
#include "shotclust/posterior.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace testsupport {

using shotclust::Mat;
using shotclust::Vec;

inline double mean(const std::vector<double>& xs)
{
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_sd(const std::vector<double>& xs)
{
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double chi_squared_quantile(int df, double prob)
{
    return boost::math::quantile(boost::math::chi_squared(df), prob);
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    }
    return d;
}

// asymptotic KS critical value at alpha = 0.01
inline double ks_critical_99(std::size_t n)
{
    return 1.628 / std::sqrt(static_cast<double>(n));
}

/// All set partitions of {0..n-1} as restricted-growth label vectors.
inline std::vector<std::vector<int>> all_partitions(int n)
{
    std::vector<std::vector<int>> out;
    std::vector<int> labels(n, 0);
    std::function<void(int, int)> rec = [&](int i, int maxl) {
        if (i == n) {
            out.push_back(labels);
            return;
        }
        for (int l = 0; l <= maxl + 1; ++l) {
            labels[i] = l;
            rec(i + 1, std::max(maxl, l));
        }
    };
    rec(0, -1);
    return out;
}

/// Canonical restricted-growth form of a label vector (order of appearance).
inline std::vector<int> canonical_labels(const std::vector<int>& z)
{
    std::vector<int> out(z.size());
    std::map<int, int> remap;
    int next = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        auto [it, inserted] = remap.emplace(z[i], next);
        if (inserted)
            ++next;
        out[i] = it->second;
    }
    return out;
}

/// Direct MFM partition probability
///   p(C) = sum_k p(k) k_(t) / (gamma k)^(n) prod_c gamma^(|c|)
/// summed term by term in long double; independent of the library's
/// log-space V_n machinery.
inline long double mfm_partition_prob(const std::vector<int>& sizes, double psi, double gamma,
                                      bool shifted, int kmax = 400)
{
    const int t = static_cast<int>(sizes.size());
    int n = 0;
    for (int s : sizes)
        n += s;

    long double series = 0.0L;
    long double pk; // p(k), updated iteratively
    for (int k = 1; k <= kmax; ++k) {
        if (k == 1) {
            pk = shifted ? std::exp((long double)-psi)
                         : std::exp((long double)-psi) * psi / (1.0L - std::exp((long double)-psi));
        } else {
            pk *= psi / (shifted ? (k - 1) : k);
        }
        if (k < t)
            continue;
        long double falling = 1.0L;
        for (int a = 0; a < t; ++a)
            falling *= (k - a);
        long double rising = 1.0L;
        for (int a = 0; a < n; ++a)
            rising *= (gamma * k + a);
        series += falling / rising * pk;
    }

    long double prob = series;
    for (int s : sizes) {
        long double g = 1.0L; // gamma^(s) rising factorial
        for (int a = 0; a < s; ++a)
            g *= (gamma + a);
        prob *= g;
    }
    return prob;
}

/// 100-digit V_n(t) by direct product summation (no lgamma), the
/// arbitrary-precision oracle.
inline double vn_oracle(int n, int t, double psi, double gamma, bool shifted)
{
    using bigfloat = boost::multiprecision::cpp_dec_float_100;
    const bigfloat bpsi(psi);
    const bigfloat bgamma(gamma);
    bigfloat sum = 0;
    bigfloat pk;
    for (int k = 1; k <= 5000; ++k) {
        if (k == 1) {
            pk = shifted ? bigfloat(exp(-bpsi)) : bigfloat(exp(-bpsi) * bpsi / (1 - exp(-bpsi)));
        } else {
            pk *= bpsi / (shifted ? (k - 1) : k);
        }
        if (k < t)
            continue;
        bigfloat falling = 1;
        for (int a = 0; a < t; ++a)
            falling *= (k - a);
        bigfloat rising = 1;
        for (int a = 0; a < n; ++a)
            rising *= (bgamma * k + a);
        const bigfloat term = falling / rising * pk;
        sum += term;
        if (k > t + 10 && term < sum * bigfloat("1e-60"))
            break;
    }
    return sum.convert_to<double>();
}

/// Reference Dahl selection that materializes every membership matrix and the
/// mean matrix. Distances are integer multiples of 1/T^2, so the comparison
/// scales by T^2 and runs on exact integers; mathematically this is
/// argmin_t sum_ij (A_t - Abar)^2 with ties to the earliest draw.
inline int dahl_brute_force(const shotclust::MCMCTrace& trace)
{
    using IntMat = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;
    const int T = trace.T();
    const int n = static_cast<int>(trace.draws[0].z.size());
    std::vector<IntMat> A(T, IntMat::Zero(n, n));
    for (int s = 0; s < T; ++s)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A[s](i, j) = trace.draws[s].z[i] == trace.draws[s].z[j] ? 1 : 0;
    IntMat csum = IntMat::Zero(n, n); // T * Abar
    for (const IntMat& a : A)
        csum += a;

    int best = 0;
    long best_dist = std::numeric_limits<long>::max();
    for (int s = 0; s < T; ++s) {
        long dist = 0; // T^2 * sum_ij (A_ij - csum_ij / T)^2
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const long d = T * A[s](i, j) - csum(i, j);
                dist += d * d;
            }
        if (dist < best_dist) {
            best_dist = dist;
            best = s;
        }
    }
    return best;
}

} // namespace testsupport
