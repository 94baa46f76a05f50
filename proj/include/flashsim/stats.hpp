#ifndef FLASHSIM_STATS_HPP
#define FLASHSIM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flashsim/errors.hpp"

namespace flashsim::stats {

inline double normal_pdf(double x, double mean, double sigma) {
    const double u = (x - mean) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * 2.50662827463100050241577);  // sqrt(2*pi)
}

// regularized lower incomplete gamma P(a, x), series + continued fraction
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error("gamma_p: domain");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // series
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q, Lentz's method
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

// chi-square survival function: P(X >= stat) with dof degrees of freedom
inline double chi2_sf(double stat, double dof) {
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// asymptotic Kolmogorov distribution Q_KS(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
inline double ks_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// two-sample KS: max |F1 - F2| over the pooled sample, plus asymptotic p
struct KsResult {
    double statistic;
    double p_value;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, ks_sf((ne + 0.12 + 0.11 / ne) * d)};
}

// chi-square goodness of fit of observed integer counts against Poisson(mean);
// bins with small expectation are pooled until every bin expects >= min_expected
struct Chi2Result {
    double statistic;
    double dof;
    double p_value;
};

inline Chi2Result chi2_poisson_gof(const std::vector<std::uint64_t>& counts, double mean,
                                   double min_expected = 5.0) {
    if (counts.empty()) throw Error("chi2_poisson_gof: empty sample");
    const std::uint64_t kmax = *std::max_element(counts.begin(), counts.end());
    std::vector<double> observed(kmax + 2, 0.0);
    for (auto c : counts) observed[c] += 1.0;
    const double n = static_cast<double>(counts.size());
    // Poisson pmf, last slot holds the upper tail
    std::vector<double> expected(kmax + 2, 0.0);
    double pmf = std::exp(-mean);
    double cum = 0.0;
    for (std::uint64_t k = 0; k <= kmax; ++k) {
        expected[k] = n * pmf;
        cum += pmf;
        pmf *= mean / static_cast<double>(k + 1);
    }
    expected[kmax + 1] = n * std::max(0.0, 1.0 - cum);
    // pool from both ends
    std::vector<double> obs_pooled, exp_pooled;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        o_acc += observed[k];
        e_acc += expected[k];
        if (e_acc >= min_expected) {
            obs_pooled.push_back(o_acc);
            exp_pooled.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 && !exp_pooled.empty()) {
        obs_pooled.back() += o_acc;
        exp_pooled.back() += e_acc;
    }
    if (exp_pooled.size() < 2) throw Error("chi2_poisson_gof: too few bins");
    double stat = 0.0;
    for (std::size_t k = 0; k < exp_pooled.size(); ++k) {
        const double diff = obs_pooled[k] - exp_pooled[k];
        stat += diff * diff / exp_pooled[k];
    }
    const double dof = static_cast<double>(exp_pooled.size() - 1);
    return {stat, dof, chi2_sf(stat, dof)};
}

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double stddev_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace flashsim::stats

#endif
