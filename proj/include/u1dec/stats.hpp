#pragma once

// Estimators and finite-size analysis: accuracy, order parameters, Binder
// ratios, histograms, crossing estimation, the erf lower bound, bootstrap
// uncertainty. Everything is deterministic given (data, seed).

#include <map>
#include <optional>
#include <span>

#include "u1dec/core.hpp"

namespace u1dec {

// Eq-1-style independent-measurements bound: 1/2 (1 + erf sqrt(p tf / L)).
double lower_bound_accuracy(double p, int t_f, int n_sites);

// mu4 / mu2^2 on centered samples; throws numeric_error when degenerate.
double binder_ratio(std::span<const double> samples);

struct CiInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ValueWithCi {
    double value = 0.0;
    CiInterval ci;
};

// Nonparametric bootstrap, percentile 95% CI, seeded.
ValueWithCi accuracy_with_ci(const std::vector<std::uint8_t>& correct, int n_boot,
                             std::uint64_t seed);
ValueWithCi mean_with_ci(std::span<const double> samples, int n_boot, std::uint64_t seed);
// Degenerate resamples are skipped; nullopt when the base sample is degenerate.
std::optional<ValueWithCi> binder_with_ci(std::span<const double> samples, int n_boot,
                                          std::uint64_t seed);

struct DistributionReport {
    int n_bins = 0;
    long n_samples = 0;
    std::vector<long> counts;        // n_bins entries over [0, 1]
    std::vector<double> cdf;         // right-edge cumulative fractions
    double tail_eps = 0.4;
    double lower_tail_weight = 0.0;  // fraction of samples < tail_eps
};

DistributionReport distribution_report(std::span<const double> samples, int n_bins = 50,
                                       double tail_eps = 0.4);

struct CurvePoint {
    double x = 0.0;
    double value = 0.0;
    double err = 0.0;
};

struct CrossingEstimate {
    double x_star = 0.0;
    CiInterval band;
};

// First sign change of A - B on a shared ascending grid, linearly
// interpolated; band from resampling the curve points within their errors.
std::optional<CrossingEstimate> crossing_estimate(std::span<const CurvePoint> curve_a,
                                                  std::span<const CurvePoint> curve_b,
                                                  int n_resamples = 200,
                                                  std::uint64_t seed = 0);

struct GroupKey {
    int n_sites = 0;
    double meas_prob = 0.0;
    std::string mode;  // bias mode
    std::string task;  // e.g. "dicke-pair", "neel-pair", "plus-all"

    auto operator<=>(const GroupKey&) const = default;
};

struct GroupSamples {
    std::vector<double> p_corr;
    std::vector<double> entropy_bits;
    std::vector<double> confidence;    // max_Q posterior
    std::vector<double> sq_posterior;  // sum_Q posterior^2
    std::vector<std::uint8_t> correct;
};

struct SampleSet {
    std::map<GroupKey, GroupSamples> groups;

    void add(const GroupKey& key, double p_corr, double entropy_bits, double confidence,
             double sq_posterior, bool correct);
};

struct SummaryRow {
    GroupKey key;
    long n_samples = 0;
    double accuracy = 0.0;
    CiInterval accuracy_ci;
    double theoretical_accuracy = 0.0;  // E[max_Q P(Q|m)]
    double mean_entropy = 0.0;
    CiInterval mean_entropy_ci;
    double order_param = 0.0;  // 1 - E[p_corr]
    double mean_p_corr = 0.0;
    double mean_sq_posterior = 0.0;  // E[sum_Q P(Q|m)^2], stored from p_corr identity data
    double binder_pcorr = 0.0;
    CiInterval binder_pcorr_ci;
    bool binder_pcorr_degenerate = false;
    double binder_entropy = 0.0;
    CiInterval binder_entropy_ci;
    bool binder_entropy_degenerate = false;
    double tail_weight = 0.0;  // P(p_corr < 0.4)
};

std::vector<SummaryRow> order_parameter_table(const SampleSet& set, int n_boot,
                                              std::uint64_t seed);

}  // namespace u1dec
