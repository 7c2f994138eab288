#include "u1dec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace u1dec {

namespace {

double percentile(std::vector<double>& sorted_into, double q) {
    std::sort(sorted_into.begin(), sorted_into.end());
    const double pos = q * (sorted_into.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted_into.size() - 1);
    const double frac = pos - lo;
    return sorted_into[lo] * (1.0 - frac) + sorted_into[hi] * frac;
}

ValueWithCi bootstrap_ci(double base, std::vector<double> replicas) {
    ValueWithCi out;
    out.value = base;
    if (replicas.empty()) {
        out.ci = {base, base};
        return out;
    }
    std::vector<double> tmp = replicas;
    out.ci.lo = percentile(tmp, 0.025);
    tmp = std::move(replicas);
    out.ci.hi = percentile(tmp, 0.975);
    return out;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// central moments in one pass over a resampled index set
struct Moments {
    double mu2 = 0.0;
    double mu4 = 0.0;
    double mean = 0.0;
};

Moments central_moments(std::span<const double> v) {
    const double m = mean_of(v);
    Moments out;
    for (double x : v) {
        const double d = x - m;
        const double d2 = d * d;
        out.mu2 += d2;
        out.mu4 += d2 * d2;
    }
    out.mu2 /= static_cast<double>(v.size());
    out.mu4 /= static_cast<double>(v.size());
    out.mean = m;
    return out;
}

// relative spread below ~1e-12 is rounding noise, not a distribution
bool degenerate_moments(const Moments& m) {
    return !(m.mu2 > 0.0) || m.mu2 <= m.mean * m.mean * 1e-24;
}

}  // namespace

double lower_bound_accuracy(double p, int t_f, int n_sites) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (t_f < 1 || n_sites < 1) throw std::invalid_argument("t_f and L must be >= 1");
    return 0.5 * (1.0 + std::erf(std::sqrt(p * t_f / static_cast<double>(n_sites))));
}

double binder_ratio(std::span<const double> samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("binder_ratio needs at least two samples");
    const Moments m = central_moments(samples);
    if (degenerate_moments(m))
        throw numeric_error("binder_ratio: degenerate (zero-variance) distribution");
    return m.mu4 / (m.mu2 * m.mu2);
}

ValueWithCi accuracy_with_ci(const std::vector<std::uint8_t>& correct, int n_boot,
                             std::uint64_t seed) {
    if (correct.empty()) throw std::invalid_argument("accuracy_with_ci: empty input");
    const std::size_t n = correct.size();
    long hits = 0;
    for (auto c : correct) hits += c ? 1 : 0;
    const double base = static_cast<double>(hits) / static_cast<double>(n);
    Rng rng(seed);
    std::vector<double> replicas;
    replicas.reserve(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        long h = 0;
        for (std::size_t i = 0; i < n; ++i) h += correct[rng.uniform_index(n)] ? 1 : 0;
        replicas.push_back(static_cast<double>(h) / static_cast<double>(n));
    }
    return bootstrap_ci(base, std::move(replicas));
}

ValueWithCi mean_with_ci(std::span<const double> samples, int n_boot, std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("mean_with_ci: empty input");
    const std::size_t n = samples.size();
    Rng rng(seed);
    std::vector<double> replicas;
    replicas.reserve(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += samples[rng.uniform_index(n)];
        replicas.push_back(s / static_cast<double>(n));
    }
    return bootstrap_ci(mean_of(samples), std::move(replicas));
}

std::optional<ValueWithCi> binder_with_ci(std::span<const double> samples, int n_boot,
                                          std::uint64_t seed) {
    if (samples.size() < 2) return std::nullopt;
    Moments base = central_moments(samples);
    if (degenerate_moments(base)) return std::nullopt;
    const std::size_t n = samples.size();
    Rng rng(seed);
    std::vector<double> replicas;
    std::vector<double> resample(n);
    replicas.reserve(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        for (std::size_t i = 0; i < n; ++i) resample[i] = samples[rng.uniform_index(n)];
        const Moments m = central_moments(resample);
        if (!degenerate_moments(m)) replicas.push_back(m.mu4 / (m.mu2 * m.mu2));
    }
    return bootstrap_ci(base.mu4 / (base.mu2 * base.mu2), std::move(replicas));
}

DistributionReport distribution_report(std::span<const double> samples, int n_bins,
                                       double tail_eps) {
    if (samples.empty()) throw std::invalid_argument("distribution_report: empty input");
    if (n_bins < 2) throw std::invalid_argument("distribution_report: n_bins must be >= 2");
    DistributionReport rep;
    rep.n_bins = n_bins;
    rep.n_samples = static_cast<long>(samples.size());
    rep.tail_eps = tail_eps;
    rep.counts.assign(n_bins, 0);
    long below = 0;
    for (double x : samples) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument("distribution_report: sample outside [0, 1]");
        const int bin = std::min(n_bins - 1, static_cast<int>(x * n_bins));
        ++rep.counts[bin];
        if (x < tail_eps) ++below;
    }
    rep.lower_tail_weight = static_cast<double>(below) / static_cast<double>(samples.size());
    rep.cdf.resize(n_bins);
    long running = 0;
    for (int b = 0; b < n_bins; ++b) {
        running += rep.counts[b];
        rep.cdf[b] = static_cast<double>(running) / static_cast<double>(samples.size());
    }
    return rep;
}

namespace {

std::optional<double> first_crossing(std::span<const double> x, std::span<const double> d) {
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        if (d[i] == 0.0) return x[i];
        if ((d[i] > 0.0) != (d[i + 1] > 0.0)) {
            const double frac = d[i] / (d[i] - d[i + 1]);
            return x[i] + frac * (x[i + 1] - x[i]);
        }
    }
    if (!d.empty() && d.back() == 0.0) return x.back();
    return std::nullopt;
}

}  // namespace

std::optional<CrossingEstimate> crossing_estimate(std::span<const CurvePoint> curve_a,
                                                  std::span<const CurvePoint> curve_b,
                                                  int n_resamples, std::uint64_t seed) {
    if (curve_a.size() != curve_b.size() || curve_a.size() < 2)
        throw std::invalid_argument("crossing_estimate: need matching grids with >= 2 points");
    std::vector<double> x(curve_a.size()), d(curve_a.size());
    for (std::size_t i = 0; i < curve_a.size(); ++i) {
        if (curve_a[i].x != curve_b[i].x)
            throw std::invalid_argument("crossing_estimate: grid mismatch");
        if (i > 0 && curve_a[i].x <= curve_a[i - 1].x)
            throw std::invalid_argument("crossing_estimate: grid must ascend");
        x[i] = curve_a[i].x;
        d[i] = curve_a[i].value - curve_b[i].value;
    }
    const auto base = first_crossing(x, d);
    if (!base) return std::nullopt;

    Rng rng(seed);
    std::vector<double> hits;
    std::vector<double> jittered(d.size());
    hits.reserve(n_resamples);
    for (int r = 0; r < n_resamples; ++r) {
        for (std::size_t i = 0; i < d.size(); ++i)
            jittered[i] = d[i] + rng.normal() * std::hypot(curve_a[i].err, curve_b[i].err);
        if (const auto c = first_crossing(x, jittered)) hits.push_back(*c);
    }
    CrossingEstimate est;
    est.x_star = *base;
    if (hits.empty()) {
        est.band = {*base, *base};
    } else {
        std::vector<double> tmp = hits;
        est.band.lo = percentile(tmp, 0.01);
        tmp = std::move(hits);
        est.band.hi = percentile(tmp, 0.99);
    }
    return est;
}

void SampleSet::add(const GroupKey& key, double p_corr, double entropy_bits, double confidence,
                    double sq_posterior, bool correct) {
    auto& g = groups[key];
    g.p_corr.push_back(p_corr);
    g.entropy_bits.push_back(entropy_bits);
    g.confidence.push_back(confidence);
    g.sq_posterior.push_back(sq_posterior);
    g.correct.push_back(correct ? 1 : 0);
}

std::vector<SummaryRow> order_parameter_table(const SampleSet& set, int n_boot,
                                              std::uint64_t seed) {
    if (set.groups.empty()) throw std::invalid_argument("order_parameter_table: no groups");
    std::vector<SummaryRow> rows;
    std::uint64_t group_index = 0;
    for (const auto& [key, g] : set.groups) {
        if (g.p_corr.empty()) throw std::invalid_argument("order_parameter_table: empty group");
        SummaryRow row;
        row.key = key;
        row.n_samples = static_cast<long>(g.p_corr.size());
        const std::uint64_t s0 = derive_stream_seed(seed, group_index++);
        const auto acc = accuracy_with_ci(g.correct, n_boot, derive_stream_seed(s0, 0));
        row.accuracy = acc.value;
        row.accuracy_ci = acc.ci;
        row.theoretical_accuracy = mean_of(g.confidence);
        const auto ent = mean_with_ci(g.entropy_bits, n_boot, derive_stream_seed(s0, 1));
        row.mean_entropy = ent.value;
        row.mean_entropy_ci = ent.ci;
        row.mean_p_corr = mean_of(g.p_corr);
        row.order_param = 1.0 - row.mean_p_corr;
        row.mean_sq_posterior = mean_of(g.sq_posterior);
        if (const auto b = binder_with_ci(g.p_corr, n_boot, derive_stream_seed(s0, 2))) {
            row.binder_pcorr = b->value;
            row.binder_pcorr_ci = b->ci;
        } else {
            row.binder_pcorr_degenerate = true;
        }
        if (const auto b = binder_with_ci(g.entropy_bits, n_boot, derive_stream_seed(s0, 3))) {
            row.binder_entropy = b->value;
            row.binder_entropy_ci = b->ci;
        } else {
            row.binder_entropy_degenerate = true;
        }
        long below = 0;
        for (double x : g.p_corr)
            if (x < 0.4) ++below;
        row.tail_weight = static_cast<double>(below) / static_cast<double>(g.p_corr.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace u1dec
