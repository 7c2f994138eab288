#include "u1dec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "u1dec/mps.hpp"

namespace u1dec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::string bias_mode_name(BiasMode m) {
    switch (m) {
        case BiasMode::unbiased: return "unbiased";
        case BiasMode::biased: return "biased";
        case BiasMode::antibiased: return "antibiased";
    }
    throw std::invalid_argument("unknown bias mode");
}

BiasMode bias_mode_from_name(const std::string& s) {
    if (s == "unbiased") return BiasMode::unbiased;
    if (s == "biased") return BiasMode::biased;
    if (s == "antibiased") return BiasMode::antibiased;
    throw std::invalid_argument("unknown bias mode: " + s);
}

std::string backend_name(Backend b) {
    return b == Backend::dense ? "dense" : "mps";
}

Backend backend_from_name(const std::string& s) {
    if (s == "dense") return Backend::dense;
    if (s == "mps") return Backend::mps;
    throw std::invalid_argument("unknown backend: " + s);
}

BiasSchedule bias_schedule(const MeasurementRecord& rec, BiasMode mode) {
    const CircuitLayout layout = rec.layout();
    if (mode == BiasMode::unbiased) return BiasSchedule::uniform(layout, 0.5);
    if (!rec.gates)
        throw missing_info_error("biased/antibiased decoding requires gate knowledge");
    BiasSchedule sched;
    sched.hops.reserve(rec.gates->gates.size());
    for (const auto& half_layer : rec.gates->gates) {
        std::vector<double> hops;
        hops.reserve(half_layer.size());
        for (const auto& g : half_layer) {
            const double h = hopping_probability(g);
            hops.push_back(mode == BiasMode::biased ? h : 1.0 - h);
        }
        sched.hops.push_back(std::move(hops));
    }
    sched.check_alignment(layout);
    return sched;
}

InitSpec label_init_spec(const MeasurementRecord& rec, int label, bool dicke_init_for_product) {
    switch (rec.init) {
        case InitKind::dicke:
        case InitKind::plus:
            return InitSpec::dicke(label);
        case InitKind::neel:
        case InitKind::neel_flip:
            if (dicke_init_for_product) return InitSpec::dicke(label);
            if (label == rec.n_sites / 2) return InitSpec::neel();
            if (label == rec.n_sites / 2 - 1) return InitSpec::neel_flip();
            throw std::invalid_argument(
                "product-state records admit only the labels {L/2, L/2-1}");
    }
    throw std::invalid_argument("unknown init kind");
}

double entropy_bits_of(const std::vector<double>& posterior) {
    double h = 0.0;
    for (double p : posterior)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

ClassificationOutcome posterior_outcome(const MeasurementRecord& rec,
                                        const std::vector<int>& labels,
                                        const DecodeOptions& opts) {
    if (labels.empty()) throw std::invalid_argument("no candidate labels");
    {
        std::vector<int> sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("candidate labels must be distinct");
        for (int q : sorted)
            if (q < 0 || q > rec.n_sites)
                throw std::invalid_argument("candidate label out of [0, L]");
    }
    const BiasSchedule sched = bias_schedule(rec, opts.mode);

    ClassificationOutcome out;
    out.labels = labels;
    out.mode = opts.mode;
    out.backend = opts.backend;
    out.log_lik.resize(labels.size());

    if (opts.backend == Backend::dense) {
        // one reverse-evolved covector serves every candidate label
        const DenseCovector cov = evolve_dense_covector(rec, sched);
        for (std::size_t i = 0; i < labels.size(); ++i)
            out.log_lik[i] =
                covector_loglik(cov, label_init_spec(rec, labels[i], opts.dicke_init_for_product));
    } else {
        for (std::size_t i = 0; i < labels.size(); ++i)
            out.log_lik[i] =
                evolve_mps_likelihood(rec, label_init_spec(rec, labels[i], opts.dicke_init_for_product),
                                      sched, opts.mps_threshold);
    }

    // posterior by stable log-sum-exp; plus-init tasks weight by the binomial prior
    std::vector<double> score = out.log_lik;
    if (rec.init == InitKind::plus)
        for (std::size_t i = 0; i < labels.size(); ++i)
            score[i] += log_binomial(rec.n_sites, labels[i]) - rec.n_sites * std::log(2.0);
    const double top = *std::max_element(score.begin(), score.end());
    if (top == kNegInf)
        throw data_error("record is inconsistent with every candidate label");
    out.posterior.resize(labels.size());
    double z = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.posterior[i] = std::exp(score[i] - top);
        z += out.posterior[i];
    }
    for (auto& p : out.posterior) p /= z;

    out.predicted_label = labels[0];
    double best = out.posterior[0];
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (out.posterior[i] > best ||
            (out.posterior[i] == best && labels[i] < out.predicted_label)) {
            best = out.posterior[i];
            out.predicted_label = labels[i];
        }
    }
    out.entropy_bits = entropy_bits_of(out.posterior);
    return out;
}

ClassificationOutcome evaluate_record(const MeasurementRecord& rec,
                                      const std::vector<int>& labels,
                                      const DecodeOptions& opts) {
    if (!rec.true_label)
        throw std::invalid_argument("evaluate_record requires a true label");
    const auto it = std::find(labels.begin(), labels.end(), *rec.true_label);
    if (it == labels.end())
        throw std::invalid_argument("true label is not among the candidates");
    ClassificationOutcome out = posterior_outcome(rec, labels, opts);
    out.p_corr = out.posterior[static_cast<std::size_t>(it - labels.begin())];
    return out;
}

int naive_mean_estimator(const MeasurementRecord& rec, int q0, int q1) {
    if (q0 == q1) throw std::invalid_argument("labels must differ");
    const int lo = std::min(q0, q1);
    if (rec.events.empty()) return lo;
    double sum = 0.0;
    for (const auto& ev : rec.events) sum += ev.outcome;
    const double estimate = rec.n_sites * sum / static_cast<double>(rec.events.size());
    const double d0 = std::abs(estimate - q0);
    const double d1 = std::abs(estimate - q1);
    if (d0 == d1) return lo;
    return d0 < d1 ? q0 : q1;
}

std::vector<int> pair_labels(int n_sites) {
    return {n_sites / 2 - 1, n_sites / 2};
}

std::vector<int> all_labels(int n_sites) {
    std::vector<int> labels(n_sites + 1);
    std::iota(labels.begin(), labels.end(), 0);
    return labels;
}

}  // namespace u1dec
