#pragma once

// Bayes classifier layer on top of the SEP likelihood backends: posteriors,
// predictions, p_corr, posterior entropy; unbiased / biased / antibiased
// knowledge levels; naive independent-measurements baseline.

#include "u1dec/core.hpp"
#include "u1dec/sep.hpp"

namespace u1dec {

enum class BiasMode { unbiased, biased, antibiased };
enum class Backend { dense, mps };

std::string bias_mode_name(BiasMode m);
BiasMode bias_mode_from_name(const std::string& s);
std::string backend_name(Backend b);
Backend backend_from_name(const std::string& s);

// unbiased: hop 1/2 everywhere; biased: hop = h(U) = xi per gate;
// antibiased: hop = 1 - xi. Gate knowledge is required except for unbiased.
BiasSchedule bias_schedule(const MeasurementRecord& rec, BiasMode mode);

struct DecodeOptions {
    BiasMode mode = BiasMode::unbiased;
    Backend backend = Backend::dense;
    double mps_threshold = 1e-10;
    // decode product-state (Neel) records against dicke vectors instead of the
    // matching delta distributions
    bool dicke_init_for_product = false;
};

struct ClassificationOutcome {
    std::vector<int> labels;
    std::vector<double> log_lik;    // log P(m | label), prior not included
    std::vector<double> posterior;  // sums to 1
    int predicted_label = -1;       // argmax posterior, ties toward smaller charge
    double p_corr = -1.0;           // posterior of the true label (when known)
    double entropy_bits = 0.0;      // Shannon entropy of the posterior, base 2
    BiasMode mode = BiasMode::unbiased;
    Backend backend = Backend::dense;
};

// Classical initial state used for a candidate label of this record's task.
InitSpec label_init_spec(const MeasurementRecord& rec, int label, bool dicke_init_for_product);

// Posterior over `labels`. Plus-initialized records (the L-class task) carry
// the binomial prior C(L,Q)/2^L; every other task is flat over its labels.
ClassificationOutcome posterior_outcome(const MeasurementRecord& rec,
                                        const std::vector<int>& labels,
                                        const DecodeOptions& opts);

// posterior_outcome plus p_corr; requires rec.true_label present and listed.
ClassificationOutcome evaluate_record(const MeasurementRecord& rec,
                                      const std::vector<int>& labels,
                                      const DecodeOptions& opts);

double entropy_bits_of(const std::vector<double>& posterior);

// Charge estimate L/M * sum(m); predicts the nearer of {q0, q1}, breaking
// ties (and the empty record) toward the smaller charge.
int naive_mean_estimator(const MeasurementRecord& rec, int q0, int q1);

// Default two-class labels {L/2, L/2-1}, larger first removed: ascending.
std::vector<int> pair_labels(int n_sites);
std::vector<int> all_labels(int n_sites);

}  // namespace u1dec
