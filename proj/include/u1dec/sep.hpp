#pragma once

// Classical statistical-mechanics engine: symmetric-exclusion-process
// transfer matrices with quenched measurement projectors. Computes record
// likelihoods P(m|Q), samples Born-weighted records directly from the model,
// and verifies the Haar-averaged doubled channel.
//
// Likelihoods live in the log domain throughout: a ProbabilityState is
// (weights, log_scale) and represents weights * exp(log_scale).

#include "u1dec/core.hpp"

namespace u1dec {

inline constexpr int kMaxDenseSites = 24;

// 4x4 transfer matrix on two-site configurations {00, 01, 10, 11}, row-major.
// The middle block is [[1-hop, hop], [hop, 1-hop]]; hop = 1/2 is the
// Haar-averaged (unbiased) case.
std::array<double, 16> transfer_matrix(double hop);

struct ProbabilityState {
    int n_sites = 0;
    std::vector<double> weights;  // length 2^n_sites
    double log_scale = 0.0;

    double mass() const;
};

ProbabilityState initial_classical_state(int n_sites, const InitSpec& init);

// One hop value per gate placement, aligned with CircuitLayout::half_layers.
struct BiasSchedule {
    std::vector<std::vector<double>> hops;

    static BiasSchedule uniform(const CircuitLayout& layout, double hop = 0.5);
    void check_alignment(const CircuitLayout& layout) const;
};

// log P(m | initial state) by forward dense evolution. Returns -inf when no
// charge trajectory is consistent with the record.
double evolve_dense_likelihood(const MeasurementRecord& rec, const InitSpec& label_state,
                               const BiasSchedule& bias);

// Reverse evolution of the flat covector (1| through the record's operator
// sequence. Every transfer matrix is symmetric and every projector diagonal,
// so contracting the result with an initial vector reproduces the forward
// likelihood; one reverse pass serves every candidate label.
struct DenseCovector {
    int n_sites = 0;
    std::vector<double> weights;
    double log_scale = 0.0;
};

DenseCovector evolve_dense_covector(const MeasurementRecord& rec, const BiasSchedule& bias);

double covector_loglik(const DenseCovector& cov, const InitSpec& label_state);

// Sampled ground-truth charge world-lines, one value per (time slice, site);
// slice s is the configuration after half-layers 0..s-1.
struct ChargeTrajectory {
    int n_sites = 0;
    int n_slices = 0;  // 2*tf + 1
    std::vector<std::uint8_t> values;  // slice-major

    std::uint8_t at(int slice, int site) const {
        return values[static_cast<std::size_t>(slice) * n_sites + site];
    }
};

// Born-weighted record sampled from the stat-mech model itself, including
// measurement-placement randomness (each (round, site) measured with
// probability p, or exactly the provided forced placements).
//
// Default path evolves the probability vector and samples each outcome from
// its marginal. When `trajectory_out` is requested the record is produced by
// sampling a single charge world-line instead (same record law: the model is
// a hidden Markov chain observed without noise), which provides ground truth
// for the constraint-propagation tests.
MeasurementRecord sample_record_from_model(
    int n_sites, int n_timesteps, double meas_prob, const InitSpec& init,
    const BiasSchedule& bias, Rng& rng, ChargeTrajectory* trajectory_out = nullptr,
    const std::vector<std::pair<int, int>>* forced_placements = nullptr);

// Monte-Carlo estimate of E[U (x) U*] restricted to the doubled symmetric
// two-site basis, compared against transfer_matrix(1/2).
struct DoubledChannelReport {
    std::array<double, 16> estimate{};
    std::array<double, 16> target{};
    double max_abs_dev = 0.0;
    double dev_charge0 = 0.0;  // |00> block
    double dev_charge1 = 0.0;  // {|01>, |10>} block
    double dev_charge2 = 0.0;  // |11> block
    long n_samples = 0;
};

DoubledChannelReport verify_doubled_channel(long n_samples, Rng& rng);

}  // namespace u1dec
