#pragma once

// Exact statevector simulation of the monitored U(1) brickwork circuit.
// This is the ground-truth generator of measurement records.

#include <optional>

#include "u1dec/core.hpp"

namespace u1dec {

inline constexpr int kMaxStatevectorSites = 26;  // ~1 GiB of amplitudes

struct QuantumState {
    int n_sites = 0;
    std::vector<cplx> amps;  // length 2^n_sites

    double norm2() const;
};

QuantumState init_state(int n_sites, const InitSpec& init);

// rho, psi, chi, alpha ~ U(0, 2pi); xi ~ U(0, 1). Draw order is fixed:
// alpha, rho, psi, chi, xi.
GateParams sample_gate_params(Rng& rng);

void apply_gate(QuantumState& state, int left_site, const GateParams& g);

// Born-rule measurement of q_site = (Z+1)/2; consumes one uniform draw.
// Projects and renormalizes in place.
int measure_site(QuantumState& state, int site, Rng& rng);

// Terminal measurement of the global charge; consumes one uniform draw.
int measure_global_charge(QuantumState& state, Rng& rng);

struct TrajectoryResult {
    MeasurementRecord record;
    CircuitRealization circuit;
    QuantumState final_state;
};

// One monitored run. The per-record stream is consumed in a fixed order:
// for each half-layer tau, gate draws in pair order, then for each site a
// placement coin and (when measuring) the outcome coin inside measure_site;
// for plus initial states one final draw decides the terminal charge.
// `forced_gate` (testing hook) replaces every sampled gate but the draws are
// still consumed, keeping the measurement stream aligned.
TrajectoryResult run_trajectory(int n_sites, int n_timesteps, double meas_prob,
                                const InitSpec& init, std::uint64_t record_seed,
                                bool keep_gates,
                                const std::optional<GateParams>& forced_gate = std::nullopt);

}  // namespace u1dec
