#pragma once

// Matrix-product backend for the SEP likelihood.
//
// The record's operator string (transfer matrices + projectors) is applied in
// exactly reversed order to the flat covector (1|, which is a bond-dimension-1
// product state. Every transfer matrix is symmetric and every projector
// diagonal, so the reversed evolution computes the same scalar as the forward
// one. The final dot product against the initial distribution is contracted
// exactly: the fixed-charge uniform vector has an exact MPS of bond dimension
// min(Q, L-Q) + 1 (a counting automaton), so no sampling is needed.

#include <array>

#include <Eigen/Dense>

#include "u1dec/core.hpp"
#include "u1dec/sep.hpp"

namespace u1dec {

struct ProbabilityMps {
    // tensors[site][phys] is a (left bond) x (right bond) matrix
    std::vector<std::array<Eigen::MatrixXd, 2>> tensors;
    double log_scale = 0.0;
    double threshold = 1e-10;  // relative discarded squared weight per cut
    bool dead = false;         // represents the exact zero vector

    int n_sites() const { return static_cast<int>(tensors.size()); }
    int bond_dim(int bond) const;  // bond between site `bond` and `bond`+1
    int max_bond_dim() const;
};

ProbabilityMps flat_mps(int n_sites);  // the all-ones covector |1)
ProbabilityMps delta_mps(int n_sites, std::uint64_t basis_index);
ProbabilityMps dicke_mps(int n_sites, int charge);
ProbabilityMps initial_classical_mps(int n_sites, const InitSpec& init);

// Two-site SEP transfer on bond (left, left+1) with SVD truncation. Assumes
// nothing about the gauge; evolve_* below keep the orthogonality center at
// the active bond so truncations are locally optimal.
void apply_hop_bond(ProbabilityMps& mps, int left_site, double hop);

void apply_projector_site(ProbabilityMps& mps, int site, int outcome);

// Bring every tensor to right-isometric form (orthogonality center at site 0).
void right_canonicalize(ProbabilityMps& mps);

// log(<a, b>) including both log scales; -inf when the contraction is zero or
// (from truncation noise) non-positive. Throws numeric_error on NaN.
double overlap_log(const ProbabilityMps& a, const ProbabilityMps& b);

// Dense vector represented by the MPS, for small-L tests.
std::vector<double> to_dense(const ProbabilityMps& mps);

// Reverse evolution of the flat covector (1| through the record's operator
// sequence; reusable across candidate labels but numerically delicate under
// truncation (see evolve_mps_likelihood).
ProbabilityMps evolve_mps_covector(const MeasurementRecord& rec, const BiasSchedule& bias,
                                   double threshold);

double mps_covector_loglik(const ProbabilityMps& cov, const InitSpec& label_state);

// Forward evolution of the initial distribution through the record.
ProbabilityMps evolve_mps_forward(const MeasurementRecord& rec, const InitSpec& label_state,
                                  const BiasSchedule& bias, double threshold);

// log P(m | label) via the forward MPS; agrees with the dense backend.
double evolve_mps_likelihood(const MeasurementRecord& rec, const InitSpec& label_state,
                             const BiasSchedule& bias, double threshold);

}  // namespace u1dec
