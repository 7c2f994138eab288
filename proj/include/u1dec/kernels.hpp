#pragma once

// Hot inner loops over 2^L amplitude / weight vectors.
//
// Every kernel comes in two flavours: a plain serial reference (suffix
// `_serial`) and an OpenMP version (no suffix) used by production code. The
// elementwise kernels write disjoint slots, so both flavours produce
// bit-identical output; reductions use a fixed chunk decomposition (chunk
// boundaries depend only on the array length) and a serial combine in chunk
// order, so sums are also bit-identical for any thread count. The
// unit tests and `u1dec_bench` compare flavours.
//
// When these kernels run inside an enclosing `omp parallel` region (batch
// generation / decoding parallelizes over records) the inner pragmas are
// inactive because nested parallelism stays disabled.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "u1dec/core.hpp"

namespace u1dec::kernels {

// Charge-block form of a two-site U(1) gate: <00|U|00> = 1 is implicit.
struct TwoSiteU1Gate {
    cplx u01_01, u01_10;  // middle block rows: |01> row
    cplx u10_01, u10_10;  // |10> row
    cplx u11_11;          // phase on |11>
};

TwoSiteU1Gate gate_block(const GateParams& g);

// --- statevector kernels --------------------------------------------------

void apply_u1_gate_serial(cplx* amps, int n_sites, int left_site, const TwoSiteU1Gate& g);
void apply_u1_gate(cplx* amps, int n_sites, int left_site, const TwoSiteU1Gate& g);

// Sum of |amp|^2 over basis states whose bit at `site` is 1.
double bit_one_weight_serial(const cplx* amps, int n_sites, int site);
double bit_one_weight(const cplx* amps, int n_sites, int site);

// Zero out components with bit(site) != outcome and multiply the rest by scale.
void project_bit_serial(cplx* amps, int n_sites, int site, int outcome, double scale);
void project_bit(cplx* amps, int n_sites, int site, int outcome, double scale);

double norm2_serial(const cplx* amps, std::size_t n);
double norm2(const cplx* amps, std::size_t n);

// w[Q] = total |amp|^2 in charge sector Q, Q = 0..L
std::vector<double> sector_norm2(const cplx* amps, int n_sites);

void scale_serial(cplx* amps, std::size_t n, double s);
void scale(cplx* amps, std::size_t n, double s);

// --- classical weight-vector kernels ---------------------------------------

// SEP transfer on bond (left, left+1): mixes the {01, 10} pair with hop
// probability `hop`, leaves 00 and 11 untouched.
void apply_sep_hop_serial(double* w, int n_sites, int left_site, double hop);
void apply_sep_hop(double* w, int n_sites, int left_site, double hop);

double bit_one_mass_serial(const double* w, int n_sites, int site);
double bit_one_mass(const double* w, int n_sites, int site);

// Apply one measurement round's projectors in a single fused pass: zero every
// entry whose basis index mismatches the masks, returning the surviving sum.
// ones_mask collects sites measured 1, zeros_mask sites measured 0.
double project_round_and_sum_serial(double* w, int n_sites, std::uint64_t ones_mask,
                                    std::uint64_t zeros_mask);
double project_round_and_sum(double* w, int n_sites, std::uint64_t ones_mask,
                             std::uint64_t zeros_mask);

void project_bit_serial(double* w, int n_sites, int site, int outcome, double scale);
void project_bit(double* w, int n_sites, int site, int outcome, double scale);

double sum_serial(const double* w, std::size_t n);
double sum(const double* w, std::size_t n);

// w[Q] = total weight in charge sector Q
std::vector<double> sector_sums(const double* w, int n_sites);

void scale_serial(double* w, std::size_t n, double s);
void scale(double* w, std::size_t n, double s);

}  // namespace u1dec::kernels
