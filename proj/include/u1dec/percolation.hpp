#pragma once

// Constraint propagation of charge conservation over the spacetime lattice,
// and detection of spanning charge cuts.
//
// Time is sliced 0..2*tf: slice s is the configuration after half-layers
// 0..s-1. A site's value is constant between consecutive gates acting on it;
// each such interval is one variable (a "segment"). A measurement at round
// tau pins the segment containing slice tau+1. Each gate imposes
// in1 + in2 = out1 + out2 over {0,1}; rules are applied to a fixpoint.
//
// A charge cut picks one known segment per site such that no gate on a bond
// lies strictly between the two chosen cut times; the sum of values along a
// cut equals the initial global charge.

#include "u1dec/core.hpp"

namespace u1dec {

struct SiteSegment {
    int first_slice = 0;
    int last_slice = 0;
    int value = -1;  // -1 unknown
    bool measured = false;  // true: pinned by an event; false+known: inferred
};

struct KnownValueGrid {
    int n_sites = 0;
    int n_rounds = 0;
    std::vector<std::vector<SiteSegment>> site_segments;  // per site, time ordered

    int segment_index_at(int site, int slice) const;
    const SiteSegment& segment_at(int site, int slice) const {
        return site_segments[site][segment_index_at(site, slice)];
    }
    long known_count() const;
};

// Throws data_error on contradictory records.
KnownValueGrid propagate_constraints(const MeasurementRecord& rec);

struct CutResult {
    bool exists = false;
    std::vector<int> cut_segments;  // per site, segment index of the cut
    int extracted_charge = -1;
};

CutResult find_charge_cut(const KnownValueGrid& grid, const CircuitLayout& layout);

struct PercolationRow {
    int n_sites = 0;
    double meas_prob = 0.0;
    long n_records = 0;
    double fraction = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// Fraction of records with a spanning cut per (L, p) group, bootstrap CI.
std::vector<PercolationRow> percolation_summary(const std::vector<MeasurementRecord>& records,
                                                int n_boot, std::uint64_t seed);

}  // namespace u1dec
