#include "u1dec/percolation.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "u1dec/stats.hpp"

namespace u1dec {

namespace {

struct VarRef {
    int site;
    int segment;
};

struct GateConstraint {
    // legs: in_left, in_right, out_left, out_right
    std::array<VarRef, 4> legs;
};

}  // namespace

int KnownValueGrid::segment_index_at(int site, int slice) const {
    const auto& segs = site_segments.at(site);
    // segments are few (at most tf+1); linear scan is fine
    for (std::size_t i = 0; i < segs.size(); ++i)
        if (slice >= segs[i].first_slice && slice <= segs[i].last_slice)
            return static_cast<int>(i);
    throw std::invalid_argument("slice out of range");
}

long KnownValueGrid::known_count() const {
    long n = 0;
    for (const auto& segs : site_segments)
        for (const auto& s : segs)
            if (s.value >= 0) ++n;
    return n;
}

KnownValueGrid propagate_constraints(const MeasurementRecord& rec) {
    validate_record(rec);
    const CircuitLayout layout = rec.layout();
    KnownValueGrid grid;
    grid.n_sites = rec.n_sites;
    grid.n_rounds = layout.n_rounds();

    // segment boundaries: the half-layers whose gates act on the site
    std::vector<std::vector<int>> gate_times(rec.n_sites);
    for (int tau = 0; tau < layout.n_rounds(); ++tau)
        for (const auto& [left, right] : layout.half_layers[tau]) {
            gate_times[left].push_back(tau);
            gate_times[right].push_back(tau);
        }
    grid.site_segments.resize(rec.n_sites);
    for (int site = 0; site < rec.n_sites; ++site) {
        int start = 0;
        for (int tau : gate_times[site]) {
            grid.site_segments[site].push_back({start, tau, -1, false});
            start = tau + 1;
        }
        grid.site_segments[site].push_back({start, grid.n_rounds, -1, false});
    }

    // seed from measurement events (round tau pins slice tau+1)
    for (const auto& ev : rec.events) {
        auto& seg = grid.site_segments[ev.site][grid.segment_index_at(ev.site, ev.half_layer + 1)];
        if (seg.value >= 0 && seg.value != ev.outcome)
            throw data_error("record contradicts itself within one idle segment");
        seg.value = ev.outcome;
        seg.measured = true;
    }

    // gate constraints and variable -> constraint adjacency
    std::vector<GateConstraint> gates;
    for (int tau = 0; tau < layout.n_rounds(); ++tau)
        for (const auto& [left, right] : layout.half_layers[tau]) {
            GateConstraint c;
            c.legs[0] = {left, grid.segment_index_at(left, tau)};
            c.legs[1] = {right, grid.segment_index_at(right, tau)};
            c.legs[2] = {left, grid.segment_index_at(left, tau + 1)};
            c.legs[3] = {right, grid.segment_index_at(right, tau + 1)};
            gates.push_back(c);
        }
    std::vector<std::vector<std::vector<int>>> adjacent(rec.n_sites);
    for (int site = 0; site < rec.n_sites; ++site)
        adjacent[site].resize(grid.site_segments[site].size());
    for (std::size_t g = 0; g < gates.size(); ++g)
        for (const auto& leg : gates[g].legs)
            adjacent[leg.site][leg.segment].push_back(static_cast<int>(g));

    // worklist to fixpoint: enumerate the <=16 assignments obeying
    // in1 + in2 = out1 + out2; a leg agreeing across all surviving
    // assignments is forced. Monotone, so order independent.
    std::deque<int> work;
    std::vector<char> queued(gates.size(), 1);
    for (std::size_t g = 0; g < gates.size(); ++g) work.push_back(static_cast<int>(g));
    while (!work.empty()) {
        const int g = work.front();
        work.pop_front();
        queued[g] = 0;
        const auto& legs = gates[g].legs;
        int fixed[4];
        for (int i = 0; i < 4; ++i)
            fixed[i] = grid.site_segments[legs[i].site][legs[i].segment].value;
        int seen_count = 0;
        int agree[4] = {-1, -1, -1, -1};
        bool mixed[4] = {false, false, false, false};
        for (int assignment = 0; assignment < 16; ++assignment) {
            int v[4];
            bool ok = true;
            for (int i = 0; i < 4; ++i) {
                v[i] = (assignment >> i) & 1;
                if (fixed[i] >= 0 && v[i] != fixed[i]) ok = false;
            }
            if (!ok || v[0] + v[1] != v[2] + v[3]) continue;
            ++seen_count;
            for (int i = 0; i < 4; ++i) {
                if (agree[i] < 0)
                    agree[i] = v[i];
                else if (agree[i] != v[i])
                    mixed[i] = true;
            }
        }
        if (seen_count == 0)
            throw data_error("record violates charge conservation at a gate");
        for (int i = 0; i < 4; ++i) {
            if (fixed[i] >= 0 || mixed[i]) continue;
            auto& seg = grid.site_segments[legs[i].site][legs[i].segment];
            seg.value = agree[i];
            for (int neighbor : adjacent[legs[i].site][legs[i].segment]) {
                if (!queued[neighbor]) {
                    queued[neighbor] = 1;
                    work.push_back(neighbor);
                }
            }
        }
    }
    return grid;
}

CutResult find_charge_cut(const KnownValueGrid& grid, const CircuitLayout& layout) {
    CutResult result;
    if (grid.n_sites != layout.n_sites || grid.n_rounds != layout.n_rounds())
        throw std::invalid_argument("grid does not match layout");

    // gates per bond, by half-layer
    std::vector<std::vector<int>> bond_gates(grid.n_sites - 1);
    for (int tau = 0; tau < layout.n_rounds(); ++tau)
        for (const auto& [left, right] : layout.half_layers[tau]) {
            (void)right;
            bond_gates[left].push_back(tau);
        }

    // two segments on adjacent sites are compatible iff no gate on their bond
    // lies strictly between them (every bond gate is a boundary of both)
    auto compatible = [&](int bond, const SiteSegment& a, const SiteSegment& b) {
        const int lo = std::min(a.last_slice, b.last_slice);
        const int hi = std::max(a.first_slice, b.first_slice);
        for (int tau : bond_gates[bond])
            if (tau >= lo && tau < hi) return false;
        return true;
    };

    // DP over sites; states are known segments
    std::vector<std::vector<int>> parent(grid.n_sites);
    std::vector<std::vector<char>> reachable(grid.n_sites);
    for (int site = 0; site < grid.n_sites; ++site) {
        const auto& segs = grid.site_segments[site];
        parent[site].assign(segs.size(), -1);
        reachable[site].assign(segs.size(), 0);
    }
    for (std::size_t j = 0; j < grid.site_segments[0].size(); ++j)
        reachable[0][j] = grid.site_segments[0][j].value >= 0;
    for (int site = 1; site < grid.n_sites; ++site) {
        const auto& prev = grid.site_segments[site - 1];
        const auto& cur = grid.site_segments[site];
        for (std::size_t j = 0; j < cur.size(); ++j) {
            if (cur[j].value < 0) continue;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                if (!reachable[site - 1][i]) continue;
                if (compatible(site - 1, prev[i], cur[j])) {
                    reachable[site][j] = 1;
                    parent[site][j] = static_cast<int>(i);
                    break;  // first predecessor: deterministic choice
                }
            }
        }
    }

    int end = -1;
    for (std::size_t j = 0; j < grid.site_segments[grid.n_sites - 1].size(); ++j)
        if (reachable[grid.n_sites - 1][j]) {
            end = static_cast<int>(j);
            break;
        }
    if (end < 0) return result;

    result.exists = true;
    result.cut_segments.assign(grid.n_sites, -1);
    int charge = 0;
    for (int site = grid.n_sites - 1; site >= 0; --site) {
        result.cut_segments[site] = end;
        charge += grid.site_segments[site][end].value;
        end = parent[site][end];
    }
    result.extracted_charge = charge;
    return result;
}

std::vector<PercolationRow> percolation_summary(const std::vector<MeasurementRecord>& records,
                                                int n_boot, std::uint64_t seed) {
    if (records.empty()) throw std::invalid_argument("no records");
    std::map<std::pair<int, double>, std::vector<std::uint8_t>> groups;
    for (const auto& rec : records) {
        const KnownValueGrid grid = propagate_constraints(rec);
        const CutResult cut = find_charge_cut(grid, rec.layout());
        groups[{rec.n_sites, rec.meas_prob}].push_back(cut.exists ? 1 : 0);
    }
    std::vector<PercolationRow> rows;
    std::uint64_t group_index = 0;
    for (const auto& [key, hits] : groups) {
        const auto acc = accuracy_with_ci(hits, n_boot, derive_stream_seed(seed, group_index++));
        rows.push_back({key.first, key.second, static_cast<long>(hits.size()), acc.value,
                        acc.ci.lo, acc.ci.hi});
    }
    return rows;
}

}  // namespace u1dec
