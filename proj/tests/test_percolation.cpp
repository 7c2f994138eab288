#include <doctest.h>

#include <cmath>

#include "u1dec/decoder.hpp"
#include "u1dec/percolation.hpp"
#include "u1dec/qsim.hpp"
#include "u1dec/sep.hpp"

using namespace u1dec;

namespace {

MeasurementRecord make_record(int n_sites, int tf, std::vector<MeasurementEvent> events) {
    MeasurementRecord rec;
    rec.n_sites = n_sites;
    rec.n_timesteps = tf;
    rec.init = InitKind::dicke;
    rec.events = std::move(events);
    return rec;
}

}  // namespace

TEST_CASE("conservation forces the fourth leg") {
    // gate at half-layer 1 on (1,2): in legs pinned by round-0 events,
    // out leg of site 2 pinned by round-1; the out leg of site 1 follows
    const auto rec = make_record(4, 2, {{0, 1, 1}, {0, 2, 0}, {1, 2, 0}});
    const auto grid = propagate_constraints(rec);
    const auto& inferred = grid.segment_at(1, 2);  // site 1 just after half-layer 1
    CHECK(inferred.value == 1);
    CHECK_FALSE(inferred.measured);
    // in-sum 2 pins every out leg to 1
    const auto rec2 = make_record(4, 2, {{0, 1, 1}, {0, 2, 1}});
    const auto grid2 = propagate_constraints(rec2);
    CHECK(grid2.segment_at(1, 2).value == 1);
    CHECK(grid2.segment_at(2, 2).value == 1);
}

TEST_CASE("empty record infers nothing and has no cut") {
    const auto rec = make_record(6, 3, {});
    const auto grid = propagate_constraints(rec);
    CHECK(grid.known_count() == 0);
    const auto cut = find_charge_cut(grid, rec.layout());
    CHECK_FALSE(cut.exists);
}

TEST_CASE("idle segments carry values across rounds") {
    // L=2: site 0 is idle after the single gate; measuring it in round 0 and
    // round 1 pins the same segment, and contradictions are detected
    const auto rec = make_record(2, 1, {{0, 0, 1}, {1, 0, 1}});
    CHECK_NOTHROW(propagate_constraints(rec));
    const auto bad = make_record(2, 1, {{0, 0, 1}, {1, 0, 0}});
    CHECK_THROWS_AS(propagate_constraints(bad), data_error);
}

TEST_CASE("violating charge conservation at a gate is detected") {
    // in legs of the (1,2) gate sum to 2, out legs to 0
    const auto rec = make_record(4, 2, {{0, 1, 1}, {0, 2, 1}, {1, 1, 0}});
    CHECK_THROWS_AS(propagate_constraints(rec), data_error);
}

TEST_CASE("a fully measured round yields a cut with the exact charge") {
    for (int trial = 0; trial < 30; ++trial) {
        const auto out = run_trajectory(6, 3, 1.0, InitSpec::dicke(3),
                                        derive_stream_seed(71, trial), false);
        const auto grid = propagate_constraints(out.record);
        const auto cut = find_charge_cut(grid, out.record.layout());
        REQUIRE(cut.exists);
        CHECK(cut.extracted_charge == 3);
    }
}

TEST_CASE("soundness: inferred values match the sampled world line") {
    const int n_sites = 8;
    const auto sched = BiasSchedule::uniform(build_layout(n_sites, n_sites));
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(derive_stream_seed(72, trial));
        ChargeTrajectory traj;
        const auto rec = sample_record_from_model(n_sites, n_sites, 0.3,
                                                  InitSpec::dicke(4), sched, rng, &traj);
        const auto grid = propagate_constraints(rec);
        for (int site = 0; site < n_sites; ++site) {
            for (const auto& seg : grid.site_segments[site]) {
                if (seg.value < 0) continue;
                for (int slice = seg.first_slice; slice <= seg.last_slice; ++slice)
                    CHECK(seg.value == traj.at(slice, site));
            }
        }
    }
}

TEST_CASE("adding honest events never destroys a cut") {
    const int n_sites = 6;
    const auto sched = BiasSchedule::uniform(build_layout(n_sites, n_sites));
    int cuts_seen = 0;
    for (int trial = 0; trial < 120 && cuts_seen < 30; ++trial) {
        Rng rng(derive_stream_seed(73, trial));
        ChargeTrajectory traj;
        auto rec = sample_record_from_model(n_sites, n_sites, 0.35, InitSpec::dicke(3),
                                            sched, rng, &traj);
        const auto cut = find_charge_cut(propagate_constraints(rec), rec.layout());
        if (!cut.exists) continue;
        ++cuts_seen;
        // add honest events at every other unmeasured point
        MeasurementRecord enriched = rec;
        enriched.events.clear();
        std::size_t used = 0;
        int parity = 0;
        for (int tau = 0; tau < 2 * n_sites; ++tau) {
            for (int site = 0; site < n_sites; ++site) {
                const bool measured = used < rec.events.size() &&
                                      rec.events[used].half_layer == tau &&
                                      rec.events[used].site == site;
                if (measured) {
                    enriched.events.push_back(rec.events[used++]);
                } else if (parity++ % 2 == 0) {
                    enriched.events.push_back({tau, site, traj.at(tau + 1, site)});
                }
            }
        }
        const auto enriched_cut =
            find_charge_cut(propagate_constraints(enriched), enriched.layout());
        REQUIRE(enriched_cut.exists);
        CHECK(enriched_cut.extracted_charge == cut.extracted_charge);
    }
    CHECK(cuts_seen >= 30);
}

TEST_CASE("sharpness link: a cut forces the decoder to certainty") {
    int cuts = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto out = run_trajectory(8, 8, 0.4, InitSpec::dicke(4),
                                        derive_stream_seed(74, trial), false);
        const auto cut = find_charge_cut(propagate_constraints(out.record), out.record.layout());
        if (!cut.exists) continue;
        ++cuts;
        CHECK(cut.extracted_charge == 4);
        const auto outcome = evaluate_record(out.record, pair_labels(8), {});
        CHECK(outcome.p_corr == 1.0);
        CHECK(outcome.log_lik[0] == -std::numeric_limits<double>::infinity());
    }
    CHECK(cuts > 10);
}

TEST_CASE("propagation is a deterministic fixpoint") {
    const auto out = run_trajectory(8, 8, 0.3, InitSpec::dicke(4), 75, false);
    const auto a = propagate_constraints(out.record);
    const auto b = propagate_constraints(out.record);
    for (int site = 0; site < 8; ++site)
        for (std::size_t k = 0; k < a.site_segments[site].size(); ++k) {
            CHECK(a.site_segments[site][k].value == b.site_segments[site][k].value);
            CHECK(a.site_segments[site][k].measured == b.site_segments[site][k].measured);
        }
}

TEST_CASE("percolation summary extremes") {
    std::vector<MeasurementRecord> records;
    for (int i = 0; i < 20; ++i) {
        records.push_back(
            run_trajectory(4, 2, 1.0, InitSpec::dicke(2), derive_stream_seed(76, i), false)
                .record);
        records.push_back(
            run_trajectory(4, 2, 0.0, InitSpec::dicke(2), derive_stream_seed(77, i), false)
                .record);
    }
    const auto rows = percolation_summary(records, 200, 11);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        if (row.meas_prob == 1.0) CHECK(row.fraction == 1.0);
        if (row.meas_prob == 0.0) CHECK(row.fraction == 0.0);
    }
    CHECK_THROWS_AS(percolation_summary({}, 10, 1), std::invalid_argument);
}
