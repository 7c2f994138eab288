#include <doctest.h>

#include <cmath>
#include <map>

#include "u1dec/kernels.hpp"
#include "u1dec/qsim.hpp"
#include "u1dec/sep.hpp"

using namespace u1dec;

namespace {

MeasurementRecord make_record(int n_sites, int tf, std::vector<MeasurementEvent> events,
                              InitKind init = InitKind::dicke) {
    MeasurementRecord rec;
    rec.n_sites = n_sites;
    rec.n_timesteps = tf;
    rec.init = init;
    rec.events = std::move(events);
    return rec;
}

BiasSchedule unbiased(int n_sites, int tf) {
    return BiasSchedule::uniform(build_layout(n_sites, tf));
}

}  // namespace

TEST_CASE("transfer matrix") {
    SUBCASE("Haar point 1/2") {
        const auto t = transfer_matrix(0.5);
        const std::array<double, 16> expect = {1, 0,   0,   0, 0, 0.5, 0.5, 0,
                                               0, 0.5, 0.5, 0, 0, 0,   0,   1};
        for (int i = 0; i < 16; ++i) CHECK(t[i] == expect[i]);
    }
    SUBCASE("hop 0 is the identity") {
        const auto t = transfer_matrix(0.0);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) CHECK(t[r * 4 + c] == (r == c ? 1.0 : 0.0));
    }
    SUBCASE("doubly stochastic for every hop") {
        for (double hop : {0.0, 0.2, 0.5, 0.77, 1.0}) {
            const auto t = transfer_matrix(hop);
            for (int r = 0; r < 4; ++r) {
                double row = 0, col = 0;
                for (int c = 0; c < 4; ++c) {
                    row += t[r * 4 + c];
                    col += t[c * 4 + r];
                }
                CHECK(row == doctest::Approx(1.0).epsilon(1e-15));
                CHECK(col == doctest::Approx(1.0).epsilon(1e-15));
            }
        }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(transfer_matrix(-0.1), std::invalid_argument);
        CHECK_THROWS_AS(transfer_matrix(1.1), std::invalid_argument);
    }
}

TEST_CASE("initial classical states") {
    const auto dicke = initial_classical_state(4, InitSpec::dicke(2));
    int nonzero = 0;
    for (std::uint64_t b = 0; b < dicke.weights.size(); ++b) {
        if (charge_of(b) == 2) {
            ++nonzero;
            CHECK(dicke.weights[b] == doctest::Approx(1.0 / 6));
        } else {
            CHECK(dicke.weights[b] == 0.0);
        }
    }
    CHECK(nonzero == 6);
    const auto neel = initial_classical_state(4, InitSpec::neel());
    CHECK(neel.weights[0b1010] == 1.0);
    CHECK(neel.mass() == doctest::Approx(1.0));
    const auto plus = initial_classical_state(3, InitSpec::plus());
    for (double w : plus.weights) CHECK(w == doctest::Approx(1.0 / 8));
}

TEST_CASE("dense likelihood, two-site oracle") {
    // L=2, tf=1, one event (round 0, site 0, outcome 1): the two trajectories
    // from Q=1 are 01 and 10, each surviving with probability 1/2
    const auto rec = make_record(2, 1, {{0, 0, 1}});
    const auto sched = unbiased(2, 1);
    CHECK(evolve_dense_likelihood(rec, InitSpec::dicke(1), sched) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(evolve_dense_likelihood(rec, InitSpec::dicke(2), sched) ==
          doctest::Approx(0.0).epsilon(1e-12));
    // empty record: transfers preserve the 1-norm, P = 1
    const auto empty = make_record(2, 1, {});
    for (int q : {0, 1, 2})
        CHECK(evolve_dense_likelihood(empty, InitSpec::dicke(q), sched) == 0.0);
    // impossible outcome: charge 0 cannot produce a 1
    CHECK(evolve_dense_likelihood(rec, InitSpec::dicke(0), sched) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("1-norm exactly preserved by transfers, non-increasing by projectors") {
    Rng rng(21);
    ProbabilityState st = initial_classical_state(8, InitSpec::dicke(3));
    const auto layout = build_layout(8, 3);
    double mass = st.mass();
    for (int tau = 0; tau < layout.n_rounds(); ++tau) {
        for (const auto& [left, right] : layout.half_layers[tau]) {
            (void)right;
            kernels::apply_sep_hop(st.weights.data(), 8, left, rng.uniform());
            const double m = st.mass();
            CHECK(m == doctest::Approx(mass).epsilon(1e-14));
            mass = m;
        }
        const int site = static_cast<int>(rng.uniform_index(8));
        kernels::project_bit(st.weights.data(), 8, site, 0, 1.0);
        const double m = st.mass();
        CHECK(m <= mass + 1e-14);
        mass = m;
    }
}

TEST_CASE("uniform {01,10} bond distribution is a fixed point of any hop") {
    for (double hop : {0.0, 0.3, 0.9}) {
        std::vector<double> w = {0.0, 0.5, 0.5, 0.0};
        kernels::apply_sep_hop(w.data(), 2, 0, hop);
        CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("completeness over outcome assignments at L=4") {
    const int n_sites = 4, tf = 2;
    // fixed placements
    const std::vector<std::pair<int, int>> placements = {
        {0, 0}, {0, 2}, {1, 1}, {2, 0}, {2, 3}, {3, 2}};
    const auto sched = unbiased(n_sites, tf);
    for (int q = 0; q <= n_sites; ++q) {
        double total = 0.0;
        for (std::uint64_t assign = 0; assign < (1u << placements.size()); ++assign) {
            std::vector<MeasurementEvent> events;
            for (std::size_t k = 0; k < placements.size(); ++k)
                events.push_back(
                    {placements[k].first, placements[k].second, int((assign >> k) & 1)});
            std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
                return std::pair(a.half_layer, a.site) < std::pair(b.half_layer, b.site);
            });
            total += std::exp(
                evolve_dense_likelihood(make_record(n_sites, tf, events), InitSpec::dicke(q), sched));
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
}

TEST_CASE("reverse covector reproduces forward likelihoods for every label") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rec =
            run_trajectory(6, 6, 0.25, InitSpec::dicke(3), derive_stream_seed(7, trial), false)
                .record;
        const auto sched = unbiased(6, 6);
        const auto cov = evolve_dense_covector(rec, sched);
        for (int q = 0; q <= 6; ++q) {
            const double fwd = evolve_dense_likelihood(rec, InitSpec::dicke(q), sched);
            const double rev = covector_loglik(cov, InitSpec::dicke(q));
            if (std::isinf(fwd))
                CHECK(std::isinf(rev));
            else
                CHECK(rev == doctest::Approx(fwd).epsilon(1e-10));
        }
        // product-state labels go through the same covector
        const double fwd_neel = evolve_dense_likelihood(rec, InitSpec::neel(), sched);
        const double rev_neel = covector_loglik(cov, InitSpec::neel());
        if (std::isinf(fwd_neel))
            CHECK(std::isinf(rev_neel));
        else
            CHECK(rev_neel == doctest::Approx(fwd_neel).epsilon(1e-10));
    }
}

TEST_CASE("model sampler") {
    const auto sched = unbiased(4, 2);
    SUBCASE("p=0 gives the empty record") {
        Rng rng(1);
        const auto rec = sample_record_from_model(4, 2, 0.0, InitSpec::dicke(2), sched, rng);
        CHECK(rec.events.empty());
        CHECK(*rec.true_label == 2);
    }
    SUBCASE("full charge sector: every outcome is 1") {
        Rng rng(2);
        const auto rec = sample_record_from_model(4, 2, 1.0, InitSpec::dicke(4), sched, rng);
        CHECK(rec.events.size() == 16);
        for (const auto& ev : rec.events) CHECK(ev.outcome == 1);
    }
    SUBCASE("distribution matches enumeration at fixed placements, both sampler paths") {
        const std::vector<std::pair<int, int>> placements = {{0, 1}, {1, 2}, {2, 0}, {3, 3}};
        // enumerate the conditional law of the outcomes
        std::map<std::uint64_t, double> exact;
        for (std::uint64_t assign = 0; assign < 16; ++assign) {
            std::vector<MeasurementEvent> events;
            for (std::size_t k = 0; k < placements.size(); ++k)
                events.push_back(
                    {placements[k].first, placements[k].second, int((assign >> k) & 1)});
            std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
                return std::pair(a.half_layer, a.site) < std::pair(b.half_layer, b.site);
            });
            exact[assign] = std::exp(evolve_dense_likelihood(make_record(4, 2, events),
                                                             InitSpec::dicke(2), sched));
        }
        const int n = 40000;
        for (bool with_trajectory : {false, true}) {
            std::map<std::uint64_t, long> counts;
            Rng rng(with_trajectory ? 11 : 12);
            for (int i = 0; i < n; ++i) {
                ChargeTrajectory traj;
                const auto rec = sample_record_from_model(
                    4, 2, 0.0, InitSpec::dicke(2), sched, rng,
                    with_trajectory ? &traj : nullptr, &placements);
                std::uint64_t assign = 0;
                REQUIRE(rec.events.size() == placements.size());
                for (std::size_t k = 0; k < placements.size(); ++k)
                    for (const auto& ev : rec.events)
                        if (ev.half_layer == placements[k].first && ev.site == placements[k].second)
                            assign |= std::uint64_t(ev.outcome) << k;
                ++counts[assign];
                if (with_trajectory) {
                    // outcomes must read off the trajectory at slice tau+1
                    for (const auto& ev : rec.events)
                        CHECK(ev.outcome == traj.at(ev.half_layer + 1, ev.site));
                }
            }
            double tv = 0.0;
            for (const auto& [assign, p_exact] : exact)
                tv += std::abs(counts[assign] / static_cast<double>(n) - p_exact);
            CHECK(tv / 2 < 0.02);
        }
    }
}

TEST_CASE("Haar-averaged doubled channel") {
    Rng rng(1001);
    const auto rep = verify_doubled_channel(20000, rng);
    CHECK(rep.dev_charge0 == 0.0);
    CHECK(rep.dev_charge2 < 1e-13);  // cos^2 + sin^2 rounds to 1 within ulps
    CHECK(rep.dev_charge1 < 0.02);
    CHECK(rep.max_abs_dev < 0.02);
    // off-block entries of the estimate are exactly zero
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const bool in_block = (r == 0 && c == 0) || (r == 3 && c == 3) ||
                                  (r >= 1 && r <= 2 && c >= 1 && c <= 2);
            if (!in_block) CHECK(rep.estimate[r * 4 + c] == 0.0);
        }
}

TEST_CASE("Haar average of the quantum Born probability equals the SEP likelihood") {
    // small version of the oracle-equivalence check: L=3, tf=1
    const auto rec =
        run_trajectory(3, 1, 0.8, InitSpec::dicke(1), 314, false).record;
    const auto sched = unbiased(3, 1);
    const auto layout = build_layout(3, 1);
    std::vector<std::vector<MeasurementEvent>> rounds(layout.n_rounds());
    for (const auto& ev : rec.events) rounds[ev.half_layer].push_back(ev);
    for (int q : {1, 2}) {
        const double sep = std::exp(evolve_dense_likelihood(rec, InitSpec::dicke(q), sched));
        Rng rng(derive_stream_seed(315, q));
        const long n = 30000;
        double sum = 0.0, sum_sq = 0.0;
        for (long i = 0; i < n; ++i) {
            auto st = init_state(3, InitSpec::dicke(q));
            for (int tau = 0; tau < layout.n_rounds(); ++tau) {
                for (const auto& [left, right] : layout.half_layers[tau]) {
                    (void)right;
                    apply_gate(st, left, sample_gate_params(rng));
                }
                for (const auto& ev : rounds[tau])
                    kernels::project_bit(st.amps.data(), 3, ev.site, ev.outcome, 1.0);
            }
            const double v = st.norm2();
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / n;
        const double stderr_mc = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
        CHECK(std::abs(mean - sep) < 3 * stderr_mc + 1e-12);
    }
}

TEST_CASE("dense guard") {
    MeasurementRecord rec;
    rec.n_sites = 25;
    rec.n_timesteps = 1;
    CHECK_THROWS_AS(
        evolve_dense_likelihood(rec, InitSpec::dicke(12), BiasSchedule::uniform(rec.layout())),
        data_error);
}
