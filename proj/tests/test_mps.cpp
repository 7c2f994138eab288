#include <doctest.h>

#include <cmath>

#include "u1dec/decoder.hpp"
#include "u1dec/kernels.hpp"
#include "u1dec/mps.hpp"
#include "u1dec/qsim.hpp"

using namespace u1dec;

namespace {

BiasSchedule unbiased(int n_sites, int tf) {
    return BiasSchedule::uniform(build_layout(n_sites, tf));
}

}  // namespace

TEST_CASE("initial MPS forms") {
    SUBCASE("flat covector is bond dimension 1 everywhere") {
        const auto flat = flat_mps(6);
        for (int b = 0; b < 6; ++b) CHECK(flat.bond_dim(b) == 1);
        const auto dense = to_dense(flat);
        for (double v : dense) CHECK(v == 1.0);
    }
    SUBCASE("dicke automaton: exact weights and stated bond dimension") {
        for (int n_sites : {4, 6, 9}) {
            for (int q = 0; q <= n_sites; ++q) {
                const auto mps = dicke_mps(n_sites, q);
                CHECK(mps.max_bond_dim() == std::min(q, n_sites - q) + 1);
                const auto dense = to_dense(mps);
                const auto ref = initial_classical_state(n_sites, InitSpec::dicke(q));
                for (std::size_t i = 0; i < dense.size(); ++i)
                    CHECK(dense[i] == doctest::Approx(ref.weights[i]).epsilon(1e-13));
            }
        }
    }
    SUBCASE("deltas and plus") {
        const auto neel = initial_classical_mps(4, InitSpec::neel());
        const auto dense = to_dense(neel);
        for (std::uint64_t b = 0; b < dense.size(); ++b)
            CHECK(dense[b] == (b == 0b1010 ? 1.0 : 0.0));
        const auto plus = to_dense(initial_classical_mps(3, InitSpec::plus()));
        for (double v : plus) CHECK(v == doctest::Approx(0.125));
    }
    SUBCASE("flat overlaps") {
        CHECK(overlap_log(flat_mps(5), dicke_mps(5, 2)) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(overlap_log(flat_mps(4), initial_classical_mps(4, InitSpec::plus())) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("bond transfer against the dense kernel") {
    for (int left = 0; left < 3; ++left) {
        auto mps = dicke_mps(4, 2);
        mps.threshold = 0.0;
        apply_hop_bond(mps, left, 0.3);
        auto dense = to_dense(mps);
        auto ref = initial_classical_state(4, InitSpec::dicke(2)).weights;
        kernels::apply_sep_hop(ref.data(), 4, left, 0.3);
        for (std::size_t i = 0; i < dense.size(); ++i)
            CHECK(dense[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("projector on a site") {
    auto mps = dicke_mps(4, 2);
    apply_projector_site(mps, 1, 1);
    const auto dense = to_dense(mps);
    for (std::uint64_t b = 0; b < dense.size(); ++b) {
        const double expect = (charge_of(b) == 2 && bit_of_site(b, 4, 1) == 1) ? 1.0 / 6 : 0.0;
        CHECK(dense[b] == doctest::Approx(expect).epsilon(1e-12));
    }
    // killing the remaining weight marks the state dead
    apply_projector_site(mps, 1, 0);
    CHECK(mps.dead);
    CHECK(overlap_log(mps, flat_mps(4)) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("two-site oracle value") {
    MeasurementRecord rec;
    rec.n_sites = 2;
    rec.n_timesteps = 1;
    rec.events = {{0, 0, 1}};
    CHECK(evolve_mps_likelihood(rec, InitSpec::dicke(1), unbiased(2, 1), 1e-10) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-10));
    CHECK(evolve_mps_likelihood(rec, InitSpec::dicke(2), unbiased(2, 1), 1e-10) ==
          doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("backend agreement on random records") {
    int zero_cases = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int n_sites = 4 + 2 * (trial % 3);
        const double p = 0.1 + 0.1 * (trial % 3);
        const auto out = run_trajectory(n_sites, n_sites, p, InitSpec::dicke(n_sites / 2),
                                        derive_stream_seed(61, trial), true);
        const auto& rec = out.record;
        for (BiasMode mode : {BiasMode::unbiased, BiasMode::biased}) {
            const auto sched = bias_schedule(rec, mode);
            for (int q : {n_sites / 2 - 1, n_sites / 2}) {
                const double dense = evolve_dense_likelihood(rec, InitSpec::dicke(q), sched);
                const double mps = evolve_mps_likelihood(rec, InitSpec::dicke(q), sched, 1e-10);
                if (std::isinf(dense)) {
                    ++zero_cases;
                    CHECK(mps < -30.0);
                } else {
                    CHECK(mps == doctest::Approx(dense).epsilon(1e-9));
                }
            }
        }
    }
    CHECK(zero_cases < 20);  // most pairs exercise the finite path
}

TEST_CASE("transpose identity: reverse covector evolution vs forward dense") {
    for (int trial = 0; trial < 10; ++trial) {
        const int n_sites = 6 + 2 * (trial % 3);
        const auto rec = run_trajectory(n_sites, n_sites, 0.2, InitSpec::dicke(n_sites / 2),
                                        derive_stream_seed(62, trial), false)
                             .record;
        const auto sched = unbiased(n_sites, n_sites);
        const auto cov = evolve_mps_covector(rec, sched, 0.0);
        for (int q : {n_sites / 2 - 1, n_sites / 2}) {
            const double fwd = evolve_dense_likelihood(rec, InitSpec::dicke(q), sched);
            const double rev = mps_covector_loglik(cov, InitSpec::dicke(q));
            if (std::isinf(fwd))
                CHECK(rev < -30.0);
            else
                CHECK(std::abs(rev - fwd) < 1e-6);
        }
    }
}

TEST_CASE("single-pass truncation stays sane at loose thresholds") {
    const auto rec = run_trajectory(8, 8, 0.2, InitSpec::dicke(4), 63, false).record;
    const auto sched = unbiased(8, 8);
    const auto state = evolve_mps_forward(rec, InitSpec::dicke(4), sched, 1e-4);
    const double loose = overlap_log(state, flat_mps(8));
    const double exact = evolve_dense_likelihood(rec, InitSpec::dicke(4), sched);
    CHECK(std::isfinite(loose));
    CHECK(std::abs(loose - exact) < 0.5);  // biased but not broken
    CHECK(state.max_bond_dim() <= 16);     // actually truncates
}

TEST_CASE("bad threshold") {
    MeasurementRecord rec;
    rec.n_sites = 4;
    rec.n_timesteps = 1;
    CHECK_THROWS_AS(evolve_mps_likelihood(rec, InitSpec::dicke(2), unbiased(4, 1), 1.5),
                    std::invalid_argument);
}
