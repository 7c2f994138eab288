#include <doctest.h>

#include <vector>

#include "u1dec/kernels.hpp"
#include "u1dec/qsim.hpp"
#include "u1dec/sep.hpp"

using namespace u1dec;

namespace {

std::vector<cplx> random_amps(int n_sites, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> amps(std::uint64_t{1} << n_sites);
    for (auto& a : amps) a = {rng.uniform() - 0.5, rng.uniform() - 0.5};
    return amps;
}

std::vector<double> random_weights(int n_sites, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(std::uint64_t{1} << n_sites);
    for (auto& x : w) x = rng.uniform();
    return w;
}

// reference: act with the full 4x4 matrix basis pair by basis pair
std::vector<cplx> apply_gate_reference(const std::vector<cplx>& amps, int n_sites, int left,
                                       const std::array<cplx, 16>& u) {
    std::vector<cplx> out(amps.size(), cplx{});
    for (std::uint64_t b = 0; b < amps.size(); ++b) {
        const int config = 2 * bit_of_site(b, n_sites, left) + bit_of_site(b, n_sites, left + 1);
        for (int to = 0; to < 4; ++to) {
            std::uint64_t target = b;
            const std::uint64_t hi = std::uint64_t{1} << (n_sites - 1 - left);
            const std::uint64_t lo = std::uint64_t{1} << (n_sites - 2 - left);
            target = (target & ~(hi | lo)) | (to & 2 ? hi : 0) | (to & 1 ? lo : 0);
            out[target] += u[to * 4 + config] * amps[b];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("u1 gate kernel matches the 4x4 matrix and its serial reference") {
    const int n_sites = 6;
    Rng rng(11);
    for (int left = 0; left + 1 < n_sites; ++left) {
        const GateParams g = sample_gate_params(rng);
        const auto amps0 = random_amps(n_sites, 100 + left);
        auto fast = amps0;
        auto slow = amps0;
        const auto block = kernels::gate_block(g);
        kernels::apply_u1_gate(fast.data(), n_sites, left, block);
        kernels::apply_u1_gate_serial(slow.data(), n_sites, left, block);
        const auto ref = apply_gate_reference(amps0, n_sites, left, build_unitary(g));
        for (std::size_t i = 0; i < amps0.size(); ++i) {
            CHECK(fast[i] == slow[i]);  // bit identical
            CHECK(std::abs(fast[i] - ref[i]) < 1e-13);
        }
    }
}

TEST_CASE("sep hop kernel matches the transfer matrix and preserves mass") {
    const int n_sites = 6;
    for (int left = 0; left + 1 < n_sites; ++left) {
        const double hop = 0.1 + 0.15 * left;
        const auto w0 = random_weights(n_sites, 200 + left);
        auto fast = w0;
        auto slow = w0;
        kernels::apply_sep_hop(fast.data(), n_sites, left, hop);
        kernels::apply_sep_hop_serial(slow.data(), n_sites, left, hop);
        const auto t = transfer_matrix(hop);
        double mass0 = 0.0, mass1 = 0.0;
        for (std::uint64_t b = 0; b < w0.size(); ++b) {
            CHECK(fast[b] == slow[b]);
            // reference via the 4x4 row of the two-site configuration
            const int config =
                2 * bit_of_site(b, n_sites, left) + bit_of_site(b, n_sites, left + 1);
            double expect = 0.0;
            for (int from = 0; from < 4; ++from) {
                std::uint64_t source = b;
                const std::uint64_t hi = std::uint64_t{1} << (n_sites - 1 - left);
                const std::uint64_t lo = std::uint64_t{1} << (n_sites - 2 - left);
                source = (source & ~(hi | lo)) | (from & 2 ? hi : 0) | (from & 1 ? lo : 0);
                expect += t[config * 4 + from] * w0[source];
            }
            CHECK(fast[b] == doctest::Approx(expect).epsilon(1e-12));
            mass0 += w0[b];
            mass1 += fast[b];
        }
        CHECK(mass1 == doctest::Approx(mass0).epsilon(1e-13));
    }
}

TEST_CASE("reductions agree with serial references") {
    const int n_sites = 12;
    const auto amps = random_amps(n_sites, 3);
    const auto w = random_weights(n_sites, 4);
    CHECK(kernels::norm2(amps.data(), amps.size()) ==
          doctest::Approx(kernels::norm2_serial(amps.data(), amps.size())).epsilon(1e-13));
    CHECK(kernels::sum(w.data(), w.size()) ==
          doctest::Approx(kernels::sum_serial(w.data(), w.size())).epsilon(1e-13));
    for (int site : {0, 5, 11}) {
        CHECK(kernels::bit_one_weight(amps.data(), n_sites, site) ==
              doctest::Approx(kernels::bit_one_weight_serial(amps.data(), n_sites, site))
                  .epsilon(1e-13));
        CHECK(kernels::bit_one_mass(w.data(), n_sites, site) ==
              doctest::Approx(kernels::bit_one_mass_serial(w.data(), n_sites, site))
                  .epsilon(1e-13));
    }
}

TEST_CASE("projectors and the fused round projector") {
    const int n_sites = 8;
    const auto w0 = random_weights(n_sites, 5);
    auto a = w0;
    auto b = w0;
    // round: site 1 -> 1, site 4 -> 0, site 6 -> 1
    kernels::project_bit(a.data(), n_sites, 1, 1, 1.0);
    kernels::project_bit(a.data(), n_sites, 4, 0, 1.0);
    kernels::project_bit(a.data(), n_sites, 6, 1, 1.0);
    const double sum_a = kernels::sum(a.data(), a.size());
    const std::uint64_t ones =
        (std::uint64_t{1} << (n_sites - 2)) | (std::uint64_t{1} << (n_sites - 7));
    const std::uint64_t zeros = std::uint64_t{1} << (n_sites - 5);
    const double sum_b = kernels::project_round_and_sum(b.data(), n_sites, ones, zeros);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    CHECK(sum_b == doctest::Approx(sum_a).epsilon(1e-13));
    auto c = w0;
    const double sum_c = kernels::project_round_and_sum_serial(c.data(), n_sites, ones, zeros);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(c[i] == b[i]);
    CHECK(sum_c == doctest::Approx(sum_b).epsilon(1e-13));

    // complex projector agrees with its serial reference bit for bit
    auto amps = random_amps(n_sites, 6);
    auto amps2 = amps;
    kernels::project_bit(amps.data(), n_sites, 3, 1, 2.0);
    kernels::project_bit_serial(amps2.data(), n_sites, 3, 1, 2.0);
    for (std::size_t i = 0; i < amps.size(); ++i) CHECK(amps[i] == amps2[i]);
}

TEST_CASE("sector reductions") {
    const int n_sites = 9;
    const auto amps = random_amps(n_sites, 7);
    const auto w = random_weights(n_sites, 8);
    const auto sn = kernels::sector_norm2(amps.data(), n_sites);
    const auto ss = kernels::sector_sums(w.data(), n_sites);
    std::vector<double> ref_n(n_sites + 1, 0.0), ref_s(n_sites + 1, 0.0);
    for (std::uint64_t b = 0; b < w.size(); ++b) {
        ref_n[charge_of(b)] += std::norm(amps[b]);
        ref_s[charge_of(b)] += w[b];
    }
    for (int q = 0; q <= n_sites; ++q) {
        CHECK(sn[q] == doctest::Approx(ref_n[q]).epsilon(1e-13));
        CHECK(ss[q] == doctest::Approx(ref_s[q]).epsilon(1e-13));
    }
}
