#include <doctest.h>

#include <cmath>

#include "u1dec/stats.hpp"

using namespace u1dec;

namespace {

// independent series oracle for erf
double erf_series(double x) {
    double term = x, sum = x;
    for (int n = 1; n < 60; ++n) {
        term *= -x * x / n;
        sum += term / (2 * n + 1);
    }
    return sum * 2.0 / std::sqrt(std::acos(-1.0));
}

}  // namespace

TEST_CASE("independent-measurements accuracy bound") {
    CHECK(lower_bound_accuracy(0.0, 16, 16) == doctest::Approx(0.5));
    // p tf / L = 1: compare against the series oracle
    CHECK(lower_bound_accuracy(1.0, 16, 16) ==
          doctest::Approx(0.5 * (1.0 + erf_series(1.0))).epsilon(1e-12));
    CHECK(lower_bound_accuracy(1.0, 16, 16) == doctest::Approx(0.92135).epsilon(1e-4));
    double prev = 0.0;
    for (double p : {0.05, 0.1, 0.2, 0.4, 0.8, 1.0}) {
        const double a = lower_bound_accuracy(p, 100, 10);
        CHECK(a > prev);
        prev = a;
    }
    CHECK(lower_bound_accuracy(1.0, 100000, 1) > 0.999999);
    CHECK_THROWS_AS(lower_bound_accuracy(-0.1, 1, 1), std::invalid_argument);
}

TEST_CASE("binder ratio") {
    SUBCASE("gaussian gives 3") {
        Rng rng(5);
        std::vector<double> xs(1000000);
        for (auto& x : xs) x = rng.normal();
        CHECK(binder_ratio(xs) == doctest::Approx(3.0).epsilon(0.02));
    }
    SUBCASE("symmetric two-point gives 1 exactly") {
        std::vector<double> xs;
        for (int i = 0; i < 100; ++i) xs.push_back(i % 2 ? 1.0 : -1.0);
        CHECK(binder_ratio(xs) == 1.0);
    }
    SUBCASE("degenerate throws") {
        std::vector<double> xs(50, 0.7);
        CHECK_THROWS_AS(binder_ratio(xs), numeric_error);
    }
    SUBCASE("affine invariance") {
        Rng rng(6);
        std::vector<double> xs(5000), ys(5000);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xs[i] = rng.uniform();
            ys[i] = -3.7 * xs[i] + 11.0;
        }
        CHECK(binder_ratio(xs) == doctest::Approx(binder_ratio(ys)).epsilon(1e-9));
    }
}

TEST_CASE("bootstrap accuracy") {
    SUBCASE("all correct pins the interval") {
        const std::vector<std::uint8_t> all(200, 1);
        const auto acc = accuracy_with_ci(all, 500, 3);
        CHECK(acc.value == 1.0);
        CHECK(acc.ci.lo == 1.0);
        CHECK(acc.ci.hi == 1.0);
    }
    SUBCASE("half correct at N=10^4") {
        std::vector<std::uint8_t> half(10000);
        for (std::size_t i = 0; i < half.size(); ++i) half[i] = i % 2;
        const auto acc = accuracy_with_ci(half, 1000, 4);
        CHECK(acc.value == 0.5);
        CHECK(acc.ci.hi - acc.ci.lo == doctest::Approx(0.02).epsilon(0.4));
    }
    SUBCASE("seeded determinism") {
        std::vector<std::uint8_t> xs(500);
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i * 7) % 3 == 0;
        const auto a = accuracy_with_ci(xs, 300, 9);
        const auto b = accuracy_with_ci(xs, 300, 9);
        CHECK(a.ci.lo == b.ci.lo);
        CHECK(a.ci.hi == b.ci.hi);
        CHECK_THROWS_AS(accuracy_with_ci({}, 10, 1), std::invalid_argument);
    }
}

TEST_CASE("distribution report") {
    SUBCASE("point mass at 1") {
        const std::vector<double> ones(100, 1.0);
        const auto rep = distribution_report(ones);
        CHECK(rep.counts.back() == 100);
        CHECK(rep.cdf.back() == 1.0);
        CHECK(rep.lower_tail_weight == 0.0);
    }
    SUBCASE("uniform fill") {
        Rng rng(8);
        std::vector<double> xs(50000);
        for (auto& x : xs) x = rng.uniform();
        const auto rep = distribution_report(xs, 50, 0.4);
        const double expect = xs.size() / 50.0;
        for (long c : rep.counts)
            CHECK(std::abs(c - expect) < 3 * std::sqrt(expect) + 1.0);
        CHECK(rep.lower_tail_weight == doctest::Approx(0.4).epsilon(0.05));
        CHECK(rep.cdf.back() == 1.0);
        for (std::size_t b = 1; b < rep.cdf.size(); ++b) CHECK(rep.cdf[b] >= rep.cdf[b - 1]);
        long total = 0;
        for (long c : rep.counts) total += c;
        CHECK(total == static_cast<long>(xs.size()));
    }
    SUBCASE("domain and argument errors") {
        CHECK_THROWS_AS(distribution_report(std::vector<double>{1.2}), std::invalid_argument);
        CHECK_THROWS_AS(distribution_report(std::vector<double>{0.5}, 1), std::invalid_argument);
        CHECK_THROWS_AS(distribution_report(std::vector<double>{}), std::invalid_argument);
    }
}

TEST_CASE("crossing estimation") {
    SUBCASE("line meets constant at 0.2") {
        std::vector<CurvePoint> a, b;
        for (double x : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
            a.push_back({x, x, 0.0});
            b.push_back({x, 0.2, 0.0});
        }
        const auto est = crossing_estimate(a, b, 100, 1);
        REQUIRE(est.has_value());
        CHECK(est->x_star == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("parallel curves do not cross") {
        std::vector<CurvePoint> a, b;
        for (double x : {0.1, 0.2, 0.3}) {
            a.push_back({x, 1.0, 0.01});
            b.push_back({x, 2.0, 0.01});
        }
        CHECK_FALSE(crossing_estimate(a, b, 100, 1).has_value());
    }
    SUBCASE("noisy synthetic crossing lands in the band") {
        int contained = 0;
        const int trials = 100;
        for (int t = 0; t < trials; ++t) {
            Rng rng(derive_stream_seed(91, t));
            std::vector<CurvePoint> a, b;
            for (double x = 0.05; x < 0.3001; x += 0.05) {
                a.push_back({x, 1.0 * (x - 0.15) + rng.normal() * 0.01, 0.01});
                b.push_back({x, -1.0 * (x - 0.15) + rng.normal() * 0.01, 0.01});
            }
            const auto est = crossing_estimate(a, b, 200, derive_stream_seed(92, t));
            if (est && est->band.lo <= 0.15 && 0.15 <= est->band.hi) ++contained;
        }
        CHECK(contained >= 90);  // 90%
    }
    SUBCASE("grid mismatch") {
        std::vector<CurvePoint> a = {{0.1, 0, 0}, {0.2, 1, 0}};
        std::vector<CurvePoint> b = {{0.1, 0, 0}, {0.25, 1, 0}};
        CHECK_THROWS_AS(crossing_estimate(a, b, 10, 1), std::invalid_argument);
    }
}

TEST_CASE("order parameter table") {
    SampleSet set;
    GroupKey perfect{8, 0.3, "unbiased", "dicke-pair"};
    GroupKey fuzzy{8, 0.05, "unbiased", "dicke-pair"};
    for (int i = 0; i < 500; ++i) {
        set.add(perfect, 1.0, 0.0, 1.0, 1.0, true);
        set.add(fuzzy, 0.5, 1.0, 0.5, 0.5, i % 2 == 0);
    }
    const auto rows = order_parameter_table(set, 200, 12);
    REQUIRE(rows.size() == 2);
    const auto& low_p = rows[0];  // sorted by key: p=0.05 first
    CHECK(low_p.key.meas_prob == 0.05);
    CHECK(low_p.accuracy == 0.5);
    CHECK(low_p.mean_entropy == 1.0);
    CHECK(low_p.order_param == doctest::Approx(0.5));
    CHECK(low_p.binder_pcorr_degenerate);
    const auto& high_p = rows[1];
    CHECK(high_p.accuracy == 1.0);
    CHECK(high_p.mean_entropy == 0.0);
    CHECK(high_p.order_param == doctest::Approx(0.0));
    CHECK(high_p.theoretical_accuracy == 1.0);
    CHECK(high_p.binder_entropy_degenerate);
    CHECK_THROWS_AS(order_parameter_table(SampleSet{}, 10, 1), std::invalid_argument);
}
