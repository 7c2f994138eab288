// Kernel benchmark: serial reference vs OpenMP versions of the statevector
// gate, the SEP transfer, and the reductions, plus one end-to-end record
// generate+decode timing.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "u1dec/commands.hpp"
#include "u1dec/kernels.hpp"
#include "u1dec/qsim.hpp"
#include "u1dec/sep.hpp"

using namespace u1dec;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(int reps, F&& body) {
    body();  // warm up
    const auto start = Clock::now();
    for (int r = 0; r < reps; ++r) body();
    const auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void bench_kernels(int n_sites, int reps) {
    const std::uint64_t dim = std::uint64_t{1} << n_sites;
    Rng rng(7);
    std::vector<cplx> amps(dim);
    for (auto& a : amps) a = {rng.uniform() - 0.5, rng.uniform() - 0.5};
    std::vector<double> weights(dim);
    for (auto& w : weights) w = rng.uniform();
    const auto gate = kernels::gate_block(sample_gate_params(rng));

    std::printf("L=%d (%llu amplitudes), %d reps, %d thread(s)\n", n_sites,
                static_cast<unsigned long long>(dim), reps, omp_get_max_threads());

    struct RowSpec {
        const char* name;
        double serial_ms;
        double parallel_ms;
    };
    std::vector<RowSpec> rows;
    rows.push_back({"u1 gate (mid bond)",
                    time_ms(reps, [&] { kernels::apply_u1_gate_serial(amps.data(), n_sites,
                                                                      n_sites / 2, gate); }),
                    time_ms(reps, [&] { kernels::apply_u1_gate(amps.data(), n_sites,
                                                               n_sites / 2, gate); })});
    rows.push_back({"sep transfer (mid bond)",
                    time_ms(reps, [&] { kernels::apply_sep_hop_serial(weights.data(), n_sites,
                                                                      n_sites / 2, 0.3); }),
                    time_ms(reps, [&] { kernels::apply_sep_hop(weights.data(), n_sites,
                                                               n_sites / 2, 0.3); })});
    rows.push_back({"norm2",
                    time_ms(reps, [&] { volatile double v = kernels::norm2_serial(amps.data(), dim);
                                        (void)v; }),
                    time_ms(reps, [&] { volatile double v = kernels::norm2(amps.data(), dim);
                                        (void)v; })});
    rows.push_back({"weight sum",
                    time_ms(reps, [&] { volatile double v = kernels::sum_serial(weights.data(), dim);
                                        (void)v; }),
                    time_ms(reps, [&] { volatile double v = kernels::sum(weights.data(), dim);
                                        (void)v; })});
    std::printf("%-26s %12s %12s %9s\n", "kernel", "serial(ms)", "omp(ms)", "speedup");
    for (const auto& r : rows)
        std::printf("%-26s %12.4f %12.4f %8.2fx\n", r.name, r.serial_ms, r.parallel_ms,
                    r.serial_ms / r.parallel_ms);
}

void bench_pipeline(int n_sites, int n_records) {
    GenerateOptions gen;
    gen.n_sites = n_sites;
    gen.meas_prob = 0.15;
    gen.n_per_class = n_records / 2;
    gen.seed = 11;
    const auto t0 = Clock::now();
    const auto records = generate_batch(gen);
    const auto t1 = Clock::now();
    DecodeOptions dopts;
    const auto rows = decode_batch(records, "pair", dopts);
    const auto t2 = Clock::now();
    long correct = 0;
    for (const auto& r : rows) correct += r.correct;
    std::printf("pipeline L=%d: %zu records, generate %.1f ms, decode %.1f ms (accuracy %.3f)\n",
                n_sites, records.size(),
                std::chrono::duration<double, std::milli>(t1 - t0).count(),
                std::chrono::duration<double, std::milli>(t2 - t1).count(),
                static_cast<double>(correct) / rows.size());
}

}  // namespace

int main(int argc, char** argv) {
    configure_workers(0);
    int n_sites = argc > 1 ? std::atoi(argv[1]) : 16;
    int reps = argc > 2 ? std::atoi(argv[2]) : 200;
    bench_kernels(n_sites, reps);
    bench_pipeline(std::min(n_sites, 14), 200);
    return 0;
}
