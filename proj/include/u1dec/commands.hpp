#pragma once

// Batch orchestration behind the CLI subcommands; kept in the library so the
// test suites can drive the same code paths in memory.

#include <string>
#include <vector>

#include "u1dec/core.hpp"
#include "u1dec/decoder.hpp"
#include "u1dec/io.hpp"

namespace u1dec {

// Worker count: explicit value > 0 wins, else U1DEC_WORKERS, else OpenMP default.
void configure_workers(int requested);

struct GenerateOptions {
    std::string engine = "quantum";  // quantum | sep
    int n_sites = 8;
    int n_timesteps = 0;  // 0 -> L
    double meas_prob = 0.1;
    std::string init = "dicke";   // dicke | neel | plus
    std::string labels = "pair";  // pair | all | comma-separated charges
    int n_per_class = 100;
    std::uint64_t seed = 0;
    bool with_gates = false;
    std::string out;
};

std::vector<int> resolve_labels(const std::string& labels, int n_sites);

// Class-major, record index i gets stream seed derive(seed, i); deterministic
// for any worker count.
std::vector<MeasurementRecord> generate_batch(const GenerateOptions& opt);

void cmd_generate(const GenerateOptions& opt);

struct DecodeCmdOptions {
    std::string records_path;
    std::string mode = "unbiased";
    std::string backend = "dense";
    double threshold = 1e-10;
    std::string labels = "pair";
    bool dicke_init = false;
    std::string out;
};

ResultRow decode_record(const MeasurementRecord& rec, const std::vector<int>& labels,
                        const DecodeOptions& opts);

std::vector<ResultRow> decode_batch(const std::vector<MeasurementRecord>& records,
                                    const std::string& labels_opt, const DecodeOptions& opts);

void cmd_decode(const DecodeCmdOptions& opt);

struct AnalyzeOptions {
    std::vector<std::string> results;
    std::string group_by = "L,p,mode";
    int n_boot = 1000;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void cmd_analyze(const AnalyzeOptions& opt);

struct PercolateOptions {
    std::string records_path;
    std::string out;
    int n_boot = 1000;
    std::uint64_t seed = 0;
};

void cmd_percolate(const PercolateOptions& opt);

struct VerifyOptions {
    std::string check;  // haar-average | born-equivalence | enumeration
    long n = 100000;
    int n_sites = 4;
    int n_timesteps = 2;
    double meas_prob = 0.5;
    std::uint64_t seed = 1;
};

// Returns the process exit code: 0 ok (possibly with warnings), 4 on failure.
int cmd_verify(const VerifyOptions& opt);

void cmd_sweep(const std::string& plan_path);

struct SweepPlan {
    std::uint64_t master_seed = 0;
    std::string out_dir = "sweep_out";
    std::string engine = "quantum";
    std::string init = "dicke";
    std::string labels = "pair";
    int n_per_class = 100;
    int n_boot = 1000;
    std::string backend = "dense";
    double threshold = 1e-10;
    std::vector<std::string> modes = {"unbiased"};
    std::vector<int> l_values;
    std::vector<double> p_values;
    int n_timesteps = 0;  // 0 -> L per cell
    bool with_gates = false;
    int workers = 0;
};

SweepPlan parse_sweep_plan(const std::string& text);

}  // namespace u1dec
