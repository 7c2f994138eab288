// u1decode: simulate monitored U(1) circuits, decode global charge from
// measurement records, and analyze the learnability transitions.
//
// Exit codes: 0 ok, 1 I/O failure, 2 usage, 3 data/mode mismatch,
// 4 verification failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "u1dec/commands.hpp"

namespace {

int dispatch(CLI::App& app, int argc, char** argv) {
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return -1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"charge learnability in monitored U(1) circuits"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers, "worker threads (default: U1DEC_WORKERS or all cores)");

    u1dec::GenerateOptions gen;
    auto* cmd_gen = app.add_subcommand("generate", "generate measurement records");
    cmd_gen->add_option("--engine", gen.engine, "quantum | sep")
        ->check(CLI::IsMember({"quantum", "sep"}));
    cmd_gen->add_option("--L", gen.n_sites, "number of sites")->required();
    cmd_gen->add_option("--tf", gen.n_timesteps, "timesteps (default L)");
    cmd_gen->add_option("--p", gen.meas_prob, "measurement probability")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    cmd_gen->add_option("--init", gen.init, "dicke | neel | plus")
        ->check(CLI::IsMember({"dicke", "neel", "plus"}));
    cmd_gen->add_option("--labels", gen.labels, "pair | all | comma-separated charges");
    cmd_gen->add_option("--n", gen.n_per_class, "records per class")->required();
    cmd_gen->add_option("--seed", gen.seed, "master seed");
    cmd_gen->add_flag("--with-gates", gen.with_gates, "embed the gate realization");
    cmd_gen->add_option("--out", gen.out, "output JSONL path")->required();

    u1dec::DecodeCmdOptions dec;
    auto* cmd_dec = app.add_subcommand("decode", "decode records into posteriors");
    cmd_dec->add_option("--records", dec.records_path, "input record JSONL")->required();
    cmd_dec->add_option("--mode", dec.mode, "unbiased | biased | antibiased")
        ->check(CLI::IsMember({"unbiased", "biased", "antibiased"}));
    cmd_dec->add_option("--backend", dec.backend, "dense | mps")
        ->check(CLI::IsMember({"dense", "mps"}));
    cmd_dec->add_option("--threshold", dec.threshold, "MPS truncation threshold");
    cmd_dec->add_option("--labels", dec.labels, "pair | all");
    cmd_dec->add_flag("--dicke-init", dec.dicke_init,
                      "decode product-state records with dicke vectors");
    cmd_dec->add_option("--out", dec.out, "output JSONL path")->required();

    u1dec::AnalyzeOptions ana;
    auto* cmd_ana = app.add_subcommand("analyze", "summaries, Binder curves, crossings, plots");
    cmd_ana->add_option("--results", ana.results, "result JSONL files")->required();
    cmd_ana->add_option("--group-by", ana.group_by, "subset of L,p,mode,init");
    cmd_ana->add_option("--boot", ana.n_boot, "bootstrap resamples");
    cmd_ana->add_option("--seed", ana.seed, "bootstrap seed");
    cmd_ana->add_option("--out-dir", ana.out_dir, "output directory")->required();

    u1dec::PercolateOptions perc;
    auto* cmd_perc = app.add_subcommand("percolate", "charge-cut analysis of records");
    cmd_perc->add_option("--records", perc.records_path, "input record JSONL")->required();
    cmd_perc->add_option("--out", perc.out, "per-record CSV path")->required();
    cmd_perc->add_option("--boot", perc.n_boot, "bootstrap resamples");
    cmd_perc->add_option("--seed", perc.seed, "bootstrap seed");

    u1dec::VerifyOptions ver;
    auto* cmd_ver = app.add_subcommand("verify", "statistical self-checks");
    cmd_ver->add_option("check", ver.check, "haar-average | born-equivalence | enumeration")
        ->required()
        ->check(CLI::IsMember({"haar-average", "born-equivalence", "enumeration"}));
    cmd_ver->add_option("--n", ver.n, "sample count");
    cmd_ver->add_option("--L", ver.n_sites, "sites");
    cmd_ver->add_option("--tf", ver.n_timesteps, "timesteps");
    cmd_ver->add_option("--p", ver.meas_prob, "measurement probability");
    cmd_ver->add_option("--seed", ver.seed, "seed");

    std::string plan_path;
    auto* cmd_swp = app.add_subcommand("sweep", "run a full experiment plan");
    cmd_swp->add_option("plan", plan_path, "plan file (TOML-style)")->required();

    if (const int code = dispatch(app, argc, argv); code >= 0) return code;

    try {
        u1dec::configure_workers(workers);
        if (cmd_gen->parsed()) u1dec::cmd_generate(gen);
        if (cmd_dec->parsed()) u1dec::cmd_decode(dec);
        if (cmd_ana->parsed()) u1dec::cmd_analyze(ana);
        if (cmd_perc->parsed()) u1dec::cmd_percolate(perc);
        if (cmd_ver->parsed()) return u1dec::cmd_verify(ver);
        if (cmd_swp->parsed()) u1dec::cmd_sweep(plan_path);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const u1dec::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const u1dec::missing_info_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const u1dec::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const u1dec::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
