#include "u1dec/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "u1dec/kernels.hpp"
#include "u1dec/mps.hpp"
#include "u1dec/percolation.hpp"
#include "u1dec/qsim.hpp"
#include "u1dec/stats.hpp"

namespace u1dec {

namespace {

// capture the first exception thrown inside an omp loop and rethrow after
struct ParallelErrors {
    std::exception_ptr first = nullptr;

    template <typename F>
    void run(F&& f) {
        try {
            f();
        } catch (...) {
#pragma omp critical(u1dec_parallel_errors)
            if (!first) first = std::current_exception();
        }
    }
    void rethrow() const {
        if (first) std::rethrow_exception(first);
    }
};

int resolved_tf(int tf, int n_sites) {
    return tf > 0 ? tf : n_sites;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void configure_workers(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("U1DEC_WORKERS")) n = std::atoi(env);
    }
    if (n > 0) omp_set_num_threads(n);
}

std::vector<int> resolve_labels(const std::string& labels, int n_sites) {
    if (labels == "pair") return pair_labels(n_sites);
    if (labels == "all") return all_labels(n_sites);
    std::vector<int> out;
    std::stringstream ss(labels);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        const int q = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("bad label list: " + labels);
        out.push_back(q);
    }
    if (out.empty()) throw std::invalid_argument("empty label list");
    return out;
}

std::vector<MeasurementRecord> generate_batch(const GenerateOptions& opt) {
    const int tf = resolved_tf(opt.n_timesteps, opt.n_sites);
    if (opt.engine != "quantum" && opt.engine != "sep")
        throw std::invalid_argument("engine must be quantum or sep");
    if (opt.engine == "sep" && opt.with_gates)
        throw std::invalid_argument("the sep engine has no gate realization to embed");
    if (!(opt.meas_prob >= 0.0 && opt.meas_prob <= 1.0))
        throw std::invalid_argument("p must lie in [0, 1]");
    if (opt.n_per_class < 1) throw std::invalid_argument("n must be >= 1");

    const InitKind init = init_kind_from_name(opt.init);
    std::vector<InitSpec> classes;
    switch (init) {
        case InitKind::dicke:
            for (int q : resolve_labels(opt.labels, opt.n_sites))
                classes.push_back(InitSpec::dicke(q));
            break;
        case InitKind::neel:
            classes = {InitSpec::neel(), InitSpec::neel_flip()};
            break;
        case InitKind::neel_flip:
            throw std::invalid_argument("use --init neel; it generates both product classes");
        case InitKind::plus:
            classes = {InitSpec::plus()};
            break;
    }
    for (const auto& c : classes) validate_init(c, opt.n_sites);

    const std::size_t total = classes.size() * static_cast<std::size_t>(opt.n_per_class);
    std::vector<MeasurementRecord> records(total);
    ParallelErrors errors;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
        errors.run([&] {
            const InitSpec& cls = classes[i / opt.n_per_class];
            const std::uint64_t seed = derive_stream_seed(opt.seed, static_cast<std::uint64_t>(i));
            if (opt.engine == "quantum") {
                records[i] = run_trajectory(opt.n_sites, tf, opt.meas_prob, cls, seed,
                                            opt.with_gates)
                                 .record;
            } else {
                Rng rng(seed);
                records[i] = sample_record_from_model(
                    opt.n_sites, tf, opt.meas_prob, cls,
                    BiasSchedule::uniform(build_layout(opt.n_sites, tf)), rng);
                records[i].record_seed = seed;
            }
        });
    }
    errors.rethrow();
    return records;
}

void cmd_generate(const GenerateOptions& opt) {
    if (opt.out.empty()) throw std::invalid_argument("--out is required");
    const auto records = generate_batch(opt);
    std::vector<std::string> lines(records.size());
    ParallelErrors errors;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(records.size()); ++i)
        errors.run([&] { lines[i] = record_to_json_line(records[i]); });
    errors.rethrow();
    write_lines(opt.out, lines);
}

ResultRow decode_record(const MeasurementRecord& rec, const std::vector<int>& labels,
                        const DecodeOptions& opts) {
    const ClassificationOutcome outcome = evaluate_record(rec, labels, opts);
    ResultRow row;
    row.n_sites = rec.n_sites;
    row.n_timesteps = rec.n_timesteps;
    row.meas_prob = rec.meas_prob;
    row.init = rec.init;
    row.mode = bias_mode_name(opts.mode);
    row.backend = backend_name(opts.backend);
    row.labels = outcome.labels;
    row.log_lik = outcome.log_lik;
    row.posterior = outcome.posterior;
    row.predicted = outcome.predicted_label;
    row.true_label = *rec.true_label;
    row.correct = outcome.predicted_label == *rec.true_label;
    row.p_corr = outcome.p_corr;
    row.entropy_bits = outcome.entropy_bits;
    return row;
}

std::vector<ResultRow> decode_batch(const std::vector<MeasurementRecord>& records,
                                    const std::string& labels_opt, const DecodeOptions& opts) {
    std::vector<ResultRow> rows(records.size());
    ParallelErrors errors;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(records.size()); ++i) {
        errors.run([&] {
            rows[i] = decode_record(records[i], resolve_labels(labels_opt, records[i].n_sites),
                                    opts);
        });
    }
    errors.rethrow();
    return rows;
}

void cmd_decode(const DecodeCmdOptions& opt) {
    if (opt.out.empty()) throw std::invalid_argument("--out is required");
    DecodeOptions dopts;
    dopts.mode = bias_mode_from_name(opt.mode);
    dopts.backend = backend_from_name(opt.backend);
    dopts.mps_threshold = opt.threshold;
    dopts.dicke_init_for_product = opt.dicke_init;
    const auto records = read_records(opt.records_path);
    if (records.empty()) throw data_error("no records in " + opt.records_path);
    const auto rows = decode_batch(records, opt.labels, dopts);
    std::vector<std::string> lines(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) lines[i] = result_to_json_line(rows[i]);
    write_lines(opt.out, lines);
}

// ---------------------------------------------------------------------------
// analyze

namespace {

struct GroupByFlags {
    bool by_sites = false, by_p = false, by_mode = false, by_init = false;
};

GroupByFlags parse_group_by(const std::string& s) {
    GroupByFlags f;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "L")
            f.by_sites = true;
        else if (tok == "p")
            f.by_p = true;
        else if (tok == "mode")
            f.by_mode = true;
        else if (tok == "init")
            f.by_init = true;
        else if (!tok.empty())
            throw std::invalid_argument("unknown group-by field: " + tok);
    }
    return f;
}

GroupKey key_of(const ResultRow& row, const GroupByFlags& f) {
    GroupKey key;
    key.n_sites = f.by_sites ? row.n_sites : -1;
    key.meas_prob = f.by_p ? row.meas_prob : -1.0;
    key.mode = f.by_mode ? row.mode : "*";
    const std::string task =
        row.labels.size() == static_cast<std::size_t>(row.n_sites) + 1 ? "all" : "pair";
    key.task = (f.by_init ? init_kind_name(row.init) : "*") + "-" + task;
    return key;
}

double sq_posterior_of(const ResultRow& row) {
    double s = 0.0;
    for (double p : row.posterior) s += p * p;
    return s;
}

std::string key_str(const GroupKey& k) {
    std::string s = "L=" + (k.n_sites >= 0 ? std::to_string(k.n_sites) : std::string("*"));
    s += " p=" + (k.meas_prob >= 0 ? csv_num(k.meas_prob) : std::string("*"));
    s += " " + k.mode + " " + k.task;
    return s;
}

}  // namespace

void cmd_analyze(const AnalyzeOptions& opt) {
    if (opt.out_dir.empty()) throw std::invalid_argument("--out-dir is required");
    if (opt.results.empty()) throw std::invalid_argument("at least one --results file");
    const GroupByFlags flags = parse_group_by(opt.group_by);

    SampleSet set;
    for (const auto& path : opt.results) {
        for (const auto& row : read_results(path)) {
            const double conf = *std::max_element(row.posterior.begin(), row.posterior.end());
            set.add(key_of(row, flags), row.p_corr, row.entropy_bits, conf,
                    sq_posterior_of(row), row.correct);
        }
    }
    if (set.groups.empty()) throw data_error("results are empty");
    const auto rows = order_parameter_table(set, opt.n_boot, opt.seed);

    make_dirs(opt.out_dir);
    std::string csv =
        "L,p,mode,task,n,accuracy,accuracy_lo,accuracy_hi,theoretical_accuracy,"
        "mean_entropy,mean_entropy_lo,mean_entropy_hi,mean_p_corr,order_param,"
        "mean_sq_posterior,binder_pcorr,binder_pcorr_lo,binder_pcorr_hi,"
        "binder_pcorr_degenerate,binder_entropy,binder_entropy_lo,binder_entropy_hi,"
        "binder_entropy_degenerate,tail_weight\n";
    for (const auto& r : rows) {
        csv += std::to_string(r.key.n_sites) + ',' + csv_num(r.key.meas_prob) + ',' +
               r.key.mode + ',' + r.key.task + ',' + std::to_string(r.n_samples) + ',';
        csv += csv_num(r.accuracy) + ',' + csv_num(r.accuracy_ci.lo) + ',' +
               csv_num(r.accuracy_ci.hi) + ',' + csv_num(r.theoretical_accuracy) + ',';
        csv += csv_num(r.mean_entropy) + ',' + csv_num(r.mean_entropy_ci.lo) + ',' +
               csv_num(r.mean_entropy_ci.hi) + ',' + csv_num(r.mean_p_corr) + ',' +
               csv_num(r.order_param) + ',' + csv_num(r.mean_sq_posterior) + ',';
        csv += csv_num(r.binder_pcorr) + ',' + csv_num(r.binder_pcorr_ci.lo) + ',' +
               csv_num(r.binder_pcorr_ci.hi) + ',' + (r.binder_pcorr_degenerate ? "1" : "0") +
               ',';
        csv += csv_num(r.binder_entropy) + ',' + csv_num(r.binder_entropy_ci.lo) + ',' +
               csv_num(r.binder_entropy_ci.hi) + ',' +
               (r.binder_entropy_degenerate ? "1" : "0") + ',';
        csv += csv_num(r.tail_weight) + '\n';
    }
    write_file(opt.out_dir + "/summary.csv", csv);

    // p_corr histograms and CDFs
    std::string hist = "L,p,mode,task,bin_lo,bin_hi,count,cdf\n";
    for (const auto& [key, g] : set.groups) {
        const auto rep = distribution_report(g.p_corr);
        for (int b = 0; b < rep.n_bins; ++b) {
            hist += std::to_string(key.n_sites) + ',' + csv_num(key.meas_prob) + ',' + key.mode +
                    ',' + key.task + ',';
            hist += csv_num(static_cast<double>(b) / rep.n_bins) + ',' +
                    csv_num(static_cast<double>(b + 1) / rep.n_bins) + ',' +
                    std::to_string(rep.counts[b]) + ',' + csv_num(rep.cdf[b]) + '\n';
        }
    }
    write_file(opt.out_dir + "/histograms.csv", hist);

    // Binder/accuracy crossings for every L pair within a (mode, task)
    struct Curves {
        std::map<int, std::vector<CurvePoint>> binder_entropy, binder_pcorr, accuracy;
    };
    std::map<std::pair<std::string, std::string>, Curves> curves;
    for (const auto& r : rows) {
        if (r.key.n_sites < 0 || r.key.meas_prob < 0) continue;  // crossing needs L and p
        auto& c = curves[{r.key.mode, r.key.task}];
        auto err_of = [](const CiInterval& ci) { return 0.5 * (ci.hi - ci.lo); };
        if (!r.binder_entropy_degenerate)
            c.binder_entropy[r.key.n_sites].push_back(
                {r.key.meas_prob, r.binder_entropy, err_of(r.binder_entropy_ci)});
        if (!r.binder_pcorr_degenerate)
            c.binder_pcorr[r.key.n_sites].push_back(
                {r.key.meas_prob, r.binder_pcorr, err_of(r.binder_pcorr_ci)});
        c.accuracy[r.key.n_sites].push_back({r.key.meas_prob, r.accuracy, err_of(r.accuracy_ci)});
    }
    std::string cross = "observable,mode,task,L_a,L_b,p_star,band_lo,band_hi\n";
    std::uint64_t cross_seed = derive_stream_seed(opt.seed, 0x10000);
    auto emit_crossings = [&](const char* name,
                              const std::map<int, std::vector<CurvePoint>>& by_size,
                              const std::pair<std::string, std::string>& mt) {
        for (auto a = by_size.begin(); a != by_size.end(); ++a) {
            for (auto b = std::next(a); b != by_size.end(); ++b) {
                if (a->second.size() != b->second.size() || a->second.size() < 2) continue;
                bool same_grid = true;
                for (std::size_t i = 0; i < a->second.size(); ++i)
                    if (a->second[i].x != b->second[i].x) same_grid = false;
                if (!same_grid) continue;
                const auto est =
                    crossing_estimate(a->second, b->second, 200, cross_seed++);
                cross += std::string(name) + ',' + mt.first + ',' + mt.second + ',' +
                         std::to_string(a->first) + ',' + std::to_string(b->first) + ',';
                if (est)
                    cross += csv_num(est->x_star) + ',' + csv_num(est->band.lo) + ',' +
                             csv_num(est->band.hi) + '\n';
                else
                    cross += "none,none,none\n";
            }
        }
    };
    for (const auto& [mt, c] : curves) {
        emit_crossings("binder_entropy", c.binder_entropy, mt);
        emit_crossings("binder_pcorr", c.binder_pcorr, mt);
        emit_crossings("accuracy", c.accuracy, mt);
    }
    write_file(opt.out_dir + "/crossings.csv", cross);

    // SVG charts, one per observable, one series per group line
    auto chart = [&](const std::string& file, const std::string& title,
                     auto value_of, auto err_of) {
        std::vector<PlotSeries> series;
        std::map<std::tuple<int, std::string, std::string>, PlotSeries> acc;
        for (const auto& r : rows) {
            if (r.key.n_sites < 0 || r.key.meas_prob < 0) continue;
            auto& s = acc[{r.key.n_sites, r.key.mode, r.key.task}];
            s.name = "L=" + std::to_string(r.key.n_sites) + " " + r.key.mode + " " + r.key.task;
            s.x.push_back(r.key.meas_prob);
            s.y.push_back(value_of(r));
            s.err.push_back(err_of(r));
        }
        for (auto& [k, s] : acc) series.push_back(std::move(s));
        if (!series.empty())
            write_svg_chart(opt.out_dir + "/" + file, title, "p", title, series);
    };
    chart("accuracy.svg", "accuracy",
          [](const SummaryRow& r) { return r.accuracy; },
          [](const SummaryRow& r) { return 0.5 * (r.accuracy_ci.hi - r.accuracy_ci.lo); });
    chart("mean_entropy.svg", "mean posterior entropy (bits)",
          [](const SummaryRow& r) { return r.mean_entropy; },
          [](const SummaryRow& r) { return 0.5 * (r.mean_entropy_ci.hi - r.mean_entropy_ci.lo); });
    chart("binder_entropy.svg", "Binder ratio of entropy",
          [](const SummaryRow& r) { return r.binder_entropy; },
          [](const SummaryRow& r) { return 0.5 * (r.binder_entropy_ci.hi - r.binder_entropy_ci.lo); });
    chart("binder_pcorr.svg", "Binder ratio of p_corr",
          [](const SummaryRow& r) { return r.binder_pcorr; },
          [](const SummaryRow& r) { return 0.5 * (r.binder_pcorr_ci.hi - r.binder_pcorr_ci.lo); });
    chart("tail_weight.svg", "P(p_corr < 0.4)",
          [](const SummaryRow& r) { return r.tail_weight; },
          [](const SummaryRow&) { return 0.0; });
    (void)key_str;
}

void cmd_percolate(const PercolateOptions& opt) {
    if (opt.out.empty()) throw std::invalid_argument("--out is required");
    const auto records = read_records(opt.records_path);
    if (records.empty()) throw data_error("no records in " + opt.records_path);

    struct Row {
        bool exists;
        int charge;
    };
    std::vector<Row> cut_rows(records.size());
    ParallelErrors errors;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(records.size()); ++i) {
        errors.run([&] {
            const auto grid = propagate_constraints(records[i]);
            const auto cut = find_charge_cut(grid, records[i].layout());
            cut_rows[i] = {cut.exists, cut.extracted_charge};
        });
    }
    errors.rethrow();

    std::string csv = "L,p,index,true_label,n_events,cut_exists,cut_charge,cut_charge_matches_label\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        const auto& row = cut_rows[i];
        const bool matches = row.exists && rec.true_label && row.charge == *rec.true_label;
        csv += std::to_string(rec.n_sites) + ',' + csv_num(rec.meas_prob) + ',' +
               std::to_string(i) + ',' +
               (rec.true_label ? std::to_string(*rec.true_label) : std::string("-")) + ',' +
               std::to_string(rec.events.size()) + ',' + (row.exists ? "1" : "0") + ',' +
               (row.exists ? std::to_string(row.charge) : std::string("-")) + ',' +
               (row.exists ? (matches ? "1" : "0") : std::string("-")) + '\n';
    }
    write_file(opt.out, csv);

    const auto summary = percolation_summary(records, opt.n_boot, opt.seed);
    std::string sum_csv = "L,p,n,fraction,ci_lo,ci_hi\n";
    for (const auto& r : summary)
        sum_csv += std::to_string(r.n_sites) + ',' + csv_num(r.meas_prob) + ',' +
                   std::to_string(r.n_records) + ',' + csv_num(r.fraction) + ',' +
                   csv_num(r.ci_lo) + ',' + csv_num(r.ci_hi) + '\n';
    const auto dot = opt.out.rfind('.');
    const std::string sum_path =
        (dot == std::string::npos ? opt.out : opt.out.substr(0, dot)) + ".summary.csv";
    write_file(sum_path, sum_csv);
}

// ---------------------------------------------------------------------------
// verify

namespace {

// Born probability of the record's outcomes at its placements for one fresh
// circuit realization (projections without renormalization).
double born_probability_once(const MeasurementRecord& rec, const InitSpec& init, Rng& rng) {
    QuantumState state = init_state(rec.n_sites, init);
    const CircuitLayout layout = rec.layout();
    std::vector<std::vector<MeasurementEvent>> rounds(layout.n_rounds());
    for (const auto& ev : rec.events) rounds[ev.half_layer].push_back(ev);
    for (int tau = 0; tau < layout.n_rounds(); ++tau) {
        for (const auto& [left, right] : layout.half_layers[tau]) {
            (void)right;
            apply_gate(state, left, sample_gate_params(rng));
        }
        for (const auto& ev : rounds[tau])
            kernels::project_bit(state.amps.data(), state.n_sites, ev.site, ev.outcome, 1.0);
    }
    return state.norm2();
}

int verify_haar_average(const VerifyOptions& opt) {
    Rng rng(opt.seed);
    const auto rep = verify_doubled_channel(opt.n, rng);
    std::printf("haar-average: n=%ld  max|dev|=%.3e  charge0=%.3e  charge1=%.3e  charge2=%.3e\n",
                rep.n_samples, rep.max_abs_dev, rep.dev_charge0, rep.dev_charge1,
                rep.dev_charge2);
    const bool ok = rep.max_abs_dev < 0.01;
    std::printf("haar-average: tolerance 0.01 -> %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 4;
}

int verify_born_equivalence(const VerifyOptions& opt) {
    const int tf = resolved_tf(opt.n_timesteps, opt.n_sites);
    const MeasurementRecord rec =
        run_trajectory(opt.n_sites, tf, opt.meas_prob, InitSpec::dicke(opt.n_sites / 2),
                       derive_stream_seed(opt.seed, 0), false)
            .record;
    std::printf("born-equivalence: L=%d tf=%d p=%g (%zu events), n=%ld realizations\n",
                opt.n_sites, tf, opt.meas_prob, rec.events.size(), opt.n);
    const BiasSchedule unbiased = BiasSchedule::uniform(rec.layout(), 0.5);
    bool all_ok = true;
    bool inconclusive = false;
    for (int q : {opt.n_sites / 2, opt.n_sites / 2 - 1}) {
        const double sep = std::exp(evolve_dense_likelihood(rec, InitSpec::dicke(q), unbiased));
        Rng rng(derive_stream_seed(opt.seed, 1 + q));
        double sum = 0.0, sum_sq = 0.0;
        for (long i = 0; i < opt.n; ++i) {
            const double v = born_probability_once(rec, InitSpec::dicke(q), rng);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / opt.n;
        const double var = std::max(0.0, sum_sq / opt.n - mean * mean);
        const double stderr_mc = std::sqrt(var / opt.n);
        const double dev = std::abs(mean - sep);
        std::printf("  Q=%d  sep=%.6e  mc=%.6e +- %.2e  |dev|/stderr=%.2f\n", q, sep, mean,
                    stderr_mc, stderr_mc > 0 ? dev / stderr_mc : 0.0);
        if (stderr_mc > 0.25 * std::max(mean, 1e-300)) inconclusive = true;
        else if (dev > 3.0 * stderr_mc) all_ok = false;
    }
    if (inconclusive) {
        std::printf("born-equivalence: WARNING inconclusive, error bars too large at n=%ld\n",
                    opt.n);
        return 0;
    }
    std::printf("born-equivalence: 3-sigma agreement -> %s\n", all_ok ? "PASS" : "FAIL");
    return all_ok ? 0 : 4;
}

int verify_enumeration(const VerifyOptions& opt) {
    const int tf = resolved_tf(opt.n_timesteps, opt.n_sites);
    const CircuitLayout layout = build_layout(opt.n_sites, tf);
    // fixed Bernoulli placements drawn once from the seed
    std::vector<std::pair<int, int>> placements;
    {
        Rng rng(derive_stream_seed(opt.seed, 0));
        for (int tau = 0; tau < layout.n_rounds(); ++tau)
            for (int site = 0; site < opt.n_sites; ++site)
                if (rng.uniform() < opt.meas_prob) placements.emplace_back(tau, site);
    }
    if (placements.size() > 20) throw std::invalid_argument("too many placements to enumerate");
    const std::size_t n_outcomes = std::size_t{1} << placements.size();
    std::printf("enumeration: L=%d tf=%d, %zu placements, %zu outcome assignments\n", opt.n_sites,
                tf, placements.size(), n_outcomes);

    const BiasSchedule unbiased = BiasSchedule::uniform(layout, 0.5);
    auto record_for = [&](std::size_t assignment) {
        MeasurementRecord rec;
        rec.n_sites = opt.n_sites;
        rec.n_timesteps = tf;
        rec.meas_prob = opt.meas_prob;
        rec.init = InitKind::dicke;
        for (std::size_t k = 0; k < placements.size(); ++k)
            rec.events.push_back(
                {placements[k].first, placements[k].second, int((assignment >> k) & 1)});
        std::sort(rec.events.begin(), rec.events.end(), [](const auto& a, const auto& b) {
            return std::pair(a.half_layer, a.site) < std::pair(b.half_layer, b.site);
        });
        return rec;
    };

    bool ok = true;
    std::vector<double> probs_half;  // distribution for Q = L/2, reused by the TV check
    for (int q = 0; q <= opt.n_sites; ++q) {
        double total = 0.0;
        std::vector<double> probs(n_outcomes);
        for (std::size_t a = 0; a < n_outcomes; ++a) {
            probs[a] = std::exp(evolve_dense_likelihood(record_for(a), InitSpec::dicke(q), unbiased));
            total += probs[a];
        }
        const double dev = std::abs(total - 1.0);
        std::printf("  Q=%d  sum P(m|Q) = %.12f  |dev|=%.2e\n", q, total, dev);
        if (dev > 1e-10) ok = false;
        if (q == opt.n_sites / 2) probs_half = std::move(probs);
    }
    std::printf("enumeration: completeness tolerance 1e-10 -> %s\n", ok ? "PASS" : "FAIL");

    // TV between the model sampler (fixed placements) and the enumerated law
    const int q_star = opt.n_sites / 2;
    std::vector<long> counts(n_outcomes, 0);
    Rng rng(derive_stream_seed(opt.seed, 1));
    for (long s = 0; s < opt.n; ++s) {
        const MeasurementRecord rec =
            sample_record_from_model(opt.n_sites, tf, opt.meas_prob, InitSpec::dicke(q_star),
                                     unbiased, rng, nullptr, &placements);
        std::size_t assignment = 0;
        for (std::size_t k = 0; k < placements.size(); ++k) {
            for (const auto& ev : rec.events)
                if (ev.half_layer == placements[k].first && ev.site == placements[k].second) {
                    assignment |= std::size_t(ev.outcome) << k;
                    break;
                }
        }
        ++counts[assignment];
    }
    double tv = 0.0;
    for (std::size_t a = 0; a < n_outcomes; ++a)
        tv += std::abs(static_cast<double>(counts[a]) / opt.n - probs_half[a]);
    tv *= 0.5;
    const bool tv_ok = tv < 0.02;
    std::printf("enumeration: sampler TV distance = %.4f over %ld samples, tolerance 0.02 -> %s\n",
                tv, opt.n, tv_ok ? "PASS" : "FAIL");
    return ok && tv_ok ? 0 : 4;
}

}  // namespace

int cmd_verify(const VerifyOptions& opt) {
    if (opt.check == "haar-average") return verify_haar_average(opt);
    if (opt.check == "born-equivalence") return verify_born_equivalence(opt);
    if (opt.check == "enumeration") return verify_enumeration(opt);
    throw std::invalid_argument("unknown verify check: " + opt.check);
}

}  // namespace u1dec
