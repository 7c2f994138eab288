#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "u1dec/commands.hpp"

namespace u1dec {

namespace {

using nlohmann::json;

// TOML-subset value: integer, float, bool, "string", or a flat array of those.
struct PlanValue {
    std::vector<std::string> items;  // scalars hold one item
    bool is_array = false;
};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::map<std::string, PlanValue> parse_plan_keys(const std::string& text) {
    std::map<std::string, PlanValue> keys;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') continue;  // section headers carry no state here
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed plan line: " + line);
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        PlanValue pv;
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']')
                throw std::invalid_argument("malformed plan array: " + line);
            pv.is_array = true;
            std::stringstream items(value.substr(1, value.size() - 2));
            std::string item;
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (!item.empty()) pv.items.push_back(unquote(item));
            }
        } else {
            pv.items.push_back(unquote(value));
        }
        keys[key] = std::move(pv);
    }
    return keys;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number in plan: " + s);
    return v;
}

long to_long(const std::string& s) {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad integer in plan: " + s);
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("bad boolean in plan: " + s);
}

std::string cell_name(int n_sites, double p) {
    std::ostringstream ss;
    ss << "L" << n_sites << "_p" << p;
    return ss.str();
}

}  // namespace

SweepPlan parse_sweep_plan(const std::string& text) {
    SweepPlan plan;
    for (const auto& [key, pv] : parse_plan_keys(text)) {
        const std::string& s = pv.items.empty() ? std::string() : pv.items.front();
        if (key == "master_seed")
            plan.master_seed = static_cast<std::uint64_t>(to_long(s));
        else if (key == "out_dir")
            plan.out_dir = s;
        else if (key == "engine")
            plan.engine = s;
        else if (key == "init")
            plan.init = s;
        else if (key == "labels")
            plan.labels = s;
        else if (key == "n_per_class")
            plan.n_per_class = static_cast<int>(to_long(s));
        else if (key == "boot")
            plan.n_boot = static_cast<int>(to_long(s));
        else if (key == "backend")
            plan.backend = s;
        else if (key == "threshold")
            plan.threshold = to_double(s);
        else if (key == "modes") {
            plan.modes.clear();
            for (const auto& m : pv.items) plan.modes.push_back(m);
        } else if (key == "L") {
            plan.l_values.clear();
            for (const auto& v : pv.items) plan.l_values.push_back(static_cast<int>(to_long(v)));
        } else if (key == "p") {
            plan.p_values.clear();
            for (const auto& v : pv.items) plan.p_values.push_back(to_double(v));
        } else if (key == "tf")
            plan.n_timesteps = static_cast<int>(to_long(s));
        else if (key == "with_gates")
            plan.with_gates = to_bool(s);
        else if (key == "workers")
            plan.workers = static_cast<int>(to_long(s));
        else
            throw std::invalid_argument("unknown plan key: " + key);
    }
    if (plan.l_values.empty() || plan.p_values.empty())
        throw std::invalid_argument("plan needs nonempty L and p grids");
    if (plan.modes.empty()) throw std::invalid_argument("plan needs at least one mode");
    return plan;
}

void cmd_sweep(const std::string& plan_path) {
    const SweepPlan plan = parse_sweep_plan(read_file(plan_path));
    configure_workers(plan.workers);
    const bool needs_gates =
        std::any_of(plan.modes.begin(), plan.modes.end(),
                    [](const std::string& m) { return m != "unbiased"; });
    if (needs_gates && !plan.with_gates)
        throw std::invalid_argument("plan uses biased modes but with_gates = false");

    make_dirs(plan.out_dir + "/cells");

    json old_manifest;
    const std::string manifest_path = plan.out_dir + "/manifest.json";
    if (file_exists(manifest_path)) {
        try {
            old_manifest = json::parse(read_file(manifest_path));
        } catch (...) {
            old_manifest = json();
        }
    }
    auto cell_unchanged = [&](const json& cell) {
        if (!old_manifest.contains("cells")) return false;
        for (const auto& old_cell : old_manifest["cells"]) {
            if (old_cell.value("name", "") != cell.at("name").get<std::string>()) continue;
            for (const auto& [fname, sha] : cell.at("files").items()) {
                if (!old_cell.at("files").contains(fname)) return false;
                if (old_cell.at("files").at(fname).get<std::string>() !=
                    sha.get<std::string>())
                    return false;
            }
            return true;
        }
        return false;
    };

    json manifest;
    manifest["tool"] = "u1decode";
    manifest["record_format_version"] = kRecordFormatVersion;
    manifest["master_seed"] = plan.master_seed;
    manifest["cells"] = json::array();

    std::vector<std::string> all_results;
    std::uint64_t cell_index = 0;
    for (int n_sites : plan.l_values) {
        for (double p : plan.p_values) {
            const std::string name = cell_name(n_sites, p);
            const std::string dir = plan.out_dir + "/cells/" + name;
            make_dirs(dir);
            const std::uint64_t seed = derive_stream_seed(plan.master_seed, cell_index++);

            std::vector<std::string> outputs = {dir + "/records.jsonl"};
            for (const auto& mode : plan.modes)
                outputs.push_back(dir + "/results_" + mode + ".jsonl");
            outputs.push_back(dir + "/percolation.csv");
            outputs.push_back(dir + "/percolation.summary.csv");

            const bool have_all = std::all_of(outputs.begin(), outputs.end(), file_exists);
            json cell;
            cell["name"] = name;
            cell["L"] = n_sites;
            cell["p"] = p;
            cell["seed"] = seed;
            bool skip = false;
            if (have_all) {
                json probe;
                probe["name"] = name;
                probe["files"] = json::object();
                for (const auto& f : outputs)
                    probe["files"][f.substr(dir.size() + 1)] = sha256_file(f);
                if (cell_unchanged(probe)) {
                    cell["files"] = probe["files"];
                    skip = true;
                    std::cout << "sweep: cell " << name << " up to date, skipping\n";
                }
            }
            if (!skip) {
                std::cout << "sweep: running cell " << name << "\n";
                GenerateOptions gen;
                gen.engine = plan.engine;
                gen.n_sites = n_sites;
                gen.n_timesteps = plan.n_timesteps;
                gen.meas_prob = p;
                gen.init = plan.init;
                gen.labels = plan.labels;
                gen.n_per_class = plan.n_per_class;
                gen.seed = seed;
                gen.with_gates = plan.with_gates;
                gen.out = dir + "/records.jsonl";
                cmd_generate(gen);
                for (const auto& mode : plan.modes) {
                    DecodeCmdOptions dec;
                    dec.records_path = gen.out;
                    dec.mode = mode;
                    dec.backend = plan.backend;
                    dec.threshold = plan.threshold;
                    dec.labels = plan.labels == "all" ? "all" : "pair";
                    dec.out = dir + "/results_" + mode + ".jsonl";
                    cmd_decode(dec);
                }
                PercolateOptions perc;
                perc.records_path = gen.out;
                perc.out = dir + "/percolation.csv";
                perc.seed = derive_stream_seed(seed, 0xFEED);
                perc.n_boot = plan.n_boot;
                cmd_percolate(perc);
                cell["files"] = json::object();
                for (const auto& f : outputs)
                    cell["files"][f.substr(dir.size() + 1)] = sha256_file(f);
            }
            manifest["cells"].push_back(cell);
            for (const auto& mode : plan.modes)
                all_results.push_back(dir + "/results_" + mode + ".jsonl");
        }
    }

    AnalyzeOptions ana;
    ana.results = all_results;
    ana.group_by = "L,p,mode,init";
    ana.n_boot = plan.n_boot;
    ana.seed = derive_stream_seed(plan.master_seed, 0xA11A);
    ana.out_dir = plan.out_dir + "/summary";
    cmd_analyze(ana);

    // merged percolation summary across cells
    std::string merged = "L,p,n,fraction,ci_lo,ci_hi\n";
    for (const auto& cell : manifest["cells"]) {
        const std::string path = plan.out_dir + "/cells/" + cell.at("name").get<std::string>() +
                                 "/percolation.summary.csv";
        const std::string text = read_file(path);
        const auto first_newline = text.find('\n');
        if (first_newline != std::string::npos) merged += text.substr(first_newline + 1);
    }
    write_file(plan.out_dir + "/summary/percolation.csv", merged);

    manifest["summary"] = json::object();
    for (const char* f : {"summary.csv", "crossings.csv", "histograms.csv", "percolation.csv"})
        manifest["summary"][f] = sha256_file(plan.out_dir + "/summary/" + std::string(f));
    write_file(manifest_path, manifest.dump(2) + "\n");
    std::cout << "sweep: wrote " << manifest_path << "\n";
}

}  // namespace u1dec
