#include "u1dec/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace u1dec {

namespace {

using nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

double loglik_from_json(const json& j) {
    return j.is_null() ? kNegInf : j.get<double>();
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string record_to_json_line(const MeasurementRecord& rec) {
    std::string out = "{\"version\":";
    out += std::to_string(kRecordFormatVersion);
    out += ",\"seed\":" + std::to_string(rec.record_seed);
    out += ",\"L\":" + std::to_string(rec.n_sites);
    out += ",\"tf\":" + std::to_string(rec.n_timesteps);
    out += ",\"p\":";
    append_double(out, rec.meas_prob);
    out += ",\"init\":\"" + init_kind_name(rec.init) + "\"";
    if (rec.true_label) out += ",\"label\":" + std::to_string(*rec.true_label);
    out += ",\"events\":[";
    for (std::size_t i = 0; i < rec.events.size(); ++i) {
        if (i) out += ',';
        const auto& ev = rec.events[i];
        out += '[' + std::to_string(ev.half_layer) + ',' + std::to_string(ev.site) + ',' +
               std::to_string(ev.outcome) + ']';
    }
    out += ']';
    if (rec.gates) {
        out += ",\"gates\":[";
        bool first = true;
        const auto& cr = *rec.gates;
        for (std::size_t tau = 0; tau < cr.gates.size(); ++tau) {
            for (std::size_t k = 0; k < cr.gates[tau].size(); ++k) {
                if (!first) out += ',';
                first = false;
                const auto& g = cr.gates[tau][k];
                out += '[' + std::to_string(tau) + ',' +
                       std::to_string(cr.layout.half_layers[tau][k].first);
                for (double v : {g.alpha, g.rho, g.psi, g.chi, g.xi}) {
                    out += ',';
                    append_double(out, v);
                }
                out += ']';
            }
        }
        out += ']';
    }
    out += '}';
    return out;
}

MeasurementRecord record_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw data_error(std::string("bad record line: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != kRecordFormatVersion)
            throw data_error("unsupported record format version");
        MeasurementRecord rec;
        rec.record_seed = j.at("seed").get<std::uint64_t>();
        rec.n_sites = j.at("L").get<int>();
        rec.n_timesteps = j.at("tf").get<int>();
        rec.meas_prob = j.at("p").get<double>();
        rec.init = init_kind_from_name(j.at("init").get<std::string>());
        if (j.contains("label")) rec.true_label = j.at("label").get<int>();
        for (const auto& ev : j.at("events"))
            rec.events.push_back({ev.at(0).get<int>(), ev.at(1).get<int>(), ev.at(2).get<int>()});
        if (j.contains("gates")) {
            CircuitRealization cr;
            cr.layout = build_layout(rec.n_sites, rec.n_timesteps);
            cr.master_seed = rec.record_seed;
            cr.gates.resize(cr.layout.half_layers.size());
            for (const auto& row : j.at("gates")) {
                const int tau = row.at(0).get<int>();
                const int left = row.at(1).get<int>();
                if (tau < 0 || tau >= static_cast<int>(cr.gates.size()))
                    throw data_error("gate row out of range");
                const auto& pairs = cr.layout.half_layers[tau];
                if (cr.gates[tau].size() >= pairs.size() ||
                    pairs[cr.gates[tau].size()].first != left)
                    throw data_error("gate rows out of order or misplaced");
                cr.gates[tau].push_back({row.at(2).get<double>(), row.at(3).get<double>(),
                                         row.at(4).get<double>(), row.at(5).get<double>(),
                                         row.at(6).get<double>()});
            }
            rec.gates = std::move(cr);
        }
        validate_record(rec);
        return rec;
    } catch (const json::exception& e) {
        throw data_error(std::string("bad record line: ") + e.what());
    }
}

std::string result_to_json_line(const ResultRow& row) {
    std::string out = "{\"L\":" + std::to_string(row.n_sites);
    out += ",\"tf\":" + std::to_string(row.n_timesteps);
    out += ",\"p\":";
    append_double(out, row.meas_prob);
    out += ",\"init\":\"" + init_kind_name(row.init) + "\"";
    out += ",\"mode\":\"" + row.mode + "\"";
    out += ",\"backend\":\"" + row.backend + "\"";
    out += ",\"labels\":[";
    for (std::size_t i = 0; i < row.labels.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(row.labels[i]);
    }
    out += "],\"loglik\":[";
    for (std::size_t i = 0; i < row.log_lik.size(); ++i) {
        if (i) out += ',';
        if (row.log_lik[i] == kNegInf)
            out += "null";
        else
            append_double(out, row.log_lik[i]);
    }
    out += "],\"posterior\":[";
    for (std::size_t i = 0; i < row.posterior.size(); ++i) {
        if (i) out += ',';
        append_double(out, row.posterior[i]);
    }
    out += "],\"predicted\":" + std::to_string(row.predicted);
    out += ",\"true\":" + std::to_string(row.true_label);
    out += std::string(",\"correct\":") + (row.correct ? "true" : "false");
    out += ",\"p_corr\":";
    append_double(out, row.p_corr);
    out += ",\"entropy\":";
    append_double(out, row.entropy_bits);
    out += '}';
    return out;
}

ResultRow result_from_json_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        ResultRow row;
        row.n_sites = j.at("L").get<int>();
        row.n_timesteps = j.at("tf").get<int>();
        row.meas_prob = j.at("p").get<double>();
        row.init = init_kind_from_name(j.at("init").get<std::string>());
        row.mode = j.at("mode").get<std::string>();
        row.backend = j.at("backend").get<std::string>();
        for (const auto& v : j.at("labels")) row.labels.push_back(v.get<int>());
        for (const auto& v : j.at("loglik")) row.log_lik.push_back(loglik_from_json(v));
        for (const auto& v : j.at("posterior")) row.posterior.push_back(v.get<double>());
        row.predicted = j.at("predicted").get<int>();
        row.true_label = j.at("true").get<int>();
        row.correct = j.at("correct").get<bool>();
        row.p_corr = j.at("p_corr").get<double>();
        row.entropy_bits = j.at("entropy").get<double>();
        return row;
    } catch (const json::exception& e) {
        throw data_error(std::string("bad result line: ") + e.what());
    }
}

std::vector<MeasurementRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::vector<MeasurementRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json_line(line));
    }
    return records;
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::vector<ResultRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(result_from_json_line(line));
    }
    return rows;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    for (const auto& line : lines) {
        out << line << '\n';
        if (!out) throw io_error("write failed on " + path);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << content;
    if (!out) throw io_error("write failed on " + path);
}

bool file_exists(const std::string& path) {
    return std::filesystem::exists(path);
}

void make_dirs(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw io_error("cannot create directory " + path + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact and allocation-free

namespace {

constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) {
    return (x >> n) | (x << (32 - n));
}

void sha256_block(std::uint32_t h[8], const unsigned char* p) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
        w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
               (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
        const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                  hh = h[7];
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
        const std::uint32_t ch = (e & f) ^ (~e & g);
        const std::uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
        const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
        const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        const std::uint32_t t2 = s0 + maj;
        hh = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    std::size_t i = 0;
    for (; i + 64 <= n; i += 64) sha256_block(h, data + i);
    unsigned char tail[128] = {0};
    const std::size_t rem = n - i;
    std::memcpy(tail, data + i, rem);
    tail[rem] = 0x80;
    const std::size_t tail_len = rem + 9 <= 64 ? 64 : 128;
    const std::uint64_t bit_len = std::uint64_t(n) * 8;
    for (int b = 0; b < 8; ++b)
        tail[tail_len - 1 - b] = static_cast<unsigned char>(bit_len >> (8 * b));
    sha256_block(h, tail);
    if (tail_len == 128) sha256_block(h, tail + 64);
    char hex[65];
    for (int k = 0; k < 8; ++k) std::snprintf(hex + 8 * k, 9, "%08" PRIx32, h[k]);
    return std::string(hex, 64);
}

std::string sha256_file(const std::string& path) {
    return sha256_hex(read_file(path));
}

// ---------------------------------------------------------------------------
// SVG line charts

namespace {

constexpr const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
    const double width = 640, height = 420;
    const double ml = 70, mr = 160, mt = 40, mb = 50;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double e = i < s.err.size() ? s.err[i] : 0.0;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i] - e);
            y_max = std::max(y_max, s.y[i] + e);
        }
    }
    if (x_min > x_max) {
        x_min = 0;
        x_max = 1;
        y_min = 0;
        y_max = 1;
    }
    if (x_min == x_max) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_min == y_max) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(int(width)) +
           "\" height=\"" + std::to_string(int(height)) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_double(width / 2) + "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";
    // axes
    svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(height - mb) +
           "\" x2=\"" + format_double(width - mr) + "\" y2=\"" + format_double(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) + "\" x2=\"" +
           format_double(ml) + "\" y2=\"" + format_double(height - mb) +
           "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 5.0;
        const double fy = y_min + (y_max - y_min) * t / 5.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", fx);
        svg += "<text x=\"" + format_double(px(fx)) + "\" y=\"" + format_double(height - mb + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + buf +
               "</text>\n";
        std::snprintf(buf, sizeof buf, "%.3g", fy);
        svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" + format_double(py(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + buf +
               "</text>\n";
    }
    svg += "<text x=\"" + format_double((ml + width - mr) / 2) + "\" y=\"" +
           format_double(height - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + x_label +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + format_double((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 16 " +
           format_double((mt + height - mb) / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kSeriesColors[si % (sizeof kSeriesColors / sizeof *kSeriesColors)];
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            points += format_double(px(s.x[i])) + "," + format_double(py(s.y[i])) + " ";
            if (i < s.err.size() && s.err[i] > 0.0) {
                svg += "<line x1=\"" + format_double(px(s.x[i])) + "\" y1=\"" +
                       format_double(py(s.y[i] - s.err[i])) + "\" x2=\"" +
                       format_double(px(s.x[i])) + "\" y2=\"" +
                       format_double(py(s.y[i] + s.err[i])) + "\" stroke=\"" + color +
                       "\" stroke-width=\"1\"/>\n";
            }
            svg += "<circle cx=\"" + format_double(px(s.x[i])) + "\" cy=\"" +
                   format_double(py(s.y[i])) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = mt + 16.0 * si;
        svg += "<line x1=\"" + format_double(width - mr + 10) + "\" y1=\"" + format_double(ly) +
               "\" x2=\"" + format_double(width - mr + 30) + "\" y2=\"" + format_double(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + format_double(width - mr + 36) + "\" y=\"" + format_double(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
    }
    svg += "</svg>\n";
    write_file(path, svg);
}

}  // namespace u1dec
