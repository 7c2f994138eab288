#pragma once

// Persistence: JSONL record/result formats, CSV tables, dependency-free SVG
// line charts, SHA-256 for the sweep manifest.
//
// Record lines are written by hand with %.17g floats and a fixed field order
// so identical inputs give byte-identical files; parsing goes through
// nlohmann::json, which accepts the same lines.

#include <string>
#include <vector>

#include "u1dec/core.hpp"
#include "u1dec/decoder.hpp"

namespace u1dec {

inline constexpr int kRecordFormatVersion = 1;

std::string record_to_json_line(const MeasurementRecord& rec);
MeasurementRecord record_from_json_line(const std::string& line);

// Flat result row for analysis and CSV export.
struct ResultRow {
    int n_sites = 0;
    int n_timesteps = 0;
    double meas_prob = 0.0;
    InitKind init = InitKind::dicke;
    std::string mode;
    std::string backend;
    std::vector<int> labels;
    std::vector<double> log_lik;
    std::vector<double> posterior;
    int predicted = -1;
    int true_label = -1;
    bool correct = false;
    double p_corr = 0.0;
    double entropy_bits = 0.0;
};

std::string result_to_json_line(const ResultRow& row);
ResultRow result_from_json_line(const std::string& line);

std::vector<MeasurementRecord> read_records(const std::string& path);
std::vector<ResultRow> read_results(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);
void make_dirs(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

std::string format_double(double v);  // %.17g

// Minimal SVG line chart: one polyline + error bars per series.
struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  // may be empty
};

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

}  // namespace u1dec
