#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "clrt/clrt.hpp"

namespace clrt {

// Enclosure of the volume of the unit n-ball, built from the recurrence
// V_n = (2 pi / n) V_{n-2}.
Interval unit_ball_volume(int n);

// Volume of the segment's continuous ellipsoid { x : ||A (x - c)|| <= D }:
// D^n * V_n / sqrt(det M), rounded outward to an upper bound.
double segment_volume(const TubeSegment& seg);

// Everything a finished (or aborted) run reports: the tube itself, the
// resolved configuration it was computed with, and the headline aggregates.
struct RunReport {
    std::string system;
    std::map<std::string, double> params;  // resolved system parameters
    ClrtConfig cfg;
    RunResult result;
    double total_volume = 0.0;  // sum of segment volumes
    double avg_volume = 0.0;    // total / segment count
    double ftle_upper = 0.0;    // ln of the tube's total stretching over its span
    double wall_seconds = 0.0;
};

RunReport make_report(std::string system_name, const ClrtConfig& cfg, RunResult result,
                      double wall_seconds);

// The incoming discrete radius of each segment: delta0 for the first, the
// previous segment's discrete endpoint radius after that.
std::vector<double> incoming_radii(const RunReport& rep);

// One row per segment, columns: idx, t_lo, t_hi, h, lambda, delta_small,
// delta_big, volume, center_mid[n], center_rad[n], M_rowmajor[n^2].  Numbers
// carry 17 significant digits so parsing them back is bit-exact.
void write_segments_csv(const RunReport& rep, std::ostream& os);

// The report as JSON: status, aggregates, the resolved configuration, and a
// per-segment summary table.
void write_report_json(const RunReport& rep, std::ostream& os);

// Polyline tracing the boundary of each stride-th segment's ellipsoid
// projected onto the coordinate plane (dims.first, dims.second); the
// projection eliminates the remaining coordinates through the Schur
// complement of M.  Columns: segment_idx, point_idx, u, v.  Throws
// BadDimensionPair for out-of-range or equal indices.
void emit_plot_data(const RunReport& rep, std::pair<int, int> dims, int stride,
                    std::ostream& os);

// Optional switches of a benchmark invocation, mirroring the CLI flags.
struct BenchmarkFlags {
    std::optional<std::pair<int, int>> plot_dims;
    int plot_stride = 20;
    bool dump_prune = false;
    std::optional<unsigned> estimator_seed;
    bool backward_bloat = false;
};

// Load a config, run the tube, and write segments.csv + report.json (plus
// plot.csv and prune.jsonl when asked) into output_dir.  Malformed configs
// throw ConfigError naming the field; run failures come back as a partial
// report instead of throwing.
RunReport run_benchmark(const std::string& config_path, const std::string& output_dir,
                        const BenchmarkFlags& flags = {});

} // namespace clrt
