// SPDX-License-Identifier: Apache-2.0
//
// Configuration documents, trace serialization, run comparison against the
// shipped reference constants, performance reporting, and the command-line
// entry point.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ribsim/scenarios.hpp"

namespace ribsim {

inline constexpr const char* kVersionTag = "ribsim-0.1.0";

std::string to_string(SweepKind kind);
SweepKind sweep_from_string(const std::string& name);

/// A benchmark configuration resolved from a JSON document: unknown keys and
/// malformed values raise SchemaError with the field path; dimensioned
/// fields given as bare numbers raise UnitsError. Physically suspicious but
/// legal setups produce warnings.
struct ParsedConfig {
    BenchmarkConfig config;
    SweepKind sweep = SweepKind::shear;
    std::vector<std::string> warnings;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

/// Deterministic digest of the resolved configuration (FNV-1a over the
/// canonical field serialization).
std::string config_digest(const BenchmarkConfig& config, SweepKind sweep);

struct RunManifest {
    std::string version = kVersionTag;
    std::string config_digest;
    std::string model;
    std::string sweep;
    int mesh = 0;
    double width_ratio = 0.0;
    int direction = -1;
    unsigned seed = 0;
    int threads = 1;
    long long steps = 0;
    long long newton_iters = 0;
    long long failed_attempts = 0;
    double wall_seconds = 0.0;
    std::string trace_file;
};

RunManifest manifest_for(const Trace& trace, const BenchmarkConfig& config,
                         SweepKind sweep);

/// Writes the trace as delimited text (fixed header, fixed number format,
/// byte-stable for identical inputs) and a JSON manifest sidecar at
/// `path.manifest.json`. Throws IoError on an empty trace (no file is
/// created) or unwritable paths.
void write_trace(const Trace& trace, const RunManifest& manifest,
                 const std::string& path);

/// Reads a trace file written by write_trace; metadata is recovered from the
/// manifest sidecar when present.
Trace read_trace(const std::string& path);

/// One transcribed reference entry (critical-shear shift against the 1/20
/// baseline and absolute error against the FEA reference).
struct ReferenceEntry {
    std::string stage;       ///< "direct" or "homotopy"
    std::string model;       ///< model id or "fea"
    std::string transition;  ///< "u_us" or "us_s"
    double width_ratio = 0.0;
    std::optional<double> shift_percent;
    std::optional<double> delta_e;
};

std::vector<ReferenceEntry> load_reference(const std::string& path);

struct TransitionComparison {
    std::optional<double> baseline;  ///< control value in trace A
    std::optional<double> probe;     ///< control value in trace B
    std::optional<double> shift_percent;
    std::optional<double> reference_shift_percent;  ///< shipped FEA shift
    std::optional<double> reference_delta_e;        ///< shipped model error
};

struct CompareReport {
    TransitionComparison first;   ///< U -> US feature
    TransitionComparison second;  ///< US -> S feature
    std::vector<std::string> notes;
};

CompareReport compare_runs(const Trace& baseline, const Trace& probe,
                           const std::vector<ReferenceEntry>& reference = {});
std::string format_report(const CompareReport& report);

struct BenchRow {
    std::string label;
    int mesh = 0;
    long long steps = 0;
    long long newton_iters = 0;
    double iters_per_step = 0.0;
    double wall_seconds = 0.0;
    double median_seconds_per_iter = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    /// Median per-iteration time ratio of the scaled mesh over the base mesh.
    double mesh_time_ratio = 0.0;
    /// Per-iteration overhead of the configured model over the quadratic
    /// baseline model at the base mesh, in percent.
    double model_overhead_percent = 0.0;
};

/// Shear-sweep performance at the configured mesh, at the scaled mesh (63
/// for the default 45), and for the quadratic baseline model.
BenchReport bench_perf(const BenchmarkConfig& config);
std::string format_report(const BenchReport& report);

/// Maximum worker threads from the RIBSIM_THREADS environment variable
/// (>= 1; hardware concurrency when unset or invalid).
int thread_budget();

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 success, 2 configuration error, 3 solver failure, 4 validation failure.
int run_cli(int argc, const char* const* argv);

}  // namespace ribsim
