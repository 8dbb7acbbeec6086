// SPDX-License-Identifier: Apache-2.0

#include "ribsim/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "ribsim/assembly.hpp"
#include "ribsim/banded.hpp"

namespace ribsim {
namespace {

using nlohmann::json;

// --------------------------------------------------------------------------
// Units and field parsing
// --------------------------------------------------------------------------

enum class Dimension { length, pressure, density, duration, angle };

const char* dimension_name(Dimension dim) {
    switch (dim) {
        case Dimension::length: return "length";
        case Dimension::pressure: return "pressure";
        case Dimension::density: return "density";
        case Dimension::duration: return "time";
        case Dimension::angle: return "angle";
    }
    return "?";
}

struct UnitEntry {
    const char* symbol;
    double factor;  ///< multiplier to SI
};

const std::vector<UnitEntry>& unit_table(Dimension dim) {
    static const std::vector<UnitEntry> length{
        {"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}};
    static const std::vector<UnitEntry> pressure{
        {"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}};
    static const std::vector<UnitEntry> density{{"kg/m^3", 1.0},
                                                {"g/cm^3", 1e3}};
    static const std::vector<UnitEntry> duration{{"s", 1.0}, {"ms", 1e-3}};
    static const std::vector<UnitEntry> angle{
        {"rad", 1.0}, {"deg", 3.14159265358979323846 / 180.0}};
    switch (dim) {
        case Dimension::length: return length;
        case Dimension::pressure: return pressure;
        case Dimension::density: return density;
        case Dimension::duration: return duration;
        case Dimension::angle: return angle;
    }
    return length;
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

/// "<number> <unit>" in SI. Bare numbers are rejected so a config can never
/// silently mix unit systems.
double parse_dimensioned_text(const std::string& path, const std::string& text,
                              Dimension dim) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) {
        throw SchemaError(path + ": expected \"<number> <unit>\", got \"" +
                          text + "\"");
    }
    const std::string unit = trimmed(std::string(end));
    if (unit.empty()) {
        throw UnitsError(path + ": dimensioned field requires " +
                         dimension_name(dim) + " units, got \"" + text + "\"");
    }
    for (const UnitEntry& entry : unit_table(dim)) {
        if (unit == entry.symbol) return value * entry.factor;
    }
    throw UnitsError(path + ": unknown " + dimension_name(dim) + " unit \"" +
                     unit + "\"");
}

double dimensioned_field(const json& value, const std::string& path,
                         Dimension dim) {
    if (value.is_number()) {
        throw UnitsError(path + ": dimensioned field requires " +
                         dimension_name(dim) +
                         " units (write e.g. \"0.1 m\", not a bare number)");
    }
    if (!value.is_string()) {
        throw SchemaError(path + ": expected a \"<number> <unit>\" string");
    }
    return parse_dimensioned_text(path, value.get<std::string>(), dim);
}

/// Angles are dimensionless, so bare numbers (radians) are accepted too.
double angle_field(const json& value, const std::string& path) {
    if (value.is_number()) return value.get<double>();
    return dimensioned_field(value, path, Dimension::angle);
}

double number_field(const json& value, const std::string& path) {
    if (!value.is_number()) throw SchemaError(path + ": expected a number");
    return value.get<double>();
}

/// Plain numbers or fraction strings ("1/12").
double parse_ratio_text(const std::string& path, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double num = std::strtod(begin, &end);
    if (end == begin) {
        throw SchemaError(path + ": expected a number or fraction, got \"" +
                          text + "\"");
    }
    std::string rest = trimmed(std::string(end));
    if (rest.empty()) return num;
    if (rest.front() != '/') {
        throw SchemaError(path + ": expected a number or fraction, got \"" +
                          text + "\"");
    }
    rest.erase(rest.begin());
    rest = trimmed(rest);
    char* dend = nullptr;
    const double den = std::strtod(rest.c_str(), &dend);
    if (dend == rest.c_str() || trimmed(std::string(dend)).size() != 0 ||
        den == 0.0) {
        throw SchemaError(path + ": malformed fraction \"" + text + "\"");
    }
    return num / den;
}

double ratio_field(const json& value, const std::string& path) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string())
        return parse_ratio_text(path, value.get<std::string>());
    throw SchemaError(path + ": expected a number or fraction string");
}

long long integer_field(const json& value, const std::string& path) {
    if (!value.is_number_integer())
        throw SchemaError(path + ": expected an integer");
    return value.get<long long>();
}

std::string string_field(const json& value, const std::string& path) {
    if (!value.is_string()) throw SchemaError(path + ": expected a string");
    return value.get<std::string>();
}

int direction_from_string(const std::string& text, const std::string& path) {
    if (text == "pos" || text == "positive" || text == "+") return +1;
    if (text == "neg" || text == "negative" || text == "-") return -1;
    throw SchemaError(path + ": expected \"pos\" or \"neg\", got \"" + text +
                      "\"");
}

void parse_solver_block(const json& block, SolverSettings& solver) {
    if (!block.is_object()) throw SchemaError("solver: expected an object");
    for (const auto& [key, value] : block.items()) {
        const std::string path = "solver." + key;
        if (key == "h0") {
            solver.h0 = dimensioned_field(value, path, Dimension::duration);
        } else if (key == "h_min") {
            solver.h_min = dimensioned_field(value, path, Dimension::duration);
        } else if (key == "h_max") {
            solver.h_max = dimensioned_field(value, path, Dimension::duration);
        } else if (key == "max_newton_iters") {
            solver.max_newton_iters =
                static_cast<int>(integer_field(value, path));
        } else {
            throw SchemaError("unknown field: " + path);
        }
    }
}

void validate_config(const BenchmarkConfig& c) {
    if (!(c.length > 0.0)) throw SchemaError("L: must be positive");
    if (!(c.width_ratio > 0.0))
        throw SchemaError("W_over_L: must be positive");
    if (!(c.slenderness > 0.0))
        throw SchemaError("L_over_b: must be positive");
    if (c.mesh < 15) throw SchemaError("mesh: must be at least 15 nodes");
    if (!(c.material.young > 0.0)) throw SchemaError("Y: must be positive");
    if (!(c.material.poisson >= 0.0 && c.material.poisson < 0.5 + 1e-12))
        throw SchemaError("nu: must lie in [0, 0.5]");
    if (!(c.material.density > 0.0))
        throw SchemaError("rho: must be positive");
    if (!(c.compression_ratio >= 0.0 && c.compression_ratio < 1.0))
        throw SchemaError("compression_ratio: must lie in [0, 1)");
    if (!(c.shear_rate > 0.0)) throw SchemaError("shear_rate: must be positive");
    if (!(c.homotopy_increments >= 1))
        throw SchemaError("homotopy_increments: must be at least 1");
    if (!(c.rod_baseline_ratio >= 0.0))
        throw SchemaError("rod_baseline_ratio: must be non-negative");
}

void collect_warnings(const BenchmarkConfig& c,
                      std::vector<std::string>& warnings) {
    char buf[160];
    const double l_over_w = 1.0 / c.width_ratio;
    if (l_over_w < 2.0) {
        std::snprintf(buf, sizeof buf,
                      "slenderness ordering violated: L/W = %.3g < 2",
                      l_over_w);
        warnings.emplace_back(buf);
    }
    const double w_over_b = c.width_ratio * c.slenderness;
    if (w_over_b < 5.0) {
        std::snprintf(buf, sizeof buf,
                      "slenderness ordering violated: W/b = %.3g < 5",
                      w_over_b);
        warnings.emplace_back(buf);
    }
}

// --------------------------------------------------------------------------
// Trace file helpers
// --------------------------------------------------------------------------

constexpr const char* kTraceHeader =
    "control, H_m_signed_norm, H_m_abs_norm, F_shear_norm, energy_J, "
    "step_index";

std::string manifest_path(const std::string& trace_path) {
    return trace_path + ".manifest.json";
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return (n % 2 == 1) ? values[n / 2]
                        : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<double> per_iteration_samples(const Trace& trace) {
    std::vector<double> samples;
    samples.reserve(trace.records.size());
    for (const TraceRecord& r : trace.records) {
        if (r.step_iters > 0 && r.step_seconds > 0.0)
            samples.push_back(r.step_seconds / r.step_iters);
    }
    return samples;
}

}  // namespace

std::string to_string(SweepKind kind) {
    switch (kind) {
        case SweepKind::none: return "none";
        case SweepKind::shear: return "shear";
        case SweepKind::twist: return "twist";
        case SweepKind::shear_twist: return "shear_twist";
        case SweepKind::homotopy: return "homotopy";
    }
    return "none";
}

SweepKind sweep_from_string(const std::string& name) {
    if (name == "none") return SweepKind::none;
    if (name == "shear") return SweepKind::shear;
    if (name == "twist") return SweepKind::twist;
    if (name == "shear_twist") return SweepKind::shear_twist;
    if (name == "homotopy") return SweepKind::homotopy;
    throw SchemaError("unknown sweep kind \"" + name +
                      "\" (expected none|shear|twist|shear_twist|homotopy)");
}

ParsedConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("configuration is not valid JSON: ") +
                          e.what());
    }
    if (!doc.is_object())
        throw SchemaError("top level: expected a JSON object");

    ParsedConfig out;
    BenchmarkConfig& c = out.config;
    for (const auto& [key, value] : doc.items()) {
        if (key == "model") {
            c.model = model_from_string(string_field(value, key));
        } else if (key == "W_over_L" || key == "width_ratio") {
            c.width_ratio = ratio_field(value, key);
        } else if (key == "L" || key == "length") {
            c.length = dimensioned_field(value, key, Dimension::length);
        } else if (key == "Y" || key == "young_modulus") {
            c.material.young =
                dimensioned_field(value, key, Dimension::pressure);
        } else if (key == "nu" || key == "poisson") {
            c.material.poisson = number_field(value, key);
        } else if (key == "rho" || key == "density") {
            c.material.density =
                dimensioned_field(value, key, Dimension::density);
        } else if (key == "L_over_b" || key == "slenderness") {
            c.slenderness = number_field(value, key);
        } else if (key == "mesh") {
            c.mesh = static_cast<int>(integer_field(value, key));
        } else if (key == "seed") {
            c.seed = static_cast<unsigned>(integer_field(value, key));
        } else if (key == "sweep") {
            out.sweep = sweep_from_string(string_field(value, key));
        } else if (key == "direction") {
            c.shear_direction =
                direction_from_string(string_field(value, key), key);
        } else if (key == "compression_ratio") {
            c.compression_ratio = number_field(value, key);
        } else if (key == "compression_time") {
            c.compression_time =
                dimensioned_field(value, key, Dimension::duration);
        } else if (key == "settle_time") {
            c.settle_time =
                dimensioned_field(value, key, Dimension::duration);
        } else if (key == "perturbation_scale") {
            c.perturbation_scale = number_field(value, key);
        } else if (key == "shear_rate") {
            c.shear_rate = number_field(value, key);
        } else if (key == "shear_max") {
            c.shear_max = number_field(value, key);
        } else if (key == "twist_max") {
            c.twist_max = angle_field(value, key);
        } else if (key == "homotopy_start" || key == "homotopy_start_ratio") {
            c.homotopy_start_ratio = ratio_field(value, key);
        } else if (key == "homotopy_target" ||
                   key == "homotopy_target_ratio") {
            c.homotopy_target_ratio = ratio_field(value, key);
        } else if (key == "homotopy_increments") {
            c.homotopy_increments =
                static_cast<int>(integer_field(value, key));
        } else if (key == "sadowsky_epsilon") {
            c.model_options.sadowsky_epsilon = number_field(value, key);
        } else if (key == "rod_baseline_ratio") {
            c.rod_baseline_ratio = ratio_field(value, key);
        } else if (key == "solver") {
            parse_solver_block(value, c.solver);
        } else {
            throw SchemaError("unknown field: " + key);
        }
    }
    validate_config(c);
    collect_warnings(c, out.warnings);
    return out;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open configuration file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::string config_digest(const BenchmarkConfig& config, SweepKind sweep) {
    std::string canon;
    canon.reserve(512);
    char buf[64];
    const auto num = [&](const char* name, double v) {
        std::snprintf(buf, sizeof buf, "%s=%.17g;", name, v);
        canon += buf;
    };
    canon += "model=";
    canon += to_string(config.model);
    canon += ";sweep=";
    canon += to_string(sweep);
    canon += ';';
    num("L", config.length);
    num("W_over_L", config.width_ratio);
    num("L_over_b", config.slenderness);
    num("mesh", config.mesh);
    num("Y", config.material.young);
    num("nu", config.material.poisson);
    num("rho", config.material.density);
    num("seed", config.seed);
    num("compression_ratio", config.compression_ratio);
    num("compression_time", config.compression_time);
    num("settle_time", config.settle_time);
    num("perturbation_scale", config.perturbation_scale);
    num("shear_rate", config.shear_rate);
    num("shear_max", config.shear_max);
    num("direction", config.shear_direction);
    num("twist_max", config.twist_max);
    num("homotopy_start", config.homotopy_start_ratio);
    num("homotopy_target", config.homotopy_target_ratio);
    num("homotopy_increments", config.homotopy_increments);
    num("sadowsky_epsilon", config.model_options.sadowsky_epsilon);
    num("rod_baseline_ratio", config.rod_baseline_ratio);
    num("h0", config.solver.h0);
    num("h_min", config.solver.h_min);
    num("h_max", config.solver.h_max);

    // FNV-1a, 64-bit.
    unsigned long long hash = 1469598103934665603ULL;
    for (const unsigned char ch : canon) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    std::snprintf(buf, sizeof buf, "%016llx", hash);
    return buf;
}

RunManifest manifest_for(const Trace& trace, const BenchmarkConfig& config,
                         SweepKind sweep) {
    RunManifest m;
    m.config_digest = config_digest(config, sweep);
    m.model = std::string(to_string(trace.model));
    m.sweep = to_string(trace.kind);
    m.mesh = trace.mesh;
    m.width_ratio = trace.width_ratio;
    m.direction = trace.direction;
    m.seed = trace.seed;
    m.threads = thread_budget();
    m.steps = trace.stats.steps;
    m.newton_iters = trace.stats.newton_iters;
    m.failed_attempts = trace.stats.failed_attempts;
    m.wall_seconds = trace.wall_seconds;
    return m;
}

void write_trace(const Trace& trace, const RunManifest& manifest,
                 const std::string& path) {
    if (trace.records.empty())
        throw IoError("refusing to write an empty trace: " + path);

    std::string body;
    body.reserve(trace.records.size() * 100 + 80);
    body += kTraceHeader;
    body += '\n';
    char line[192];
    for (const TraceRecord& r : trace.records) {
        std::snprintf(line, sizeof line,
                      "%.12e, %.12e, %.12e, %.12e, %.12e, %lld\n", r.control,
                      r.h_signed, r.h_abs, r.f_shear, r.energy, r.step_index);
        body += line;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open trace for writing: " + path);
    out << body;
    out.flush();
    if (!out) throw IoError("trace write failed: " + path);

    json j;
    j["version"] = manifest.version;
    j["config_digest"] = manifest.config_digest;
    j["model"] = manifest.model;
    j["sweep"] = manifest.sweep;
    j["mesh"] = manifest.mesh;
    j["width_ratio"] = manifest.width_ratio;
    j["direction"] = manifest.direction;
    j["seed"] = manifest.seed;
    j["threads"] = manifest.threads;
    j["steps"] = manifest.steps;
    j["newton_iters"] = manifest.newton_iters;
    j["failed_attempts"] = manifest.failed_attempts;
    j["wall_seconds"] = manifest.wall_seconds;
    j["trace_file"] = std::filesystem::path(path).filename().string();
    std::ofstream mout(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!mout) throw IoError("cannot write manifest: " + manifest_path(path));
    mout << j.dump(2) << '\n';
    mout.flush();
    if (!mout) throw IoError("manifest write failed: " + manifest_path(path));
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("control", 0) != 0)
        throw IoError(path + ": missing trace header");

    Trace trace;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        TraceRecord r;
        const int got = std::sscanf(
            line.c_str(), "%lf , %lf , %lf , %lf , %lf , %lld", &r.control,
            &r.h_signed, &r.h_abs, &r.f_shear, &r.energy, &r.step_index);
        if (got != 6)
            throw IoError(path + ": malformed trace record \"" + line + "\"");
        trace.records.push_back(r);
    }

    std::ifstream min(manifest_path(path), std::ios::binary);
    if (min) {
        json j;
        try {
            min >> j;
        } catch (const json::exception& e) {
            throw IoError(manifest_path(path) + ": malformed manifest: " +
                          e.what());
        }
        trace.model = model_from_string(j.value("model", "sano"));
        trace.kind = sweep_from_string(j.value("sweep", "none"));
        trace.mesh = j.value("mesh", 0);
        trace.width_ratio = j.value("width_ratio", 0.0);
        trace.direction = j.value("direction", -1);
        trace.seed = j.value("seed", 0u);
        trace.stats.steps = j.value("steps", 0LL);
        trace.stats.newton_iters = j.value("newton_iters", 0LL);
        trace.stats.failed_attempts = j.value("failed_attempts", 0LL);
        trace.wall_seconds = j.value("wall_seconds", 0.0);
    }
    return trace;
}

std::vector<ReferenceEntry> load_reference(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open reference data: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError(path + ": malformed reference data: " + e.what());
    }
    const json* rows = nullptr;
    if (doc.is_array()) {
        rows = &doc;
    } else if (doc.is_object() && doc.contains("entries") &&
               doc["entries"].is_array()) {
        rows = &doc["entries"];
    } else {
        throw SchemaError(path +
                          ": expected an array or an object with \"entries\"");
    }

    std::vector<ReferenceEntry> entries;
    entries.reserve(rows->size());
    for (size_t i = 0; i < rows->size(); ++i) {
        const json& row = (*rows)[i];
        const std::string where = path + ": entries[" + std::to_string(i) + "]";
        if (!row.is_object()) throw SchemaError(where + ": expected an object");
        ReferenceEntry e;
        e.stage = string_field(row.at("stage"), where + ".stage");
        e.model = string_field(row.at("model"), where + ".model");
        e.transition =
            string_field(row.at("transition"), where + ".transition");
        e.width_ratio = ratio_field(row.at("width_ratio"),
                                    where + ".width_ratio");
        if (row.contains("shift_percent"))
            e.shift_percent =
                number_field(row["shift_percent"], where + ".shift_percent");
        if (row.contains("delta_e"))
            e.delta_e = number_field(row["delta_e"], where + ".delta_e");
        entries.push_back(std::move(e));
    }
    return entries;
}

CompareReport compare_runs(const Trace& baseline, const Trace& probe,
                           const std::vector<ReferenceEntry>& reference) {
    const TransitionReport ta = detect_transitions(baseline);
    const TransitionReport tb = detect_transitions(probe);

    CompareReport report;
    report.first.baseline = ta.first;
    report.first.probe = tb.first;
    report.second.baseline = ta.second;
    report.second.probe = tb.second;

    const std::string stage =
        probe.kind == SweepKind::homotopy ? "homotopy" : "direct";
    const std::string model{to_string(probe.model)};

    const auto resolve = [&](TransitionComparison& cmp, const char* label,
                             const char* id) {
        if (!cmp.baseline)
            report.notes.push_back(std::string("baseline: no ") + label +
                                   " transition detected");
        if (!cmp.probe)
            report.notes.push_back(std::string("probe: no ") + label +
                                   " transition detected");
        if (cmp.baseline && cmp.probe) {
            if (*cmp.baseline == 0.0) {
                report.notes.push_back(
                    std::string("baseline ") + label +
                    " transition at zero control; shift undefined");
            } else {
                cmp.shift_percent =
                    transition_shift_percent(*cmp.baseline, *cmp.probe);
            }
        }
        for (const ReferenceEntry& e : reference) {
            if (e.stage == stage && e.model == model && e.transition == id &&
                std::abs(e.width_ratio - probe.width_ratio) < 1e-6) {
                cmp.reference_shift_percent = e.shift_percent;
                cmp.reference_delta_e = e.delta_e;
                break;
            }
        }
    };
    resolve(report.first, "first (force-peak)", "u_us");
    resolve(report.second, "second (force-valley)", "us_s");
    return report;
}

std::string format_report(const CompareReport& report) {
    std::ostringstream out;
    const auto line = [&](const char* label, const TransitionComparison& c) {
        char buf[256];
        const auto opt = [](const std::optional<double>& v, const char* fmt,
                            char* scratch, size_t n) -> const char* {
            if (!v) return "n/a";
            std::snprintf(scratch, n, fmt, *v);
            return scratch;
        };
        char b1[48], b2[48], b3[48];
        std::snprintf(buf, sizeof buf,
                      "%-12s baseline %s  probe %s  shift %s", label,
                      opt(c.baseline, "%.6f", b1, sizeof b1),
                      opt(c.probe, "%.6f", b2, sizeof b2),
                      opt(c.shift_percent, "%.2f%%", b3, sizeof b3));
        out << buf;
        if (c.reference_shift_percent) {
            std::snprintf(buf, sizeof buf, "  (reference shift %.1f%%",
                          *c.reference_shift_percent);
            out << buf;
            if (c.reference_delta_e) {
                std::snprintf(buf, sizeof buf, ", delta_e %.3g",
                              *c.reference_delta_e);
                out << buf;
            }
            out << ')';
        } else if (c.reference_delta_e) {
            std::snprintf(buf, sizeof buf, "  (reference delta_e %.3g)",
                          *c.reference_delta_e);
            out << buf;
        }
        out << '\n';
    };
    line("first:", report.first);
    line("second:", report.second);
    for (const std::string& note : report.notes) out << "note: " << note << '\n';
    return out.str();
}

namespace {

BenchRow bench_row(const BenchmarkConfig& config, Trace& trace_out) {
    trace_out = run_benchmark(config, SweepKind::shear);
    BenchRow row;
    row.label = std::string(to_string(config.model));
    row.mesh = config.mesh;
    row.steps = trace_out.stats.steps;
    row.newton_iters = trace_out.stats.newton_iters;
    row.iters_per_step =
        row.steps > 0 ? static_cast<double>(row.newton_iters) / row.steps : 0.0;
    row.wall_seconds = trace_out.wall_seconds;
    row.median_seconds_per_iter = median_of(per_iteration_samples(trace_out));
    return row;
}

}  // namespace

BenchReport bench_perf(const BenchmarkConfig& config) {
    BenchmarkConfig base = config;
    BenchmarkConfig scaled = config;
    scaled.mesh = config.mesh == 45
                      ? 63
                      : static_cast<int>(std::lround(1.4 * config.mesh));
    BenchmarkConfig quad = config;
    quad.model = ModelKind::kirchhoff;

    BenchReport report;
    Trace scratch;
    report.rows.push_back(bench_row(base, scratch));
    const double base_med = report.rows.back().median_seconds_per_iter;
    report.rows.push_back(bench_row(scaled, scratch));
    const double scaled_med = report.rows.back().median_seconds_per_iter;
    double quad_med = base_med;
    if (config.model != ModelKind::kirchhoff) {
        report.rows.push_back(bench_row(quad, scratch));
        quad_med = report.rows.back().median_seconds_per_iter;
    }
    report.mesh_time_ratio = base_med > 0.0 ? scaled_med / base_med : 0.0;
    report.model_overhead_percent =
        quad_med > 0.0 ? (base_med / quad_med - 1.0) * 100.0 : 0.0;
    return report;
}

std::string format_report(const BenchReport& report) {
    std::ostringstream out;
    out << "model        mesh     steps     iters  iters/step      wall_s  "
           "s/iter(median)\n";
    char buf[192];
    for (const BenchRow& row : report.rows) {
        std::snprintf(buf, sizeof buf,
                      "%-12s %4d %9lld %9lld %11.2f %11.3f %15.3e\n",
                      row.label.c_str(), row.mesh, row.steps, row.newton_iters,
                      row.iters_per_step, row.wall_seconds,
                      row.median_seconds_per_iter);
        out << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "per-iteration time ratio across meshes: %.3f\n",
                  report.mesh_time_ratio);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "model overhead vs quadratic baseline: %.1f%%\n",
                  report.model_overhead_percent);
    out << buf;
    return out.str();
}

int thread_budget() {
    if (const char* env = std::getenv("RIBSIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// --------------------------------------------------------------------------
// CLI
// --------------------------------------------------------------------------

namespace {

std::string ratio_label(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", ratio);
    std::string label = buf;
    std::replace(label.begin(), label.end(), '.', 'p');
    return label;
}

std::string trace_path_for(const std::string& out_dir, SweepKind kind,
                           const BenchmarkConfig& config) {
    std::string name = to_string(kind);
    name += '_';
    name += to_string(config.model);
    name += "_m" + std::to_string(config.mesh);
    name += "_w" + ratio_label(config.width_ratio);
    name += ".csv";
    return (std::filesystem::path(out_dir) / name).string();
}

constexpr const char* kVerbHelp =
    "verbs:\n"
    "  run        compress to the buckled arch and record the trace\n"
    "  sweep      compression followed by the configured sweep\n"
    "  homotopy   three-stage width homotopy\n"
    "  compare    report transition shifts between two trace files\n"
    "  bench      per-iteration performance across meshes and models\n"
    "  validate   run the quick invariant suite";

void emit_trace(const Trace& trace, const BenchmarkConfig& config,
                SweepKind sweep, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string path = trace_path_for(out_dir, sweep, config);
    write_trace(trace, manifest_for(trace, config, sweep), path);
    std::cout << "wrote " << path << " (" << trace.records.size()
              << " records, " << trace.stats.steps << " steps, "
              << trace.stats.newton_iters << " iterations)\n";
    const TransitionReport tr = detect_transitions(trace);
    if (tr.first)
        std::cout << "first transition (force peak) at control "
                  << *tr.first << '\n';
    if (tr.second)
        std::cout << "second transition (force valley) at control "
                  << *tr.second << '\n';
    if (!tr.first && !tr.second)
        std::cout << "no transitions detected\n";
    if (sweep == SweepKind::shear_twist) {
        const SnapReport snap = detect_snap(trace);
        if (snap.snapped)
            std::cout << "midpoint snap at control " << snap.control
                      << " (jump " << snap.jump << ", post-snap peak "
                      << snap.post_peak << ", final " << snap.final_abs
                      << (snap.decayed ? ", decayed" : ", not decayed")
                      << ")\n";
        else
            std::cout << "no midpoint snap\n";
    }
}

bool check(std::vector<std::string>& failures, const std::string& name,
           bool ok, const std::string& detail = {}) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!ok && !detail.empty()) std::cout << " (" << detail << ')';
    std::cout << '\n';
    if (!ok) failures.push_back(name);
    return ok;
}

/// Gently arched, slightly twisted test configuration whose strains are
/// admissible for every model (nonzero easy-direction curvature, bounded
/// twist-to-curvature ratio).
RodState arched_probe_state(int nodes, double length) {
    const double radius = length / 0.6;
    MatX positions(3, nodes);
    VecX thetas = VecX::LinSpaced(nodes - 1, 0.0, 0.2);
    for (int i = 0; i < nodes; ++i) {
        const double s = length * i / (nodes - 1);
        positions.col(i) = Vec3(radius * std::sin(s / radius), 0.0,
                                radius * (1.0 - std::cos(s / radius)));
    }
    return make_state(positions, thetas);
}

int run_validation_suite() {
    std::vector<std::string> failures;
    const int nodes = 14;
    const double length = 0.1;
    const Material material{};
    const Section section{length / 12.0, length / 100.0};

    // Straight reference geometry for the arched probe state.
    MatX straight(3, nodes);
    for (int i = 0; i < nodes; ++i)
        straight.col(i) = Vec3(length * i / (nodes - 1), 0.0, 0.0);
    const RodState flat = make_state(straight, VecX::Zero(nodes - 1));
    const RestConfig rest = rest_from_state(flat);

    const RodState probe = arched_probe_state(nodes, length);
    const FrameSet frames = initial_frames(probe, Vec3(0.0, 1.0, 0.0));

    // 1. Rigid-motion invariance of the elastic energy, all models.
    try {
        std::mt19937 rng(7u);
        std::normal_distribution<double> gauss(0.0, 1.0);
        bool all_ok = true;
        double worst = 0.0;
        for (const ModelKind kind :
             {ModelKind::kirchhoff, ModelKind::sadowsky, ModelKind::sano,
              ModelKind::audoly, ModelKind::wunderlich}) {
            const auto model = make_energy_model(kind, material, section);
            const double e0 =
                assemble(probe, rest, frames, *model).energy;
            for (int trial = 0; trial < 4; ++trial) {
                Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
                axis.normalize();
                const double angle = 0.25 + 0.5 * trial;
                const Vec3 shift(gauss(rng), gauss(rng), gauss(rng));
                Mat3 rot =
                    Eigen::AngleAxisd(angle, axis).toRotationMatrix();
                RodState moved = probe;
                for (int i = 0; i < nodes; ++i)
                    moved.node(i) = rot * probe.node(i) + shift;
                FrameSet moved_frames = frames;
                moved_frames.d1 = rot * frames.d1;
                moved_frames.d2 = rot * frames.d2;
                moved_frames.tangent = rot * frames.tangent;
                const double e1 =
                    assemble(moved, rest, moved_frames, *model).energy;
                worst = std::max(worst,
                                 std::abs(e1 - e0) / std::max(1e-300, e0));
            }
        }
        all_ok = worst < 1e-10;
        char detail[64];
        std::snprintf(detail, sizeof detail, "worst relative drift %.3e",
                      worst);
        check(failures, "rigid-motion energy invariance", all_ok, detail);
    } catch (const std::exception& e) {
        check(failures, "rigid-motion energy invariance", false, e.what());
    }

    // 2. Banded assembly equals the dense reference.
    try {
        double worst = 0.0;
        for (const ModelKind kind :
             {ModelKind::kirchhoff, ModelKind::sano, ModelKind::wunderlich}) {
            const auto model = make_energy_model(kind, material, section);
            const AssemblyResult banded = assemble(probe, rest, frames, *model);
            double energy = 0.0;
            VecX force;
            MatX dense;
            assemble_dense(probe, rest, frames, *model, energy, force, dense);
            worst = std::max(worst, (banded.force - force).cwiseAbs().maxCoeff());
            worst = std::max(
                worst,
                (banded.stiffness.to_dense() - dense).cwiseAbs().maxCoeff());
        }
        char detail[64];
        std::snprintf(detail, sizeof detail, "worst entry difference %.3e",
                      worst);
        check(failures, "banded assembly matches dense reference",
              worst < 1e-10, detail);
    } catch (const std::exception& e) {
        check(failures, "banded assembly matches dense reference", false,
              e.what());
    }

    // 3. Regularized solve quality on a near-singular system.
    try {
        BandedSystem sys(2, 1);
        sys.add(0, 0, 1.0);
        sys.add(1, 1, 1e-16);
        VecX rhs(2);
        rhs << 1.0, 0.0;
        SolveReport rep;
        const VecX x = robust_solve(sys, rhs, RobustSolveSettings{}, &rep);
        VecX residual = rhs - sys.multiply(x);
        if (rep.lambda > 0.0) residual -= rep.lambda * x;
        const bool ok = residual.norm() <= 1e-8 * rhs.norm();
        char detail[64];
        std::snprintf(detail, sizeof detail, "residual %.3e, lambda %.3e",
                      residual.norm(), rep.lambda);
        check(failures, "regularized solve meets residual bound", ok, detail);
    } catch (const std::exception& e) {
        check(failures, "regularized solve meets residual bound", false,
              e.what());
    }

    // 4. Transition detector on synthetic traces.
    try {
        Trace unimodal;
        Trace monotone;
        for (int i = 0; i <= 80; ++i) {
            const double x = 0.4 * i / 80.0;
            TraceRecord r;
            r.control = x;
            r.f_shear = 1.0 - (x - 0.2) * (x - 0.2);
            unimodal.records.push_back(r);
            r.f_shear = x;
            monotone.records.push_back(r);
        }
        const TransitionReport tu = detect_transitions(unimodal);
        const TransitionReport tm = detect_transitions(monotone);
        const bool ok = tu.first && std::abs(*tu.first - 0.2) < 0.0051 &&
                        !tu.second && !tm.first && !tm.second;
        check(failures, "transition detector on synthetic traces", ok);
    } catch (const std::exception& e) {
        check(failures, "transition detector on synthetic traces", false,
              e.what());
    }

    // 5. Configuration parsing contract.
    try {
        const ParsedConfig minimal =
            parse_config_text(R"({"model": "sano", "W_over_L": "1/12"})");
        bool ok = minimal.config.model == ModelKind::sano &&
                  std::abs(minimal.config.width_ratio - 1.0 / 12.0) < 1e-15 &&
                  minimal.config.length == 0.1 &&
                  minimal.config.material.young == 1e10 &&
                  minimal.config.material.poisson == 0.5 &&
                  minimal.warnings.empty();
        bool threw_schema = false;
        try {
            parse_config_text(R"({"model": "helicoid"})");
        } catch (const SchemaError&) {
            threw_schema = true;
        }
        bool threw_units = false;
        try {
            parse_config_text(R"({"L": 0.1})");
        } catch (const UnitsError&) {
            threw_units = true;
        }
        const ParsedConfig wide =
            parse_config_text(R"({"W_over_L": 0.75})");
        ok = ok && threw_schema && threw_units && !wide.warnings.empty();
        check(failures, "configuration schema and units rules", ok);
    } catch (const std::exception& e) {
        check(failures, "configuration schema and units rules", false,
              e.what());
    }

    if (failures.empty()) {
        std::cout << "validation passed\n";
        return 0;
    }
    std::cout << failures.size() << " validation check(s) failed\n";
    return 4;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{std::string("discrete elastic ribbon benchmarks\n\n") +
                 kVerbHelp + "\n"};
    std::vector<std::string> inputs;
    std::string config_path;
    std::string model_name;
    std::string width_ratio_text;
    std::string direction_text;
    std::string out_dir = ".";
    std::string reference_path;
    int mesh = 0;
    unsigned seed = 0;

    app.add_option("inputs", inputs, "verb and input files");
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--model", model_name,
                   "energy model: kirchhoff|sadowsky|sano|audoly|wunderlich");
    app.add_option("--width-ratio", width_ratio_text,
                   "ribbon width over length (number or fraction like 1/12)");
    app.add_option("--mesh", mesh, "number of centerline nodes");
    app.add_option("--seed", seed, "buckling perturbation seed");
    app.add_option("--out", out_dir, "output directory for traces");
    app.add_option("--reference", reference_path,
                   "reference-constants JSON for compare");
    app.add_option("--direction", direction_text,
                   "shear direction: pos|neg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        throw SchemaError(e.what());
    }

    if (inputs.empty()) {
        std::cerr << app.help();
        throw SchemaError("missing verb");
    }
    const std::string verb = inputs.front();
    const std::vector<std::string> files(inputs.begin() + 1, inputs.end());

    ParsedConfig parsed;
    if (!config_path.empty()) parsed = parse_config_file(config_path);
    if (!model_name.empty())
        parsed.config.model = model_from_string(model_name);
    if (!width_ratio_text.empty())
        parsed.config.width_ratio =
            parse_ratio_text("--width-ratio", width_ratio_text);
    if (app.count("--mesh") > 0) parsed.config.mesh = mesh;
    if (app.count("--seed") > 0) parsed.config.seed = seed;
    if (!direction_text.empty())
        parsed.config.shear_direction =
            direction_from_string(direction_text, "--direction");
    if (!width_ratio_text.empty() || app.count("--mesh") > 0) {
        validate_config(parsed.config);
        parsed.warnings.clear();
        collect_warnings(parsed.config, parsed.warnings);
    }
    for (const std::string& warning : parsed.warnings)
        std::cerr << "warning: " << warning << '\n';

    if (verb == "run") {
        const Trace trace = run_benchmark(parsed.config, SweepKind::none);
        emit_trace(trace, parsed.config, SweepKind::none, out_dir);
        return 0;
    }
    if (verb == "sweep") {
        const SweepKind kind = parsed.sweep == SweepKind::none
                                   ? SweepKind::shear
                                   : parsed.sweep;
        const Trace trace = run_benchmark(parsed.config, kind);
        emit_trace(trace, parsed.config, kind, out_dir);
        return 0;
    }
    if (verb == "homotopy") {
        const Trace trace = run_width_homotopy(parsed.config);
        emit_trace(trace, parsed.config, SweepKind::homotopy, out_dir);
        return 0;
    }
    if (verb == "compare") {
        if (files.size() != 2)
            throw SchemaError(
                "compare requires two trace files: baseline and probe");
        const Trace baseline = read_trace(files[0]);
        const Trace probe = read_trace(files[1]);
        std::vector<ReferenceEntry> reference;
        if (!reference_path.empty()) reference = load_reference(reference_path);
        std::cout << format_report(compare_runs(baseline, probe, reference));
        return 0;
    }
    if (verb == "bench") {
        std::cout << format_report(bench_perf(parsed.config));
        return 0;
    }
    if (verb == "validate") {
        return run_validation_suite();
    }
    throw SchemaError("unknown verb: " + verb);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    try {
        return cli_main(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const SimError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace ribsim
