// SPDX-License-Identifier: Apache-2.0
//
// Benchmark scenarios: a clamped-clamped ribbon is axially compressed into a
// buckled arch, then driven through shear and/or twist sweeps of the moving
// clamp, or carried across width ratios by a quasi-static homotopy. The
// recorded traces expose the instability transitions as features of the
// normalized shear-force curve.

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ribsim/integrator.hpp"

namespace ribsim {

enum class SweepKind { none, shear, twist, shear_twist, homotopy };

struct BenchmarkConfig {
    ModelKind model = ModelKind::sano;
    double length = 0.1;          ///< L (m)
    double width_ratio = 1.0 / 12.0;  ///< W / L
    double slenderness = 100.0;   ///< L / b
    int mesh = 45;                ///< number of centerline nodes M
    Material material{};
    ModelOptions model_options{};
    SolverSettings solver{};
    unsigned seed = 1;

    double compression_ratio = 0.25;  ///< end shortening / L
    double compression_time = 2.0;    ///< s
    double settle_time = 0.5;         ///< s of hold after each load stage
    /// Midspan out-of-plane nudge during compression, in units of Y b^3 / L.
    double perturbation_scale = 1e-4;

    double shear_rate = 0.1;    ///< clamp speed in L per second
    double shear_max = 0.495;   ///< terminal normalized shear offset
    int shear_direction = -1;   ///< sign of the clamp motion along y
    double twist_max = 6.283185307179586;  ///< far-clamp rotation (rad)

    double homotopy_start_ratio = 1.0 / 12.0;
    double homotopy_target_ratio = 1.0 / 3.0;
    int homotopy_increments = 20;

    /// Reference width ratio of the pure-rod baseline: benchmark runs of the
    /// uncoupled rod model pin EI1/EI2 at this strip's ratio, so its
    /// normalized response carries no width dependence and the coupled
    /// models' width shifts are measured against a fixed yardstick. Zero
    /// keeps the physical section.
    double rod_baseline_ratio = 1.0 / 20.0;

    Section section() const {
        return Section{width_ratio * length, length / slenderness};
    }
    Section section_at(double ratio) const {
        return Section{ratio * length, length / slenderness};
    }
    double force_scale() const {  // Y b^3 (N m)
        const double b = length / slenderness;
        return material.young * b * b * b;
    }
};

struct TraceRecord {
    double control = 0.0;    ///< sweep coordinate (normalized shear or rad)
    double h_signed = 0.0;   ///< midspan out-of-plane deflection / L, signed
    double h_abs = 0.0;      ///< |midspan deflection| / L
    double f_shear = 0.0;    ///< clamp shear reaction * L / (Y b^3)
    double energy = 0.0;     ///< elastic energy (J)
    long long step_index = 0;
    // Profiling companions (not serialized into trace files).
    double step_seconds = 0.0;
    int step_iters = 0;
};

struct Trace {
    std::vector<TraceRecord> records;
    ModelKind model = ModelKind::sano;
    SweepKind kind = SweepKind::none;
    int mesh = 0;
    double width_ratio = 0.0;
    int direction = -1;
    unsigned seed = 0;
    RunStats stats;
    double wall_seconds = 0.0;
};

/// Locations of the shear-force features that mark the two instability
/// transitions: `first` is the control value of the first prominent local
/// maximum, `second` that of the subsequent prominent local minimum. Both
/// absent on featureless (monotone) traces.
struct TransitionReport {
    std::optional<double> first;
    std::optional<double> second;
};

/// Outcome of scanning a trace for an abrupt side-switch of the midpoint
/// height. A snap is a sign change of the signed height across which the
/// height jumps by at least `jump_fraction` of the sweep's starting height
/// within a +-0.005 control window; a slow drag of the midpoint through
/// zero does not qualify. `decayed` reports whether |H_m| at the end of the
/// trace has dropped at least 10% below its post-snap peak.
struct SnapReport {
    bool snapped = false;
    double control = 0.0;     ///< control value at the detected side switch
    double jump = 0.0;        ///< |H_m| jump across the switch, / length
    double post_peak = 0.0;   ///< largest |H_m| at or after the switch
    double final_abs = 0.0;   ///< |H_m| at the end of the trace
    bool decayed = false;
};

/// Straight centerline along x with width director along y (so buckling
/// selects z), clamped over the first and last edge.
RodState straight_state(const BenchmarkConfig& config);

/// Simulator over the straight rest state with both-end clamps installed
/// (holding the initial values) and solver tolerances resolved from the
/// material scale.
std::unique_ptr<Simulator> build_simulator(const BenchmarkConfig& config);

/// Axial compression to the configured end-shortening with a seeded midspan
/// nudge, then a hold; throws BucklingNotTriggeredError when the arch fails
/// to leave the plane. The developable-strip model cannot evaluate the flat
/// start, so its arch is prepared under the regularized quartic model and
/// exchanged afterwards.
void run_compression(Simulator& sim, const BenchmarkConfig& config);

/// Shear the buckled arch: translate the far clamp along +-y at the
/// configured rate while recording the trace.
Trace run_shear_sweep(Simulator& sim, const BenchmarkConfig& config);

/// Rotate the far clamp about the centerline axis to the configured angle.
Trace run_twist_sweep(Simulator& sim, const BenchmarkConfig& config);

/// Concurrent shear and twist ramps over the shear sweep duration. The twist
/// handedness is aligned with the arch side and shear direction (the two are
/// mirror images, so only the relative sign is physical); that makes the run
/// independent of which side the compression seed buckled to.
Trace run_shear_twist_sweep(Simulator& sim, const BenchmarkConfig& config);

/// Full three-stage homotopy: forward shear sweep at the start width, a
/// geometric width ramp with equilibration at every increment (throws
/// BranchLostError if the twisted branch collapses), and a reverse shear
/// sweep at the target width. The returned trace is the reverse sweep,
/// reordered so its control ascends.
Trace run_width_homotopy(const BenchmarkConfig& config);

/// Compression followed by the selected sweep.
Trace run_benchmark(const BenchmarkConfig& config, SweepKind kind);

/// Feature detector on the (control, f_shear) curve: 5-point moving-average
/// smoothing, then the first local maximum and following local minimum with
/// prominence at least 2% of the smoothed range.
TransitionReport detect_transitions(const Trace& trace);

/// Transition shift of `probe` against `baseline` in percent:
/// (1 - control_probe / control_baseline) * 100.
double transition_shift_percent(double baseline_control, double probe_control);

/// Scan the signed midpoint-height column for an abrupt side switch; see
/// SnapReport for the event definition.
SnapReport detect_snap(const Trace& trace, double jump_fraction = 0.2);

}  // namespace ribsim
