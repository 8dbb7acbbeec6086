// SPDX-License-Identifier: Apache-2.0
//
// Implicit (backward Euler) time stepping of the discrete ribbon with a
// Newton-Raphson corrector, adaptive step-size control, and the regularized
// banded linear solves. Quasi-static processes are driven by prescribing
// clamp DOF values as functions of time; the scheme's numerical dissipation
// settles the transients between load increments.

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ribsim/assembly.hpp"

namespace ribsim {

struct SolverSettings {
    double h0 = 1e-3;     ///< initial step size (s)
    double h_min = 1e-6;  ///< smallest admitted step (s)
    double h_max = 1e-2;  ///< largest admitted step (s)
    /// Force-residual convergence: ||r_free||_2 / h^2 < force_tol (N).
    double force_tol = 1e-5;
    /// Increment convergence: ||dq_free||_inf / h < velocity_tol (m/s).
    double velocity_tol = 1e-8;
    /// Step growth needs the last increment below this (m) ...
    double stable_increment = 1e-6;
    /// ... and convergence in fewer than this many Newton iterations.
    int stable_iters = 5;
    int max_newton_iters = 50;
    /// Total attempts for one step before declaring the floor exceeded.
    int max_attempts = 60;
    /// Extra failed attempts tolerated once the step floor is reached.
    int floor_attempts = 2;
    double growth = 1.5;
    RobustSolveSettings linear;
};

/// Prescribed coordinate values of the fixed DOFs at time t.
using PrescribedFn = std::function<VecX(double)>;
/// Dead external load (size = number of DOFs) at time t.
using ExternalForceFn = std::function<VecX(double)>;

struct StepDiagnostics {
    double t = 0.0;       ///< time after the step
    double h = 0.0;       ///< accepted step size
    int newton_iters = 0;
    int attempts = 1;     ///< 1 when no halving was needed
    double residual = 0.0;   ///< ||r_free||_2 / h^2 at exit (N)
    double lambda = 0.0;     ///< last Tikhonov shift used
    double last_increment = 0.0;  ///< ||dq_free||_inf of the last solve (m)
    bool least_squares = false;
};

struct RunStats {
    long long steps = 0;
    long long newton_iters = 0;
    long long failed_attempts = 0;
};

/// Diagonal lumped mass in the interleaved layout: translational mass from
/// the tributary length of each node, rotary inertia of each edge angle from
/// the polar second moment of the section.
VecX lumped_mass(const RestConfig& rest, const Material& material,
                 const Section& section);

class Simulator {
  public:
    Simulator(RodState state, RestConfig rest, FrameSet frames,
              std::shared_ptr<const EnergyModel> model,
              const Material& material, const Section& section,
              const SolverSettings& settings = {});

    /// Declares which DOFs are prescribed and the schedule of their values.
    void set_boundary(std::vector<int> fixed_dofs, PrescribedFn values);
    void set_external_force(ExternalForceFn f);
    /// Swap the constitutive model (the state and frames are kept).
    void set_model(std::shared_ptr<const EnergyModel> model);
    /// Swap the cross-section (rebuilds the lumped mass).
    void set_section(const Section& section);

    /// One adaptive implicit step; throws StepFloorExceededError when the
    /// smallest step cannot converge.
    StepDiagnostics step() { return step_capped(settings_.h_max); }
    /// One step, shortened so it cannot pass `t_end`.
    StepDiagnostics step_to(double t_end) {
        return step_capped(t_end - time_);
    }
    /// March to `t_end` (the last step is shortened to land on it).
    void advance_to(double t_end);

    double time() const { return time_; }
    double step_size() const { return h_nominal_; }
    const RodState& state() const { return state_; }
    const FrameSet& frames() const { return frames_; }
    const RestConfig& rest() const { return rest_; }
    const Material& material() const { return material_; }
    const Section& section() const { return section_; }
    const EnergyModel& model() const { return *model_; }
    const SolverSettings& settings() const { return settings_; }
    SolverSettings& settings() { return settings_; }
    const RunStats& stats() const { return stats_; }

    /// Elastic force and energy of the last accepted configuration.
    const VecX& internal_force() const { return last_force_; }
    double elastic_energy() const { return last_energy_; }
    const std::vector<int>& fixed_dofs() const { return fixed_; }

  private:
    StepDiagnostics step_capped(double max_h);
    bool attempt_step(double h, StepDiagnostics& diag);
    void refresh_accepted();

    RodState state_;
    RestConfig rest_;
    FrameSet frames_;
    std::shared_ptr<const EnergyModel> model_;
    Material material_;
    Section section_;
    SolverSettings settings_;
    VecX mass_;
    std::vector<int> fixed_;
    std::vector<char> is_fixed_;
    PrescribedFn prescribed_;
    ExternalForceFn external_;
    double time_ = 0.0;
    double h_nominal_;
    RunStats stats_;
    VecX last_force_;
    double last_energy_ = 0.0;
};

}  // namespace ribsim
