// SPDX-License-Identifier: Apache-2.0

#include "ribsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ribsim {

VecX lumped_mass(const RestConfig& rest, const Material& material,
                 const Section& section) {
    const int m = rest.num_nodes();
    const double rho_a = material.density * section.area();
    const double rho_i = material.density * (section.I1() + section.I2());
    VecX mass = VecX::Zero(num_dof(m));
    for (int i = 0; i < m; ++i) {
        double tributary = 0.0;
        if (i > 0) tributary += 0.5 * rest.edge_len[i - 1];
        if (i < m - 1) tributary += 0.5 * rest.edge_len[i];
        const double mi = rho_a * tributary;
        for (int a = 0; a < 3; ++a) mass[node_dof(i) + a] = mi;
    }
    for (int j = 0; j < m - 1; ++j)
        mass[theta_dof(j)] = rho_i * rest.edge_len[j];
    return mass;
}

Simulator::Simulator(RodState state, RestConfig rest, FrameSet frames,
                     std::shared_ptr<const EnergyModel> model,
                     const Material& material, const Section& section,
                     const SolverSettings& settings)
    : state_(std::move(state)),
      rest_(std::move(rest)),
      frames_(std::move(frames)),
      model_(std::move(model)),
      material_(material),
      section_(section),
      settings_(settings),
      h_nominal_(settings.h0) {
    if (!model_) throw SimError("simulator requires an energy model");
    mass_ = lumped_mass(rest_, material_, section_);
    is_fixed_.assign(static_cast<size_t>(state_.dof()), 0);
    refresh_accepted();
}

void Simulator::set_boundary(std::vector<int> fixed_dofs, PrescribedFn values) {
    std::sort(fixed_dofs.begin(), fixed_dofs.end());
    is_fixed_.assign(static_cast<size_t>(state_.dof()), 0);
    for (int d : fixed_dofs) {
        if (d < 0 || d >= state_.dof())
            throw SimError("fixed DOF index out of range");
        is_fixed_[static_cast<size_t>(d)] = 1;
    }
    fixed_ = std::move(fixed_dofs);
    prescribed_ = std::move(values);
}

void Simulator::set_external_force(ExternalForceFn f) {
    external_ = std::move(f);
}

void Simulator::set_model(std::shared_ptr<const EnergyModel> model) {
    if (!model) throw SimError("simulator requires an energy model");
    model_ = std::move(model);
    refresh_accepted();
}

void Simulator::set_section(const Section& section) {
    section_ = section;
    mass_ = lumped_mass(rest_, material_, section_);
}

void Simulator::refresh_accepted() {
    const AssemblyResult res = assemble(state_, rest_, frames_, *model_);
    last_force_ = res.force;
    last_energy_ = res.energy;
}

void Simulator::advance_to(double t_end) {
    const double tiny = 1e-12 * std::max(1.0, std::abs(t_end));
    while (time_ < t_end - tiny) step_capped(t_end - time_);
}

StepDiagnostics Simulator::step_capped(double max_h) {
    double h = std::min(h_nominal_, max_h);
    h = std::max(h, settings_.h_min);
    const bool capped = h < h_nominal_;

    StepDiagnostics diag;
    int attempts = 0, floor_failures = 0;
    while (true) {
        ++attempts;
        diag = StepDiagnostics{};
        diag.attempts = attempts;
        bool ok = false;
        try {
            ok = attempt_step(h, diag);
        } catch (const SimError&) {
            ok = false;
        }
        if (ok) break;

        ++stats_.failed_attempts;
        if (attempts >= settings_.max_attempts)
            throw StepFloorExceededError(
                "step at t = " + std::to_string(time_) +
                " failed after " + std::to_string(attempts) + " attempts");
        if (h <= settings_.h_min * (1.0 + 1e-12)) {
            if (++floor_failures > settings_.floor_attempts)
                throw StepFloorExceededError(
                    "step at t = " + std::to_string(time_) +
                    " does not converge at the smallest step size " +
                    std::to_string(settings_.h_min));
        }
        h = std::max(0.5 * h, settings_.h_min);
    }

    // Step-size control: a halved step resets the nominal to what finally
    // worked; an easy small-increment solve grows it. A step merely capped
    // to land on a target time leaves the nominal alone.
    const bool halved = attempts > 1;
    const bool stable = diag.newton_iters < settings_.stable_iters &&
                        diag.last_increment < settings_.stable_increment;
    if (halved)
        h_nominal_ = h;
    else if (stable)
        h_nominal_ = std::min(settings_.growth * std::max(h, h_nominal_),
                              settings_.h_max);
    else if (!capped)
        h_nominal_ = h;

    ++stats_.steps;
    stats_.newton_iters += diag.newton_iters;
    return diag;
}

bool Simulator::attempt_step(double h, StepDiagnostics& diag) {
    const VecX q0 = state_.q;
    const VecX v0 = state_.qdot;
    const double t_new = time_ + h;
    const int n = state_.dof();

    VecX pres;
    if (prescribed_) {
        pres = prescribed_(t_new);
        if (pres.size() != static_cast<Eigen::Index>(fixed_.size()))
            throw SimError("prescribed-value schedule size mismatch");
    }
    VecX fext = VecX::Zero(n);
    if (external_) {
        fext = external_(t_new);
        if (fext.size() != n) throw SimError("external force size mismatch");
    }

    RodState trial = state_;
    FrameSet trial_frames = frames_;
    BoundaryConditions bc;
    bc.fixed = fixed_;
    bc.prescribed = pres;
    // Seed the prescribed DOFs at their scheduled values; otherwise a state
    // in free-DOF equilibrium would pass the residual test with the clamps
    // still lagging their schedule.
    if (prescribed_)
        for (size_t a = 0; a < fixed_.size(); ++a) trial.q[fixed_[a]] = pres[a];

    bool converged = false;
    double last_increment = 0.0;
    int iters = 0;
    SolveReport rep;
    const double h2 = h * h;

    for (int it = 0; it < settings_.max_newton_iters; ++it) {
        trial_frames = update_frames(frames_, trial);
        AssemblyResult res = assemble(trial, rest_, trial_frames, *model_);
        if (it == 0) bc.penalty = penalty_from_stiffness(res.stiffness);

        // Pre-penalty tangent gates the conditioning decisions.
        BandedSystem gate = res.stiffness;
        gate.storage() *= -h2;
        for (int j = 0; j < n; ++j) gate.add(j, j, mass_[j]);

        VecX force = res.force + fext;
        apply_bc(res.stiffness, force, trial, bc);
        BandedSystem J = res.stiffness;
        J.storage() *= -h2;
        for (int j = 0; j < n; ++j) J.add(j, j, mass_[j]);

        VecX r = mass_.cwiseProduct(trial.q - q0) -
                 h * mass_.cwiseProduct(v0) - h2 * force;

        double rfree2 = 0.0;
        for (int j = 0; j < n; ++j)
            if (!is_fixed_[static_cast<size_t>(j)]) rfree2 += r[j] * r[j];
        diag.residual = std::sqrt(rfree2) / h2;
        if (diag.residual < settings_.force_tol) {
            converged = true;
            break;
        }

        const VecX dq = robust_solve(J, r, settings_.linear, &rep, &gate);
        trial.q -= dq;
        ++iters;

        double dq_inf = 0.0;
        for (int j = 0; j < n; ++j)
            if (!is_fixed_[static_cast<size_t>(j)])
                dq_inf = std::max(dq_inf, std::abs(dq[j]));
        last_increment = dq_inf;
        if (dq_inf / h < settings_.velocity_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) return false;

    state_.q = trial.q;
    state_.qdot = (trial.q - q0) / h;
    frames_ = update_frames(frames_, state_);
    time_ = t_new;
    refresh_accepted();

    diag.t = time_;
    diag.h = h;
    diag.newton_iters = iters;
    diag.lambda = rep.lambda;
    diag.least_squares = rep.least_squares;
    diag.last_increment = last_increment;
    return true;
}

}  // namespace ribsim
