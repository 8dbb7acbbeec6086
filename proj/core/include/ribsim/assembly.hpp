// SPDX-License-Identifier: Apache-2.0
//
// Element loop: chains the strain-space energy derivatives through the
// strain Jacobians and Hessians of every element into the global elastic
// energy, force vector and banded tangent stiffness, plus the penalty
// treatment of prescribed degrees of freedom.

#pragma once

#include <vector>

#include "ribsim/banded.hpp"
#include "ribsim/energy_models.hpp"
#include "ribsim/kinematics.hpp"
#include "ribsim/strain_derivatives.hpp"

namespace ribsim {

/// Prescribed degrees of freedom, enforced by a diagonal penalty spring of
/// stiffness `penalty` pulling each listed DOF to its prescribed value.
struct BoundaryConditions {
    std::vector<int> fixed;  ///< DOF indices, strictly increasing
    VecX prescribed;         ///< target coordinate values, same order
    double penalty = 0.0;    ///< spring stiffness p

    bool is_fixed(int dof) const;
};

struct AssemblyResult {
    double energy = 0.0;
    VecX force;              ///< F = -dE/dq
    BandedSystem stiffness;  ///< K = dF/dq = -d2E/dq2 (own-element blocks)
};

/// Elastic energy, force and banded tangent of the whole rod: every interior
/// element evaluated through the constitutive model (with neighbor-strain
/// gradient coupling when the model is non-local), plus the stretch of the
/// final edge, which no element owns. `frames` must sit on the tangents of
/// `state`.
AssemblyResult assemble(const RodState& state, const RestConfig& rest,
                        const FrameSet& frames, const EnergyModel& model);

/// Reference path: identical content assembled into a dense matrix with no
/// bandwidth mask. Used to cross-check the banded scatter.
void assemble_dense(const RodState& state, const RestConfig& rest,
                    const FrameSet& frames, const EnergyModel& model,
                    double& energy, VecX& force, MatX& stiffness);

/// Adds the penalty spring of every fixed DOF: the force gains
/// p * (prescribed - current) and the stiffness diagonal gains -p.
void apply_bc(BandedSystem& stiffness, VecX& force, const RodState& state,
              const BoundaryConditions& bc);

/// Penalty stiffness from the assembled tangent: 1e10 times the largest
/// absolute diagonal entry.
double penalty_from_stiffness(const BandedSystem& stiffness);

/// Per-element strain states (size M; entries 1..M-2 meaningful), the
/// constitutive models' view of the kinematics.
std::vector<ElementStrainState> gather_strain_states(const RodState& state,
                                                     const RestConfig& rest,
                                                     const FrameSet& frames);

}  // namespace ribsim
