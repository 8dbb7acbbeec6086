// SPDX-License-Identifier: Apache-2.0

#include "ribsim/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace ribsim {

bool BoundaryConditions::is_fixed(int dof) const {
    return std::binary_search(fixed.begin(), fixed.end(), dof);
}

namespace {

/// Global DOF indices of element k's stencil, in the local order
/// [x_{k-1}, x_k, x_{k+1}, theta^{k-1}, theta^k].
std::array<int, kLocalDim> element_dofs(int k) {
    std::array<int, kLocalDim> idx;
    for (int a = 0; a < 3; ++a) {
        idx[a] = node_dof(k - 1) + a;
        idx[3 + a] = node_dof(k) + a;
        idx[6 + a] = node_dof(k + 1) + a;
    }
    idx[9] = theta_dof(k - 1);
    idx[10] = theta_dof(k);
    return idx;
}

/// Destination for scattered force/stiffness entries; either the banded
/// production matrix or the dense reference matrix.
struct Sink {
    VecX* force = nullptr;
    BandedSystem* banded = nullptr;
    MatX* dense = nullptr;

    void add_force(int i, double v) const { (*force)[i] += v; }
    void add_stiffness(int i, int j, double v) const {
        if (banded)
            banded->add(i, j, v);
        else
            (*dense)(i, j) += v;
    }
};

double assemble_into(const RodState& state, const RestConfig& rest,
                     const FrameSet& frames, const EnergyModel& model,
                     const Sink& sink) {
    const int m = state.num_nodes;
    const auto elems = gather_strain_states(state, rest, frames);

    // Strain Jacobians of every element up front: the non-local model
    // scatters its neighbor-strain gradients through the neighbors' own
    // Jacobians.
    std::vector<StrainJacobian> jac(static_cast<size_t>(m));
    std::vector<ElementGeometry> geom(static_cast<size_t>(m));
    for (int k = 1; k <= m - 2; ++k) {
        geom[k] = element_geometry(state, frames, k);
        jac[k] = strain_jacobian(geom[k], rest, k);
    }

    double energy = 0.0;
    const bool nonlocal = model.nonlocal();
    for (int k = 1; k <= m - 2; ++k) {
        const ElementStrainState* prev = (k > 1) ? &elems[k - 1] : nullptr;
        const ElementStrainState* next = (k < m - 2) ? &elems[k + 1] : nullptr;
        const StrainSpaceDerivatives ed = model.evaluate(elems[k], prev, next);
        energy += ed.energy;

        const auto idx = element_dofs(k);
        const LocalVec lg = jac[k].transpose() * ed.grad;
        for (int a = 0; a < kLocalDim; ++a) sink.add_force(idx[a], -lg[a]);

        LocalMat lh = jac[k].transpose() * ed.hess * jac[k];
        const StrainHessian sh = strain_hessian(geom[k], rest, k);
        for (int l = 0; l < 4; ++l)
            if (ed.grad[l] != 0.0) lh += ed.grad[l] * sh[l];
        for (int a = 0; a < kLocalDim; ++a)
            for (int b = 0; b < kLocalDim; ++b)
                if (lh(a, b) != 0.0)
                    sink.add_stiffness(idx[a], idx[b], -lh(a, b));

        if (nonlocal) {
            if (prev) {
                const auto pidx = element_dofs(k - 1);
                const LocalVec pg = jac[k - 1].transpose() * ed.grad_prev;
                for (int a = 0; a < kLocalDim; ++a)
                    sink.add_force(pidx[a], -pg[a]);
            }
            if (next) {
                const auto nidx = element_dofs(k + 1);
                const LocalVec ng = jac[k + 1].transpose() * ed.grad_next;
                for (int a = 0; a < kLocalDim; ++a)
                    sink.add_force(nidx[a], -ng[a]);
            }
        }
    }

    // The final edge belongs to no element; its stretch energy closes the
    // sum over all edges.
    {
        const int j = m - 2;
        const double rest_len = rest.edge_len[j];
        const double eps = state.edge(j).norm() / rest_len - 1.0;
        const double ea = model.axial_rigidity();
        energy += 0.5 * ea * eps * eps * rest_len;

        const auto ge = edge_stretch_gradient(state, rest, j);
        const auto he = edge_stretch_hessian(state, rest, j);
        const Eigen::Matrix<double, 6, 1> g6 = ea * rest_len * eps * ge;
        const Eigen::Matrix<double, 6, 6> h6 =
            ea * rest_len * (ge * ge.transpose() + eps * he);
        std::array<int, 6> idx;
        for (int a = 0; a < 3; ++a) {
            idx[a] = node_dof(j) + a;
            idx[3 + a] = node_dof(j + 1) + a;
        }
        for (int a = 0; a < 6; ++a) {
            sink.add_force(idx[a], -g6[a]);
            for (int b = 0; b < 6; ++b)
                sink.add_stiffness(idx[a], idx[b], -h6(a, b));
        }
    }
    return energy;
}

}  // namespace

std::vector<ElementStrainState> gather_strain_states(const RodState& state,
                                                     const RestConfig& rest,
                                                     const FrameSet& frames) {
    const StrainField field = element_strains(state, rest, frames);
    const int m = state.num_nodes;
    std::vector<ElementStrainState> elems(static_cast<size_t>(m));
    for (int k = 1; k <= m - 2; ++k) {
        elems[k].strain = field.strain.col(k);
        elems[k].natural = rest.natural.col(k);
        elems[k].rest_edge = rest.edge_len[k - 1];
        elems[k].voronoi = rest.voronoi[k];
    }
    return elems;
}

AssemblyResult assemble(const RodState& state, const RestConfig& rest,
                        const FrameSet& frames, const EnergyModel& model) {
    AssemblyResult out;
    out.force = VecX::Zero(state.dof());
    out.stiffness = BandedSystem(state.dof());
    Sink sink{&out.force, &out.stiffness, nullptr};
    out.energy = assemble_into(state, rest, frames, model, sink);
    return out;
}

void assemble_dense(const RodState& state, const RestConfig& rest,
                    const FrameSet& frames, const EnergyModel& model,
                    double& energy, VecX& force, MatX& stiffness) {
    force = VecX::Zero(state.dof());
    stiffness = MatX::Zero(state.dof(), state.dof());
    Sink sink{&force, nullptr, &stiffness};
    energy = assemble_into(state, rest, frames, model, sink);
}

void apply_bc(BandedSystem& stiffness, VecX& force, const RodState& state,
              const BoundaryConditions& bc) {
    if (static_cast<int>(bc.fixed.size()) != bc.prescribed.size())
        throw SimError("boundary condition index/value size mismatch");
    for (size_t a = 0; a < bc.fixed.size(); ++a) {
        const int i = bc.fixed[a];
        if (i < 0 || i >= state.dof())
            throw SimError("boundary condition DOF out of range");
        force[i] += bc.penalty * (bc.prescribed[static_cast<int>(a)] - state.q[i]);
        stiffness.add(i, i, -bc.penalty);
    }
}

double penalty_from_stiffness(const BandedSystem& stiffness) {
    return 1e10 * stiffness.diagonal().cwiseAbs().maxCoeff();
}

}  // namespace ribsim
