// SPDX-License-Identifier: Apache-2.0
//
// Centerline kinematics of the discrete ribbon: the interleaved degree-of-
// freedom layout, twist-free reference frames evolved by parallel transport,
// and the per-element strain measures (axial strain, the two material
// curvatures and the discrete twist, all in integrated form).

#pragma once

#include "ribsim/types.hpp"

#include <optional>

namespace ribsim {

/// Number of degrees of freedom of a rod with `num_nodes` centerline nodes:
/// 3 per node plus one twist angle per edge, interleaved as
/// [x_0, theta^0, x_1, theta^1, ..., x_{M-2}, theta^{M-2}, x_{M-1}].
inline int num_dof(int num_nodes) { return 4 * num_nodes - 1; }

/// First global index of the position block of node `i`.
inline int node_dof(int i) { return 4 * i; }

/// Global index of the twist angle of edge `i` (the edge from node i to i+1).
inline int theta_dof(int i) { return 4 * i + 3; }

/// Generalized coordinates and velocities of the discrete ribbon.
struct RodState {
    VecX q;         ///< interleaved coordinates, size 4M-1
    VecX qdot;      ///< generalized velocities, same layout
    int num_nodes;  ///< M

    int num_edges() const { return num_nodes - 1; }
    int dof() const { return num_dof(num_nodes); }

    Eigen::Map<const Vec3> node(int i) const {
        return Eigen::Map<const Vec3>(q.data() + node_dof(i));
    }
    Eigen::Map<Vec3> node(int i) {
        return Eigen::Map<Vec3>(q.data() + node_dof(i));
    }
    double theta(int i) const { return q[theta_dof(i)]; }
    double& theta(int i) { return q[theta_dof(i)]; }

    Vec3 edge(int i) const { return node(i + 1) - node(i); }
};

/// Build a state from explicit node positions (3 x M) and edge twists (M-1),
/// with zero velocities.
RodState make_state(const MatX& positions, const VecX& thetas);

/// Undeformed quantities: rest edge lengths, Voronoi lengths at interior
/// nodes, and the natural (undeformed) strain of every element.
struct RestConfig {
    VecX edge_len;   ///< size M-1, rest length of each edge
    VecX voronoi;    ///< size M, valid at interior nodes 1..M-2
    MatX natural;    ///< 4 x M, valid cols 1..M-2: [0, kappa1, kappa2, tau]
    double total_length = 0.0;

    int num_nodes() const { return static_cast<int>(voronoi.size()); }
};

/// Rest configuration measured from `state` geometry. Natural strains are
/// zero (straight, untwisted natural shape) unless `naturals_from_geometry`
/// is set, in which case the current curvatures/twist become the naturals.
RestConfig rest_from_state(const RodState& state, bool naturals_from_geometry = false);

/// Per-edge reference directors plus the per-node reference twist that keeps
/// the total twist continuous across frame updates.
struct FrameSet {
    MatX d1;         ///< 3 x (M-1)
    MatX d2;         ///< 3 x (M-1)
    MatX tangent;    ///< 3 x (M-1), unit tangents the directors live on
    VecX ref_twist;  ///< size M, valid at interior nodes 1..M-2

    int num_edges() const { return static_cast<int>(d1.cols()); }
};

/// Parallel transport of `u` from unit vector `a` to unit vector `b` (the
/// minimal rotation taking a to b). Throws AntiparallelTangentsError when
/// 1 + a.b falls below the antiparallel tolerance.
Vec3 parallel_transport(const Vec3& u, const Vec3& a, const Vec3& b);

/// Signed angle from `u` to `v` about the unit axis `n`, in (-pi, pi].
double signed_angle(const Vec3& u, const Vec3& v, const Vec3& n);

/// Rodrigues rotation of `v` about the unit `axis` by `angle`.
Vec3 rotate_axis_angle(const Vec3& v, const Vec3& axis, double angle);

/// Deterministic unit vector perpendicular to `t`: the coordinate axis of
/// smallest |t . axis| (lowest index on ties), projected and normalized.
Vec3 pick_perpendicular(const Vec3& t);

/// Unit tangents of every edge; throws DegenerateEdgeError on a collapsed
/// edge.
MatX unit_tangents(const RodState& state);

/// Twist-free initial frames: d1 of the first edge comes from `d1_seed`
/// (projected perpendicular to the tangent) or from pick_perpendicular, and
/// is space-parallel transported down the rod. Reference twist starts at 0.
FrameSet initial_frames(const RodState& state,
                        std::optional<Vec3> d1_seed = std::nullopt);

/// Time-parallel transport of `base` onto the tangents of `state`:
/// each director is moved by the minimal rotation from its stored tangent to
/// the new tangent and re-orthonormalized, and the reference twist of each
/// interior node is updated continuously (no 2*pi wrapping) by the signed
/// angle between the space-transported previous director and the new one.
FrameSet update_frames(const FrameSet& base, const RodState& state);

/// Discrete strain measures per element (one element per interior node).
struct StrainField {
    /// 4 x M, valid cols 1..M-2. Rows: axial strain of the incoming edge,
    /// material curvature kappa1, material curvature kappa2, twist tau.
    MatX strain;
    /// size M-1: axial strain of every edge (needed for the boundary edge
    /// not owned by any element).
    VecX edge_strain;
};

/// Curvature binormal of the edge pair (te, tf):
/// kb = 2 te x tf / (1 + te . tf). Throws AntiparallelEdgesError at the
/// denominator's zero.
Vec3 curvature_binormal(const Vec3& te, const Vec3& tf);

/// Evaluate all element strains of `state` with directors `frames` (which
/// must sit on the tangents of `state`, i.e. be the result of update_frames
/// or initial_frames for that state).
StrainField element_strains(const RodState& state, const RestConfig& rest,
                            const FrameSet& frames);

/// Material directors of edge `i`:
/// m1 = cos(theta) d1 + sin(theta) d2, m2 = cos(theta) d2 - sin(theta) d1.
inline void material_directors(const FrameSet& frames, double theta, int edge,
                               Vec3& m1, Vec3& m2) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Vec3 d1 = frames.d1.col(edge), d2 = frames.d2.col(edge);
    m1 = c * d1 + s * d2;
    m2 = c * d2 - s * d1;
}

}  // namespace ribsim
