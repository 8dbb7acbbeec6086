// SPDX-License-Identifier: Apache-2.0

#include "ribsim/kinematics.hpp"

#include <cmath>

namespace ribsim {

RodState make_state(const MatX& positions, const VecX& thetas) {
    const int M = static_cast<int>(positions.cols());
    if (M < 3) throw SimError("a rod needs at least 3 nodes");
    if (thetas.size() != M - 1)
        throw SimError("expected one twist angle per edge");
    RodState s;
    s.num_nodes = M;
    s.q.setZero(num_dof(M));
    s.qdot.setZero(num_dof(M));
    for (int i = 0; i < M; ++i) s.node(i) = positions.col(i);
    for (int i = 0; i < M - 1; ++i) s.theta(i) = thetas[i];
    return s;
}

RestConfig rest_from_state(const RodState& state, bool naturals_from_geometry) {
    const int M = state.num_nodes;
    RestConfig rest;
    rest.edge_len.resize(M - 1);
    for (int i = 0; i < M - 1; ++i) {
        rest.edge_len[i] = state.edge(i).norm();
        if (rest.edge_len[i] <= kLengthEpsilon)
            throw DegenerateEdgeError("rest edge " + std::to_string(i) +
                                      " has zero length");
    }
    rest.total_length = rest.edge_len.sum();
    rest.voronoi.setZero(M);
    for (int i = 1; i < M - 1; ++i)
        rest.voronoi[i] = 0.5 * (rest.edge_len[i - 1] + rest.edge_len[i]);
    rest.natural.setZero(4, M);
    if (naturals_from_geometry) {
        FrameSet frames = initial_frames(state);
        // Bootstrap with zero naturals; the measured strains become them.
        StrainField f = element_strains(state, rest, frames);
        rest.natural = f.strain;
        rest.natural.row(0).setZero();  // axial naturals live in edge_len
    }
    return rest;
}

Vec3 parallel_transport(const Vec3& u, const Vec3& a, const Vec3& b) {
    const double c = 1.0 + a.dot(b);
    if (c < kAntiparallelEpsilon)
        throw AntiparallelTangentsError(
            "parallel transport between antiparallel directions");
    const Vec3 w = a.cross(b);
    // Rotation taking a to b: R = I + [w]_x + [w]_x^2 / (1 + a.b).
    return u + w.cross(u) + w.cross(w.cross(u)) / c;
}

double signed_angle(const Vec3& u, const Vec3& v, const Vec3& n) {
    return std::atan2(u.cross(v).dot(n), u.dot(v));
}

Vec3 rotate_axis_angle(const Vec3& v, const Vec3& axis, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return c * v + s * axis.cross(v) + (1.0 - c) * axis.dot(v) * axis;
}

Vec3 pick_perpendicular(const Vec3& t) {
    int best = 0;
    double best_dot = std::abs(t[0]);
    for (int j = 1; j < 3; ++j) {
        if (std::abs(t[j]) < best_dot) {
            best = j;
            best_dot = std::abs(t[j]);
        }
    }
    Vec3 axis = Vec3::Zero();
    axis[best] = 1.0;
    return (axis - t[best] * t).normalized();
}

MatX unit_tangents(const RodState& state) {
    const int ne = state.num_edges();
    MatX t(3, ne);
    for (int i = 0; i < ne; ++i) {
        const Vec3 e = state.edge(i);
        const double len = e.norm();
        if (len <= kLengthEpsilon)
            throw DegenerateEdgeError("edge " + std::to_string(i) +
                                      " collapsed to zero length");
        t.col(i) = e / len;
    }
    return t;
}

namespace {

/// Remove the tangential component of a director and renormalize.
Vec3 ortho_normalize(const Vec3& d, const Vec3& t) {
    const Vec3 p = d - d.dot(t) * t;
    const double n = p.norm();
    if (n <= kLengthEpsilon)
        throw SimError("director degenerated onto the tangent");
    return p / n;
}

/// Continuous reference-twist update at interior node i: space-transport the
/// previous edge's director across the kink, rotate it by the stored twist,
/// and accumulate the residual misalignment angle.
double ref_twist_update(const MatX& d1, const MatX& tangent, int node,
                        double stored) {
    const Vec3 tp = tangent.col(node - 1);
    const Vec3 tn = tangent.col(node);
    Vec3 u = parallel_transport(d1.col(node - 1), tp, tn);
    u = rotate_axis_angle(u, tn, stored);
    return stored + signed_angle(u, d1.col(node), tn);
}

}  // namespace

FrameSet initial_frames(const RodState& state, std::optional<Vec3> d1_seed) {
    const int ne = state.num_edges();
    FrameSet f;
    f.tangent = unit_tangents(state);
    f.d1.resize(3, ne);
    f.d2.resize(3, ne);
    f.ref_twist.setZero(state.num_nodes);

    Vec3 first;
    if (d1_seed && d1_seed->squaredNorm() > 0.5 &&
        std::abs(d1_seed->normalized().dot(f.tangent.col(0))) < 0.99) {
        first = ortho_normalize(d1_seed->normalized(), f.tangent.col(0));
    } else {
        first = pick_perpendicular(f.tangent.col(0));
    }
    f.d1.col(0) = first;
    f.d2.col(0) = Vec3(f.tangent.col(0)).cross(first);
    for (int i = 1; i < ne; ++i) {
        const Vec3 moved = parallel_transport(f.d1.col(i - 1),
                                              f.tangent.col(i - 1),
                                              f.tangent.col(i));
        f.d1.col(i) = ortho_normalize(moved, f.tangent.col(i));
        f.d2.col(i) = Vec3(f.tangent.col(i)).cross(Vec3(f.d1.col(i)));
    }
    for (int i = 1; i < state.num_nodes - 1; ++i)
        f.ref_twist[i] = ref_twist_update(f.d1, f.tangent, i, 0.0);
    return f;
}

FrameSet update_frames(const FrameSet& base, const RodState& state) {
    const int ne = state.num_edges();
    FrameSet f;
    f.tangent = unit_tangents(state);
    f.d1.resize(3, ne);
    f.d2.resize(3, ne);
    f.ref_twist = base.ref_twist;
    for (int i = 0; i < ne; ++i) {
        const Vec3 moved = parallel_transport(base.d1.col(i),
                                              base.tangent.col(i),
                                              f.tangent.col(i));
        f.d1.col(i) = ortho_normalize(moved, f.tangent.col(i));
        f.d2.col(i) = Vec3(f.tangent.col(i)).cross(Vec3(f.d1.col(i)));
    }
    for (int i = 1; i < state.num_nodes - 1; ++i)
        f.ref_twist[i] = ref_twist_update(f.d1, f.tangent, i, base.ref_twist[i]);
    return f;
}

Vec3 curvature_binormal(const Vec3& te, const Vec3& tf) {
    const double chi = 1.0 + te.dot(tf);
    if (chi < kAntiparallelEpsilon)
        throw AntiparallelEdgesError(
            "consecutive edges folded back onto each other");
    return 2.0 * te.cross(tf) / chi;
}

StrainField element_strains(const RodState& state, const RestConfig& rest,
                            const FrameSet& frames) {
    const int M = state.num_nodes;
    StrainField out;
    out.edge_strain.resize(M - 1);
    for (int i = 0; i < M - 1; ++i)
        out.edge_strain[i] = state.edge(i).norm() / rest.edge_len[i] - 1.0;

    out.strain.setZero(4, M);
    for (int k = 1; k < M - 1; ++k) {
        const Vec3 te = frames.tangent.col(k - 1);
        const Vec3 tf = frames.tangent.col(k);
        const Vec3 kb = curvature_binormal(te, tf);
        Vec3 m1e, m2e, m1f, m2f;
        material_directors(frames, state.theta(k - 1), k - 1, m1e, m2e);
        material_directors(frames, state.theta(k), k, m1f, m2f);
        out.strain(0, k) = out.edge_strain[k - 1];
        out.strain(1, k) = 0.5 * (m2e + m2f).dot(kb);
        out.strain(2, k) = -0.5 * (m1e + m1f).dot(kb);
        out.strain(3, k) = state.theta(k) - state.theta(k - 1) +
                           frames.ref_twist[k];
    }
    return out;
}

}  // namespace ribsim
