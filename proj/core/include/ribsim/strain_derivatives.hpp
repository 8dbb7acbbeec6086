// SPDX-License-Identifier: Apache-2.0
//
// Analytic first and second derivatives of the per-element strain measures
// (axial stretch, two material curvatures, twist) with respect to the eleven
// local degrees of freedom of an interior element.
//
// Local DOF ordering for element k (nodes k-1, k, k+1 and the two edge
// twists):
//
//   [ x_{k-1} (0..2) | x_k (3..5) | x_{k+1} (6..8) | theta^{k-1} (9) |
//     theta^k (10) ]

#pragma once

#include <array>

#include "ribsim/kinematics.hpp"
#include "ribsim/types.hpp"

namespace ribsim {

/// Width of the local element stencil: three nodes plus two edge twists.
inline constexpr int kLocalDim = 11;

using LocalVec = Eigen::Matrix<double, kLocalDim, 1>;
using LocalMat = Eigen::Matrix<double, kLocalDim, kLocalDim>;
/// Rows: d(eps)/dq, d(kappa1)/dq, d(kappa2)/dq, d(tau)/dq.
using StrainJacobian = Eigen::Matrix<double, 4, kLocalDim>;
/// One 11x11 symmetric slice per strain measure, same row order.
using StrainHessian = std::array<LocalMat, 4>;

/// Geometry of one interior element evaluated at the current configuration,
/// cached once and shared by the strain, gradient and Hessian routines.
struct ElementGeometry {
    Vec3 te, tf;        ///< unit tangents of the trailing and leading edge
    double norm_e = 0;  ///< current length of edge k-1
    double norm_f = 0;  ///< current length of edge k
    double chi = 0;     ///< 1 + te . tf
    Vec3 kb;            ///< curvature binormal 2 te x tf / chi
    Vec3 m1e, m2e;      ///< material directors on edge k-1
    Vec3 m1f, m2f;      ///< material directors on edge k
    Vec3 tilde_t;       ///< (te + tf) / chi
    Vec3 tilde_m1;      ///< (m1e + m1f) / chi
    Vec3 tilde_m2;      ///< (m2e + m2f) / chi
    double kappa1 = 0, kappa2 = 0;
};

/// Evaluates the cached geometry of interior element k.
ElementGeometry element_geometry(const RodState& state, const FrameSet& frames,
                                 int k);

/// 4 x 11 Jacobian of the strain measures of element k with respect to the
/// local DOFs. The axial row differentiates the trailing-edge stretch.
StrainJacobian strain_jacobian(const ElementGeometry& g,
                               const RestConfig& rest, int k);

/// 11 x 11 symmetric second-derivative slices of the four strain measures.
StrainHessian strain_hessian(const ElementGeometry& g, const RestConfig& rest,
                             int k);

/// Gradient (3+3 layout: x_j then x_{j+1}) of the stretch of edge j alone,
/// used for the final edge that no interior element owns.
Eigen::Matrix<double, 6, 1> edge_stretch_gradient(const RodState& state,
                                                  const RestConfig& rest,
                                                  int j);

/// 6 x 6 Hessian companion of edge_stretch_gradient.
Eigen::Matrix<double, 6, 6> edge_stretch_hessian(const RodState& state,
                                                 const RestConfig& rest,
                                                 int j);

}  // namespace ribsim
