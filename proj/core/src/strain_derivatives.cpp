// SPDX-License-Identifier: Apache-2.0

#include "ribsim/strain_derivatives.hpp"

namespace ribsim {

namespace {

Mat3 skew(const Vec3& a) {
    Mat3 m;
    m << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
    return m;
}

Mat3 outer(const Vec3& a, const Vec3& b) { return a * b.transpose(); }

Mat3 sym_outer(const Vec3& a, const Vec3& b) {
    return a * b.transpose() + b * a.transpose();
}

}  // namespace

ElementGeometry element_geometry(const RodState& state, const FrameSet& frames,
                                 int k) {
    ElementGeometry g;
    g.norm_e = state.edge(k - 1).norm();
    g.norm_f = state.edge(k).norm();
    if (g.norm_e <= kLengthEpsilon || g.norm_f <= kLengthEpsilon)
        throw DegenerateEdgeError("element " + std::to_string(k) +
                                  " touches a zero-length edge");
    g.te = frames.tangent.col(k - 1);
    g.tf = frames.tangent.col(k);
    g.chi = 1.0 + g.te.dot(g.tf);
    if (g.chi < kAntiparallelEpsilon)
        throw AntiparallelEdgesError("element " + std::to_string(k) +
                                     " has antiparallel edges");
    g.kb = 2.0 * g.te.cross(g.tf) / g.chi;
    material_directors(frames, state.theta(k - 1), k - 1, g.m1e, g.m2e);
    material_directors(frames, state.theta(k), k, g.m1f, g.m2f);
    g.tilde_t = (g.te + g.tf) / g.chi;
    g.tilde_m1 = (g.m1e + g.m1f) / g.chi;
    g.tilde_m2 = (g.m2e + g.m2f) / g.chi;
    g.kappa1 = 0.5 * (g.m2e + g.m2f).dot(g.kb);
    g.kappa2 = -0.5 * (g.m1e + g.m1f).dot(g.kb);
    return g;
}

StrainJacobian strain_jacobian(const ElementGeometry& g,
                               const RestConfig& rest, int k) {
    StrainJacobian J = StrainJacobian::Zero();

    // Axial stretch of the trailing edge, measured against its rest length.
    const Vec3 de = g.te / rest.edge_len[k - 1];
    J.row(0).segment<3>(0) = -de;
    J.row(0).segment<3>(3) = de;

    // Material curvatures: derivatives with respect to the two edge vectors,
    // then chained onto the three nodes (de/dx = -I, +I).
    const Vec3 dk1_de =
        (-g.kappa1 * g.tilde_t + g.tf.cross(g.tilde_m2)) / g.norm_e;
    const Vec3 dk1_df =
        (-g.kappa1 * g.tilde_t - g.te.cross(g.tilde_m2)) / g.norm_f;
    const Vec3 dk2_de =
        (-g.kappa2 * g.tilde_t - g.tf.cross(g.tilde_m1)) / g.norm_e;
    const Vec3 dk2_df =
        (-g.kappa2 * g.tilde_t + g.te.cross(g.tilde_m1)) / g.norm_f;

    J.row(1).segment<3>(0) = -dk1_de;
    J.row(1).segment<3>(3) = dk1_de - dk1_df;
    J.row(1).segment<3>(6) = dk1_df;
    J(1, 9) = -0.5 * g.kb.dot(g.m1e);
    J(1, 10) = -0.5 * g.kb.dot(g.m1f);

    J.row(2).segment<3>(0) = -dk2_de;
    J.row(2).segment<3>(3) = dk2_de - dk2_df;
    J.row(2).segment<3>(6) = dk2_df;
    J(2, 9) = -0.5 * g.kb.dot(g.m2e);
    J(2, 10) = -0.5 * g.kb.dot(g.m2f);

    // Twist: the reference-twist part varies with the node positions through
    // the curvature binormal; the angle part is linear.
    const Vec3 dm_de = -0.5 / g.norm_e * g.kb;
    const Vec3 dm_df = 0.5 / g.norm_f * g.kb;
    J.row(3).segment<3>(0) = dm_de;
    J.row(3).segment<3>(3) = -(dm_de + dm_df);
    J.row(3).segment<3>(6) = dm_df;
    J(3, 9) = -1.0;
    J(3, 10) = 1.0;

    return J;
}

StrainHessian strain_hessian(const ElementGeometry& g, const RestConfig& rest,
                             int k) {
    StrainHessian H;
    for (auto& m : H) m.setZero();

    const double n2e = g.norm_e * g.norm_e;
    const double n2f = g.norm_f * g.norm_f;
    const Mat3 Id = Mat3::Identity();
    const Mat3 tt = outer(g.tilde_t, g.tilde_t);

    // --- axial stretch of the trailing edge -------------------------------
    {
        const Mat3 hs =
            (Id - outer(g.te, g.te)) / (rest.edge_len[k - 1] * g.norm_e);
        H[0].block<3, 3>(0, 0) = hs;
        H[0].block<3, 3>(0, 3) = -hs;
        H[0].block<3, 3>(3, 0) = -hs;
        H[0].block<3, 3>(3, 3) = hs;
    }

    // --- both material curvatures -----------------------------------------
    // Second derivatives with respect to the two edge vectors, then chained
    // onto the node positions with de/dx = -I, +I (and likewise for f).
    const Vec3 tf_c_m2t = g.tf.cross(g.tilde_m2);
    const Vec3 te_c_m2t = g.te.cross(g.tilde_m2);
    const Vec3 tf_c_m1t = g.tf.cross(g.tilde_m1);
    const Vec3 te_c_m1t = g.te.cross(g.tilde_m1);

    const Mat3 k1_de2 =
        (2.0 * g.kappa1 * tt - sym_outer(tf_c_m2t, g.tilde_t)) / n2e -
        g.kappa1 / (g.chi * n2e) * (Id - outer(g.te, g.te)) +
        0.25 / n2e * sym_outer(g.kb, g.m2e);
    const Mat3 k1_df2 =
        (2.0 * g.kappa1 * tt + sym_outer(te_c_m2t, g.tilde_t)) / n2f -
        g.kappa1 / (g.chi * n2f) * (Id - outer(g.tf, g.tf)) +
        0.25 / n2f * sym_outer(g.kb, g.m2f);
    const Mat3 k1_dedf =
        -g.kappa1 / (g.chi * g.norm_e * g.norm_f) * (Id + outer(g.te, g.tf)) +
        (2.0 * g.kappa1 * tt - outer(tf_c_m2t, g.tilde_t) +
         outer(g.tilde_t, te_c_m2t) - skew(g.tilde_m2)) /
            (g.norm_e * g.norm_f);
    const Mat3 k1_dfde = k1_dedf.transpose();

    const Mat3 k2_de2 =
        (2.0 * g.kappa2 * tt + sym_outer(tf_c_m1t, g.tilde_t)) / n2e -
        g.kappa2 / (g.chi * n2e) * (Id - outer(g.te, g.te)) -
        0.25 / n2e * sym_outer(g.kb, g.m1e);
    const Mat3 k2_df2 =
        (2.0 * g.kappa2 * tt - sym_outer(te_c_m1t, g.tilde_t)) / n2f -
        g.kappa2 / (g.chi * n2f) * (Id - outer(g.tf, g.tf)) -
        0.25 / n2f * sym_outer(g.kb, g.m1f);
    const Mat3 k2_dedf =
        -g.kappa2 / (g.chi * g.norm_e * g.norm_f) * (Id + outer(g.te, g.tf)) +
        (2.0 * g.kappa2 * tt + outer(tf_c_m1t, g.tilde_t) -
         outer(g.tilde_t, te_c_m1t) + skew(g.tilde_m1)) /
            (g.norm_e * g.norm_f);
    const Mat3 k2_dfde = k2_dedf.transpose();

    auto scatter_position_blocks = [](LocalMat& out, const Mat3& dee,
                                      const Mat3& def, const Mat3& dfe,
                                      const Mat3& dff) {
        out.block<3, 3>(0, 0) = dee;
        out.block<3, 3>(0, 3) = -dee + def;
        out.block<3, 3>(0, 6) = -def;
        out.block<3, 3>(3, 0) = -dee + dfe;
        out.block<3, 3>(3, 3) = dee - def - dfe + dff;
        out.block<3, 3>(3, 6) = def - dff;
        out.block<3, 3>(6, 0) = -dfe;
        out.block<3, 3>(6, 3) = dfe - dff;
        out.block<3, 3>(6, 6) = dff;
    };

    scatter_position_blocks(H[1], k1_de2, k1_dedf, k1_dfde, k1_df2);
    scatter_position_blocks(H[2], k2_de2, k2_dedf, k2_dfde, k2_df2);

    // Mixed edge/twist-angle derivatives and pure twist-angle curvature.
    const Vec3 k1_de_the =
        (0.5 * g.kb.dot(g.m1e) * g.tilde_t - g.tf.cross(g.m1e) / g.chi) /
        g.norm_e;
    const Vec3 k1_de_thf =
        (0.5 * g.kb.dot(g.m1f) * g.tilde_t - g.tf.cross(g.m1f) / g.chi) /
        g.norm_e;
    const Vec3 k1_df_the =
        (0.5 * g.kb.dot(g.m1e) * g.tilde_t + g.te.cross(g.m1e) / g.chi) /
        g.norm_f;
    const Vec3 k1_df_thf =
        (0.5 * g.kb.dot(g.m1f) * g.tilde_t + g.te.cross(g.m1f) / g.chi) /
        g.norm_f;
    const Vec3 k2_de_the =
        (0.5 * g.kb.dot(g.m2e) * g.tilde_t - g.tf.cross(g.m2e) / g.chi) /
        g.norm_e;
    const Vec3 k2_de_thf =
        (0.5 * g.kb.dot(g.m2f) * g.tilde_t - g.tf.cross(g.m2f) / g.chi) /
        g.norm_e;
    const Vec3 k2_df_the =
        (0.5 * g.kb.dot(g.m2e) * g.tilde_t + g.te.cross(g.m2e) / g.chi) /
        g.norm_f;
    const Vec3 k2_df_thf =
        (0.5 * g.kb.dot(g.m2f) * g.tilde_t + g.te.cross(g.m2f) / g.chi) /
        g.norm_f;

    auto scatter_theta_column = [](LocalMat& out, int col, const Vec3& de_th,
                                   const Vec3& df_th) {
        out.col(col).segment<3>(0) = -de_th;
        out.col(col).segment<3>(3) = de_th - df_th;
        out.col(col).segment<3>(6) = df_th;
        out.row(col).segment<3>(0) = out.col(col).segment<3>(0).transpose();
        out.row(col).segment<3>(3) = out.col(col).segment<3>(3).transpose();
        out.row(col).segment<3>(6) = out.col(col).segment<3>(6).transpose();
    };

    scatter_theta_column(H[1], 9, k1_de_the, k1_df_the);
    scatter_theta_column(H[1], 10, k1_de_thf, k1_df_thf);
    scatter_theta_column(H[2], 9, k2_de_the, k2_df_the);
    scatter_theta_column(H[2], 10, k2_de_thf, k2_df_thf);

    H[1](9, 9) = -0.5 * g.kb.dot(g.m2e);
    H[1](10, 10) = -0.5 * g.kb.dot(g.m2f);
    H[2](9, 9) = 0.5 * g.kb.dot(g.m1e);
    H[2](10, 10) = 0.5 * g.kb.dot(g.m1f);

    // --- twist --------------------------------------------------------------
    // The twist is linear in the angles, so only the reference-twist part
    // (a pure function of the node positions) contributes.
    const Mat3 m_de2 = -0.25 / n2e * sym_outer(g.kb, g.te + g.tilde_t);
    const Mat3 m_df2 = -0.25 / n2f * sym_outer(g.kb, g.tf + g.tilde_t);
    const Mat3 m_dedf = 0.5 / (g.norm_e * g.norm_f) *
                        (2.0 / g.chi * skew(g.te) - outer(g.kb, g.tilde_t));
    const Mat3 m_dfde = m_dedf.transpose();

    scatter_position_blocks(H[3], m_de2, m_dedf, m_dfde, m_df2);

    (void)k;
    return H;
}

Eigen::Matrix<double, 6, 1> edge_stretch_gradient(const RodState& state,
                                                  const RestConfig& rest,
                                                  int j) {
    const Vec3 e = state.edge(j);
    const double len = e.norm();
    if (len <= kLengthEpsilon)
        throw DegenerateEdgeError("edge " + std::to_string(j) +
                                  " collapsed to zero length");
    const Vec3 de = e / (len * rest.edge_len[j]);
    Eigen::Matrix<double, 6, 1> grad;
    grad.segment<3>(0) = -de;
    grad.segment<3>(3) = de;
    return grad;
}

Eigen::Matrix<double, 6, 6> edge_stretch_hessian(const RodState& state,
                                                 const RestConfig& rest,
                                                 int j) {
    const Vec3 e = state.edge(j);
    const double len = e.norm();
    if (len <= kLengthEpsilon)
        throw DegenerateEdgeError("edge " + std::to_string(j) +
                                  " collapsed to zero length");
    const Vec3 t = e / len;
    const Mat3 hs =
        (Mat3::Identity() - t * t.transpose()) / (rest.edge_len[j] * len);
    Eigen::Matrix<double, 6, 6> hess;
    hess.block<3, 3>(0, 0) = hs;
    hess.block<3, 3>(0, 3) = -hs;
    hess.block<3, 3>(3, 0) = -hs;
    hess.block<3, 3>(3, 3) = hs;
    return hess;
}

}  // namespace ribsim
