// SPDX-License-Identifier: Apache-2.0
//
// Core value types shared across the ribbon simulation library: rectangular
// cross-section properties, material parameters, and the error taxonomy.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ribsim {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Tolerance below which an edge is considered degenerate (relative to its
/// rest length).
inline constexpr double kLengthEpsilon = 1e-12;

/// Tolerance on 1 + a.b below which two unit vectors are treated as
/// antiparallel (parallel transport and curvature binormal blow up there).
inline constexpr double kAntiparallelEpsilon = 1e-12;

/// Linear elastic material of the ribbon.
struct Material {
    double young = 1e10;    ///< Young's modulus Y [Pa]
    double poisson = 0.5;   ///< Poisson ratio nu [-]
    double density = 1000;  ///< volumetric density rho [kg/m^3]

    /// Shear modulus G = Y / (2 (1 + nu)).
    double shear() const { return young / (2.0 * (1.0 + poisson)); }
};

/// Rectangular ribbon cross-section of width W and thickness b (W >> b).
///
/// The two bending directions are distinguished by the material directors:
/// kappa1 measures deflection along m1 (the in-plane width director, stiff)
/// and kappa2 deflection along m2 (the surface normal, compliant). The
/// torsion constant uses the thin-rectangle limit.
struct Section {
    double width = 5e-3;      ///< W [m]
    double thickness = 1e-3;  ///< b [m]

    double area() const { return width * thickness; }
    /// Second moment for bending that deflects along the width director.
    double I1() const { return thickness * width * width * width / 12.0; }
    /// Second moment for bending that deflects along the surface normal.
    double I2() const { return width * thickness * thickness * thickness / 12.0; }
    /// Torsion constant of a thin rectangle, J = W b^3 / 3.
    double Jt() const { return width * thickness * thickness * thickness / 3.0; }
    /// Squared cross-section scale of the bend-twist coupling,
    /// zeta^2 = (1 - nu) W^4 / (60 b^2).
    double zeta2(double nu) const {
        return (1.0 - nu) * std::pow(width, 4) / (60.0 * thickness * thickness);
    }
    /// Curvature scale kappa* = b / (sqrt(12 (1 - nu^2)) W^2) at which the
    /// quartic correction saturates.
    double kappa_star(double nu) const {
        return thickness / (std::sqrt(12.0 * (1.0 - nu * nu)) * width * width);
    }
};

/// Base class of all simulation-domain errors.
struct SimError : std::runtime_error {
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

/// An edge collapsed below the degeneracy tolerance.
struct DegenerateEdgeError : SimError {
    using SimError::SimError;
};
/// Time-parallel transport was asked to bridge antiparallel tangents.
struct AntiparallelTangentsError : SimError {
    using SimError::SimError;
};
/// Two consecutive edges folded back onto each other (curvature binormal
/// denominator vanished).
struct AntiparallelEdgesError : SimError {
    using SimError::SimError;
};
/// The generator-inclination argument W eta' reached the logarithmic
/// singularity of the width-averaged bending energy.
struct GeneratorOverrunError : SimError {
    using SimError::SimError;
};
/// A guarded division (e.g. by a vanishing curvature) was triggered.
struct DivisionGuardError : SimError {
    using SimError::SimError;
};
/// Every fallback of the linear solver failed.
struct SolveFailedError : SimError {
    using SimError::SimError;
};
/// Adaptive stepping hit the minimum step size without converging.
struct StepFloorExceededError : SimError {
    using SimError::SimError;
};
/// The compression stage ended without out-of-plane buckling.
struct BucklingNotTriggeredError : SimError {
    using SimError::SimError;
};
/// A homotopy stage fell off the tracked equilibrium branch.
struct BranchLostError : SimError {
    using SimError::SimError;
};

/// Base class of configuration/input errors (process exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
/// Config document violates the schema (unknown key, wrong type, bad value).
struct SchemaError : ConfigError {
    using ConfigError::ConfigError;
};
/// A dimensioned field is missing its unit or uses an unknown unit.
struct UnitsError : ConfigError {
    using ConfigError::ConfigError;
};
/// File could not be read or written.
struct IoError : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace ribsim
