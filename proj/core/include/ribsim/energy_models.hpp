// SPDX-License-Identifier: Apache-2.0
//
// The five constitutive laws as scalar functions of element strains with
// exact gradients and Hessians in strain space. Four models are local (the
// element energy depends only on its own strain vector); the developable
// ruled-surface model additionally reads the two neighboring elements through
// a finite-difference generator-slope term and therefore reports neighbor
// gradient blocks.

#pragma once

#include <memory>
#include <string_view>

#include "ribsim/types.hpp"

namespace ribsim {

enum class ModelKind { kirchhoff, sadowsky, sano, audoly, wunderlich };

/// Parses a model name ("kirchhoff", "sadowsky", "sano", "audoly",
/// "wunderlich"); throws SchemaError on anything else.
ModelKind model_from_string(std::string_view name);
std::string_view to_string(ModelKind kind);

struct ModelOptions {
    /// Regularizer of the quartic twist-curvature coupling denominator,
    /// in integrated-strain units.
    double sadowsky_epsilon = 1e-8;
    /// When positive (meters), the in-plane bending rigidity is pinned to
    /// (rod_reference_width / thickness)^2 times the easy-axis rigidity, so
    /// the normalized quadratic rod problem is identical at every width.
    /// The width study runs its pure-rod baseline under this convention,
    /// which removes the in-plane compliance drift that the coupled ribbon
    /// models are measured against. Zero keeps the physical section.
    double rod_reference_width = 0.0;
};

/// Stiffness constants shared by every model, precomputed once from the
/// material and the cross section.
struct Stiffness {
    double EA, EI1, EI2, GJ;
    double width, thickness, poisson;
    Stiffness(const Material& m, const Section& s)
        : EA(m.young * s.area()),
          EI1(m.young * s.I1()),
          EI2(m.young * s.I2()),
          GJ(m.shear() * s.Jt()),
          width(s.width),
          thickness(s.thickness),
          poisson(m.poisson) {}
};

/// Strain-space inputs of one element: the measured strain 4-vector
/// (stretch, both material curvatures, twist), the natural strains of the
/// rest shape, and the rest lengths that normalize the energy density.
struct ElementStrainState {
    Vec4 strain = Vec4::Zero();   ///< (eps, kappa1, kappa2, tau)
    Vec4 natural = Vec4::Zero();  ///< natural strains; entry 0 unused
    double rest_edge = 0.0;       ///< rest length of the trailing edge (m)
    double voronoi = 0.0;         ///< Voronoi length of the element (m)
};

/// Element energy with its exact strain-space derivatives. The neighbor
/// blocks are populated only by the non-local model and carry first
/// derivatives with respect to the previous/next element strain vectors.
struct StrainSpaceDerivatives {
    double energy = 0.0;
    Vec4 grad = Vec4::Zero();       ///< dE_k / d(strain_k)
    Mat4 hess = Mat4::Zero();       ///< d2E_k / d(strain_k)^2, symmetric
    Vec4 grad_prev = Vec4::Zero();  ///< dE_k / d(strain_{k-1})
    Vec4 grad_next = Vec4::Zero();  ///< dE_k / d(strain_{k+1})
};

class EnergyModel {
  public:
    explicit EnergyModel(const Stiffness& c) : c_(c) {}
    virtual ~EnergyModel() = default;
    virtual ModelKind kind() const = 0;
    /// True when the element energy reads neighboring element strains.
    virtual bool nonlocal() const { return false; }
    /// Evaluates energy and derivatives of one element. prev/next may be
    /// null at the rod ends (and are ignored by local models).
    virtual StrainSpaceDerivatives evaluate(
        const ElementStrainState& elem, const ElementStrainState* prev,
        const ElementStrainState* next) const = 0;
    /// Axial rigidity EA (N); the assembly also stretches the final edge,
    /// which no element owns.
    double axial_rigidity() const { return c_.EA; }

  protected:
    Stiffness c_;
};

std::unique_ptr<EnergyModel> make_energy_model(ModelKind kind,
                                               const Material& material,
                                               const Section& section,
                                               const ModelOptions& options = {});

/// Transition function of the width-corrected bending-twist coupling and its
/// first two derivatives. Even in v, smooth through v = 0 with
/// phi(0) = 1/360, and v^2 phi(v) -> 2 as |v| -> infinity.
void audoly_phi(double v, double& phi, double& dphi, double& d2phi);
double audoly_phi(double v);

/// Logarithmic width-integration factor of the developable-strip energy,
/// L(x) = log((1 + x/2)/(1 - x/2)) / x, continued through x = 0 by series,
/// with its first two derivatives. Requires |x| < 2.
void generator_log_factor(double x, double& L, double& dL, double& d2L);

/// Guard bounds of the developable-strip model.
inline constexpr double kKappaGuard = 1e-10;    ///< min |integrated curvature|
inline constexpr double kOverrunGuard = 1e-6;   ///< |x| >= 2 - guard throws
inline constexpr double kLogSeriesSwitch = 1e-4;

}  // namespace ribsim
