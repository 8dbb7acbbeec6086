// SPDX-License-Identifier: Apache-2.0

#include "ribsim/energy_models.hpp"

#include <cmath>
#include <string>

namespace ribsim {

ModelKind model_from_string(std::string_view name) {
    if (name == "kirchhoff") return ModelKind::kirchhoff;
    if (name == "sadowsky") return ModelKind::sadowsky;
    if (name == "sano") return ModelKind::sano;
    if (name == "audoly") return ModelKind::audoly;
    if (name == "wunderlich") return ModelKind::wunderlich;
    throw SchemaError("unknown energy model '" + std::string(name) +
                      "' (expected kirchhoff, sadowsky, sano, audoly or "
                      "wunderlich)");
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::kirchhoff: return "kirchhoff";
        case ModelKind::sadowsky: return "sadowsky";
        case ModelKind::sano: return "sano";
        case ModelKind::audoly: return "audoly";
        case ModelKind::wunderlich: return "wunderlich";
    }
    return "?";
}

namespace {

/// Deformation from the natural state; the stretch entry is already measured
/// relative to the rest edge length.
Vec4 deformation(const ElementStrainState& e) {
    Vec4 d = e.strain - e.natural;
    d[0] = e.strain[0];
    return d;
}

/// Quadratic part common to all models: stretching of the trailing edge,
/// bending about the stiff (in-plane) axis, and optionally the decoupled
/// easy-axis bending and twisting terms.
StrainSpaceDerivatives quadratic_base(const ElementStrainState& e,
                                      const Stiffness& c, bool with_b2t) {
    if (e.voronoi <= 0.0)
        throw SimError("element has non-positive Voronoi length");
    const Vec4 d = deformation(e);
    StrainSpaceDerivatives out;
    Vec4 k = Vec4::Zero();
    k[0] = c.EA * e.rest_edge;
    k[1] = c.EI1 / e.voronoi;
    if (with_b2t) {
        k[2] = c.EI2 / e.voronoi;
        k[3] = c.GJ / e.voronoi;
    }
    out.energy = 0.5 * d.dot(k.asDiagonal() * d);
    out.grad = k.asDiagonal() * d;
    out.hess = k.asDiagonal();
    return out;
}

/// Quartic twist coupling tau^4 / (kappa2^2 + denom_offset) scaled by
/// EI2 / (2 dl); shared by the regularized developability penalties.
void add_quartic_coupling(StrainSpaceDerivatives& out,
                          const ElementStrainState& e, const Stiffness& c,
                          double denom_offset) {
    const Vec4 d = deformation(e);
    const double kap = d[2], tau = d[3];
    const double P = 0.5 * c.EI2 / e.voronoi;
    const double D = kap * kap + denom_offset;
    const double t2 = tau * tau, t3 = t2 * tau, t4 = t2 * t2;
    out.energy += P * t4 / D;
    out.grad[2] += -2.0 * P * t4 * kap / (D * D);
    out.grad[3] += 4.0 * P * t3 / D;
    out.hess(2, 2) += P * t4 * (8.0 * kap * kap / (D * D * D) - 2.0 / (D * D));
    out.hess(3, 3) += 12.0 * P * t2 / D;
    const double cross = -8.0 * P * t3 * kap / (D * D);
    out.hess(2, 3) += cross;
    out.hess(3, 2) += cross;
}

class KirchhoffModel final : public EnergyModel {
  public:
    explicit KirchhoffModel(const Stiffness& c) : EnergyModel(c) {}
    ModelKind kind() const override { return ModelKind::kirchhoff; }
    StrainSpaceDerivatives evaluate(const ElementStrainState& e,
                                    const ElementStrainState*,
                                    const ElementStrainState*) const override {
        return quadratic_base(e, c_, true);
    }

};

class SadowskyModel final : public EnergyModel {
  public:
    SadowskyModel(const Stiffness& c, double epsilon)
        : EnergyModel(c), epsilon_(epsilon) {}
    ModelKind kind() const override { return ModelKind::sadowsky; }
    StrainSpaceDerivatives evaluate(const ElementStrainState& e,
                                    const ElementStrainState*,
                                    const ElementStrainState*) const override {
        StrainSpaceDerivatives out = quadratic_base(e, c_, true);
        add_quartic_coupling(out, e, c_, epsilon_);
        return out;
    }

  private:
    double epsilon_;
};

class SanoModel final : public EnergyModel {
  public:
    explicit SanoModel(const Stiffness& c)
        : EnergyModel(c),
          zeta2_(Section{c.width, c.thickness}.zeta2(c.poisson)) {}
    ModelKind kind() const override { return ModelKind::sano; }
    StrainSpaceDerivatives evaluate(const ElementStrainState& e,
                                    const ElementStrainState*,
                                    const ElementStrainState*) const override {
        StrainSpaceDerivatives out = quadratic_base(e, c_, true);
        // Mesh-consistent offset (dl/zeta)^2 in integrated-strain units.
        const double offset = e.voronoi * e.voronoi / zeta2_;
        add_quartic_coupling(out, e, c_, offset);
        return out;
    }

  private:
    double zeta2_;
};

class AudolyModel final : public EnergyModel {
  public:
    explicit AudolyModel(const Stiffness& c) : EnergyModel(c) {}
    ModelKind kind() const override { return ModelKind::audoly; }
    StrainSpaceDerivatives evaluate(const ElementStrainState& e,
                                    const ElementStrainState*,
                                    const ElementStrainState*) const override {
        StrainSpaceDerivatives out = quadratic_base(e, c_, true);
        const Vec4 d = deformation(e);
        const double kap = d[2], tau = d[3];
        const double W = c_.width, b = c_.thickness, nu = c_.poisson;
        const double dl = e.voronoi;
        const double B = 3.0 * c_.EI2 * W * W * W * W / (b * b * dl * dl * dl);
        const double cv = std::sqrt(12.0 * (1.0 - nu * nu)) * W * W / (b * dl);
        const double v = cv * kap;
        double phi, dphi, d2phi;
        audoly_phi(v, phi, dphi, d2phi);
        const double S = nu * kap * kap + tau * tau;
        out.energy += B * S * S * phi;
        out.grad[2] += 4.0 * B * S * nu * kap * phi + B * S * S * dphi * cv;
        out.grad[3] += 4.0 * B * S * tau * phi;
        out.hess(2, 2) += 4.0 * B * nu * (2.0 * nu * kap * kap + S) * phi +
                          8.0 * B * S * nu * kap * cv * dphi +
                          B * S * S * cv * cv * d2phi;
        out.hess(3, 3) += 4.0 * B * (2.0 * tau * tau + S) * phi;
        const double cross =
            8.0 * B * nu * kap * tau * phi + 4.0 * B * S * tau * cv * dphi;
        out.hess(2, 3) += cross;
        out.hess(3, 2) += cross;
        return out;
    }

};

class WunderlichModel final : public EnergyModel {
  public:
    explicit WunderlichModel(const Stiffness& c) : EnergyModel(c) {}
    ModelKind kind() const override { return ModelKind::wunderlich; }
    bool nonlocal() const override { return true; }
    StrainSpaceDerivatives evaluate(const ElementStrainState& e,
                                    const ElementStrainState* prev,
                                    const ElementStrainState* next)
        const override {
        StrainSpaceDerivatives out = quadratic_base(e, c_, false);

        const Vec4 d = deformation(e);
        const double kap = d[2], tau = d[3];
        if (std::abs(kap) < kKappaGuard)
            throw DivisionGuardError(
                "easy-axis curvature below the developable-model guard");

        // Generator-slope finite difference: central over both neighbors
        // when present, one-sided (double stride factor) at the rod ends,
        // zero when the rod has a single interior element.
        double u0 = 0.0, w0 = 0.0, cfd = 0.0;
        if (prev && next) {
            u0 = deformation(*next)[3] - deformation(*prev)[3];
            w0 = deformation(*next)[2] - deformation(*prev)[2];
            cfd = 0.5 * e.voronoi;
        } else if (next) {
            u0 = deformation(*next)[3];
            w0 = deformation(*next)[2];
            cfd = e.voronoi;
        } else if (prev) {
            u0 = -deformation(*prev)[3];
            w0 = -deformation(*prev)[2];
            cfd = e.voronoi;
        }
        const double k2 = kap * kap, k3 = k2 * kap, k4 = k2 * k2;
        const double etap = cfd * (u0 * kap - tau * w0) / k2;
        const double x = c_.width * etap;
        if (std::abs(x) >= 2.0 - kOverrunGuard)
            throw GeneratorOverrunError(
                "ruling lines leave the strip (|W eta'| reached 2)");
        double L, dL, d2L;
        generator_log_factor(x, L, dL, d2L);

        // g = (kap^2 + tau^2)^2 / kap^2 = [kap (1 + eta^2)]^2.
        const double t2 = tau * tau, t3 = t2 * tau, t4 = t2 * t2;
        const double s = k2 + t2;
        const double g = s * s / k2;
        const double g_k = 2.0 * (k4 - t4) / k3;
        const double g_t = 4.0 * tau * s / k2;
        const double g_kk = 2.0 + 6.0 * t4 / k4;
        const double g_tt = (4.0 * k2 + 12.0 * t2) / k2;
        const double g_kt = -8.0 * t3 / k3;

        // Own-strain partials of eta' (the neighbor terms u0, w0 are
        // constants with respect to this element's strains).
        const double ep_t = -cfd * w0 / k2;
        const double ep_k = cfd * (-u0 * kap + 2.0 * tau * w0) / k3;
        const double ep_tt = 0.0;
        const double ep_kt = 2.0 * cfd * w0 / k3;
        const double ep_kk = cfd * (2.0 * u0 * kap - 6.0 * tau * w0) / k4;

        const double P = 0.5 * c_.EI2 / e.voronoi;
        const double W = c_.width;
        out.energy += P * g * L;
        out.grad[2] += P * (g_k * L + g * dL * W * ep_k);
        out.grad[3] += P * (g_t * L + g * dL * W * ep_t);
        out.hess(2, 2) += P * (g_kk * L + 2.0 * g_k * dL * W * ep_k +
                               g * d2L * W * W * ep_k * ep_k +
                               g * dL * W * ep_kk);
        out.hess(3, 3) += P * (g_tt * L + 2.0 * g_t * dL * W * ep_t +
                               g * d2L * W * W * ep_t * ep_t +
                               g * dL * W * ep_tt);
        const double cross = P * (g_kt * L + g_k * dL * W * ep_t +
                                  g_t * dL * W * ep_k +
                                  g * d2L * W * W * ep_k * ep_t +
                                  g * dL * W * ep_kt);
        out.hess(2, 3) += cross;
        out.hess(3, 2) += cross;

        // First derivatives carried by the neighbor strains via eta'.
        const double gl = P * g * dL * W;
        if (prev && next) {
            out.grad_next[3] += gl * cfd / kap;
            out.grad_next[2] += -gl * cfd * tau / k2;
            out.grad_prev[3] += -gl * cfd / kap;
            out.grad_prev[2] += gl * cfd * tau / k2;
        } else if (next) {
            out.grad_next[3] += gl * cfd / kap;
            out.grad_next[2] += -gl * cfd * tau / k2;
        } else if (prev) {
            out.grad_prev[3] += -gl * cfd / kap;
            out.grad_prev[2] += gl * cfd * tau / k2;
        }
        return out;
    }

};

}  // namespace

std::unique_ptr<EnergyModel> make_energy_model(ModelKind kind,
                                               const Material& material,
                                               const Section& section,
                                               const ModelOptions& options) {
    Stiffness c(material, section);
    if (options.rod_reference_width > 0.0) {
        const double r = options.rod_reference_width / section.thickness;
        c.EI1 = c.EI2 * r * r;
    }
    switch (kind) {
        case ModelKind::kirchhoff:
            return std::make_unique<KirchhoffModel>(c);
        case ModelKind::sadowsky:
            return std::make_unique<SadowskyModel>(c,
                                                   options.sadowsky_epsilon);
        case ModelKind::sano: return std::make_unique<SanoModel>(c);
        case ModelKind::audoly: return std::make_unique<AudolyModel>(c);
        case ModelKind::wunderlich:
            return std::make_unique<WunderlichModel>(c);
    }
    throw SchemaError("invalid model kind");
}

namespace {

/// Even-series evaluation of the transition function in the variable
/// A = v^2/4. Both series have strictly positive terms, so the ratio is
/// computed without cancellation at any magnitude. Returns Phi(A) and its
/// first two A-derivatives.
void phi_series(double A, double& Phi, double& dPhi, double& d2Phi) {
    // Numerator   N(A) =   sum_{k>=1} 4k A^{k-1} / (4k+2)!
    // Denominator D(A) = 2 sum_{k>=0}    A^k     / (4k+1)!
    double N, N1, N2, D, D1, D2;
    if (A < 1e-8) {
        // Truncated Maclaurin forms; omitted terms are below A^3/14! ~ 1e-35.
        N = 1.0 / 180.0 + A * (8.0 / 3628800.0) +
            A * A * (12.0 / 87178291200.0);
        N1 = 8.0 / 3628800.0 + A * (24.0 / 87178291200.0);
        N2 = 24.0 / 87178291200.0;
        D = 2.0 + A / 60.0 + A * A / 181440.0;
        D1 = 1.0 / 60.0 + A / 90720.0;
        D2 = 1.0 / 90720.0;
    } else {
        double tn = 4.0 / 720.0;  // k = 1 term of N
        double td = 2.0;          // k = 0 term of D
        N = tn;
        D = td;
        N1 = N2 = D1 = D2 = 0.0;
        for (int k = 1; k < 400; ++k) {
            const double kk = static_cast<double>(k);
            td *= A / ((4 * kk - 2) * (4 * kk - 1) * (4 * kk) * (4 * kk + 1));
            D += td;
            const double td1 = td * kk / A;
            D1 += td1;
            if (k >= 2) {
                D2 += td1 * (kk - 1) / A;
                tn *= (kk / (kk - 1)) * A /
                      ((4 * kk - 1) * (4 * kk) * (4 * kk + 1) * (4 * kk + 2));
                N += tn;
                const double tn1 = tn * (kk - 1) / A;
                N1 += tn1;
                if (k >= 3) N2 += tn1 * (kk - 2) / A;
            }
            if (k > 4 && td < 1e-18 * D && tn < 1e-18 * N) break;
        }
    }
    Phi = N / D;
    dPhi = (N1 - Phi * D1) / D;
    d2Phi = (N2 - 2.0 * dPhi * D1 - Phi * D2) / D;
}

}  // namespace

void audoly_phi(double v, double& phi, double& dphi, double& d2phi) {
    const double A = 0.25 * v * v;
    const double z = std::sqrt(std::sqrt(std::max(A, 0.0)));
    double Phi, dPhi, d2Phi;
    if (z > 600.0) {
        // Deep asymptotic regime: cosh/sinh would overflow. Use the leading
        // behavior phi = (1/2 - 1/z) / z^4 in z = A^{1/4}.
        const double z4 = A, z5 = A * z;
        Phi = (0.5 - 1.0 / z) / z4;
        // dPhi/dA via dz/dA = 1/(4 z^3).
        const double dphidz = -4.0 / z5 * (0.5 - 1.0 / z) + 1.0 / (z4 * z * z);
        dPhi = dphidz / (4.0 * z * z * z);
        const double z6 = z4 * z * z;
        const double d2phidz2 = 10.0 / z6 - 30.0 / (z6 * z);
        d2Phi = (d2phidz2 - 3.0 / z * dphidz) / (16.0 * z6);
    } else {
        phi_series(A, Phi, dPhi, d2Phi);
    }
    phi = Phi;
    dphi = dPhi * 0.5 * v;
    d2phi = d2Phi * 0.25 * v * v + 0.5 * dPhi;
}

double audoly_phi(double v) {
    double phi, dphi, d2phi;
    audoly_phi(v, phi, dphi, d2phi);
    return phi;
}

void generator_log_factor(double x, double& L, double& dL, double& d2L) {
    if (std::abs(x) >= 2.0 - kOverrunGuard)
        throw GeneratorOverrunError("log factor argument |x| reached 2");
    if (std::abs(x) < kLogSeriesSwitch) {
        const double x2 = x * x;
        L = 1.0 + x2 / 12.0 + x2 * x2 / 80.0;
        dL = x / 6.0 + x * x2 / 20.0;
        d2L = 1.0 / 6.0 + 3.0 * x2 / 20.0;
        return;
    }
    const double a = 1.0 / (1.0 - 0.25 * x * x);
    L = std::log((2.0 + x) / (2.0 - x)) / x;
    dL = (a - L) / x;
    const double da = 0.5 * x * a * a;
    d2L = (da - 2.0 * dL) / x;
}

}  // namespace ribsim
