// SPDX-License-Identifier: Apache-2.0
//
// Band-profile linear algebra. The element stencil couples at most three
// consecutive nodes with their flanking edge angles, so with the interleaved
// DOF layout the tangent systems have half-bandwidth 10; they are stored in
// the LAPACK general-band layout and solved by banded LU, with a Tikhonov
// escalation ladder and a dense minimum-norm fallback for the rare
// near-singular configurations at instability thresholds.

#pragma once

#include "ribsim/types.hpp"

namespace ribsim {

/// Square matrix with equal lower/upper half-bandwidth, stored column-major
/// in the LAPACK general-band layout with `ldab = 3*kd + 1` rows: entry
/// (i, j) lives at storage(2*kd + i - j, j), and the top kd rows are spare
/// fill-in space so factorization can run in place on a copy.
class BandedSystem {
  public:
    static constexpr int kDefaultHalfBandwidth = 10;

    BandedSystem() = default;
    explicit BandedSystem(int n, int half_bandwidth = kDefaultHalfBandwidth);

    int size() const { return n_; }
    int half_bandwidth() const { return kd_; }
    int ldab() const { return 3 * kd_ + 1; }

    void set_zero();
    bool in_band(int i, int j) const;
    /// Mutable in-band entry; throws SimError outside the band.
    double& at(int i, int j);
    /// Entry value, zero outside the band.
    double get(int i, int j) const;
    void add(int i, int j, double value);
    void shift_diagonal(double value);

    /// Max column sum of absolute values (the 1-norm).
    double norm1() const;
    VecX diagonal() const;
    VecX multiply(const VecX& x) const;
    MatX to_dense() const;

    MatX& storage() { return ab_; }
    const MatX& storage() const { return ab_; }

  private:
    int n_ = 0;
    int kd_ = 0;
    MatX ab_;
};

struct RobustSolveSettings {
    /// Condition-number ceiling for accepting a direct factorization.
    double condition_limit = 1e12;
    /// First Tikhonov shift as a fraction of the gate matrix 1-norm.
    double lambda0_scale = 1e-12;
    /// Decades of shift escalation before the dense fallback.
    int max_escalations = 40;
};

struct SolveReport {
    double lambda = 0.0;      ///< Tikhonov shift actually applied
    double condition = 0.0;   ///< 1-norm condition estimate that gated the path
    int escalations = 0;      ///< number of tenfold shift increases
    bool least_squares = false;  ///< dense minimum-norm fallback used
};

/// Solves J dq = r. Direct banded LU when the gate matrix condition estimate
/// stays below the limit; otherwise Tikhonov shifts lambda0 * 10^k applied to
/// both J and the gate until conditioning is restored; otherwise a dense
/// minimum-norm least-squares solve. Throws SolveFailedError only when every
/// route fails.
///
/// `condition_gate` chooses the matrix whose conditioning is monitored; it
/// defaults to J itself. The implicit stepper passes the pre-penalty tangent
/// here, because the boundary-condition penalty inflates the raw condition
/// number far past any useful limit while leaving the factorization benign.
VecX robust_solve(const BandedSystem& J, const VecX& r,
                  const RobustSolveSettings& settings = {},
                  SolveReport* report = nullptr,
                  const BandedSystem* condition_gate = nullptr);

}  // namespace ribsim
