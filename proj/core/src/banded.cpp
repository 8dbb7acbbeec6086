// SPDX-License-Identifier: Apache-2.0

#include "ribsim/banded.hpp"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace ribsim {

BandedSystem::BandedSystem(int n, int half_bandwidth)
    : n_(n), kd_(half_bandwidth) {
    if (n < 1) throw SimError("banded system must have positive size");
    if (kd_ < 0 || kd_ > n - 1)
        throw SimError("half bandwidth must lie in [0, n-1]");
    ab_ = MatX::Zero(ldab(), n_);
}

void BandedSystem::set_zero() { ab_.setZero(); }

bool BandedSystem::in_band(int i, int j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && std::abs(i - j) <= kd_;
}

double& BandedSystem::at(int i, int j) {
    if (!in_band(i, j))
        throw SimError("banded entry (" + std::to_string(i) + "," +
                       std::to_string(j) + ") outside the band");
    return ab_(2 * kd_ + i - j, j);
}

double BandedSystem::get(int i, int j) const {
    if (!in_band(i, j)) return 0.0;
    return ab_(2 * kd_ + i - j, j);
}

void BandedSystem::add(int i, int j, double value) { at(i, j) += value; }

void BandedSystem::shift_diagonal(double value) {
    for (int j = 0; j < n_; ++j) ab_(2 * kd_, j) += value;
}

double BandedSystem::norm1() const {
    double best = 0.0;
    for (int j = 0; j < n_; ++j) {
        const int lo = std::max(0, j - kd_), hi = std::min(n_ - 1, j + kd_);
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) sum += std::abs(ab_(2 * kd_ + i - j, j));
        best = std::max(best, sum);
    }
    return best;
}

VecX BandedSystem::diagonal() const {
    VecX d(n_);
    for (int j = 0; j < n_; ++j) d[j] = ab_(2 * kd_, j);
    return d;
}

VecX BandedSystem::multiply(const VecX& x) const {
    VecX y = VecX::Zero(n_);
    for (int j = 0; j < n_; ++j) {
        const int lo = std::max(0, j - kd_), hi = std::min(n_ - 1, j + kd_);
        for (int i = lo; i <= hi; ++i) y[i] += ab_(2 * kd_ + i - j, j) * x[j];
    }
    return y;
}

MatX BandedSystem::to_dense() const {
    MatX d = MatX::Zero(n_, n_);
    for (int j = 0; j < n_; ++j) {
        const int lo = std::max(0, j - kd_), hi = std::min(n_ - 1, j + kd_);
        for (int i = lo; i <= hi; ++i) d(i, j) = ab_(2 * kd_ + i - j, j);
    }
    return d;
}

namespace {

/// Banded LU factors of A (or A + lambda I) with the pivot bookkeeping
/// needed by the condition estimator and the triangular solves.
struct BandedLU {
    MatX lu;
    std::vector<lapack_int> ipiv;
    int n = 0, kd = 0;
    bool ok = false;

    BandedLU(const BandedSystem& a, double lambda) {
        n = a.size();
        kd = a.half_bandwidth();
        lu = a.storage();
        if (lambda != 0.0)
            for (int j = 0; j < n; ++j) lu(2 * kd, j) += lambda;
        ipiv.assign(static_cast<size_t>(n), 0);
        const lapack_int info = LAPACKE_dgbtrf(
            LAPACK_COL_MAJOR, n, n, kd, kd, lu.data(),
            static_cast<lapack_int>(lu.rows()), ipiv.data());
        ok = (info == 0);
    }

    /// 1-norm condition estimate; infinity when the factorization broke
    /// down or the estimator reports exact singularity.
    double condition(double anorm) const {
        if (!ok) return std::numeric_limits<double>::infinity();
        double rcond = 0.0;
        const lapack_int info = LAPACKE_dgbcon(
            LAPACK_COL_MAJOR, '1', n, kd, kd, lu.data(),
            static_cast<lapack_int>(lu.rows()), ipiv.data(), anorm, &rcond);
        if (info != 0 || rcond <= 0.0)
            return std::numeric_limits<double>::infinity();
        return 1.0 / rcond;
    }

    bool solve(VecX& rhs) const {
        if (!ok) return false;
        const lapack_int info = LAPACKE_dgbtrs(
            LAPACK_COL_MAJOR, 'N', n, kd, kd, 1, lu.data(),
            static_cast<lapack_int>(lu.rows()), ipiv.data(), rhs.data(), n);
        return info == 0 && rhs.allFinite();
    }
};

/// Dense minimum-norm least-squares solve, truncating singular values below
/// 1 / condition_limit of the largest.
bool least_squares_solve(const BandedSystem& J, const VecX& r, double rcond,
                         VecX& out) {
    const int n = J.size();
    MatX a = J.to_dense();
    MatX b = r;
    VecX sv(n);
    lapack_int rank = 0;
    const lapack_int info = LAPACKE_dgelsd(
        LAPACK_COL_MAJOR, n, n, 1, a.data(), n, b.data(), n, sv.data(), rcond,
        &rank);
    if (info != 0 || !b.allFinite()) return false;
    out = b.col(0);
    return true;
}

}  // namespace

VecX robust_solve(const BandedSystem& J, const VecX& r,
                  const RobustSolveSettings& settings, SolveReport* report,
                  const BandedSystem* condition_gate) {
    if (r.size() != J.size())
        throw SimError("right-hand side size does not match the system");
    const BandedSystem& gate = condition_gate ? *condition_gate : J;
    if (gate.size() != J.size())
        throw SimError("condition gate size does not match the system");

    SolveReport rep;
    const double anorm = gate.norm1();
    VecX x;

    // Direct path: factor the gate once for the condition estimate; when the
    // gate is the system itself the same factors do the solve.
    {
        const BandedLU gate_lu(gate, 0.0);
        rep.condition = gate_lu.condition(anorm);
        if (rep.condition < settings.condition_limit) {
            bool solved = false;
            if (condition_gate == nullptr || condition_gate == &J) {
                x = r;
                solved = gate_lu.solve(x);
            } else {
                const BandedLU sys_lu(J, 0.0);
                x = r;
                solved = sys_lu.ok && sys_lu.solve(x);
            }
            if (solved) {
                if (report) *report = rep;
                return x;
            }
        }
    }

    // Escalation ladder: grow the shift tenfold until the shifted gate is
    // acceptably conditioned, then solve the identically shifted system.
    double lambda = settings.lambda0_scale * anorm;
    if (!(lambda > 0.0)) lambda = settings.lambda0_scale;
    for (int k = 0; k <= settings.max_escalations; ++k) {
        const BandedLU gate_lu(gate, lambda);
        const double cond = gate_lu.condition(anorm + lambda);
        if (cond < settings.condition_limit) {
            const BandedLU sys_lu(J, lambda);
            x = r;
            if (sys_lu.ok && sys_lu.solve(x)) {
                rep.lambda = lambda;
                rep.condition = cond;
                rep.escalations = k;
                if (report) *report = rep;
                return x;
            }
        }
        lambda *= 10.0;
    }

    // Last resort: dense truncated-SVD minimum-norm solution.
    if (least_squares_solve(J, r, 1.0 / settings.condition_limit, x)) {
        rep.least_squares = true;
        if (report) *report = rep;
        return x;
    }
    throw SolveFailedError(
        "linear solve failed: direct, regularized and least-squares routes "
        "all broke down");
}

}  // namespace ribsim
