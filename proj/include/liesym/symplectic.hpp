#pragma once

#include <cmath>
#include <utility>

#include "liesym/algebra.hpp"
#include "liesym/cocycle.hpp"
#include "liesym/group.hpp"

namespace liesym {

/// State evolved by every flow: group element plus body momentum pi_L.
struct PhasePoint {
    GroupElement g;
    Vec pi;

    int dim() const { return static_cast<int>(pi.size()); }
};

enum class StructureKind { Canonical, Cocycle, Full };

inline const char* to_string(StructureKind k) {
    switch (k) {
        case StructureKind::Canonical: return "canonical";
        case StructureKind::Cocycle: return "cocycle";
        case StructureKind::Full: return "full";
    }
    return "?";
}

/// Which two-form governs the dynamics: the canonical one, the cocycle-shifted
/// one, or the doubly-extended one with a momentum bivector.  Mode and field
/// content are kept consistent at construction.
class SymplecticStructure {
public:
    static SymplecticStructure canonical(int dim) {
        return SymplecticStructure(StructureKind::Canonical, TwoCocycle::zero(dim),
                                   MomentumBivector::zero(dim));
    }

    static SymplecticStructure cocycle(TwoCocycle theta) {
        const int n = theta.dim();
        return SymplecticStructure(StructureKind::Cocycle, std::move(theta),
                                   MomentumBivector::zero(n));
    }

    static SymplecticStructure full(TwoCocycle theta, MomentumBivector upsilon) {
        if (theta.dim() != upsilon.dim())
            throw std::invalid_argument("cocycle and bivector dimensions differ");
        return SymplecticStructure(StructureKind::Full, std::move(theta), std::move(upsilon));
    }

    StructureKind kind() const { return kind_; }
    int dim() const { return theta_.dim(); }
    const TwoCocycle& theta() const { return theta_; }
    const MomentumBivector& upsilon() const { return upsilon_; }

private:
    SymplecticStructure(StructureKind k, TwoCocycle theta, MomentumBivector upsilon)
        : kind_(k), theta_(std::move(theta)), upsilon_(std::move(upsilon)) {
        if (kind_ != StructureKind::Full && !upsilon_.is_zero())
            throw std::invalid_argument("momentum bivector requires full mode");
        if (kind_ == StructureKind::Canonical && !theta_.is_zero())
            throw std::invalid_argument("canonical mode requires a vanishing cocycle");
    }

    StructureKind kind_;
    TwoCocycle theta_;
    MomentumBivector upsilon_;
};

/// Momentum-linear matrices of the extended two-form at a point:
/// S = pi.f - Theta, Phi = I + S Upsilon, Psi = I + Upsilon S, Delta = det Phi.
struct SymplecticFactors {
    Mat s;
    Mat phi;
    Mat psi;
    double delta;
};

inline SymplecticFactors symplectic_factors(const StructureConstants& fc, const Vec& pi,
                                            const SymplecticStructure& sel) {
    if (static_cast<int>(pi.size()) != fc.dim())
        throw std::invalid_argument("symplectic_factors: dimension mismatch");
    SymplecticFactors out;
    out.s = fc.contract(pi) - sel.theta().matrix();
    const int n = fc.dim();
    const Mat& U = sel.upsilon().matrix();
    out.phi = Mat::Identity(n, n) + out.s * U;
    out.psi = Mat::Identity(n, n) + U * out.s;
    out.delta = out.phi.determinant();
    return out;
}

/// Scale-aware threshold below which |Delta| flags a degenerate point.
inline double degeneracy_tolerance(const SymplecticStructure& sel, const Vec& pi) {
    const double tau = sel.upsilon().strength();
    double pp;
    if (sel.theta().xi()) {
        pp = (pi + *sel.theta().xi()).norm();
    } else {
        pp = pi.norm() + sel.theta().matrix().norm() / std::sqrt(2.0);
    }
    const double a = 1.0 + pp * tau;
    return 1e-9 * a * a;
}

/// The flow hit (or started on) the degeneracy variety; carries Delta and the point.
class DegeneratePointError : public std::runtime_error {
public:
    DegeneratePointError(double delta_value, double tolerance, PhasePoint where)
        : std::runtime_error("degenerate point: |Delta| within tolerance"),
          delta(delta_value), tol(tolerance), point(std::move(where)) {}

    double delta;
    double tol;
    PhasePoint point;
};

/// 2N x 2N coefficient matrix of the active two-form in the left-invariant
/// basis: [[S, I], [-I, Upsilon]].
inline Mat omega_matrix(const StructureConstants& fc, const Vec& pi,
                        const SymplecticStructure& sel) {
    const int n = fc.dim();
    const SymplecticFactors f = symplectic_factors(fc, pi, sel);
    Mat w = Mat::Zero(2 * n, 2 * n);
    w.topLeftCorner(n, n) = f.s;
    w.topRightCorner(n, n) = Mat::Identity(n, n);
    w.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    w.bottomRightCorner(n, n) = sel.upsilon().matrix();
    return w;
}

/// Differential of an observable at a phase point: components along the
/// left-invariant coframe (config) and the momentum partials (momentum).
struct Differential {
    Vec config;    // <dA | e^L_alpha>
    Vec momentum;  // dA/dpi_mu
};

/// Tangent vector components in the same basis.
struct TangentVector {
    Vec config;    // X^alpha
    Vec momentum;  // X_mu
};

namespace detail {

struct Inverses {
    Mat phi_inv;
    Mat psi_inv;
};

// Closed-form inverses (I - tau pi'^T)/C1 and (I - pi' tau^T)/C1 for the
// builtin su(2) algebra; dense solve otherwise.
inline Inverses invert_factors(const StructureConstants& fc, const Vec& pi,
                               const SymplecticStructure& sel, const SymplecticFactors& f) {
    Inverses inv;
    if (fc.is_builtin_su2() && sel.theta().xi()) {
        const Vec pp = pi + *sel.theta().xi();
        const Vec tau = sel.upsilon().tau();
        const double c1 = 1.0 - pp.dot(tau);
        const Mat id = Mat::Identity(3, 3);
        inv.phi_inv = (id - tau * pp.transpose()) / c1;
        inv.psi_inv = (id - pp * tau.transpose()) / c1;
    } else {
        inv.phi_inv = f.phi.inverse();
        inv.psi_inv = f.psi.inverse();
    }
    return inv;
}

} // namespace detail

/// Solves i_X omega = dA for the Hamiltonian vector field at p.  Canonical and
/// cocycle modes use the closed form; full mode goes through Phi/Psi inverses
/// and throws DegeneratePointError when |Delta| falls inside the tolerance.
/// The assembled solution is verified against the two-form before returning.
inline TangentVector hamiltonian_field(const StructureConstants& fc, const PhasePoint& p,
                                       const SymplecticStructure& sel, const Differential& dA) {
    const int n = fc.dim();
    if (dA.config.size() != n || dA.momentum.size() != n || p.dim() != n)
        throw std::invalid_argument("hamiltonian_field: dimension mismatch");
    const SymplecticFactors f = symplectic_factors(fc, p.pi, sel);

    TangentVector x;
    if (sel.kind() != StructureKind::Full || sel.upsilon().is_zero()) {
        x.config = dA.momentum;
        x.momentum = -dA.config - f.s * dA.momentum;
    } else {
        const double tol = degeneracy_tolerance(sel, p.pi);
        if (std::abs(f.delta) <= tol) throw DegeneratePointError(f.delta, tol, p);
        const detail::Inverses inv = detail::invert_factors(fc, p.pi, sel, f);
        const Mat& U = sel.upsilon().matrix();
        x.config = inv.psi_inv * (dA.momentum - U * dA.config);
        x.momentum = inv.phi_inv * (-dA.config - f.s * dA.momentum);
    }

    // backward-error check of omega^T X = dA
    Vec lhs_c = f.s.transpose() * x.config - x.momentum;
    Vec lhs_m = x.config + sel.upsilon().matrix().transpose() * x.momentum;
    const double xmag = std::max(x.config.cwiseAbs().maxCoeff(), x.momentum.cwiseAbs().maxCoeff());
    const double wmag = std::max(1.0, f.s.cwiseAbs().maxCoeff());
    const double scale = std::max({1.0, dA.config.cwiseAbs().maxCoeff(),
                                   dA.momentum.cwiseAbs().maxCoeff(), xmag * wmag});
    const double resid = std::max((lhs_c - dA.config).cwiseAbs().maxCoeff(),
                                  (lhs_m - dA.momentum).cwiseAbs().maxCoeff());
    if (resid > 1e-10 * scale)
        throw std::runtime_error("hamiltonian_field: solution failed the two-form residual check");
    return x;
}

/// {A,B} = omega(X_A, X_B); bilinear and antisymmetric.  Both fields go through
/// hamiltonian_field, so degenerate points raise the same error.
inline double poisson_bracket(const StructureConstants& fc, const PhasePoint& p,
                              const SymplecticStructure& sel, const Differential& dA,
                              const Differential& dB) {
    const TangentVector xa = hamiltonian_field(fc, p, sel, dA);
    const TangentVector xb = hamiltonian_field(fc, p, sel, dB);
    const SymplecticFactors f = symplectic_factors(fc, p.pi, sel);
    // omega(X,Y) = X^T [[S, I], [-I, U]] Y on stacked components
    const Vec top = f.s * xb.config + xb.momentum;
    const Vec bottom = -xb.config + sel.upsilon().matrix() * xb.momentum;
    return xa.config.dot(top) + xa.momentum.dot(bottom);
}

/// All pairwise brackets of the coordinate functions (g^alpha, pi_mu), as an
/// antisymmetric (2N)x(2N) table.  Configuration coordinates are the holonomic
/// (exponential-chart) coordinates, entering through L(g,e).
inline Mat fundamental_bracket_table(const LieGroup& group, const PhasePoint& p,
                                     const SymplecticStructure& sel) {
    const StructureConstants& fc = group.algebra();
    const int n = fc.dim();
    const SymplecticFactors f = symplectic_factors(fc, p.pi, sel);
    const Mat L = group.frame_matrix(p.g);

    Mat gg, gp, pp;
    if (sel.kind() != StructureKind::Full || sel.upsilon().is_zero()) {
        gg = Mat::Zero(n, n);
        gp = L;
        pp = -f.s;
    } else {
        const double tol = degeneracy_tolerance(sel, p.pi);
        if (std::abs(f.delta) <= tol) throw DegeneratePointError(f.delta, tol, p);
        const detail::Inverses inv = detail::invert_factors(fc, p.pi, sel, f);
        const Mat& U = sel.upsilon().matrix();
        gg = -L * (U * inv.phi_inv) * L.transpose();
        gp = L * inv.psi_inv;
        pp = -f.s * inv.psi_inv;
    }

    Mat table = Mat::Zero(2 * n, 2 * n);
    table.topLeftCorner(n, n) = gg;
    table.topRightCorner(n, n) = gp;
    table.bottomLeftCorner(n, n) = -gp.transpose();
    table.bottomRightCorner(n, n) = pp;
    return table;
}

/// Coefficients of the active two-form in the (exp-chart, momentum) coordinates
/// of T*(G); feed to closedness_residual.
inline FormField phase_space_form_field(const LieGroup& group, const SymplecticStructure& sel,
                                        double margin = 0.0) {
    if (group.realization() != Realization::Su2Quaternion)
        throw UnsupportedOperation("chart-coefficient fields are provided for the su(2) realization");
    return [group, sel, margin](const Vec& x) {
        const int n = group.dim();
        if (static_cast<int>(x.size()) != 2 * n)
            throw std::invalid_argument("phase-space chart point must have dimension 2N");
        const Vec u = x.head(n);
        const Vec pi = x.tail(n);
        if (u.norm() + margin >= 2.0 * M_PI - 1e-6)
            throw std::domain_error("point too close to the exponential-chart boundary");
        const Mat A = group.coframe_matrix(group.exp(AlgebraVector(u)));
        const Mat w = omega_matrix(group.algebra(), pi, sel);
        Mat out = Mat::Zero(2 * n, 2 * n);
        out.topLeftCorner(n, n) = A.transpose() * w.topLeftCorner(n, n) * A;
        out.topRightCorner(n, n) = A.transpose();
        out.bottomLeftCorner(n, n) = -A;
        out.bottomRightCorner(n, n) = w.bottomRightCorner(n, n);
        return out;
    };
}

} // namespace liesym
