#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "liesym/algebra.hpp"
#include "liesym/group.hpp"

namespace liesym {

/// One-cochain theta on the algebra with values in its dual;
/// components theta(alpha, mu) = <theta(e_mu) | e_alpha>.
struct OneCochain {
    Mat theta;

    explicit OneCochain(Mat m) : theta(std::move(m)) {
        if (theta.rows() != theta.cols()) throw std::invalid_argument("one-cochain must be square");
    }
    int dim() const { return static_cast<int>(theta.rows()); }
};

/// Rank-3 coboundary tensor indexed as [mu](nu, alpha).
using CoboundaryTensor = std::vector<Mat>;

/// Components of (delta_1 theta)(e_mu, e_nu) paired with e_alpha, from
/// delta_1 theta (u,v) = k(u) theta(v) - k(v) theta(u) - theta([u,v]):
///   -theta_{kappa,nu} f^kappa_{mu alpha} + theta_{kappa,mu} f^kappa_{nu alpha}
///   - theta_{alpha,kappa} f^kappa_{mu nu}.
inline CoboundaryTensor coboundary_d1(const StructureConstants& fc, const OneCochain& th) {
    const int n = fc.dim();
    if (th.dim() != n) throw std::invalid_argument("coboundary_d1: dimension mismatch");
    CoboundaryTensor out(n, Mat::Zero(n, n));
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
            for (int a = 0; a < n; ++a) {
                double s = 0.0;
                for (int k = 0; k < n; ++k)
                    s += -th.theta(k, nu) * fc.f(k, mu, a)
                       + th.theta(k, mu) * fc.f(k, nu, a)
                       - th.theta(a, k) * fc.f(k, mu, nu);
                out[mu](nu, a) = s;
            }
    return out;
}

struct CocycleCheck {
    bool ok;
    double residual;        // max |R_{alpha beta gamma}|
    int worst[3];           // index triple attaining the maximum
};

/// Closure residual R_{abc} = -Theta_{kc} f^k_{ab} + Theta_{kb} f^k_{ac} - Theta_{ka} f^k_{bc};
/// true iff max|R| < 1e-12.
inline CocycleCheck two_cocycle_check(const StructureConstants& fc, const Mat& Theta) {
    const int n = fc.dim();
    if (Theta.rows() != n || Theta.cols() != n)
        throw std::invalid_argument("two_cocycle_check: dimension mismatch");
    const double scale = std::max(1.0, Theta.cwiseAbs().maxCoeff());
    if ((Theta + Theta.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("two_cocycle_check: input must be antisymmetric");
    CocycleCheck r{true, 0.0, {0, 0, 0}};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int k = 0; k < n; ++k)
                    s += -Theta(k, c) * fc.f(k, a, b)
                       + Theta(k, b) * fc.f(k, a, c)
                       - Theta(k, a) * fc.f(k, b, c);
                if (std::abs(s) > r.residual) {
                    r.residual = std::abs(s);
                    r.worst[0] = a;
                    r.worst[1] = b;
                    r.worst[2] = c;
                }
            }
    r.ok = r.residual < 1e-12;
    return r;
}

/// Antisymmetric 2-cocycle Theta_{alpha beta}, validated at construction so the
/// flows can assume closure without rechecking.  Stored as the strict lower
/// triangle; the reconstructed matrix is exactly antisymmetric.  When Theta is
/// a coboundary, the generating dual vector xi is recovered and kept.
class TwoCocycle {
public:
    TwoCocycle(const StructureConstants& fc, const Mat& Theta) {
        init(fc, Theta);
    }

    static TwoCocycle zero(int dim) {
        TwoCocycle t;
        t.dim_ = dim;
        t.lower_.assign(static_cast<size_t>(dim) * dim, 0.0);
        t.matrix_ = Mat::Zero(dim, dim);
        t.xi_ = Vec::Zero(dim);
        return t;
    }

    /// Coboundary cocycle Theta_{ab} = -xi_mu f^mu_{ab}.  Only semisimple
    /// algebras guarantee that every cocycle arises this way, so the
    /// construction is restricted to them.
    static TwoCocycle from_xi(const StructureConstants& fc, const DualVector& xi) {
        if (!fc.semisimple())
            throw UnsupportedOperation("coboundary construction requires a semisimple algebra");
        if (xi.dim() != fc.dim()) throw std::invalid_argument("from_xi: dimension mismatch");
        TwoCocycle t;
        t.init(fc, -fc.contract(xi.c));
        t.xi_ = xi.c;
        return t;
    }

    int dim() const { return dim_; }
    const Mat& matrix() const { return matrix_; }
    const std::optional<Vec>& xi() const { return xi_; }
    bool is_zero() const { return matrix_.cwiseAbs().maxCoeff() == 0.0; }

private:
    TwoCocycle() = default;

    void init(const StructureConstants& fc, const Mat& Theta) {
        const CocycleCheck chk = two_cocycle_check(fc, Theta); // also rejects asymmetry
        if (!chk.ok) {
            std::ostringstream os;
            os << "two-form fails the 2-cocycle closure condition: residual " << chk.residual
               << " on index triple (" << chk.worst[0] + 1 << "," << chk.worst[1] + 1 << ","
               << chk.worst[2] + 1 << ")";
            throw std::invalid_argument(os.str());
        }
        dim_ = fc.dim();
        lower_.assign(static_cast<size_t>(dim_) * dim_, 0.0);
        matrix_ = Mat::Zero(dim_, dim_);
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < a; ++b) {
                lower_[static_cast<size_t>(a) * dim_ + b] = Theta(a, b);
                matrix_(a, b) = Theta(a, b);
                matrix_(b, a) = -Theta(a, b);
            }
        recover_xi(fc);
    }

    // Solve Theta_{ab} = -xi_mu f^mu_{ab} in the least-squares sense; keep xi
    // only when the fit is exact (it is, on any semisimple algebra).
    void recover_xi(const StructureConstants& fc) {
        const int n = dim_;
        const int rows = n * (n - 1) / 2;
        Mat A(rows, n);
        Vec b(rows);
        int r = 0;
        for (int a = 0; a < n; ++a)
            for (int c = a + 1; c < n; ++c, ++r) {
                for (int mu = 0; mu < n; ++mu) A(r, mu) = -fc.f(mu, a, c);
                b(r) = matrix_(a, c);
            }
        Vec xi = A.colPivHouseholderQr().solve(b);
        const double resid = (A * xi - b).norm();
        const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
        if (resid < 1e-10 * scale) xi_ = std::move(xi);
    }

    int dim_ = 0;
    std::vector<double> lower_;
    Mat matrix_;
    std::optional<Vec> xi_;
};

/// Constant antisymmetric bivector Upsilon^{mu nu} on momentum space (the
/// "dual magnetic field" making configuration coordinates noncommute).
/// Exactly antisymmetric by construction from its strict lower triangle.
class MomentumBivector {
public:
    explicit MomentumBivector(const Mat& U) {
        if (U.rows() != U.cols()) throw std::invalid_argument("bivector must be square");
        const double scale = std::max(1.0, U.cwiseAbs().maxCoeff());
        if ((U + U.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw std::invalid_argument("bivector must be antisymmetric");
        dim_ = static_cast<int>(U.rows());
        matrix_ = Mat::Zero(dim_, dim_);
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < a; ++b) {
                matrix_(a, b) = U(a, b);
                matrix_(b, a) = -U(a, b);
            }
    }

    static MomentumBivector zero(int dim) { return MomentumBivector(Mat::Zero(dim, dim)); }

    /// Upsilon^{mu nu} = tau^lambda eps_lambda^{mu nu} (three dimensions only).
    static MomentumBivector from_tau(const StructureConstants& fc, const Vec& tau) {
        if (fc.dim() != 3 || tau.size() != 3)
            throw std::invalid_argument("tau form requires a three-dimensional algebra");
        Mat U(3, 3);
        for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l) s += tau(l) * StructureConstants::levi_civita(l, m, n);
                U(m, n) = s;
            }
        return MomentumBivector(U);
    }

    int dim() const { return dim_; }
    const Mat& matrix() const { return matrix_; }
    bool is_zero() const { return matrix_.cwiseAbs().maxCoeff() == 0.0; }

    /// Inverse of from_tau; meaningful in three dimensions.
    Vec tau() const {
        if (dim_ != 3) throw UnsupportedOperation("tau is defined only in three dimensions");
        Vec t(3);
        t << matrix_(1, 2), matrix_(2, 0), matrix_(0, 1);
        return t;
    }

    /// sqrt(sum of squares of independent entries); equals |tau| in 3-D.
    double strength() const { return matrix_.norm() / std::sqrt(2.0); }

private:
    int dim_ = 0;
    Mat matrix_;
};

/// Two-form coefficient field on a chart: x -> antisymmetric matrix W(x).
using FormField = std::function<Mat(const Vec&)>;

/// Max over index triples of the finite-difference exterior derivative
///   (dW)_{ijk} = d_i W_{jk} - d_j W_{ik} + d_k W_{ij}
/// with central differences of step h.  Second-order accurate: the residual of
/// a closed form scales as O(h^2).
inline double closedness_residual(const FormField& field, const Vec& x, double h) {
    if (h <= 0.0) throw std::invalid_argument("closedness_residual: step must be positive");
    const int m = static_cast<int>(x.size());
    std::vector<Mat> dW(m);
    for (int i = 0; i < m; ++i) {
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        dW[i] = (field(xp) - field(xm)) / (2.0 * h);
    }
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (int k = j + 1; k < m; ++k)
                worst = std::max(worst, std::abs(dW[i](j, k) - dW[j](i, k) + dW[k](i, j)));
    return worst;
}

/// Coefficients of the left-invariant two-form (1/2) Theta_{ab} eps^a_L ^ eps^b_L
/// in the exponential chart: W(u) = A(u)^T Theta A(u).  Evaluations too close
/// to the chart boundary |u| = 2*pi are rejected.
inline FormField left_invariant_form_field(const LieGroup& group, Mat Theta, double margin = 0.0) {
    if (group.realization() != Realization::Su2Quaternion)
        throw UnsupportedOperation("chart-coefficient fields are provided for the su(2) realization");
    return [group, Theta = std::move(Theta), margin](const Vec& u) {
        if (u.norm() + margin >= 2.0 * M_PI - 1e-6)
            throw std::domain_error("point too close to the exponential-chart boundary");
        const Mat A = group.coframe_matrix(group.exp(AlgebraVector(u)));
        return Mat(A.transpose() * Theta * A);
    };
}

} // namespace liesym
