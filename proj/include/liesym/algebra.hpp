#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "liesym/errors.hpp"

namespace liesym {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Element of the Lie algebra in the fixed basis {e_alpha}.
struct AlgebraVector {
    Vec c;

    AlgebraVector() = default;
    explicit AlgebraVector(Vec components) : c(std::move(components)) {}
    static AlgebraVector zero(int dim) { return AlgebraVector(Vec::Zero(dim)); }

    int dim() const { return static_cast<int>(c.size()); }
    double norm() const { return c.norm(); }
};

/// Element of the dual algebra in the dual basis {eps^mu} (momentum-like).
struct DualVector {
    Vec c;

    DualVector() = default;
    explicit DualVector(Vec components) : c(std::move(components)) {}
    static DualVector zero(int dim) { return DualVector(Vec::Zero(dim)); }

    int dim() const { return static_cast<int>(c.size()); }
    double norm() const { return c.norm(); }
};

/// Canonical pairing (pi | u).
inline double pairing(const DualVector& pi, const AlgebraVector& u) {
    return pi.c.dot(u.c);
}

/// Structure constants f^mu_{alpha beta} of an N-dimensional Lie algebra,
/// stored per upper index, together with the Killing form
/// eta_{alpha beta} = f^mu_{alpha nu} f^nu_{beta mu}.
///
/// Construction enforces antisymmetry in the lower indices and the Jacobi
/// identity; tensors failing either are rejected.
class StructureConstants {
public:
    StructureConstants(int dim, std::vector<Mat> f) : dim_(dim), f_(std::move(f)) {
        if (dim_ <= 0) throw std::invalid_argument("algebra dimension must be positive");
        if (static_cast<int>(f_.size()) != dim_)
            throw std::invalid_argument("structure-constant tensor has wrong upper-index range");
        for (const Mat& m : f_)
            if (m.rows() != dim_ || m.cols() != dim_)
                throw std::invalid_argument("structure-constant slice has wrong shape");
        enforce_antisymmetry();
        check_jacobi();
        killing_ = compute_killing();
        semisimple_ = killing_nondegenerate();
    }

    /// su(2) in the basis where [e_a, e_b] = eps^c_{ab} e_c (Levi-Civita).
    static StructureConstants su2() {
        std::vector<Mat> f(3, Mat::Zero(3, 3));
        for (int m = 0; m < 3; ++m)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) f[m](a, b) = levi_civita(m, a, b);
        StructureConstants fc(3, std::move(f));
        fc.builtin_su2_ = true;
        return fc;
    }

    int dim() const { return dim_; }
    double f(int mu, int alpha, int beta) const { return f_[mu](alpha, beta); }
    const Mat& f_slice(int mu) const { return f_[mu]; }
    const Mat& killing() const { return killing_; }
    bool semisimple() const { return semisimple_; }
    bool is_builtin_su2() const { return builtin_su2_; }

    /// X_{alpha beta} = x_mu f^mu_{alpha beta}; the recurring contraction
    /// behind S-blocks, coboundaries and tau-form bivectors.
    Mat contract(const Vec& x) const {
        require_dim(static_cast<int>(x.size()));
        Mat out = Mat::Zero(dim_, dim_);
        for (int mu = 0; mu < dim_; ++mu)
            if (x(mu) != 0.0) out += x(mu) * f_[mu];
        return out;
    }

    /// (ad u)^mu_beta = f^mu_{alpha beta} u^alpha.
    Mat ad_matrix(const AlgebraVector& u) const {
        require_dim(u.dim());
        Mat out = Mat::Zero(dim_, dim_);
        for (int mu = 0; mu < dim_; ++mu)
            for (int beta = 0; beta < dim_; ++beta) {
                double s = 0.0;
                for (int alpha = 0; alpha < dim_; ++alpha) s += f_[mu](alpha, beta) * u.c(alpha);
                out(mu, beta) = s;
            }
        return out;
    }

    /// Coadjoint action k(u) = -(ad u)^T on dual vectors.
    Mat coad_matrix(const AlgebraVector& u) const { return -ad_matrix(u).transpose(); }

    /// [u, v]^mu = f^mu_{alpha beta} u^alpha v^beta.
    AlgebraVector bracket(const AlgebraVector& u, const AlgebraVector& v) const {
        require_dim(u.dim());
        require_dim(v.dim());
        Vec w(dim_);
        for (int mu = 0; mu < dim_; ++mu) w(mu) = u.c.dot(f_[mu] * v.c);
        return AlgebraVector(std::move(w));
    }

    static double levi_civita(int i, int j, int k) {
        if (i == j || j == k || i == k) return 0.0;
        // parity of the permutation (i j k) of (0 1 2)
        return ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
    }

private:
    void require_dim(int n) const {
        if (n != dim_) {
            std::ostringstream os;
            os << "dimension mismatch: expected " << dim_ << ", got " << n;
            throw std::invalid_argument(os.str());
        }
    }

    void enforce_antisymmetry() {
        double scale = 0.0;
        for (const Mat& m : f_) scale = std::max(scale, m.cwiseAbs().maxCoeff());
        const double tol = 1e-12 * std::max(1.0, scale);
        for (Mat& m : f_) {
            for (int a = 0; a < dim_; ++a) {
                if (std::abs(m(a, a)) > tol)
                    throw std::invalid_argument("structure constants not antisymmetric in lower indices");
                m(a, a) = 0.0;
                for (int b = a + 1; b < dim_; ++b) {
                    if (std::abs(m(a, b) + m(b, a)) > tol)
                        throw std::invalid_argument("structure constants not antisymmetric in lower indices");
                    m(b, a) = -m(a, b);
                }
            }
        }
    }

    void check_jacobi() const {
        double scale = 0.0;
        for (const Mat& m : f_) scale = std::max(scale, m.cwiseAbs().maxCoeff());
        const double tol = 1e-10 * std::max(1.0, scale * scale);
        for (int mu = 0; mu < dim_; ++mu)
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b)
                    for (int g = 0; g < dim_; ++g) {
                        double s = 0.0;
                        for (int nu = 0; nu < dim_; ++nu)
                            s += f_[mu](a, nu) * f_[nu](b, g)
                               + f_[mu](b, nu) * f_[nu](g, a)
                               + f_[mu](g, nu) * f_[nu](a, b);
                        if (std::abs(s) > tol)
                            throw std::invalid_argument("structure constants violate the Jacobi identity");
                    }
    }

    Mat compute_killing() const {
        Mat eta = Mat::Zero(dim_, dim_);
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b) {
                double s = 0.0;
                for (int mu = 0; mu < dim_; ++mu)
                    for (int nu = 0; nu < dim_; ++nu) s += f_[mu](a, nu) * f_[nu](b, mu);
                eta(a, b) = s;
            }
        return eta;
    }

    bool killing_nondegenerate() const {
        const double scale = killing_.cwiseAbs().maxCoeff();
        if (scale == 0.0) return false;
        const double det = killing_.determinant();
        return std::abs(det) > 1e-9 * std::pow(scale, dim_);
    }

    int dim_;
    std::vector<Mat> f_;
    Mat killing_;
    bool semisimple_ = false;
    bool builtin_su2_ = false;
};

} // namespace liesym
