#pragma once

#include <cmath>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "liesym/algebra.hpp"
#include "liesym/errors.hpp"

namespace liesym {

enum class Realization { Su2Quaternion, GenericChart };

/// A group element: a unit quaternion (w,x,y,z) for SU(2), or exponential-chart
/// coordinates for a generic algebra.
class GroupElement {
public:
    GroupElement(Realization r, Vec payload) : realization_(r), payload_(std::move(payload)) {}

    static GroupElement su2(double w, double x, double y, double z) {
        Vec q(4);
        q << w, x, y, z;
        return GroupElement(Realization::Su2Quaternion, std::move(q));
    }

    Realization realization() const { return realization_; }
    const Vec& payload() const { return payload_; }
    Vec& payload() { return payload_; }

    // su2 accessors
    double w() const { return payload_(0); }
    Eigen::Vector3d vec3() const { return payload_.segment(1, 3); }

    /// Projects a drifted quaternion back to the unit sphere.
    void renormalize() {
        if (realization_ == Realization::Su2Quaternion) payload_ /= payload_.norm();
    }

private:
    Realization realization_;
    Vec payload_;
};

namespace quat {

inline Vec mul(const Vec& a, const Vec& b) {
    Vec r(4);
    r(0) = a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
    r(1) = a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2);
    r(2) = a(0) * b(2) + a(2) * b(0) + a(3) * b(1) - a(1) * b(3);
    r(3) = a(0) * b(3) + a(3) * b(0) + a(1) * b(2) - a(2) * b(1);
    return r;
}

inline Vec conj(const Vec& a) {
    Vec r(4);
    r << a(0), -a(1), -a(2), -a(3);
    return r;
}

/// Rotation matrix of a unit quaternion; equals the adjoint action on su(2).
inline Mat rotation(const Vec& q) {
    const double w = q(0), x = q(1), y = q(2), z = q(3);
    Mat R(3, 3);
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

} // namespace quat

enum class Chart { Holonomic, Body, Space };

/// A phase-space point in one of the three momentum charts.
struct ChartPoint {
    Chart chart;
    GroupElement g;
    Vec momentum;
};

/// Lie group arithmetic over a fixed StructureConstants instance.
///
/// The SU(2) realization is exact (unit quaternions, generators scaled so
/// [e_a, e_b] = eps^c_{ab} e_c, group rate gdot = (1/2) g*Omega_hat).  The
/// generic realization composes exponential charts through the BCH series
/// truncated at order 4 and is documented as approximate near identity.
class LieGroup {
public:
    static LieGroup su2() { return LieGroup(StructureConstants::su2(), Realization::Su2Quaternion); }

    static LieGroup generic(StructureConstants fc) {
        return LieGroup(std::move(fc), Realization::GenericChart);
    }

    const StructureConstants& algebra() const { return fc_; }
    Realization realization() const { return realization_; }
    int dim() const { return fc_.dim(); }
    /// Size of the element payload (4 for quaternions, N for charts).
    int payload_size() const { return realization_ == Realization::Su2Quaternion ? 4 : dim(); }

    GroupElement identity() const {
        if (realization_ == Realization::Su2Quaternion) return GroupElement::su2(1, 0, 0, 0);
        return GroupElement(realization_, Vec::Zero(dim()));
    }

    GroupElement compose(const GroupElement& g, const GroupElement& h) const {
        require_same(g, h);
        if (realization_ == Realization::Su2Quaternion)
            return GroupElement(realization_, quat::mul(g.payload(), h.payload()));
        return exp(bch4(log(g), log(h)));
    }

    GroupElement inverse(const GroupElement& g) const {
        require(g);
        if (realization_ == Realization::Su2Quaternion)
            return GroupElement(realization_, quat::conj(g.payload()));
        return GroupElement(realization_, -g.payload());
    }

    GroupElement exp(const AlgebraVector& u) const {
        if (u.dim() != dim()) throw std::invalid_argument("exp: dimension mismatch");
        if (realization_ == Realization::GenericChart) return GroupElement(realization_, u.c);
        const double th = u.norm();          // rotation angle; quaternion half-angle th/2
        const double half = 0.5 * th;
        double sinc_half;                    // sin(th/2)/th
        if (th < 1e-8) {
            sinc_half = 0.5 - th * th / 48.0;
        } else {
            sinc_half = std::sin(half) / th;
        }
        Vec q(4);
        q(0) = std::cos(half);
        q.segment(1, 3) = sinc_half * u.c;
        return GroupElement(realization_, std::move(q));
    }

    /// Principal branch; the antipodal quaternion (angle 2*pi) has no
    /// preferred axis and is rejected.
    AlgebraVector log(const GroupElement& g) const {
        require(g);
        if (realization_ == Realization::GenericChart) return AlgebraVector(g.payload());
        const double w = g.w();
        const Eigen::Vector3d v = g.vec3();
        const double s = v.norm();
        if (s < 1e-12) {
            if (w < 0.0)
                throw std::domain_error("log undefined at the antipodal element");
            return AlgebraVector(Vec(2.0 / w * v));
        }
        const double half = std::atan2(s, w); // in (0, pi)
        return AlgebraVector(Vec(2.0 * half / s * v));
    }

    /// Adjoint representation acting on AlgebraVector components.
    Mat adjoint(const GroupElement& g) const {
        require(g);
        if (realization_ == Realization::Su2Quaternion) return quat::rotation(g.payload());
        return fc_.ad_matrix(log(g)).exp();
    }

    /// Coadjoint matrix K(g) with K_mu^nu(g) = Ad^nu_mu(g^{-1}); pi_R = K(g) pi_L.
    Mat coadjoint(const GroupElement& g) const { return adjoint(inverse(g)).transpose(); }

    /// Left-trivialized velocity Omega_L from an element rate.  For SU(2) the
    /// rate is a quaternion rate orthogonal to g; otherwise a chart rate.
    AlgebraVector body_velocity(const GroupElement& g, const Vec& gdot) const {
        require(g);
        if (realization_ == Realization::Su2Quaternion) {
            if (gdot.size() != 4) throw std::invalid_argument("body_velocity: quaternion rate expected");
            const double tangency = std::abs(g.payload().dot(gdot));
            if (tangency > 1e-8 * std::max(1.0, gdot.norm()))
                throw std::invalid_argument("body_velocity: rate is not tangent to the unit sphere");
            Vec omega_hat = quat::mul(quat::conj(g.payload()), gdot);
            return AlgebraVector(Vec(2.0 * omega_hat.segment(1, 3)));
        }
        if (gdot.size() != dim()) throw std::invalid_argument("body_velocity: dimension mismatch");
        return AlgebraVector(Vec(coframe_matrix(g) * gdot));
    }

    /// Inverse of body_velocity: the element rate realizing Omega_L at g.
    Vec group_rate(const GroupElement& g, const AlgebraVector& omega) const {
        require(g);
        if (omega.dim() != dim()) throw std::invalid_argument("group_rate: dimension mismatch");
        if (realization_ == Realization::Su2Quaternion) {
            Vec omega_hat(4);
            omega_hat << 0.0, omega.c(0), omega.c(1), omega.c(2);
            return 0.5 * quat::mul(g.payload(), omega_hat);
        }
        return frame_matrix(g) * omega.c;
    }

    /// L^mu_alpha(g,e): components of the left-invariant frame in holonomic
    /// (exponential-chart) coordinates.  Closed form for su(2); BCH order-4
    /// truncation for generic algebras.
    Mat frame_matrix(const GroupElement& g) const {
        const AlgebraVector u = log(g);
        const Mat ad = fc_.ad_matrix(u);
        if (realization_ == Realization::Su2Quaternion) {
            const double th = u.norm();
            double c;                        // coefficient of ad^2 in ad/(1 - e^{-ad})
            if (th < 1e-4) {
                const double t2 = th * th;
                c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
            } else {
                c = 1.0 / (th * th) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
            }
            return Mat::Identity(3, 3) + 0.5 * ad + c * ad * ad;
        }
        return Mat::Identity(dim(), dim()) + 0.5 * ad + (1.0 / 12.0) * ad * ad;
    }

    /// A^alpha_mu with eps^alpha_L = A^alpha_mu dg^mu; inverse of frame_matrix.
    Mat coframe_matrix(const GroupElement& g) const {
        if (realization_ == Realization::Su2Quaternion) {
            const AlgebraVector u = log(g);
            const Mat ad = fc_.ad_matrix(u);
            const double th = u.norm();
            double c1, c2;                   // (1 - e^{-ad})/ad = I - c1 ad + c2 ad^2
            if (th < 1e-4) {
                const double t2 = th * th;
                c1 = 0.5 - t2 / 24.0;
                c2 = 1.0 / 6.0 - t2 / 120.0;
            } else {
                c1 = (1.0 - std::cos(th)) / (th * th);
                c2 = (th - std::sin(th)) / (th * th * th);
            }
            return Mat::Identity(3, 3) - c1 * ad + c2 * ad * ad;
        }
        return frame_matrix(g).inverse();
    }

    /// Change of momentum chart.  Holonomic <-> body uses pi_mu = p_nu L^nu_mu(g,e);
    /// body <-> space uses pi_R = K(g) pi_L.  The holonomic chart is defined only
    /// for the SU(2) realization.
    ChartPoint convert(const ChartPoint& p, Chart target) const {
        require(p.g);
        if (p.momentum.size() != dim()) throw std::invalid_argument("convert: dimension mismatch");
        if (p.chart == target) return p;
        if ((p.chart == Chart::Holonomic || target == Chart::Holonomic) &&
            realization_ == Realization::GenericChart)
            throw UnsupportedOperation("holonomic chart is not defined for the generic realization");

        Vec body;
        switch (p.chart) {
            case Chart::Body: body = p.momentum; break;
            case Chart::Holonomic: body = frame_matrix(p.g).transpose() * p.momentum; break;
            case Chart::Space: body = coadjoint(inverse(p.g)) * p.momentum; break;
        }
        Vec out;
        switch (target) {
            case Chart::Body: out = body; break;
            case Chart::Holonomic: out = coframe_matrix(p.g).transpose() * body; break;
            case Chart::Space: out = coadjoint(p.g) * body; break;
        }
        return ChartPoint{target, p.g, std::move(out)};
    }

    /// BCH series z(u,v) truncated at order 4; exact whenever [u,v] = 0.
    AlgebraVector bch4(const AlgebraVector& u, const AlgebraVector& v) const {
        const AlgebraVector uv = fc_.bracket(u, v);
        const AlgebraVector uuv = fc_.bracket(u, uv);
        const AlgebraVector vuv = fc_.bracket(v, uv);
        const AlgebraVector vuuv = fc_.bracket(v, uuv);
        Vec z = u.c + v.c + 0.5 * uv.c + (uuv.c - vuv.c) / 12.0 - vuuv.c / 24.0;
        return AlgebraVector(std::move(z));
    }

private:
    LieGroup(StructureConstants fc, Realization r) : fc_(std::move(fc)), realization_(r) {}

    void require(const GroupElement& g) const {
        if (g.realization() != realization_)
            throw std::invalid_argument("group element has the wrong realization");
        if (g.payload().size() != payload_size())
            throw std::invalid_argument("group element payload has the wrong size");
    }

    void require_same(const GroupElement& g, const GroupElement& h) const {
        require(g);
        require(h);
    }

    StructureConstants fc_;
    Realization realization_;
};

} // namespace liesym
