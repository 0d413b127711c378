#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "liesym/dynamics.hpp"
#include "liesym/symplectic.hpp"

namespace liesym {

/// Presymplectic constraint analysis on the degenerate SU(2) stratum
/// (Gotay-Nester-Hinds).  The analysis frame is aligned so tau points along
/// e_3; general tau input is rotated in and results are reported in the
/// aligned frame together with the rotation that maps back.
class GnhProblem {
public:
    GnhProblem(const Vec& tau_vec, const Vec& xi, const InertiaTensor& inertia,
               const Potential& potential)
        : group_(LieGroup::su2()), inertia_(Mat::Identity(3, 3)), potential_(potential) {
        if (tau_vec.size() != 3 || xi.size() != 3)
            throw std::invalid_argument("constraint analysis requires su(2) data");
        tau_ = tau_vec.norm();
        if (tau_ == 0.0)
            throw std::invalid_argument("tau = 0 admits no degenerate stratum");
        rotation_ = align_rotation(tau_vec / tau_);
        xi_ = rotation_ * xi;
        inertia_ = InertiaTensor(rotation_ * inertia.matrix() * rotation_.transpose());
        if (potential_.kind == Potential::Kind::HeavyTop) {
            potential_.gamma = rotation_ * potential_.gamma;
            potential_.com = rotation_ * potential_.com;
        }
        Vec tau_aligned(3);
        tau_aligned << 0.0, 0.0, tau_;
        structure_ = SymplecticStructure::full(
            TwoCocycle::from_xi(group_.algebra(), DualVector(xi_)),
            MomentumBivector::from_tau(group_.algebra(), tau_aligned));
    }

    const LieGroup& group() const { return group_; }
    double tau() const { return tau_; }
    const Vec& xi() const { return xi_; }
    const Mat& rotation() const { return rotation_; }
    const InertiaTensor& inertia() const { return inertia_; }
    const Potential& potential() const { return potential_; }
    const SymplecticStructure& structure() const { return *structure_; }

    /// Conjugates an original-frame group element into the aligned frame.
    GroupElement align(const GroupElement& g) const {
        const GroupElement r = rotation_element();
        return group_.compose(group_.compose(r, g), group_.inverse(r));
    }

    Vec pi_prime(const PhasePoint& p) const { return p.pi + xi_; }

private:
    static Mat align_rotation(const Vec& tau_hat) {
        Eigen::Vector3d t = tau_hat;
        const Eigen::Vector3d e3(0, 0, 1);
        const Eigen::Vector3d axis_raw = t.cross(e3);
        const double s = axis_raw.norm();
        const double c = t.dot(e3);
        if (s < 1e-14) {
            if (c > 0.0) return Mat::Identity(3, 3);
            Mat flip = Mat::Identity(3, 3);   // rotation by pi about e_1
            flip(1, 1) = -1.0;
            flip(2, 2) = -1.0;
            return flip;
        }
        const Eigen::Vector3d axis = axis_raw / s;
        const double angle = std::atan2(s, c);
        return Mat(Eigen::AngleAxisd(angle, axis).toRotationMatrix());
    }

    GroupElement rotation_element() const {
        // quaternion with Ad = rotation_
        Eigen::Matrix3d r = rotation_;
        Eigen::Quaterniond q(r);
        return GroupElement::su2(q.w(), q.x(), q.y(), q.z());
    }

    LieGroup group_;
    double tau_ = 0.0;
    Vec xi_;
    Mat rotation_;
    InertiaTensor inertia_;
    Potential potential_;
    std::optional<SymplecticStructure> structure_;
};

/// One level of the constraint tower: the named residual functions that cut
/// the stratum out of the ambient phase space.  A level-k stratum carries all
/// lower-level residuals as well.
struct ConstraintStratum {
    int level;
    std::vector<std::string> names;
    std::vector<std::function<double(const PhasePoint&)>> residuals;

    double max_abs(const PhasePoint& p) const {
        double worst = 0.0;
        for (const auto& r : residuals) worst = std::max(worst, std::abs(r(p)));
        return worst;
    }
};

/// j_1: (g, pi_1, pi_2) -> (g, pi_1, pi_2, pi_3 = 1/tau - xi_3); the image
/// satisfies C_1 = 1 - pi'.tau = 0 up to roundoff.
inline PhasePoint embed_primary(const GnhProblem& pr, const GroupElement& g, double pi1,
                                double pi2) {
    Vec pi(3);
    pi << pi1, pi2, 1.0 / pr.tau() - pr.xi()(2);
    return PhasePoint{g, std::move(pi)};
}

/// Primary constraint C_1 = 1 - pi'.tau evaluated at an ambient point.
inline double primary_constraint(const GnhProblem& pr, const PhasePoint& p) {
    return 1.0 - pr.tau() * pr.pi_prime(p)(2);
}

/// Values of the secondary constraints and the momentum component of the
/// particular solution:
///   C_21 = pi'_2 dK/dpi_3 - pi'_3 dK/dpi_2 - <dV|e^L_1>
///   C_22 = pi'_3 dK/dpi_1 - pi'_1 dK/dpi_3 - <dV|e^L_2>
///   C_23 = pi'_1 dK/dpi_2 - pi'_2 dK/dpi_1 - <dV|e^L_3>
struct SecondaryValues {
    double c21, c22, c23;
};

inline SecondaryValues secondary_constraints(const GnhProblem& pr, const PhasePoint& p);

/// The stratum at a given level (1 = primary, 2 = secondary), with all
/// lower-level residuals included.
inline ConstraintStratum constraint_stratum(const GnhProblem& pr, int level) {
    if (level < 1 || level > 2)
        throw std::invalid_argument("constraint strata are built for levels 1 and 2");
    ConstraintStratum s;
    s.level = level;
    s.names = {"C1"};
    s.residuals = {[pr](const PhasePoint& p) { return primary_constraint(pr, p); }};
    if (level >= 2) {
        s.names.push_back("C21");
        s.names.push_back("C22");
        s.residuals.push_back(
            [pr](const PhasePoint& p) { return secondary_constraints(pr, p).c21; });
        s.residuals.push_back(
            [pr](const PhasePoint& p) { return secondary_constraints(pr, p).c22; });
    }
    return s;
}

/// 6x6 matrix of the restricted two-form at a stratum point.
inline Mat restricted_form(const GnhProblem& pr, const PhasePoint& p) {
    return omega_matrix(pr.group().algebra(), p.pi, pr.structure());
}

/// Singular values of the restricted form, descending.
inline Vec restricted_form_singular_values(const Mat& omega) {
    Eigen::JacobiSVD<Mat> svd(omega);
    return svd.singularValues();
}

/// The two independent null directions of the restricted form, as columns of a
/// 6x2 matrix in the ordered basis (e^L_1..3, d/dpi_1..3):
///   Z^1 = (1,0,0, 0, 1/tau, -pi'_2),  Z^2 = (0,1,0, -1/tau, 0, pi'_1).
/// Requires numerical rank 4.
inline Mat null_vectors(const GnhProblem& pr, const PhasePoint& p) {
    const Mat omega = restricted_form(pr, p);
    const Vec sv = restricted_form_singular_values(omega);
    if (!(sv(4) <= 1e-9 * sv(0) && sv(3) > 1e-9 * sv(0)))
        throw InconsistentStratum("restricted two-form does not have rank 4 at this point");
    const Vec pp = pr.pi_prime(p);
    Mat z = Mat::Zero(6, 2);
    z(0, 0) = 1.0;
    z(4, 0) = 1.0 / pr.tau();
    z(5, 0) = -pp(1);
    z(1, 1) = 1.0;
    z(3, 1) = -1.0 / pr.tau();
    z(5, 1) = pp(0);
    return z;
}

inline SecondaryValues secondary_constraints(const GnhProblem& pr, const PhasePoint& p) {
    const Vec pp = pr.pi_prime(p);
    const Vec k = pr.inertia().kinetic_grad(p.pi);
    const Vec a = potential_grad_left(pr.group(), p.g, pr.potential());
    SecondaryValues out;
    out.c21 = pp(1) * k(2) - pp(2) * k(1) - a(0);
    out.c22 = pp(2) * k(0) - pp(0) * k(2) - a(1);
    out.c23 = pp(0) * k(1) - pp(1) * k(0) - a(2);
    return out;
}

/// Solution family of the restricted Hamilton equation on the secondary
/// stratum: X = particular + zeta_1 gauge.col(0) + zeta_2 gauge.col(1).
struct GeneralSolution {
    Vec particular;   // 6 components (X^1..3, X_1..3)
    Mat gauge;        // 6x2, the null directions
    double c23;
};

inline GeneralSolution general_solution(const GnhProblem& pr, const PhasePoint& p) {
    const SecondaryValues c = secondary_constraints(pr, p);
    const Vec k = pr.inertia().kinetic_grad(p.pi);
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff() * (1.0 + pr.pi_prime(p).norm()));
    if (std::abs(c.c21) > 1e-9 * scale || std::abs(c.c22) > 1e-9 * scale)
        throw ConstraintViolation("point is off the secondary stratum");
    GeneralSolution gs;
    gs.particular = Vec::Zero(6);
    gs.particular.head(3) = k;
    gs.particular(5) = c.c23;
    gs.gauge = null_vectors(pr, p);
    gs.c23 = c.c23;
    return gs;
}

enum class TangencyOutcome { Determined, Underdetermined, Tertiary };

inline const char* to_string(TangencyOutcome o) {
    switch (o) {
        case TangencyOutcome::Determined: return "determined";
        case TangencyOutcome::Underdetermined: return "underdetermined";
        case TangencyOutcome::Tertiary: return "tertiary";
    }
    return "?";
}

/// Outcome of the tangency system: the 3x2 linear system A zeta + c = 0 built
/// from <dC | X_G> = 0 for C in {C_1, C_21, C_22}.
struct TangencyResult {
    TangencyOutcome outcome;
    int rank = 0;
    Vec zeta;                          // unique solution when determined
    int gauge_dimension = 0;           // residual freedom when underdetermined
    std::vector<double> tertiary_values;   // inconsistent combinations w^T c
    std::vector<Vec> tertiary_normals;     // the left null vectors w
    bool near_threshold = false;
    Mat system;                        // A
    Vec offset;                        // c
};

namespace gnh_detail {

template <typename F>
Differential fd_differential(const LieGroup& group, const PhasePoint& p, F&& func, double step) {
    const int n = group.dim();
    Differential d;
    d.config = Vec::Zero(n);
    d.momentum = Vec::Zero(n);
    for (int a = 0; a < n; ++a) {
        Vec dir = Vec::Zero(n);
        dir(a) = step;
        const GroupElement gp = group.compose(p.g, group.exp(AlgebraVector(dir)));
        const GroupElement gm = group.compose(p.g, group.exp(AlgebraVector(Vec(-dir))));
        d.config(a) = (func(PhasePoint{gp, p.pi}) - func(PhasePoint{gm, p.pi})) / (2.0 * step);
    }
    for (int m = 0; m < n; ++m) {
        Vec pip = p.pi, pim = p.pi;
        pip(m) += step;
        pim(m) -= step;
        d.momentum(m) =
            (func(PhasePoint{p.g, pip}) - func(PhasePoint{p.g, pim})) / (2.0 * step);
    }
    return d;
}

inline double pair_with(const Differential& d, const Vec& x6) {
    return d.config.dot(x6.head(3)) + d.momentum.dot(x6.tail(3));
}

} // namespace gnh_detail

/// Assembles and classifies the tangency system at a secondary-stratum point.
/// dC_1 is analytic; dC_21, dC_22 are central finite differences of step
/// 1e-6 * scale.  Classification is total: full rank and consistent gives a
/// determined zeta, rank-deficient consistent reports residual gauge freedom,
/// and inconsistency returns the tertiary residuals.
inline TangencyResult solve_tangency(const GnhProblem& pr, const GeneralSolution& gs,
                                     const PhasePoint& p) {
    const double scale = std::max(1.0, p.pi.cwiseAbs().maxCoeff());
    const double step = 1e-6 * scale;

    Differential dc1;
    dc1.config = Vec::Zero(3);
    dc1.momentum = Vec::Zero(3);
    dc1.momentum(2) = -pr.tau();
    const Differential dc21 = gnh_detail::fd_differential(
        pr.group(), p, [&](const PhasePoint& q) { return secondary_constraints(pr, q).c21; },
        step);
    const Differential dc22 = gnh_detail::fd_differential(
        pr.group(), p, [&](const PhasePoint& q) { return secondary_constraints(pr, q).c22; },
        step);

    const Differential* rows[3] = {&dc1, &dc21, &dc22};
    Mat A(3, 2);
    Vec c(3);
    for (int i = 0; i < 3; ++i) {
        A(i, 0) = gnh_detail::pair_with(*rows[i], gs.gauge.col(0));
        A(i, 1) = gnh_detail::pair_with(*rows[i], gs.gauge.col(1));
        c(i) = gnh_detail::pair_with(*rows[i], gs.particular);
    }

    const Vec k = pr.inertia().kinetic_grad(p.pi);
    const double sys_scale = std::max({1.0, k.cwiseAbs().maxCoeff(), pr.pi_prime(p).norm(),
                                       1.0 / pr.tau()});
    const double rank_tol = 1e-9 * sys_scale;

    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > std::max(rank_tol, 1e-9 * sv(0))) ++rank;

    TangencyResult out;
    out.system = A;
    out.offset = c;
    out.rank = rank;
    for (int i = 0; i < sv.size(); ++i) {
        const double thr = std::max(rank_tol, 1e-9 * sv(0));
        if (sv(i) > thr && sv(i) < 10.0 * thr) out.near_threshold = true;
    }

    // minimum-norm candidate and its residual decide consistency
    Vec zeta = Vec::Zero(2);
    if (rank > 0) {
        Vec inv_sv = Vec::Zero(sv.size());
        for (int i = 0; i < rank; ++i) inv_sv(i) = 1.0 / sv(i);
        zeta = svd.matrixV().leftCols(sv.size()) * inv_sv.asDiagonal() *
               svd.matrixU().leftCols(sv.size()).transpose() * (-c);
    }
    const Vec resid = A * zeta + c;
    const double consist_tol = 1e-8 * sys_scale;
    const bool consistent = resid.cwiseAbs().maxCoeff() <= consist_tol;
    if (resid.cwiseAbs().maxCoeff() > 0.1 * consist_tol &&
        resid.cwiseAbs().maxCoeff() < 10.0 * consist_tol)
        out.near_threshold = true;

    if (consistent && rank == 2) {
        out.outcome = TangencyOutcome::Determined;
        out.zeta = zeta;
    } else if (consistent) {
        out.outcome = TangencyOutcome::Underdetermined;
        out.gauge_dimension = 2 - rank;
        out.zeta = zeta;
    } else {
        out.outcome = TangencyOutcome::Tertiary;
        // inconsistent directions: left singular vectors beyond the rank
        for (int i = rank; i < 3; ++i) {
            const Vec w = svd.matrixU().col(i);
            const double val = w.dot(c);
            if (std::abs(val) > consist_tol) {
                out.tertiary_normals.push_back(w);
                out.tertiary_values.push_back(val);
            }
        }
    }
    return out;
}

enum class LocusKind { AllOfPrimary, MomentumPoint, Implicit };

inline const char* to_string(LocusKind k) {
    switch (k) {
        case LocusKind::AllOfPrimary: return "all-of-primary";
        case LocusKind::MomentumPoint: return "momentum-point";
        case LocusKind::Implicit: return "implicit";
    }
    return "?";
}

/// Constraint-tower report of the full analysis.
struct GnhReport {
    Mat rotation;             // original -> aligned frame
    double tau = 0.0;
    Vec xi;
    int levels = 1;           // deepest stratum level established
    int samples = 0;
    double c2_max_sampled = 0.0;
    double c2_scale = 1.0;
    LocusKind locus = LocusKind::Implicit;
    Eigen::Vector2d locus_point = Eigen::Vector2d::Zero();  // (pi'_1, pi'_2) when MomentumPoint
    bool representative_found = false;
    PhasePoint representative{GroupElement::su2(1, 0, 0, 0), Vec::Zero(3)};
    SecondaryValues representative_secondary{0, 0, 0};
    std::optional<TangencyResult> tangency;
    bool proceed_notice = false;   // tower capped: the analysis must proceed
    std::string note;
};

struct GnhOptions {
    int samples = 64;
    unsigned long seed = 0x5CA1AB1EUL;
};

namespace gnh_detail {

inline GroupElement random_su2(std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec q(4);
    for (int i = 0; i < 4; ++i) q(i) = nd(rng);
    q /= q.norm();
    return GroupElement(Realization::Su2Quaternion, q);
}

} // namespace gnh_detail

/// Runs the constraint algorithm: secondary constraints sampled over the
/// primary stratum, locus identification, then the tangency classification at
/// a representative secondary-stratum point.  The tower is capped at level 3;
/// deeper strata are reported with an explicit continuation notice.
inline GnhReport run_analysis(const GnhProblem& pr, const GroupElement& g0, double pi1,
                              double pi2, const GnhOptions& opts = {}) {
    GnhReport rep;
    rep.rotation = pr.rotation();
    rep.tau = pr.tau();
    rep.xi = pr.xi();
    rep.samples = opts.samples;

    // level 2: sample the secondary constraints over the primary stratum
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    std::vector<Eigen::Vector2d> sample_pts;
    std::vector<Eigen::Vector2d> sample_vals;
    double term_scale = 1.0;
    const bool g_independent = pr.potential().kind == Potential::Kind::None;
    for (int i = 0; i < opts.samples; ++i) {
        const GroupElement g = g_independent ? g0 : gnh_detail::random_su2(rng);
        const double p1 = ud(rng), p2 = ud(rng);
        const PhasePoint p = embed_primary(pr, g, p1, p2);
        const SecondaryValues c = secondary_constraints(pr, p);
        const Vec pp = pr.pi_prime(p);
        const Vec k = pr.inertia().kinetic_grad(p.pi);
        term_scale = std::max({term_scale, std::abs(pp(1) * k(2)), std::abs(pp(2) * k(1)),
                               std::abs(pp(2) * k(0)), std::abs(pp(0) * k(2))});
        rep.c2_max_sampled = std::max({rep.c2_max_sampled, std::abs(c.c21), std::abs(c.c22)});
        sample_pts.emplace_back(p1, p2);
        sample_vals.emplace_back(c.c21, c.c22);
    }
    rep.c2_scale = term_scale;

    const bool identically_zero = rep.c2_max_sampled <= 1e-10 * term_scale;
    PhasePoint representative = embed_primary(pr, g0, pi1, pi2);

    if (identically_zero) {
        rep.locus = LocusKind::AllOfPrimary;
        rep.levels = 2;
        rep.representative_found = true;
        rep.note = "secondary constraints vanish identically; the secondary stratum "
                   "coincides with the primary one";
    } else if (g_independent) {
        // fit C_2a as quadratics in (pi_1, pi_2); exact for a kinetic Hamiltonian
        const int m = static_cast<int>(sample_pts.size());
        Mat design(m, 6);
        Mat rhs_fit(m, 2);
        for (int i = 0; i < m; ++i) {
            const double x = sample_pts[i](0), y = sample_pts[i](1);
            design.row(i) << 1.0, x, y, x * x, x * y, y * y;
            rhs_fit.row(i) = sample_vals[i].transpose();
        }
        const Mat coeff = design.colPivHouseholderQr().solve(rhs_fit);  // 6x2
        const double fit_resid = (design * coeff - rhs_fit).cwiseAbs().maxCoeff();
        const double quad_mag = coeff.bottomRows(3).cwiseAbs().maxCoeff();
        const double lin_scale = std::max(1e-30, coeff.middleRows(1, 2).cwiseAbs().maxCoeff());
        Mat J(2, 2);
        J << coeff(1, 0), coeff(2, 0), coeff(1, 1), coeff(2, 1);
        Vec b(2);
        b << coeff(0, 0), coeff(0, 1);
        if (fit_resid <= 1e-7 * term_scale && quad_mag <= 1e-8 * term_scale &&
            std::abs(J.determinant()) > 1e-9 * lin_scale * lin_scale) {
            const Vec pt = J.partialPivLu().solve(Vec(-b));
            const PhasePoint cand = embed_primary(pr, g0, pt(0), pt(1));
            const SecondaryValues cv = secondary_constraints(pr, cand);
            if (std::abs(cv.c21) <= 1e-8 * term_scale && std::abs(cv.c22) <= 1e-8 * term_scale) {
                rep.locus = LocusKind::MomentumPoint;
                const Vec ppc = pr.pi_prime(cand);
                rep.locus_point << ppc(0), ppc(1);
                representative = cand;
                rep.representative_found = true;
                rep.levels = 2;
                rep.note = "secondary stratum is the momentum line pi'_1 = " +
                           std::to_string(rep.locus_point(0)) +
                           ", pi'_2 = " + std::to_string(rep.locus_point(1));
            }
        }
        if (!rep.representative_found) rep.locus = LocusKind::Implicit;
    } else {
        rep.locus = LocusKind::Implicit;
    }

    if (rep.locus == LocusKind::Implicit) {
        // Newton on (C21, C22)(pi_1, pi_2) at fixed g
        rep.levels = 2;
        Eigen::Vector2d x(pi1, pi2);
        bool ok = false;
        for (int it = 0; it < 50; ++it) {
            const PhasePoint p = embed_primary(pr, g0, x(0), x(1));
            const SecondaryValues c = secondary_constraints(pr, p);
            Eigen::Vector2d f(c.c21, c.c22);
            if (f.cwiseAbs().maxCoeff() <= 1e-11 * term_scale) {
                ok = true;
                break;
            }
            const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
            Eigen::Matrix2d J;
            for (int j = 0; j < 2; ++j) {
                Eigen::Vector2d xp = x, xm = x;
                xp(j) += h;
                xm(j) -= h;
                const SecondaryValues cp =
                    secondary_constraints(pr, embed_primary(pr, g0, xp(0), xp(1)));
                const SecondaryValues cm =
                    secondary_constraints(pr, embed_primary(pr, g0, xm(0), xm(1)));
                J(0, j) = (cp.c21 - cm.c21) / (2.0 * h);
                J(1, j) = (cp.c22 - cm.c22) / (2.0 * h);
            }
            if (std::abs(J.determinant()) < 1e-14) break;
            x -= J.partialPivLu().solve(f);
            if (!x.allFinite()) break;
        }
        if (ok) {
            representative = embed_primary(pr, g0, x(0), x(1));
            rep.representative_found = true;
        } else {
            rep.proceed_notice = true;
            rep.note = "no secondary-stratum point found from the scenario seed; "
                       "the analysis must proceed by other means";
        }
    }

    rep.representative = representative;
    if (rep.representative_found) {
        rep.representative_secondary = secondary_constraints(pr, representative);
        const GeneralSolution gs = general_solution(pr, representative);
        rep.tangency = solve_tangency(pr, gs, representative);
        rep.levels = 3;
        if (rep.tangency->outcome == TangencyOutcome::Tertiary) {
            rep.proceed_notice = true;
            rep.note = "tangency is inconsistent: tertiary constraints arise and "
                       "the analysis must proceed";
        }
    }
    return rep;
}

} // namespace liesym
