#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "liesym/symplectic.hpp"

namespace liesym {

/// Constant positive-definite inertia tensor I_{mu nu} and its inverse.
class InertiaTensor {
public:
    explicit InertiaTensor(const Mat& I) : I_(I) {
        if (I_.rows() != I_.cols()) throw std::invalid_argument("inertia tensor must be square");
        const double scale = std::max(1.0, I_.cwiseAbs().maxCoeff());
        if ((I_ - I_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw std::invalid_argument("inertia tensor must be symmetric");
        I_ = 0.5 * (I_ + I_.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(I_);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("inertia tensor must be positive definite");
        Iinv_ = I_.inverse();
        const Mat resid = I_ * Iinv_ - Mat::Identity(I_.rows(), I_.cols());
        if (resid.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale * Iinv_.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("inertia tensor is too ill-conditioned to invert");
    }

    static InertiaTensor diagonal(const Vec& d) { return InertiaTensor(Mat(d.asDiagonal())); }
    static InertiaTensor spherical(int dim, double i0) {
        return InertiaTensor(Mat(i0 * Mat::Identity(dim, dim)));
    }

    int dim() const { return static_cast<int>(I_.rows()); }
    const Mat& matrix() const { return I_; }
    const Mat& inverse() const { return Iinv_; }

    /// K = (1/2) Iinv^{ab} pi_a pi_b
    double kinetic(const Vec& pi) const { return 0.5 * pi.dot(Iinv_ * pi); }
    /// dK/dpi = Iinv pi
    Vec kinetic_grad(const Vec& pi) const { return Iinv_ * pi; }

private:
    Mat I_;
    Mat Iinv_;
};

/// Configuration potential: none, or the gravitational one
/// V(g) = -(K(g^{-1}) gamma | L) with space-frame force gamma and body-frame
/// center of mass L.
struct Potential {
    enum class Kind { None, HeavyTop };

    Kind kind = Kind::None;
    Vec gamma;
    Vec com;

    static Potential none() { return Potential{}; }
    static Potential heavy_top(Vec gamma, Vec com) {
        Potential v;
        v.kind = Kind::HeavyTop;
        v.gamma = std::move(gamma);
        v.com = std::move(com);
        return v;
    }
};

/// Gravitational force in the body frame, Gamma = K(g^{-1}) gamma.
inline Vec body_gravity(const LieGroup& group, const GroupElement& g, const Vec& gamma) {
    return group.coadjoint(group.inverse(g)) * gamma;
}

inline double potential_value(const LieGroup& group, const GroupElement& g, const Potential& v) {
    if (v.kind == Potential::Kind::None) return 0.0;
    return -body_gravity(group, g, v.gamma).dot(v.com);
}

/// <dV | e^L_mu> = -Gamma_alpha f^alpha_{mu beta} L^beta.
inline Vec potential_grad_left(const LieGroup& group, const GroupElement& g, const Potential& v) {
    const int n = group.dim();
    if (v.kind == Potential::Kind::None) return Vec::Zero(n);
    const Vec gamma_body = body_gravity(group, g, v.gamma);
    return -(group.algebra().contract(gamma_body) * v.com);
}

enum class FlowMode { EulerCanonical, EulerPoisson, Cocycle, Darboux, Full };

inline const char* to_string(FlowMode m) {
    switch (m) {
        case FlowMode::EulerCanonical: return "euler-canonical";
        case FlowMode::EulerPoisson: return "euler-poisson";
        case FlowMode::Cocycle: return "cocycle";
        case FlowMode::Darboux: return "darboux";
        case FlowMode::Full: return "full";
    }
    return "?";
}

/// One flow: group, mode, symplectic structure, inertia and potential,
/// cross-validated at construction.
///
/// State conventions: every mode evolves (g, pi_L) except darboux, whose state
/// momentum is pi' = pi_L + xi (trajectories still record pi_L), and
/// euler-poisson, which carries the body gravity Gamma as extra state.
class FlowProblem {
public:
    FlowProblem(LieGroup group, FlowMode mode, SymplecticStructure structure,
                InertiaTensor inertia, Potential potential)
        : group_(std::move(group)), mode_(mode), structure_(std::move(structure)),
          inertia_(std::move(inertia)), potential_(std::move(potential)) {
        const int n = group_.dim();
        if (structure_.dim() != n || inertia_.dim() != n)
            throw std::invalid_argument("flow problem: dimension mismatch");
        if (potential_.kind == Potential::Kind::HeavyTop &&
            (potential_.gamma.size() != n || potential_.com.size() != n))
            throw std::invalid_argument("flow problem: potential data has the wrong dimension");
        switch (mode_) {
            case FlowMode::EulerCanonical:
                if (structure_.kind() != StructureKind::Canonical)
                    throw std::invalid_argument("euler-canonical mode requires the canonical structure");
                break;
            case FlowMode::EulerPoisson:
                if (structure_.kind() != StructureKind::Canonical)
                    throw std::invalid_argument("euler-poisson mode requires the canonical structure");
                if (potential_.kind != Potential::Kind::HeavyTop)
                    throw std::invalid_argument("euler-poisson mode requires the heavy-top potential");
                break;
            case FlowMode::Cocycle:
                if (structure_.kind() != StructureKind::Cocycle)
                    throw std::invalid_argument("cocycle mode requires the cocycle structure");
                break;
            case FlowMode::Darboux:
                if (structure_.kind() != StructureKind::Cocycle || !structure_.theta().xi())
                    throw std::invalid_argument(
                        "darboux mode requires a coboundary cocycle with known xi");
                break;
            case FlowMode::Full:
                if (structure_.kind() != StructureKind::Full)
                    throw std::invalid_argument("full mode requires the full structure");
                break;
        }
        if (mode_ == FlowMode::Darboux) field_structure_ = SymplecticStructure::canonical(n);
    }

    const LieGroup& group() const { return group_; }
    FlowMode mode() const { return mode_; }
    const SymplecticStructure& structure() const { return structure_; }
    const InertiaTensor& inertia() const { return inertia_; }
    const Potential& potential() const { return potential_; }
    const Vec& xi() const {
        static const Vec empty;
        return structure_.theta().xi() ? *structure_.theta().xi() : empty;
    }

    /// The structure the Hamiltonian field is solved against (canonical form in
    /// pi' for darboux, the declared structure otherwise).
    const SymplecticStructure& field_structure() const {
        return field_structure_ ? *field_structure_ : structure_;
    }

private:
    LieGroup group_;
    FlowMode mode_;
    SymplecticStructure structure_;
    InertiaTensor inertia_;
    Potential potential_;
    std::optional<SymplecticStructure> field_structure_;
};

/// Time derivative of the state at one point.
struct RhsResult {
    Vec gdot;                      // element payload rate (quaternion rate for su2)
    Vec pidot;                     // rate of the state momentum (pi, or pi' in darboux mode)
    Vec omega;                     // body angular velocity Omega_L
    std::optional<Vec> gammadot;   // euler-poisson only
    double delta = std::numeric_limits<double>::quiet_NaN();  // full mode only
};

/// Equations of motion.  `state.pi` is the mode's state momentum; `gamma` is
/// required in euler-poisson mode and ignored elsewhere.
inline RhsResult rhs(const FlowProblem& fp, const PhasePoint& state,
                     const std::optional<Vec>& gamma = std::nullopt) {
    const LieGroup& group = fp.group();
    const StructureConstants& fc = group.algebra();
    const int n = group.dim();
    if (state.dim() != n) throw std::invalid_argument("rhs: dimension mismatch");

    Differential dH;
    switch (fp.mode()) {
        case FlowMode::Darboux:
            dH.config = potential_grad_left(group, state.g, fp.potential());
            dH.momentum = fp.inertia().kinetic_grad(state.pi - fp.xi());
            break;
        case FlowMode::EulerPoisson: {
            if (!gamma || gamma->size() != n)
                throw std::invalid_argument("euler-poisson mode requires the body gravity state");
            dH.config = -(fc.contract(*gamma) * fp.potential().com);
            dH.momentum = fp.inertia().kinetic_grad(state.pi);
            break;
        }
        default:
            dH.config = potential_grad_left(group, state.g, fp.potential());
            dH.momentum = fp.inertia().kinetic_grad(state.pi);
            break;
    }

    const TangentVector x = hamiltonian_field(fc, state, fp.field_structure(), dH);

    RhsResult out;
    out.omega = x.config;
    out.pidot = x.momentum;
    out.gdot = group.group_rate(state.g, AlgebraVector(out.omega));
    if (fp.mode() == FlowMode::EulerPoisson)
        out.gammadot = fc.contract(*gamma).transpose() * out.omega;
    if (fp.mode() == FlowMode::Full)
        out.delta = symplectic_factors(fc, state.pi, fp.structure()).delta;
    return out;
}

struct IntegratorOptions {
    double dt = 1e-3;
    double t_end = 1.0;
    int stride = 1;      // record every stride-th step (plus the initial point)
};

struct DegeneracyEvent {
    double t_lo, t_hi;       // bracket around the tolerance crossing
    double delta_lo, delta_hi;
    double tol;              // degeneracy tolerance at the bracket's good end
};

enum class HaltReason { Completed, Degeneracy, BlowUp };

inline const char* to_string(HaltReason h) {
    switch (h) {
        case HaltReason::Completed: return "completed";
        case HaltReason::Degeneracy: return "degeneracy";
        case HaltReason::BlowUp: return "blow-up";
    }
    return "?";
}

/// Integration output: recorded samples (always in (g, pi_L) variables),
/// mode-specific extras, monitor channels per sample, and per-step drift maxima.
struct Trajectory {
    std::vector<double> t;
    std::vector<PhasePoint> states;
    std::vector<Vec> gamma;       // euler-poisson
    std::vector<Vec> pi_prime;    // darboux
    std::vector<double> delta;    // full
    std::map<std::string, std::vector<double>> channels;
    std::map<std::string, double> drift;   // max |value - value(0)| over every step
    HaltReason halt = HaltReason::Completed;
    std::optional<DegeneracyEvent> event;
    double dt = 0.0;
};

/// Per-channel max |value(t) - value(0)| over the recorded samples.
inline std::map<std::string, double> monitor_drift(const Trajectory& traj) {
    if (traj.t.empty()) throw std::invalid_argument("monitor_drift: empty trajectory");
    for (size_t i = 1; i < traj.t.size(); ++i)
        if (!(traj.t[i] > traj.t[i - 1]))
            throw std::invalid_argument("monitor_drift: sample times must increase strictly");
    std::map<std::string, double> out;
    for (const auto& [name, values] : traj.channels) {
        double worst = 0.0;
        for (double v : values) worst = std::max(worst, std::abs(v - values.front()));
        out[name] = worst;
    }
    return out;
}

namespace detail {

struct StateLayout {
    int payload;   // 4 for quaternions, N for charts
    int n;         // algebra dimension
    bool has_gamma;
    int size() const { return payload + n + (has_gamma ? n : 0); }
};

inline Vec pack(const StateLayout& L, const GroupElement& g, const Vec& pi,
                const std::optional<Vec>& gamma) {
    Vec y(L.size());
    y.head(L.payload) = g.payload();
    y.segment(L.payload, L.n) = pi;
    if (L.has_gamma) y.tail(L.n) = *gamma;
    return y;
}

} // namespace detail

/// Classical fixed-step 4th-order integration of a flow problem, with
/// post-step quaternion renormalization, per-step conservation monitors, and
/// degeneracy-event detection in full mode (one 8-iteration bisection refines
/// the crossing bracket).  Halts early on a degeneracy event or a non-finite
/// state; the trajectory keeps the last good sample either way.
inline Trajectory integrate(const FlowProblem& fp, const PhasePoint& initial,
                            const IntegratorOptions& opts) {
    if (!(opts.dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    if (opts.stride < 1) throw std::invalid_argument("integrate: stride must be >= 1");
    const LieGroup& group = fp.group();
    const int n = group.dim();
    const detail::StateLayout L{group.payload_size(), n, fp.mode() == FlowMode::EulerPoisson};

    const bool su2 = group.realization() == Realization::Su2Quaternion;
    const bool darboux = fp.mode() == FlowMode::Darboux;
    const bool full = fp.mode() == FlowMode::Full;
    const bool track_pi_prime =
        (fp.mode() == FlowMode::Cocycle || darboux) && fp.structure().theta().xi();

    const auto unpack_g = [&](const Vec& y) {
        return GroupElement(group.realization(), y.head(L.payload));
    };
    const auto deriv = [&](const Vec& y) {
        PhasePoint p{unpack_g(y), y.segment(L.payload, n)};
        std::optional<Vec> gm;
        if (L.has_gamma) gm = Vec(y.tail(n));
        const RhsResult r = rhs(fp, p, gm);
        Vec dy(L.size());
        dy.head(L.payload) = r.gdot;
        dy.segment(L.payload, n) = r.pidot;
        if (L.has_gamma) dy.tail(n) = *r.gammadot;
        return dy;
    };
    const auto rk4_step = [&](const Vec& y, double h) {
        const Vec k1 = deriv(y);
        const Vec k2 = deriv(y + 0.5 * h * k1);
        const Vec k3 = deriv(y + 0.5 * h * k2);
        const Vec k4 = deriv(y + h * k3);
        Vec out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (su2) out.head(4) /= out.head(4).norm();
        return out;
    };

    // monitor values at the current state
    const auto channel_values = [&](const Vec& y) {
        std::map<std::string, double> vals;
        const GroupElement g = unpack_g(y);
        const Vec state_pi = y.segment(L.payload, n);
        const Vec pi_l = darboux ? Vec(state_pi - fp.xi()) : state_pi;
        double energy = fp.inertia().kinetic(pi_l);
        if (fp.mode() == FlowMode::EulerPoisson) {
            const Vec gm = y.tail(n);
            energy += -gm.dot(fp.potential().com);
            vals["gamma_norm_sq"] = gm.squaredNorm();
        } else {
            energy += potential_value(group, g, fp.potential());
        }
        if (track_pi_prime) {
            const Vec pp = darboux ? state_pi : Vec(state_pi + fp.xi());
            vals["pi_prime_norm_sq"] = pp.squaredNorm();
        }
        vals["energy"] = energy;
        return vals;
    };

    const auto delta_of = [&](const Vec& y) {
        return symplectic_factors(group.algebra(), y.segment(L.payload, n), fp.structure()).delta;
    };
    const auto degeneracy_gap = [&](const Vec& y) {
        const Vec pi = y.segment(L.payload, n);
        return std::abs(delta_of(y)) - degeneracy_tolerance(fp.structure(), pi);
    };
    // On su(2) the determinant is the square of C1 = 1 - pi'.tau, so a
    // transversal wall crossing never flips the sign of Delta; track C1 itself
    // as the crossing indicator where it is available.
    const bool has_indicator = full && group.algebra().is_builtin_su2() &&
                               fp.structure().theta().xi().has_value();
    const auto indicator = [&](const Vec& y) {
        const Vec pp = y.segment(L.payload, n) + *fp.structure().theta().xi();
        return 1.0 - pp.dot(fp.structure().upsilon().tau());
    };

    Trajectory traj;
    traj.dt = opts.dt;

    std::optional<Vec> gamma0;
    if (L.has_gamma) gamma0 = body_gravity(group, initial.g, fp.potential().gamma);
    Vec pi0 = darboux ? Vec(initial.pi + fp.xi()) : initial.pi;
    Vec y = detail::pack(L, initial.g, pi0, gamma0);

    const std::map<std::string, double> base = channel_values(y);
    for (const auto& [name, v] : base) traj.drift[name] = 0.0;

    const auto record = [&](double t, const Vec& yy) {
        traj.t.push_back(t);
        const Vec state_pi = yy.segment(L.payload, n);
        const Vec pi_l = darboux ? Vec(state_pi - fp.xi()) : state_pi;
        traj.states.push_back(PhasePoint{unpack_g(yy), pi_l});
        if (L.has_gamma) traj.gamma.push_back(yy.tail(n));
        if (darboux) traj.pi_prime.push_back(state_pi);
        if (full) traj.delta.push_back(delta_of(yy));
        for (const auto& [name, v] : channel_values(yy)) traj.channels[name].push_back(v);
    };
    record(0.0, y);

    if (full && degeneracy_gap(y) <= 0.0) {
        const Vec pi = y.segment(L.payload, n);
        throw DegeneratePointError(delta_of(y), degeneracy_tolerance(fp.structure(), pi),
                                   PhasePoint{unpack_g(y), pi});
    }

    const long nsteps = std::llround(opts.t_end / opts.dt);
    for (long k = 0; k < nsteps; ++k) {
        const double t0 = static_cast<double>(k) * opts.dt;
        Vec ynew;
        bool stage_degenerate = false;
        double stage_delta = 0.0, stage_tol = 0.0;
        try {
            ynew = rk4_step(y, opts.dt);
        } catch (const DegeneratePointError& e) {
            stage_degenerate = true;
            stage_delta = e.delta;
            stage_tol = e.tol;
        }

        if (!stage_degenerate && !ynew.allFinite()) {
            traj.halt = HaltReason::BlowUp;
            return traj;
        }

        if (full) {
            const double sign0 = has_indicator ? indicator(y) : 1.0;
            const bool crossed =
                stage_degenerate || degeneracy_gap(ynew) <= 0.0 ||
                (has_indicator && indicator(ynew) * sign0 < 0.0);
            if (crossed) {
                // Bisect the step for the tolerance crossing.  The indicator
                // sign splits the interval; the reported bracket pairs the
                // latest probe still outside the tolerance with the earliest
                // probe inside it.
                const double tol0 =
                    degeneracy_tolerance(fp.structure(), y.segment(L.payload, n));
                double lo = 0.0, hi = 1.0;
                double lam_out = 0.0, delta_out = delta_of(y);       // outside: |Delta| > tol
                double lam_in = 1.0;                                 // inside: |Delta| <= tol
                double delta_in = stage_degenerate ? stage_delta : delta_of(ynew);
                bool found_in = stage_degenerate || degeneracy_gap(ynew) <= 0.0;
                for (int it = 0; it < 64 && hi - lo > 1e-14; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    bool good;
                    double dmid;
                    bool inside = false;
                    try {
                        const Vec ymid = rk4_step(y, mid * opts.dt);
                        dmid = delta_of(ymid);
                        inside = degeneracy_gap(ymid) <= 0.0;
                        good = !inside && (!has_indicator || indicator(ymid) * sign0 > 0.0);
                    } catch (const DegeneratePointError& e) {
                        dmid = e.delta;
                        inside = true;
                        good = false;
                    }
                    if (inside && (!found_in || mid < lam_in)) {
                        found_in = true;
                        lam_in = mid;
                        delta_in = dmid;
                    }
                    if (good) {
                        if (mid > lam_out) {
                            lam_out = mid;
                            delta_out = dmid;
                        }
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if (found_in && lam_in > lam_out && hi - lo < 1.0 / 256.0) break;
                }
                DegeneracyEvent ev;
                ev.t_lo = t0 + lam_out * opts.dt;
                ev.t_hi = t0 + (found_in ? lam_in : hi) * opts.dt;
                ev.delta_lo = delta_out;
                ev.delta_hi = delta_in;
                ev.tol = stage_degenerate ? stage_tol : tol0;
                traj.event = ev;
                traj.halt = HaltReason::Degeneracy;
                return traj;
            }
        }

        y = ynew;
        const double t1 = static_cast<double>(k + 1) * opts.dt;
        for (const auto& [name, v] : channel_values(y))
            traj.drift[name] = std::max(traj.drift[name], std::abs(v - base.at(name)));
        if ((k + 1) % opts.stride == 0 || k + 1 == nsteps) record(t1, y);
    }
    return traj;
}

} // namespace liesym
