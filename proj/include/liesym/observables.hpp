#pragma once


#include "liesym/symplectic.hpp"

namespace liesym {

/// Polynomial observable A(g, pi) = c0 + cpi.pi + (1/2) pi^T Q pi + cg.w(g),
/// where w(g) are the quaternion components (su2) or chart coordinates
/// (generic).  Smooth everywhere on SU(2); differentials are analytic.
struct Observable {
    double c0 = 0.0;
    Vec cpi;
    Mat quad;   // symmetric
    Vec cg;     // size 4 for su2, N for generic

    static Observable momentum_linear(const Vec& cpi) {
        Observable a;
        a.cpi = cpi;
        a.quad = Mat::Zero(cpi.size(), cpi.size());
        a.cg = Vec();
        return a;
    }

    double value(const LieGroup& group, const PhasePoint& p) const {
        double v = c0;
        if (cpi.size() > 0) v += cpi.dot(p.pi);
        if (quad.size() > 0) v += 0.5 * p.pi.dot(quad * p.pi);
        if (cg.size() > 0) {
            if (group.realization() == Realization::Su2Quaternion)
                v += cg.dot(p.g.payload());
            else
                v += cg.dot(group.log(p.g).c);
        }
        return v;
    }

    Differential differential(const LieGroup& group, const PhasePoint& p) const {
        const int n = group.dim();
        Differential d;
        d.config = Vec::Zero(n);
        d.momentum = Vec::Zero(n);
        if (cpi.size() > 0) d.momentum += cpi;
        if (quad.size() > 0) d.momentum += quad * p.pi;
        if (cg.size() > 0) {
            if (group.realization() == Realization::Su2Quaternion) {
                // d/dt (g exp(t e_a)) = g * e_a_hat with e_a_hat the half pure unit
                for (int a = 0; a < 3; ++a) {
                    Vec gen = Vec::Zero(4);
                    gen(a + 1) = 0.5;
                    d.config(a) = cg.dot(quat::mul(p.g.payload(), gen));
                }
            } else {
                d.config += group.frame_matrix(p.g).transpose() * cg;
            }
        }
        return d;
    }
};

/// {A, B} for polynomial observables.
inline double observable_bracket(const LieGroup& group, const SymplecticStructure& sel,
                                 const Observable& a, const Observable& b, const PhasePoint& p) {
    return poisson_bracket(group.algebra(), p, sel, a.differential(group, p),
                           b.differential(group, p));
}

/// {A, {B, C}}: the inner bracket is a non-polynomial function of the point, so
/// its differential is taken by five-point central differences of step
/// `fd_step` (group directions move along g exp(t e_a)).
inline double nested_bracket(const LieGroup& group, const SymplecticStructure& sel,
                             const Observable& a, const Observable& b, const Observable& c,
                             const PhasePoint& p, double fd_step = 1e-3) {
    const int n = group.dim();
    const auto inner = [&](const PhasePoint& q) { return observable_bracket(group, sel, b, c, q); };
    const auto stencil = [&](auto&& eval) {
        return (-eval(2.0) + 8.0 * eval(1.0) - 8.0 * eval(-1.0) + eval(-2.0)) / (12.0 * fd_step);
    };
    Differential d_inner;
    d_inner.config = Vec::Zero(n);
    d_inner.momentum = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        d_inner.config(i) = stencil([&](double s) {
            Vec dir = Vec::Zero(n);
            dir(i) = s * fd_step;
            return inner(PhasePoint{group.compose(p.g, group.exp(AlgebraVector(dir))), p.pi});
        });
        d_inner.momentum(i) = stencil([&](double s) {
            Vec pi = p.pi;
            pi(i) += s * fd_step;
            return inner(PhasePoint{p.g, pi});
        });
    }
    const TangentVector xa = hamiltonian_field(group.algebra(), p, sel, a.differential(group, p));
    const TangentVector xd = hamiltonian_field(group.algebra(), p, sel, d_inner);
    const SymplecticFactors f = symplectic_factors(group.algebra(), p.pi, sel);
    const Vec top = f.s * xd.config + xd.momentum;
    const Vec bottom = -xd.config + sel.upsilon().matrix() * xd.momentum;
    return xa.config.dot(top) + xa.momentum.dot(bottom);
}

/// |{A,{B,C}} + {B,{C,A}} + {C,{A,B}}| at p.
inline double jacobi_residual(const LieGroup& group, const SymplecticStructure& sel,
                              const Observable& a, const Observable& b, const Observable& c,
                              const PhasePoint& p, double fd_step = 1e-3) {
    return std::abs(nested_bracket(group, sel, a, b, c, p, fd_step) +
                    nested_bracket(group, sel, b, c, a, p, fd_step) +
                    nested_bracket(group, sel, c, a, b, p, fd_step));
}

} // namespace liesym
