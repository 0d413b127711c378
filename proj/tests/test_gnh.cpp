#include <catch_amalgamated.hpp>

#include "liesym/gnh.hpp"
#include "oracles.hpp"

using namespace liesym;
using oracles::Rng;

namespace {

GnhProblem free_spherical(double tau, double i0 = 1.0) {
    Vec tauv = Vec::Zero(3);
    tauv(2) = tau;
    return GnhProblem(tauv, Vec::Zero(3), InertiaTensor::spherical(3, i0), Potential::none());
}

Vec stacked_dH(const GnhProblem& pr, const PhasePoint& p) {
    Vec d(6);
    d.head(3) = potential_grad_left(pr.group(), p.g, pr.potential());
    d.tail(3) = pr.inertia().kinetic_grad(p.pi);
    return d;
}

} // namespace

TEST_CASE("embedding into the primary stratum") {
    Rng rng(7401);

    SECTION("direct formula") {
        const GnhProblem pr = free_spherical(1.0);
        const PhasePoint p = embed_primary(pr, pr.group().identity(), 0.0, 0.0);
        REQUIRE(p.pi(2) == 1.0);
        REQUIRE(std::abs(primary_constraint(pr, p)) < 1e-14);
    }
    SECTION("xi shifts the embedded component") {
        Vec tauv = Vec::Zero(3), xi(3);
        tauv(2) = 0.5;
        xi << 0.1, -0.2, 0.3;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.0), Potential::none());
        const PhasePoint p = embed_primary(pr, pr.group().identity(), 0.4, -0.7);
        REQUIRE(p.pi(2) == Catch::Approx(2.0 - 0.3).epsilon(1e-15));
        REQUIRE(std::abs(primary_constraint(pr, p)) < 1e-14);
    }
    SECTION("embedded points are degenerate for the ambient structure") {
        const GnhProblem pr = free_spherical(0.7);
        for (int trial = 0; trial < 10; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const SymplecticFactors f =
                symplectic_factors(pr.group().algebra(), p.pi, pr.structure());
            REQUIRE(std::abs(f.delta) < 1e-12);
        }
    }
    SECTION("push-forward leaves the third momentum slot flat") {
        const GnhProblem pr = free_spherical(0.8);
        const GroupElement g = rng.su2_element();
        const double h = 1e-6;
        for (int slot = 0; slot < 2; ++slot) {
            const double p1 = 0.3, p2 = -0.5;
            const PhasePoint plus =
                embed_primary(pr, g, p1 + (slot == 0 ? h : 0), p2 + (slot == 1 ? h : 0));
            const PhasePoint minus =
                embed_primary(pr, g, p1 - (slot == 0 ? h : 0), p2 - (slot == 1 ? h : 0));
            const Vec d = (plus.pi - minus.pi) / (2 * h);
            REQUIRE(d(slot) == Catch::Approx(1.0).margin(1e-10));
            REQUIRE(d(2) == 0.0);
        }
    }
    SECTION("tau = 0 is rejected") {
        REQUIRE_THROWS_AS(GnhProblem(Vec::Zero(3), Vec::Zero(3),
                                     InertiaTensor::spherical(3, 1.0), Potential::none()),
                          std::invalid_argument);
    }
}

TEST_CASE("constraint strata") {
    Rng rng(7408);

    SECTION("level-2 strata include the lower-level residuals") {
        const GnhProblem pr = free_spherical(0.7);
        const ConstraintStratum s1 = constraint_stratum(pr, 1);
        const ConstraintStratum s2 = constraint_stratum(pr, 2);
        REQUIRE(s1.names == std::vector<std::string>{"C1"});
        REQUIRE(s2.names == std::vector<std::string>{"C1", "C21", "C22"});
        REQUIRE(s2.residuals.size() == 3);
    }
    SECTION("residuals vanish on points produced by the stratum parameterization") {
        // free case: the secondary stratum is the whole primary one
        const GnhProblem free_pr = free_spherical(0.7, 1.3);
        const ConstraintStratum free_s2 = constraint_stratum(free_pr, 2);
        for (int trial = 0; trial < 20; ++trial) {
            const PhasePoint p = embed_primary(free_pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            REQUIRE(free_s2.max_abs(p) < 1e-10);
        }
        // shifted case: the secondary stratum is the pi'_1 = pi'_2 = 0 line
        Vec tauv = Vec::Zero(3), xi = Vec::Zero(3);
        tauv(2) = 0.5;
        xi(2) = 0.8;
        const GnhProblem line_pr(tauv, xi, InertiaTensor::spherical(3, 1.0), Potential::none());
        const ConstraintStratum line_s2 = constraint_stratum(line_pr, 2);
        for (int trial = 0; trial < 20; ++trial) {
            const PhasePoint on = embed_primary(line_pr, rng.su2_element(), 0.0, 0.0);
            REQUIRE(line_s2.max_abs(on) < 1e-10);
            const PhasePoint off = embed_primary(line_pr, rng.su2_element(), 1.0, 0.0);
            REQUIRE(line_s2.max_abs(off) > 1e-3);
        }
    }
    SECTION("deeper levels are not parameterized") {
        REQUIRE_THROWS_AS(constraint_stratum(free_spherical(0.5), 3), std::invalid_argument);
    }
}

TEST_CASE("restricted two-form") {
    Rng rng(7402);

    SECTION("entrywise match at a pinned point") {
        const double tau = 0.5;
        const GnhProblem pr = free_spherical(tau);
        // pi' = (0.3, -0.7, 1/tau)
        const PhasePoint p = embed_primary(pr, pr.group().identity(), 0.3, -0.7);
        const Mat w = restricted_form(pr, p);
        Mat expect(6, 6);
        expect << 0, 1 / tau, 0.7, 1, 0, 0,
                 -1 / tau, 0, 0.3, 0, 1, 0,
                 -0.7, -0.3, 0, 0, 0, 1,
                 -1, 0, 0, 0, tau, 0,
                 0, -1, 0, -tau, 0, 0,
                 0, 0, -1, 0, 0, 0;
        REQUIRE((w - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("restriction agrees with the ambient two-form at embedded points") {
        const GnhProblem pr = free_spherical(0.9);
        for (int trial = 0; trial < 10; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const Mat a = restricted_form(pr, p);
            const Mat b = omega_matrix(pr.group().algebra(), p.pi, pr.structure());
            REQUIRE((a - b).norm() == 0.0);
        }
    }
    SECTION("rank 4 with a wide singular-value gap") {
        const GnhProblem pr = free_spherical(0.6);
        for (int trial = 0; trial < 20; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const Vec sv = restricted_form_singular_values(restricted_form(pr, p));
            REQUIRE(sv(3) > 1e-6);
            REQUIRE(sv(4) < 1e-12 * sv(0));
            REQUIRE(sv(5) < 1e-12 * sv(0));
            REQUIRE(sv(3) / std::max(sv(4), 1e-300) > 1e6);
        }
    }
}

TEST_CASE("null vectors") {
    Rng rng(7403);

    SECTION("pinned substitution") {
        const GnhProblem pr = free_spherical(1.0);
        const PhasePoint p = embed_primary(pr, pr.group().identity(), 0.0, 0.0);
        const Mat z = null_vectors(pr, p);   // pi' = (0,0,1)
        Vec z1(6);
        z1 << 1, 0, 0, 0, 1, 0;
        REQUIRE((z.col(0) - z1).norm() == 0.0);
    }
    SECTION("annihilation at random stratum points") {
        const GnhProblem pr = free_spherical(0.45);
        for (int trial = 0; trial < 30; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const Mat w = restricted_form(pr, p);
            const Mat z = null_vectors(pr, p);
            REQUIRE((z.col(0).transpose() * w).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE((z.col(1).transpose() * w).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SECTION("span matches the numerical kernel") {
        const GnhProblem pr = free_spherical(0.45);
        for (int trial = 0; trial < 10; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const Mat w = restricted_form(pr, p);
            Eigen::JacobiSVD<Mat> svd(w, Eigen::ComputeFullV);
            const Mat kernel = svd.matrixV().rightCols(2);
            // orthonormalize the analytic null vectors and project the kernel out
            const Mat z = null_vectors(pr, p);
            const Eigen::HouseholderQR<Mat> qr(z);
            const Mat q = qr.householderQ() * Mat::Identity(6, 2);
            const Mat resid = kernel - q * (q.transpose() * kernel);
            REQUIRE(resid.cwiseAbs().maxCoeff() < 1e-8);   // sine of the principal angles
        }
    }
}

TEST_CASE("secondary constraints") {
    Rng rng(7404);

    SECTION("free spherical motion has no secondary constraints") {
        const GnhProblem pr = free_spherical(0.8, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-3, 3),
                                               rng.uniform(-3, 3));
            const SecondaryValues c = secondary_constraints(pr, p);
            REQUIRE(c.c21 == 0.0);
            REQUIRE(c.c22 == 0.0);
            REQUIRE(c.c23 == 0.0);
        }
    }
    SECTION("spherical inertia with a shift: substitution formula") {
        Vec tauv = Vec::Zero(3), xi(3);
        tauv(2) = 0.5;
        xi << 0.2, -0.6, 0.9;
        const double i0 = 1.7;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, i0), Potential::none());
        for (int trial = 0; trial < 20; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const Vec pp = pr.pi_prime(p);
            const SecondaryValues c = secondary_constraints(pr, p);
            REQUIRE(c.c21 ==
                    Catch::Approx((xi(1) * pp(2) - xi(2) * pp(1)) / i0).margin(1e-13));
            REQUIRE(c.c22 ==
                    Catch::Approx((xi(2) * pp(0) - xi(0) * pp(2)) / i0).margin(1e-13));
        }
    }
    SECTION("the consistency pairings with the null vectors are the constraints") {
        Vec tauv = Vec::Zero(3), xi(3), gamma(3), com(3);
        tauv(2) = 0.7;
        xi << 0.1, 0.4, -0.2;
        gamma << 0.5, -1.0, 2.0;
        com << 0.8, 0.1, 0.3;
        Mat im(3, 3);
        im << 1.2, 0.1, 0.0, 0.1, 2.0, -0.2, 0.0, -0.2, 1.6;
        const GnhProblem pr(tauv, xi, InertiaTensor(im), Potential::heavy_top(gamma, com));
        for (int trial = 0; trial < 20; ++trial) {
            const PhasePoint p = embed_primary(pr, rng.su2_element(), rng.uniform(-2, 2),
                                               rng.uniform(-2, 2));
            const Mat z = null_vectors(pr, p);
            const Vec dh = stacked_dH(pr, p);
            const SecondaryValues c = secondary_constraints(pr, p);
            REQUIRE(std::abs(z.col(0).dot(dh) + c.c21) < 1e-10);
            REQUIRE(std::abs(z.col(1).dot(dh) + c.c22) < 1e-10);
        }
    }
}

TEST_CASE("general solution on the secondary stratum") {
    Rng rng(7405);

    SECTION("free spherical case: pure drift, no momentum rate") {
        const double i0 = 2.0;
        const GnhProblem pr = free_spherical(0.8, i0);
        const PhasePoint p = embed_primary(pr, rng.su2_element(), 0.7, -0.2);
        const GeneralSolution gs = general_solution(pr, p);
        REQUIRE((gs.particular.head(3) - Vec(p.pi / i0)).norm() < 1e-14);
        REQUIRE(gs.particular.tail(3).norm() == 0.0);
    }
    SECTION("particular solution satisfies the restricted equation") {
        Vec tauv = Vec::Zero(3), xi(3);
        tauv(2) = 0.6;
        xi << 0.0, 0.0, 0.5;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.3), Potential::none());
        for (int trial = 0; trial < 20; ++trial) {
            // the secondary stratum is pi'_1 = pi'_2 = 0 here
            const PhasePoint p = embed_primary(pr, rng.su2_element(), -xi(0), -xi(1));
            const GeneralSolution gs = general_solution(pr, p);
            const Mat w = restricted_form(pr, p);
            const Vec resid = w.transpose() * gs.particular - stacked_dH(pr, p);
            REQUIRE(resid.cwiseAbs().maxCoeff() < 1e-10);
            // gauge shifts leave the residual unchanged
            for (int k = 0; k < 100; ++k) {
                const Vec x = gs.particular + rng.uniform(-5, 5) * gs.gauge.col(0) +
                              rng.uniform(-5, 5) * gs.gauge.col(1);
                const Vec r2 = w.transpose() * x - stacked_dH(pr, p);
                REQUIRE((r2 - resid).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
    SECTION("points off the secondary stratum are rejected") {
        Vec tauv = Vec::Zero(3), xi(3);
        tauv(2) = 0.6;
        xi << 0.0, 0.0, 0.5;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.0), Potential::none());
        const PhasePoint off = embed_primary(pr, pr.group().identity(), 1.0, 1.0);
        REQUIRE_THROWS_AS(general_solution(pr, off), ConstraintViolation);
    }
}

TEST_CASE("tangency classification") {
    Rng rng(7406);

    SECTION("free kinetic flow on the momentum axis: full two-parameter gauge freedom") {
        const GnhProblem pr = free_spherical(0.5, 1.4);
        const PhasePoint p = embed_primary(pr, rng.su2_element(), 0.0, 0.0);
        const TangencyResult t = solve_tangency(pr, general_solution(pr, p), p);
        REQUIRE(t.outcome == TangencyOutcome::Underdetermined);
        REQUIRE(t.rank == 0);
        REQUIRE(t.gauge_dimension == 2);
        REQUIRE(t.system.cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(t.offset.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("free kinetic flow at generic stratum points keeps one gauge function") {
        const GnhProblem pr = free_spherical(0.5, 1.4);
        const PhasePoint p = embed_primary(pr, rng.su2_element(), 0.8, -0.6);
        const GeneralSolution gs = general_solution(pr, p);
        const TangencyResult t = solve_tangency(pr, gs, p);
        // dC1 = -tau dpi_3 pairs with the null vectors as (tau pi'_2, -tau pi'_1)
        const Vec pp = pr.pi_prime(p);
        REQUIRE(t.system(0, 0) == Catch::Approx(pr.tau() * pp(1)).margin(1e-12));
        REQUIRE(t.system(0, 1) == Catch::Approx(-pr.tau() * pp(0)).margin(1e-12));
        REQUIRE(t.offset(0) == Catch::Approx(-pr.tau() * gs.c23).margin(1e-12));
        REQUIRE(t.outcome == TangencyOutcome::Underdetermined);
        REQUIRE(t.rank == 1);
        REQUIRE(t.gauge_dimension == 1);
    }
    SECTION("classification is stable under small perturbations of the point") {
        const GnhProblem pr = free_spherical(0.5, 1.4);
        for (int trial = 0; trial < 5; ++trial) {
            const GroupElement g = rng.su2_element();
            const double p1 = rng.uniform(0.5, 2.0), p2 = rng.uniform(0.5, 2.0);
            const PhasePoint a = embed_primary(pr, g, p1, p2);
            const PhasePoint b = embed_primary(pr, g, p1 + 1e-8, p2 - 1e-8);
            const TangencyResult ta = solve_tangency(pr, general_solution(pr, a), a);
            const TangencyResult tb = solve_tangency(pr, general_solution(pr, b), b);
            REQUIRE(ta.outcome == tb.outcome);
            REQUIRE(ta.rank == tb.rank);
        }
    }
    SECTION("shifted spherical case: the tangency system pins both gauge functions") {
        Vec tauv = Vec::Zero(3), xi = Vec::Zero(3);
        tauv(2) = 0.5;
        xi(2) = 0.8;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.0), Potential::none());
        const PhasePoint p = embed_primary(pr, rng.su2_element(), 0.0, 0.0);  // pi' = (0,0,1/tau)
        const TangencyResult t = solve_tangency(pr, general_solution(pr, p), p);
        REQUIRE(t.outcome == TangencyOutcome::Determined);
        REQUIRE(t.rank == 2);
        REQUIRE(t.zeta.cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("constraint-tower analysis") {
    Rng rng(7407);

    SECTION("free kinetic tower: secondary equals primary, gauge dimension 2") {
        const GnhProblem pr = free_spherical(0.5, 1.0);
        const GnhReport r = run_analysis(pr, pr.group().identity(), 0.0, 0.0);
        REQUIRE(r.locus == LocusKind::AllOfPrimary);
        REQUIRE(r.c2_max_sampled == 0.0);
        REQUIRE(r.tangency);
        REQUIRE(r.tangency->outcome == TangencyOutcome::Underdetermined);
        REQUIRE(r.tangency->gauge_dimension == 2);
        REQUIRE(r.levels == 3);
        REQUIRE_FALSE(r.proceed_notice);
    }
    SECTION("spherical with an axis shift: the secondary stratum is the momentum line") {
        Vec tauv = Vec::Zero(3), xi = Vec::Zero(3);
        tauv(2) = 0.5;
        xi(2) = 0.7;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.0), Potential::none());
        const GnhReport r = run_analysis(pr, rng.su2_element(), 1.3, -0.4);
        REQUIRE(r.locus == LocusKind::MomentumPoint);
        REQUIRE(std::abs(r.locus_point(0)) < 1e-10);
        REQUIRE(std::abs(r.locus_point(1)) < 1e-10);
        REQUIRE(r.tangency);
        REQUIRE(r.tangency->outcome == TangencyOutcome::Determined);
    }
    SECTION("heavy-top data terminates within three levels") {
        Vec tauv(3), xi(3), gamma(3), com(3);
        tauv << 0.0, 0.0, 0.6;
        xi << 0.1, 0.0, 0.2;
        gamma << 0.0, 0.0, -2.0;
        com << 0.5, 0.0, 0.4;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.1),
                            Potential::heavy_top(gamma, com));
        const GnhReport r = run_analysis(pr, rng.su2_element(), 0.3, 0.3);
        REQUIRE(r.levels <= 3);
        if (r.tangency) {
            const TangencyOutcome o = r.tangency->outcome;
            REQUIRE((o == TangencyOutcome::Determined || o == TangencyOutcome::Underdetermined ||
                     o == TangencyOutcome::Tertiary));
        }
    }
    SECTION("general tau directions are rotated into the aligned frame") {
        Vec tauv(3);
        tauv << 0.3, -0.4, 1.2;
        Vec xi(3);
        xi << 0.2, 0.1, -0.3;
        const GnhProblem pr(tauv, xi, InertiaTensor::spherical(3, 1.0), Potential::none());
        REQUIRE(pr.tau() == Catch::Approx(tauv.norm()).epsilon(1e-14));
        // the rotation takes tau to the third axis
        const Vec aligned = pr.rotation() * tauv;
        REQUIRE(std::abs(aligned(0)) < 1e-12);
        REQUIRE(std::abs(aligned(1)) < 1e-12);
        REQUIRE(aligned(2) == Catch::Approx(tauv.norm()).epsilon(1e-12));
        // xi rotates covariantly
        REQUIRE((pr.xi() - pr.rotation() * xi).norm() < 1e-14);
        // and the analysis still classifies cleanly
        const GnhReport r = run_analysis(pr, pr.group().identity(), 0.0, 0.0);
        REQUIRE(r.levels >= 2);
    }
}
