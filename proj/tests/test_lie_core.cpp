#include <catch_amalgamated.hpp>

#include "liesym/algebra.hpp"
#include "liesym/group.hpp"
#include "oracles.hpp"

using namespace liesym;
using oracles::Rng;

namespace {

StructureConstants su2_plus_center() {
    // su(2) + a central direction e_4
    std::vector<Mat> f(4, Mat::Zero(4, 4));
    for (int m = 0; m < 3; ++m)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) f[m](a, b) = StructureConstants::levi_civita(m, a, b);
    return StructureConstants(4, std::move(f));
}

} // namespace

TEST_CASE("su2 structure constants") {
    const StructureConstants fc = StructureConstants::su2();

    SECTION("Levi-Civita entries and exact antisymmetry") {
        for (int m = 0; m < 3; ++m)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    REQUIRE(fc.f(m, a, b) == StructureConstants::levi_civita(m, a, b));
                    REQUIRE(fc.f(m, a, b) == -fc.f(m, b, a));
                }
    }
    SECTION("Killing form is -2 delta, entrywise") {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                REQUIRE(fc.killing()(a, b) == (a == b ? -2.0 : 0.0));
        REQUIRE(fc.semisimple());
    }
    SECTION("su2 + center is not semisimple") {
        REQUIRE_FALSE(su2_plus_center().semisimple());
    }
    SECTION("random tensors failing Jacobi are rejected") {
        Rng rng(7001);
        int rejected = 0;
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<Mat> f(3, Mat::Zero(3, 3));
            for (int m = 0; m < 3; ++m)
                for (int a = 0; a < 3; ++a)
                    for (int b = a + 1; b < 3; ++b) {
                        f[m](a, b) = rng.uniform(-1, 1);
                        f[m](b, a) = -f[m](a, b);
                    }
            try {
                StructureConstants bad(3, std::move(f));
            } catch (const std::invalid_argument&) {
                ++rejected;
            }
        }
        REQUIRE(rejected >= 4);  // a random antisymmetric tensor generically violates Jacobi
    }
}

TEST_CASE("bracket and ad/coad") {
    const StructureConstants fc = StructureConstants::su2();
    Rng rng(7002);

    SECTION("[e1,e2] = e3") {
        Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3);
        e1(0) = 1;
        e2(1) = 1;
        const AlgebraVector w = fc.bracket(AlgebraVector(e1), AlgebraVector(e2));
        REQUIRE(w.c(0) == 0.0);
        REQUIRE(w.c(1) == 0.0);
        REQUIRE(w.c(2) == 1.0);
    }
    SECTION("[u,u] = 0") {
        for (int i = 0; i < 20; ++i) {
            const AlgebraVector u(rng.vec(3, -5, 5));
            REQUIRE(fc.bracket(u, u).norm() == 0.0);
        }
    }
    SECTION("bracket equals the cross product on su(2)") {
        Vec u(3), v(3);
        u << 1, 2, 0;
        v << 0, 1, 1;
        const Vec expect = oracles::cross_oracle(u, v);   // (2, -1, 1)
        REQUIRE(expect(0) == 2.0);
        REQUIRE(expect(1) == -1.0);
        REQUIRE(expect(2) == 1.0);
        REQUIRE((fc.bracket(AlgebraVector(u), AlgebraVector(v)).c - expect).norm() == 0.0);
        for (int i = 0; i < 20; ++i) {
            const Vec a = rng.vec(3), b = rng.vec(3);
            REQUIRE((fc.bracket(AlgebraVector(a), AlgebraVector(b)).c -
                     oracles::cross_oracle(a, b))
                        .norm() < 1e-15);
        }
    }
    SECTION("ad(0) = 0 and ad is consistent with the bracket") {
        REQUIRE(fc.ad_matrix(AlgebraVector::zero(3)).norm() == 0.0);
        for (int i = 0; i < 20; ++i) {
            const Vec u = rng.vec(3), v = rng.vec(3);
            const Vec lhs = fc.ad_matrix(AlgebraVector(u)) * v;
            const Vec rhs = fc.bracket(AlgebraVector(u), AlgebraVector(v)).c;
            REQUIRE((lhs - rhs).norm() < 1e-14);
        }
    }
    SECTION("pairing identity <k(u) pi | v> = -<pi | [u,v]>") {
        for (int i = 0; i < 20; ++i) {
            const Vec u = rng.vec(3), v = rng.vec(3), pi = rng.vec(3);
            const double lhs = (fc.coad_matrix(AlgebraVector(u)) * pi).dot(v);
            const double rhs = -pi.dot(fc.bracket(AlgebraVector(u), AlgebraVector(v)).c);
            REQUIRE(lhs == Catch::Approx(rhs).margin(1e-14));
        }
    }
    SECTION("dimension mismatch is rejected") {
        REQUIRE_THROWS_AS(fc.bracket(AlgebraVector::zero(4), AlgebraVector::zero(3)),
                          std::invalid_argument);
    }
}

TEST_CASE("su2 group operations") {
    const LieGroup group = LieGroup::su2();
    Rng rng(7003);

    SECTION("identity and inverse") {
        for (int i = 0; i < 10; ++i) {
            const GroupElement g = rng.su2_element();
            const GroupElement ge = group.compose(g, group.identity());
            REQUIRE((ge.payload() - g.payload()).norm() < 1e-15);
            const GroupElement gg = group.compose(g, group.inverse(g));
            REQUIRE(std::abs(gg.w() - 1.0) < 1e-14);
            REQUIRE(gg.vec3().norm() < 1e-14);
        }
    }
    SECTION("renormalization projects drifted quaternions back to the sphere") {
        GroupElement g = rng.su2_element();
        g.payload() *= 1.0 + 3e-13;
        g.renormalize();
        REQUIRE(std::abs(g.payload().norm() - 1.0) < 1e-15);
    }
    SECTION("quaternion product oracle: i*j = k") {
        const GroupElement gi = GroupElement::su2(0, 1, 0, 0);
        const GroupElement gj = GroupElement::su2(0, 0, 1, 0);
        const GroupElement gk = group.compose(gi, gj);
        REQUIRE(gk.payload()(3) == 1.0);
        REQUIRE(gk.payload().head(3).norm() == 0.0);
        for (int i = 0; i < 20; ++i) {
            const Eigen::Vector4d a = rng.unit_quaternion(), b = rng.unit_quaternion();
            const GroupElement ga(Realization::Su2Quaternion, a);
            const GroupElement gb(Realization::Su2Quaternion, b);
            REQUIRE((group.compose(ga, gb).payload() - Vec(oracles::quat_mul(a, b))).norm() <
                    1e-15);
        }
    }
    SECTION("exp matches the dense matrix exponential in the defining representation") {
        REQUIRE((group.exp(AlgebraVector::zero(3)).payload() -
                 group.identity().payload())
                    .norm() == 0.0);
        for (int i = 0; i < 25; ++i) {
            const Vec u = rng.vec(3, -2.0, 2.0);
            const oracles::C2 expect = oracles::expm_series(oracles::algebra_to_su2(u));
            const oracles::C2 got = oracles::quat_to_su2(group.exp(AlgebraVector(u)).payload());
            REQUIRE((expect - got).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
    SECTION("exp(u) exp(-u) = e") {
        for (int i = 0; i < 20; ++i) {
            const Vec u = rng.vec(3, -3, 3);
            const GroupElement g = group.compose(group.exp(AlgebraVector(u)),
                                                 group.exp(AlgebraVector(Vec(-u))));
            REQUIRE(std::abs(g.w() - 1.0) < 1e-14);
        }
    }
    SECTION("log inverts exp inside the injectivity radius") {
        for (int i = 0; i < 50; ++i) {
            Vec u = rng.vec(3, -1, 1);
            u *= rng.uniform(0.0, 3.1) / std::max(u.norm(), 1e-12);
            REQUIRE((group.log(group.exp(AlgebraVector(u))).c - u).norm() < 1e-10);
        }
    }
    SECTION("log rejects the antipode") {
        REQUIRE_THROWS_AS(group.log(GroupElement::su2(-1, 0, 0, 0)), std::domain_error);
    }
}

TEST_CASE("body velocity and frames") {
    const LieGroup group = LieGroup::su2();
    Rng rng(7004);

    SECTION("identity chart: Omega = 2 * vector part of gdot") {
        Vec omega(3);
        omega << 0.4, -0.2, 1.1;
        const Vec gdot = group.group_rate(group.identity(), AlgebraVector(omega));
        const AlgebraVector back = group.body_velocity(group.identity(), gdot);
        REQUIRE((back.c - omega).norm() < 1e-14);
        // at e the quaternion rate is (0, Omega/2)
        REQUIRE(gdot(0) == 0.0);
        REQUIRE((2.0 * gdot.segment(1, 3) - omega).norm() < 1e-15);
    }
    SECTION("curve exp(t u) has body velocity u for all t (finite differences)") {
        for (int i = 0; i < 10; ++i) {
            const Vec u = rng.vec(3, -1.5, 1.5);
            const double t = rng.uniform(0.1, 1.5);
            const double h = 1e-6;
            const Vec qp = group.exp(AlgebraVector(Vec((t + h) * u))).payload();
            const Vec qm = group.exp(AlgebraVector(Vec((t - h) * u))).payload();
            Vec gdot = (qp - qm) / (2 * h);
            const GroupElement g = group.exp(AlgebraVector(Vec(t * u)));
            // remove the tiny normal component the difference quotient leaves
            gdot -= g.payload() * g.payload().dot(gdot);
            const AlgebraVector omega = group.body_velocity(g, gdot);
            REQUIRE((omega.c - u).norm() < 1e-8);
        }
    }
    SECTION("body_velocity rejects non-tangent rates") {
        const GroupElement g = rng.su2_element();
        REQUIRE_THROWS_AS(group.body_velocity(g, Vec(g.payload())), std::invalid_argument);
    }
    SECTION("body_velocity o group_rate = identity") {
        for (int i = 0; i < 20; ++i) {
            const GroupElement g = rng.su2_element();
            const Vec omega = rng.vec(3, -2, 2);
            const Vec gdot = group.group_rate(g, AlgebraVector(omega));
            REQUIRE((group.body_velocity(g, gdot).c - omega).norm() < 1e-10);
        }
    }
    SECTION("group commutator reproduces the structure constants") {
        // log(exp(t e_a) exp(t e_b) exp(-t e_a) exp(-t e_b)) / t^2 -> [e_a, e_b],
        // Richardson-extrapolated in t to kill the cubic term
        const StructureConstants& fc = group.algebra();
        const auto commutator_estimate = [&](int a, int b, double t) {
            Vec ea = Vec::Zero(3), eb = Vec::Zero(3);
            ea(a) = t;
            eb(b) = t;
            const GroupElement c = group.compose(
                group.compose(group.exp(AlgebraVector(ea)), group.exp(AlgebraVector(eb))),
                group.compose(group.exp(AlgebraVector(Vec(-ea))),
                              group.exp(AlgebraVector(Vec(-eb)))));
            return Vec(group.log(c).c / (t * t));
        };
        const double t = 1e-4;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const Vec approx = 2.0 * commutator_estimate(a, b, t / 2) -
                                   commutator_estimate(a, b, t);
                for (int m = 0; m < 3; ++m)
                    REQUIRE(approx(m) == Catch::Approx(fc.f(m, a, b)).margin(1e-6));
            }
    }
    SECTION("frame matrix matches finite differences of log(g exp(t e_a))") {
        for (int i = 0; i < 10; ++i) {
            Vec u = rng.vec(3, -1, 1);
            const GroupElement g = group.exp(AlgebraVector(u));
            const Mat L = group.frame_matrix(g);
            const double h = 1e-6;
            for (int a = 0; a < 3; ++a) {
                Vec dir = Vec::Zero(3);
                dir(a) = h;
                const Vec up = group.log(group.compose(g, group.exp(AlgebraVector(dir)))).c;
                const Vec um = group.log(group.compose(g, group.exp(AlgebraVector(Vec(-dir))))).c;
                const Vec col = (up - um) / (2 * h);
                REQUIRE((col - L.col(a)).norm() < 1e-8);
            }
            // coframe is the exact inverse
            REQUIRE((group.coframe_matrix(g) * L - Mat::Identity(3, 3)).norm() < 1e-12);
        }
    }
}

TEST_CASE("adjoint and coadjoint representations") {
    const LieGroup group = LieGroup::su2();
    const StructureConstants& fc = group.algebra();
    Rng rng(7005);

    SECTION("Ad(e) = identity") {
        REQUIRE((group.adjoint(group.identity()) - Mat::Identity(3, 3)).norm() == 0.0);
    }
    SECTION("Ad(exp(theta e3)) is the rotation by theta about axis 3") {
        for (double theta : {0.3, 1.2, 2.5}) {
            Vec u = Vec::Zero(3);
            u(2) = theta;
            const Mat ad_oracle = oracles::expm_series(Mat(fc.ad_matrix(AlgebraVector(u))));
            const Mat got = group.adjoint(group.exp(AlgebraVector(u)));
            REQUIRE((ad_oracle - got).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE(got(2, 2) == Catch::Approx(1.0).margin(1e-14));
            REQUIRE(got(0, 0) == Catch::Approx(std::cos(theta)).margin(1e-12));
        }
    }
    SECTION("duality <K(g) pi | Ad(g) u> = <pi | u>") {
        for (int i = 0; i < 20; ++i) {
            const GroupElement g = rng.su2_element();
            const Vec pi = rng.vec(3), u = rng.vec(3);
            const double lhs = (group.coadjoint(g) * pi).dot(group.adjoint(g) * u);
            REQUIRE(lhs == Catch::Approx(pi.dot(u)).margin(1e-12));
        }
    }
    SECTION("Ad(g h) = Ad(g) Ad(h)") {
        for (int i = 0; i < 20; ++i) {
            const GroupElement g = rng.su2_element(), h = rng.su2_element();
            const Mat lhs = group.adjoint(group.compose(g, h));
            const Mat rhs = group.adjoint(g) * group.adjoint(h);
            REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("chart conversions") {
    const LieGroup group = LieGroup::su2();
    Rng rng(7006);

    SECTION("all charts agree at the identity") {
        Vec p = rng.vec(3);
        const ChartPoint hol{Chart::Holonomic, group.identity(), p};
        REQUIRE((group.convert(hol, Chart::Body).momentum - p).norm() < 1e-14);
        REQUIRE((group.convert(hol, Chart::Space).momentum - p).norm() < 1e-14);
    }
    SECTION("round trips are the identity") {
        for (int i = 0; i < 20; ++i) {
            Vec u = rng.vec(3, -1.2, 1.2);
            const GroupElement g = group.exp(AlgebraVector(u));
            const Vec pi = rng.vec(3, -2, 2);
            const ChartPoint body{Chart::Body, g, pi};
            const ChartPoint space = group.convert(body, Chart::Space);
            REQUIRE((group.convert(space, Chart::Body).momentum - pi).norm() < 1e-10);
            const ChartPoint hol = group.convert(body, Chart::Holonomic);
            REQUIRE((group.convert(hol, Chart::Body).momentum - pi).norm() < 1e-10);
        }
    }
    SECTION("space momentum equals K(g) pi_L computed independently") {
        for (int i = 0; i < 20; ++i) {
            const GroupElement g = rng.su2_element();
            const Vec pi = rng.vec(3);
            const ChartPoint body{Chart::Body, g, pi};
            const Vec expect = group.coadjoint(g) * pi;
            REQUIRE((group.convert(body, Chart::Space).momentum - expect).norm() < 1e-13);
        }
    }
    SECTION("generic realization rejects the holonomic chart") {
        const LieGroup gen = LieGroup::generic(StructureConstants::su2());
        const ChartPoint p{Chart::Holonomic, gen.identity(), Vec::Zero(3)};
        REQUIRE_THROWS_AS(gen.convert(p, Chart::Body), UnsupportedOperation);
    }
}

TEST_CASE("generic realization near identity") {
    const LieGroup gen = LieGroup::generic(StructureConstants::su2());
    const LieGroup exact = LieGroup::su2();
    Rng rng(7007);

    SECTION("BCH composition is exact for commuting arguments") {
        const Vec u = rng.vec(3, -0.5, 0.5);
        const GroupElement g = gen.compose(gen.exp(AlgebraVector(u)),
                                           gen.exp(AlgebraVector(Vec(-u))));
        REQUIRE(g.payload().norm() == 0.0);
    }
    SECTION("composition agrees with the exact group law to BCH-4 accuracy") {
        for (int i = 0; i < 10; ++i) {
            const Vec u = rng.vec(3, -0.1, 0.1), v = rng.vec(3, -0.1, 0.1);
            const Vec approx = gen.log(gen.compose(gen.exp(AlgebraVector(u)),
                                                   gen.exp(AlgebraVector(v)))).c;
            const Vec truth = exact.log(exact.compose(exact.exp(AlgebraVector(u)),
                                                      exact.exp(AlgebraVector(v)))).c;
            REQUIRE((approx - truth).norm() < 5e-7);  // order-5 remainder at |u| ~ 0.1
        }
    }
    SECTION("adjoint via the matrix exponential matches the exact rotation") {
        for (int i = 0; i < 10; ++i) {
            const Vec u = rng.vec(3, -1, 1);
            const Mat lhs = gen.adjoint(gen.exp(AlgebraVector(u)));
            const Mat rhs = exact.adjoint(exact.exp(AlgebraVector(u)));
            REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}
